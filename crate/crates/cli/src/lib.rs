//! Command line tool and HTTP service around `xlit-core`.

pub mod cli;
pub mod service;
