//! `xlit` command line: `translit`, `eval`, `build-lm` and `serve`.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data errors
//! (unreadable or malformed input files).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use xlit_core::eval::{self, ReportFormat};
use xlit_core::{ColumnOrder, EvalReport, NgramModel, Pipeline, PipelineConfig, PipelineError, TransliterateOptions};

use crate::service::{self, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "xlit", version, about = "Romanized Indo-Aryan to native script transliteration")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transliterate text given as arguments, or stdin line by line.
    Translit(TranslitArgs),
    /// Score hypotheses against a reference test set (WER, CER, BLEU).
    Eval(EvalArgs),
    /// Train an n-gram model from a native-script corpus, one sentence per line.
    BuildLm(BuildLmArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct ResourceArgs {
    /// Pipeline config file (key = value).
    #[arg(long, env = "XLIT_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// n-gram model written by `build-lm`.
    #[arg(long)]
    lm: Option<PathBuf>,
    /// Lexicon and test files use the Dakshina `native<TAB>roman` order.
    #[arg(long)]
    dakshina_columns: bool,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    max_combinations: Option<usize>,
    /// Base URL of an external sentence scorer (`POST /score`).
    #[arg(long)]
    scorer_url: Option<String>,
    #[arg(long)]
    scorer_timeout_ms: Option<u64>,
}

impl ResourceArgs {
    fn column_order(&self) -> ColumnOrder {
        if self.dakshina_columns {
            ColumnOrder::NativeFirst
        } else {
            ColumnOrder::RomanFirst
        }
    }

    fn pipeline_config(&self) -> Result<PipelineConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::from_file(path).map_err(CliError::data)?,
            None => PipelineConfig::default(),
        };
        if self.rules.is_some() {
            config.rules = self.rules.clone();
        }
        if self.lexicon.is_some() {
            config.lexicon = self.lexicon.clone();
        }
        if self.lm.is_some() {
            config.lm = self.lm.clone();
        }
        if self.dakshina_columns {
            config.lexicon_columns = ColumnOrder::NativeFirst;
        }
        if let Some(k) = self.top_k {
            config.top_k = k;
        }
        if let Some(m) = self.max_combinations {
            config.max_combinations = m;
        }
        if self.scorer_url.is_some() {
            config.scorer_url = self.scorer_url.clone();
        }
        if let Some(ms) = self.scorer_timeout_ms {
            config.scorer_timeout = Duration::from_millis(ms);
        }
        if config.top_k == 0 || config.max_combinations == 0 {
            return Err(CliError::Usage("--top-k and --max-combinations must be positive".into()));
        }
        if config.rules.is_none() && config.lexicon.is_none() {
            return Err(CliError::Usage(
                "no resources: pass --rules and/or --lexicon, or --config".into(),
            ));
        }
        Ok(config)
    }

    fn pipeline(&self) -> Result<Pipeline, CliError> {
        load_pipeline(&self.pipeline_config()?)
    }
}

fn load_pipeline(config: &PipelineConfig) -> Result<Pipeline, CliError> {
    Pipeline::from_config(config).map_err(|e| match e {
        PipelineError::ConfigMissing(_) => CliError::Usage(e.to_string()),
        other => CliError::data(other),
    })
}

#[derive(Debug, Args)]
struct TranslitArgs {
    #[command(flatten)]
    resources: ResourceArgs,
    /// Treat the last word as still being typed.
    #[arg(long)]
    prefix: bool,
    /// Print the full result (candidates, scores, latency) as JSON lines.
    #[arg(long)]
    json: bool,
    text: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Test set TSV (roman, native); repeat for several test sets.
    #[arg(long, required = true)]
    refs: Vec<PathBuf>,
    /// Hypotheses, one per line, aligned with --refs. Without it the
    /// hypotheses are produced by the configured pipeline.
    #[arg(long)]
    hyps: Vec<PathBuf>,
    /// System name; "Team / Model" fills both report columns.
    #[arg(long, default_value = "xlit")]
    system: String,
    /// Test set names, aligned with --refs (default "Test 1", "Test 2", ...).
    #[arg(long)]
    test_set: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Debug, Args)]
struct BuildLmArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = xlit_core::ngram::DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = xlit_core::ngram::DEFAULT_BACKOFF)]
    backoff: f64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[command(flatten)]
    resources: ResourceArgs,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, default_value_t = service::DEFAULT_PORT)]
    port: u16,
    #[arg(long, default_value_t = service::DEFAULT_TIMEOUT.as_millis() as u64)]
    timeout_ms: u64,
    #[arg(long, default_value_t = service::DEFAULT_MAX_BODY_BYTES)]
    max_body_bytes: usize,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl CliError {
    fn data(e: impl Into<anyhow::Error>) -> Self {
        CliError::Data(e.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.into())
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(CliError::Data)
}

fn translit(args: TranslitArgs) -> Result<(), CliError> {
    let pipeline = args.resources.pipeline()?;
    let options = TransliterateOptions {
        prefix_mode: args.prefix,
        top_k: None,
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut emit = |line: &str| -> Result<(), CliError> {
        let result = pipeline.transliterate(line, options).map_err(CliError::data)?;
        if args.json {
            serde_json::to_writer(&mut out, &result).map_err(CliError::data)?;
            writeln!(out)?;
        } else {
            writeln!(out, "{}", result.output)?;
        }
        Ok(())
    };
    if args.text.is_empty() {
        for line in io::stdin().lock().lines() {
            emit(&line?)?;
        }
    } else {
        emit(&args.text.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<(), CliError> {
    if !args.hyps.is_empty() && args.hyps.len() != args.refs.len() {
        return Err(CliError::Usage("give one --hyps file per --refs file".into()));
    }
    if !args.test_set.is_empty() && args.test_set.len() != args.refs.len() {
        return Err(CliError::Usage("give one --test-set name per --refs file".into()));
    }
    let order = args.resources.column_order();
    let pipeline = if args.hyps.is_empty() {
        Some(args.resources.pipeline()?)
    } else {
        None
    };
    let mut report = EvalReport::default();
    for (i, refs) in args.refs.iter().enumerate() {
        let pairs = eval::load_pairs(open(refs)?, order)
            .with_context(|| format!("reading {}", refs.display()))
            .map_err(CliError::Data)?;
        let hypotheses = match &pipeline {
            None => eval::load_hypotheses(open(&args.hyps[i])?)
                .with_context(|| format!("reading {}", args.hyps[i].display()))
                .map_err(CliError::Data)?,
            Some(p) => pairs
                .iter()
                .map(|pair| p.transliterate_sentence(&pair.source).map(|r| r.output))
                .collect::<Result<_, _>>()
                .map_err(CliError::data)?,
        };
        let name = args
            .test_set
            .get(i)
            .cloned()
            .unwrap_or_else(|| format!("Test {}", i + 1));
        let row = eval::evaluate(&args.system, &hypotheses, &pairs, &name).map_err(CliError::data)?;
        report.rows.push(row);
    }
    let format = match args.format {
        FormatArg::Text => ReportFormat::Text,
        FormatArg::Json => ReportFormat::Json,
    };
    let rendered = eval::render_report(&report, format);
    let mut out = io::stdout().lock();
    write!(out, "{rendered}")?;
    if !rendered.ends_with('\n') {
        writeln!(out)?;
    }
    Ok(())
}

fn build_lm(args: BuildLmArgs) -> Result<(), CliError> {
    if args.order == 0 {
        return Err(CliError::Usage("--order must be at least 1".into()));
    }
    if !(args.backoff > 0.0 && args.backoff <= 1.0) {
        return Err(CliError::Usage("--backoff must be in (0, 1]".into()));
    }
    let corpus: Vec<String> = io::BufReader::new(open(&args.corpus)?)
        .lines()
        .collect::<Result<_, _>>()?;
    let model = NgramModel::train_with_backoff(&corpus, args.order, args.backoff).map_err(CliError::data)?;
    let file = File::create(&args.output)
        .with_context(|| format!("cannot create {}", args.output.display()))
        .map_err(CliError::Data)?;
    model.save(BufWriter::new(file)).map_err(CliError::data)?;
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    if args.port == 0 {
        return Err(CliError::Usage("--port must be in 1..=65535".into()));
    }
    if args.timeout_ms == 0 {
        return Err(CliError::Usage("--timeout-ms must be positive".into()));
    }
    let pipeline_config = args.resources.pipeline_config()?;
    let config = ServiceConfig {
        addr: SocketAddr::new(args.host, args.port),
        pipeline_config: args.resources.config.clone(),
        request_timeout: Duration::from_millis(args.timeout_ms),
        max_body_bytes: args.max_body_bytes,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime
        .block_on(service::run(config, move || Pipeline::from_config(&pipeline_config)))
        .map_err(CliError::Data)
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Translit(a) => translit(a),
        Command::Eval(a) => run_eval(a),
        Command::BuildLm(a) => build_lm(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            match &err {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Data(e) => eprintln!("error: {e:#}"),
            }
            err.exit_code()
        }
    }
}
