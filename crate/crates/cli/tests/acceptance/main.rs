//! End-to-end acceptance checks. Runs with a custom harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.


use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::Value;
use tokio::sync::oneshot;
use xlit::service::{self, AppState};
use xlit_core::disambiguate::select;
use xlit_core::eval::{self, render_report};
use xlit_core::lexicon::skeleton;
use xlit_core::text::{normalize, tokenize};
use xlit_core::{
    CandidateLattice, EvalReport, Lexicon, NgramModel, Pipeline, ReportFormat, ReportRow, RuleTable, ScorerError,
    SentenceScorer, Slot, TokenKind,
};

use fixtures::Fixture;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    // Ignore libtest-style arguments; this target always runs everything.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, &str, Check); 10] = [
        ("AC1", "edit distance matches a recursive oracle", ac1_edit_distance),
        ("AC2", "corpus BLEU matches a reference implementation", ac2_bleu),
        ("AC3", "rule engine matches the greedy longest-match oracle", ac3_rules),
        ("AC4", "lexicon recall and context-driven choice", ac4_lexicon_lm),
        ("AC5", "skeleton queries recover the native word", ac5_skeleton),
        ("AC6", "disambiguation equals brute-force argmax", ac6_disambiguation),
        ("AC7", "passthrough tokens survive unchanged", ac7_passthrough),
        ("AC8", "report reproduces the published row", ac8_report),
        ("AC9", "service latency under load", ac9_latency),
        ("AC10", "language model save/load is bit-identical", ac10_lm_round_trip),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id:<5} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:<5} {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {} failed", 10 - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn demo_rules() -> RuleTable {
    RuleTable::from_reader(std::fs::File::open(data_dir().join("rules.tsv")).unwrap()).unwrap()
}

fn all_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for &c in alphabet {
                next.push(format!("{s}{c}"));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn ac1_edit_distance() -> Result<String, String> {
    let start = Instant::now();
    let alphabet = ['a', 'b', 'c'];
    let short = all_strings(&alphabet, 4);
    let mut pairs: Vec<(String, String)> = Vec::new();
    for a in &short {
        for b in &short {
            pairs.push((a.clone(), b.clone()));
        }
    }
    let mut r = rng(1);
    let random = |r: &mut StdRng| -> String {
        let n = r.gen_range(5..=6);
        (0..n).map(|_| *alphabet.choose(r).unwrap()).collect()
    };
    for _ in 0..10_000 {
        pairs.push((random(&mut r), random(&mut r)));
    }
    for (a, b) in &pairs {
        let ca: Vec<char> = a.chars().collect();
        let cb: Vec<char> = b.chars().collect();
        let expected = oracles::edit_distance(&ca, &cb);
        let got = eval::char_edits(a, b);
        ensure(got.edits == expected && got.reference_len == ca.len(), || {
            format!("char distance {a:?} -> {b:?}: got {}, oracle {expected}", got.edits)
        })?;
        // Same strings as word sequences.
        let wa = a.chars().map(String::from).collect::<Vec<_>>().join(" ");
        let wb = b.chars().map(String::from).collect::<Vec<_>>().join(" ");
        let got = eval::word_edits(&wa, &wb);
        ensure(got.edits == expected, || format!("word distance {wa:?} -> {wb:?}: got {}, oracle {expected}", got.edits))?;
        if !a.is_empty() {
            let rate = eval::cer(a, b).map_err(|e| e.to_string())?;
            ensure(rate == expected as f64 / ca.len() as f64, || format!("cer {a:?} {b:?} = {rate}"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} pairs agree", pairs.len()))
}

fn ac2_bleu() -> Result<String, String> {
    let vocab = ["a", "b", "c", "d", "e"];
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for corpus in 0..100 {
        let n_pairs = r.gen_range(1..=10);
        let sentence = |r: &mut StdRng, min: usize| -> String {
            let n = r.gen_range(min..=8);
            (0..n).map(|_| *vocab.choose(r).unwrap()).collect::<Vec<_>>().join(" ")
        };
        let pairs: Vec<(String, String)> = (0..n_pairs).map(|_| (sentence(&mut r, 1), sentence(&mut r, 0))).collect();
        let got = eval::bleu(&pairs).map_err(|e| e.to_string())?;
        let expected = oracles::bleu(&pairs);
        let diff = (got - expected).abs();
        worst = worst.max(diff);
        ensure(diff <= 1e-9, || format!("corpus {corpus}: {got} vs oracle {expected}"))?;

        let identity: Vec<(String, String)> = pairs.iter().map(|(r, _)| (r.clone(), r.clone())).collect();
        let id = eval::bleu(&identity).map_err(|e| e.to_string())?;
        ensure(id == 1.0, || format!("identity corpus {corpus} scored {id}"))?;
        let empty: Vec<(String, String)> = pairs.iter().map(|(r, _)| (r.clone(), String::new())).collect();
        let zero = eval::bleu(&empty).map_err(|e| e.to_string())?;
        ensure(zero == 0.0, || format!("empty hypotheses in corpus {corpus} scored {zero}"))?;
    }
    Ok(format!("100 corpora, max |diff| {worst:.2e}; identity 1.0, empty 0.0"))
}

fn ac3_rules() -> Result<String, String> {
    let mut r = rng(3);
    let keys_alpha = ['a', 'b', 'c', 'd'];
    let word_alpha = ['a', 'b', 'c', 'd', 'e'];
    let cases = 10_000;
    for case in 0..cases {
        let mut rules: HashMap<String, String> = HashMap::new();
        for _ in 0..r.gen_range(1..=20) {
            let len = r.gen_range(1..=3);
            let key: String = (0..len).map(|_| *keys_alpha.choose(&mut r).unwrap()).collect();
            let value: String = (0..r.gen_range(1..=3)).map(|_| r.gen_range('P'..='Z')).collect();
            rules.insert(key, value);
        }
        let table = RuleTable::new(rules.iter().map(|(k, v)| (k.as_str(), v.as_str()))).map_err(|e| e.to_string())?;
        let word: Vec<char> = (0..r.gen_range(0..=8)).map(|_| *word_alpha.choose(&mut r).unwrap()).collect();
        let text: String = word.iter().collect();
        let got = table.transliterate_word(&text);
        let expected = oracles::greedy(&rules, &word);
        ensure(got == expected, || format!("case {case}: {text:?} gave {got:?}, oracle {expected:?}"))?;
    }
    Ok(format!("{cases} random tables and words agree"))
}

/// The 1,000-entry fixture: 800 single-native keys and 100 two-way keys.
fn small_fixture() -> Fixture {
    Fixture::generate(&mut rng(4), 800, 100, 4, Some(4))
}

fn ac4_lexicon_lm() -> Result<String, String> {
    let fx = small_fixture();
    let lexicon = Lexicon::build(fx.entries()).map_err(|e| e.to_string())?;
    ensure(lexicon.len() == 1000, || format!("fixture has {} entries", lexicon.len()))?;

    // Each ambiguous key gets two private contexts: one attested with the
    // rarer native, one with the more frequent native.
    let mut corpus: Vec<String> = fx.unambiguous.iter().map(|(_, n)| n.clone()).collect();
    let mut queries: Vec<(String, String)> = Vec::new();
    for (i, (key, frequent, rare)) in fx.ambiguous.iter().enumerate() {
        let (rare_ctx_key, rare_ctx) = &fx.unambiguous[2 * i];
        let (freq_ctx_key, freq_ctx) = &fx.unambiguous[2 * i + 1];
        for _ in 0..3 {
            corpus.push(format!("{rare_ctx} {rare}"));
            corpus.push(format!("{freq_ctx} {frequent}"));
        }
        queries.push((format!("{rare_ctx_key} {key}"), format!("{rare_ctx} {rare}")));
        queries.push((format!("{freq_ctx_key} {key}"), format!("{freq_ctx} {frequent}")));
    }
    let lm = NgramModel::train(&corpus, 3).map_err(|e| e.to_string())?;
    let pipeline = Pipeline::builder().lexicon(lexicon).language_model(lm).build().map_err(|e| e.to_string())?;

    for (roman, native) in fx.pairs() {
        let res = pipeline.transliterate_sentence(roman).map_err(|e| e.to_string())?;
        let slot = &res.slots[0];
        ensure(slot.candidates.iter().any(|c| c.text == native), || format!("{roman}: {native} not among candidates"))?;
    }

    for (roman, native) in &fx.unambiguous {
        let out = pipeline.transliterate_sentence(roman).map_err(|e| e.to_string())?.output;
        ensure(&out == native, || format!("{roman}: chose {out}, expected {native}"))?;
    }

    let mut correct = 0;
    for (query, expected) in &queries {
        if pipeline.transliterate_sentence(query).map_err(|e| e.to_string())?.output == *expected {
            correct += 1;
        }
    }
    let accuracy = correct as f64 / queries.len() as f64;
    ensure(accuracy >= 0.9, || format!("ambiguous accuracy {accuracy:.3}"))?;
    Ok(format!(
        "recall 1000/1000, unambiguous 800/800, ambiguous {correct}/{} ({:.1}%)",
        queries.len(),
        accuracy * 100.0
    ))
}

fn ac5_skeleton() -> Result<String, String> {
    let fx = small_fixture();
    let lexicon = Lexicon::build(fx.entries()).map_err(|e| e.to_string())?;
    let pipeline = Pipeline::builder().lexicon(lexicon.clone()).build().map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (roman, native) in fx.pairs() {
        let query = skeleton(roman);
        ensure(lexicon.lookup_exact(&query).is_none(), || format!("skeleton {query} is itself a key"))?;
        let set = lexicon.lookup(&query).ok_or_else(|| format!("{query}: no candidates"))?;
        ensure(set.natives().any(|n| n == native), || format!("{query}: lexicon lookup misses {native}"))?;
        let res = pipeline.transliterate_sentence(&query).map_err(|e| e.to_string())?;
        ensure(res.slots[0].candidates.iter().any(|c| c.text == native), || {
            format!("{query}: pipeline candidates miss {native}")
        })?;
        checked += 1;
    }
    Ok(format!("{checked}/{checked} skeleton queries list the gold native"))
}

struct TableScorer {
    scores: HashMap<String, f64>,
    calls: AtomicUsize,
}

impl SentenceScorer for TableScorer {
    fn context_window(&self) -> Option<usize> {
        None
    }

    fn score_batch(&self, batch: &[Vec<&str>], _complete: bool) -> Result<Vec<f64>, ScorerError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(batch.iter().map(|s| self.scores.get(&s.join(" ")).copied().unwrap_or(0.0)).collect())
    }
}

fn index_vectors(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}

fn ac6_disambiguation() -> Result<String, String> {
    let mut r = rng(6);
    let mut ties = 0;
    for case in 0..500 {
        let n_words = r.gen_range(1..=5);
        let mut ambiguous_left = r.gen_range(0..=3);
        let mut slots = Vec::new();
        for w in 0..n_words {
            if w > 0 {
                slots.push(Slot::passthrough(slots.len(), " "));
            }
            let n = if ambiguous_left > 0 && r.gen_bool(0.7) {
                ambiguous_left -= 1;
                r.gen_range(2..=3)
            } else {
                1
            };
            slots.push(Slot::word(slots.len(), (0..n).map(|c| format!("w{w}c{c}")).collect()));
        }
        let lattice = CandidateLattice::new(slots);
        let sizes: Vec<usize> = lattice.slots.iter().map(|s| s.candidates.len()).collect();
        let words: Vec<usize> = (0..lattice.slots.len()).filter(|&i| lattice.slots[i].is_word()).collect();
        let sentence = |v: &[usize]| -> String {
            words.iter().map(|&i| lattice.slots[i].candidates[v[i]].as_str()).collect::<Vec<_>>().join(" ")
        };
        // Integer scores so ties are common and exact.
        let vectors = index_vectors(&sizes);
        let scores: HashMap<String, f64> =
            vectors.iter().map(|v| (sentence(v), -(r.gen_range(0..4) as f64))).collect();

        let mut best = &vectors[0];
        for v in &vectors {
            if scores[&sentence(v)] > scores[&sentence(best)] {
                best = v;
            }
        }
        if vectors.iter().filter(|v| scores[&sentence(v)] == scores[&sentence(best)]).count() > 1 {
            ties += 1;
        }

        let scorer = TableScorer { scores: scores.clone(), calls: AtomicUsize::new(0) };
        let got = select(&lattice, Some(&scorer), 256).map_err(|e| e.to_string())?;
        ensure(&got.assignment == best, || format!("case {case}: got {:?}, brute force {best:?}", got.assignment))?;
        let expected_calls = usize::from(vectors.len() > 1);
        ensure(scorer.calls.load(Ordering::Relaxed) == expected_calls, || format!("case {case}: scorer call count"))?;

        let (scale, offset) = (r.gen_range(0.5..4.0), r.gen_range(-50.0..50.0));
        let shifted = TableScorer {
            scores: scores.iter().map(|(k, v)| (k.clone(), v * scale + offset)).collect(),
            calls: AtomicUsize::new(0),
        };
        let again = select(&lattice, Some(&shifted), 256).map_err(|e| e.to_string())?;
        ensure(again.assignment == got.assignment, || format!("case {case}: changed under affine transform"))?;
    }
    Ok(format!("500 lattices agree ({ties} with tied maxima), affine-invariant"))
}

fn ac7_passthrough() -> Result<String, String> {
    let fx = small_fixture();
    let mut corpus: Vec<String> = fx.unambiguous.iter().map(|(_, n)| n.clone()).collect();
    corpus.extend(fx.ambiguous.iter().map(|(_, a, b)| format!("{a} {b}")));
    let pipeline = Pipeline::builder()
        .rules(demo_rules())
        .lexicon(Lexicon::build(fx.entries()).map_err(|e| e.to_string())?)
        .language_model(NgramModel::train(&corpus, 3).map_err(|e| e.to_string())?)
        .build()
        .map_err(|e| e.to_string())?;

    let pairs = fx.pairs();
    let punct = [".", ",", "!", "?", "...", " - ", "(", ")", "\"", ":", " 😀 ", "#", "%"];
    let mut r = rng(7);
    for case in 0..1000 {
        let mut raw = String::new();
        for i in 0..r.gen_range(1..=12) {
            if i > 0 {
                raw.push_str(if r.gen_bool(0.1) { "  " } else { " " });
            }
            match r.gen_range(0..10) {
                0..=5 => {
                    let key = pairs.choose(&mut r).unwrap().0;
                    if r.gen_bool(0.2) {
                        raw.push_str(&key.to_uppercase());
                    } else {
                        raw.push_str(key);
                    }
                }
                6 => raw.push_str(&skeleton(pairs.choose(&mut r).unwrap().0)),
                7 => raw.push_str(&r.gen_range(0..100_000).to_string()),
                _ => raw.extend((0..r.gen_range(2..=6)).map(|_| r.gen_range('a'..='z'))),
            }
            if r.gen_bool(0.3) {
                raw.push_str(punct.choose(&mut r).unwrap());
            }
        }
        let input_pass: Vec<String> = tokenize(&normalize(&raw))
            .into_iter()
            .filter(|t| t.kind == TokenKind::Passthrough)
            .map(|t| t.surface)
            .collect();
        let res = pipeline.transliterate_sentence(&raw).map_err(|e| e.to_string())?;
        let output_pass: Vec<String> = tokenize(&xlit_core::text::normalize_native(&res.output))
            .into_iter()
            .filter(|t| t.kind == TokenKind::Passthrough)
            .map(|t| t.surface)
            .collect();
        ensure(input_pass == output_pass, || {
            format!("case {case}: {raw:?} -> {:?}: {input_pass:?} vs {output_pass:?}", res.output)
        })?;
        let slot_pass: Vec<&str> =
            res.slots.iter().filter(|s| s.kind == TokenKind::Passthrough).map(|s| s.chosen()).collect();
        ensure(slot_pass == input_pass, || format!("case {case}: passthrough slots differ"))?;
    }
    Ok("1000 sentences keep every passthrough token in order".into())
}

fn ac8_report() -> Result<String, String> {
    let report = EvalReport {
        rows: vec![ReportRow {
            system: "Team Vectora / Finetuned BERT".into(),
            test_set: "Test 1".into(),
            wer: 0.0850,
            cer: 0.0194,
            bleu: 0.9151,
            pair_count: 1000,
        }],
    };
    let text = render_report(&report, ReportFormat::Text);
    let row = text
        .lines()
        .find(|l| l.contains("Team Vectora"))
        .ok_or_else(|| "row missing from text report".to_string())?;
    let fields: Vec<&str> = row.split_whitespace().collect();
    ensure(fields.ends_with(&["0.0850", "0.0194", "0.9151"]), || format!("row reads {row:?}"))?;
    ensure(row.contains("Finetuned BERT") && row.contains("Test 1"), || format!("row reads {row:?}"))?;

    let json = render_report(&report, ReportFormat::Json);
    let back: EvalReport = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    ensure(back == report, || "JSON round trip changed the report".into())?;
    Ok(format!("{:?}", row.trim()))
}

/// Starts the service on an ephemeral port in a background runtime.
fn start_service(pipeline: Pipeline) -> (String, oneshot::Sender<()>, thread::JoinHandle<()>) {
    let (tx, rx) = oneshot::channel::<()>();
    let (addr_tx, addr_rx) = std::sync::mpsc::channel();
    let state = AppState::ready(pipeline, Duration::from_secs(5));
    let handle = thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            addr_tx.send(listener.local_addr().unwrap()).unwrap();
            service::serve(listener, state, 64 * 1024, async {
                let _ = rx.await;
            })
            .await
            .unwrap();
        });
    });
    (format!("http://{}", addr_rx.recv().unwrap()), tx, handle)
}

fn ac9_latency() -> Result<String, String> {
    let total = Instant::now();
    let mut r = rng(9);
    let fx = Fixture::generate(&mut r, 70_000, 15_000, 5, None);
    let lexicon = Lexicon::build(fx.entries()).map_err(|e| e.to_string())?;
    ensure(lexicon.len() == 100_000, || format!("lexicon has {} entries", lexicon.len()))?;

    let pairs = fx.pairs();
    let corpus: Vec<String> = (0..30_000)
        .map(|_| {
            (0..r.gen_range(4..=15)).map(|_| pairs.choose(&mut r).unwrap().1).collect::<Vec<_>>().join(" ")
        })
        .collect();
    let lm = NgramModel::train(&corpus, 3).map_err(|e| e.to_string())?;
    let pipeline = Pipeline::builder()
        .rules(demo_rules())
        .lexicon(lexicon)
        .language_model(lm)
        .build()
        .map_err(|e| e.to_string())?;
    let setup = total.elapsed();

    let requests: Vec<String> = (0..1000)
        .map(|_| {
            let mut words: Vec<String> = (0..r.gen_range(5..=20))
                .map(|_| {
                    let key = pairs.choose(&mut r).unwrap().0;
                    match r.gen_range(0..10) {
                        0 => skeleton(key),
                        1 => format!("{key}x"),
                        _ => key.to_string(),
                    }
                })
                .collect();
            if r.gen_bool(0.5) {
                words.last_mut().unwrap().push('.');
            }
            serde_json::json!({ "text": words.join(" ") }).to_string()
        })
        .collect();

    let (base, shutdown, handle) = start_service(pipeline);
    let endpoint = format!("{base}/v1/transliterate");
    let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(10)).build();
    let mut latencies = Vec::with_capacity(requests.len());
    for body in &requests {
        let t = Instant::now();
        let resp = agent
            .post(&endpoint)
            .set("Content-Type", "application/json")
            .send_string(body)
            .map_err(|e| e.to_string())?;
        let json: Value = resp.into_json().map_err(|e| e.to_string())?;
        latencies.push(t.elapsed());
        ensure(json["output"].is_string(), || "response without output".into())?;
    }
    let _ = shutdown.send(());
    handle.join().map_err(|_| "server thread panicked".to_string())?;

    latencies.sort();
    let p50 = latencies[latencies.len() / 2];
    let p95 = latencies[(latencies.len() * 95).div_ceil(100) - 1];
    let elapsed = total.elapsed();
    let ms = |d: Duration| d.as_secs_f64() * 1000.0;
    let detail = format!(
        "p50 {:.1} ms, p95 {:.1} ms, max {:.1} ms; setup {:.1}s, total {:.1}s",
        ms(p50),
        ms(p95),
        ms(*latencies.last().unwrap()),
        setup.as_secs_f64(),
        elapsed.as_secs_f64()
    );
    ensure(p95 < Duration::from_millis(50) && elapsed < Duration::from_secs(300), || detail.clone())?;
    Ok(detail)
}

fn ac10_lm_round_trip() -> Result<String, String> {
    let mut r = rng(10);
    let mut natives = fixtures::Natives::new();
    let vocab: Vec<String> = (0..300).map(|_| natives.fresh(&mut r)).collect();
    let sentence = |r: &mut StdRng| -> Vec<String> { (0..r.gen_range(1..=12)).map(|_| vocab.choose(r).unwrap().clone()).collect() };
    let corpus: Vec<String> = (0..2000).map(|_| sentence(&mut r).join(" ")).collect();
    let model = NgramModel::train(&corpus, 3).map_err(|e| e.to_string())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("probe.xlm");
    model.save(std::fs::File::create(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let loaded = NgramModel::load(std::fs::File::open(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;

    let mut probes: Vec<Vec<String>> = (0..95).map(|_| sentence(&mut r)).collect();
    probes.push(Vec::new());
    probes.push(vec!["oov".into()]);
    probes.push(vec!["oov".into(), vocab[0].clone(), "oov2".into()]);
    probes.push(corpus[0].split(' ').map(String::from).collect());
    probes.push(corpus[1].split(' ').map(String::from).collect());
    for (i, p) in probes.iter().enumerate() {
        for (a, b) in [(model.score(p), loaded.score(p)), (model.score_open(p), loaded.score_open(p))] {
            let bits = |s: &xlit_core::SentenceScore| {
                (s.logprob.to_bits(), s.per_token.iter().map(|x| x.to_bits()).collect::<Vec<_>>())
            };
            ensure(bits(&a) == bits(&b), || format!("probe {i} differs after reload"))?;
        }
    }
    ensure(model.ngrams() == loaded.ngrams(), || "n-gram tables differ".into())?;
    Ok(format!("{} probe sentences, identical bits", probes.len()))
}
