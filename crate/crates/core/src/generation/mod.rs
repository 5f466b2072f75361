//! Repeated-prompting generation of model association datasets.
//!
//! Each cue is presented `repetitions` times; every completed repetition
//! contributes up to three ranked responses with the repetition index as the
//! participant. Progress goes to an append-only checkpoint so an interrupted
//! run resumes without re-asking finished (cue, repetition) pairs.

pub mod backend;
pub mod checkpoint;
pub mod synthetic;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use backend::{BackendError, CompletionBackend, CompletionRequest, HttpBackend, RateLimiter};
pub use checkpoint::{CheckpointState, CheckpointWriter};
pub use synthetic::{CueDistribution, SyntheticAgentSpec, SyntheticBackend, SyntheticSpecError};

use crate::fsutil::write_atomic;
use crate::model::{AssociationDataset, ModelError, Rank, HUMAN_LABEL};
use crate::norms::{normalize_token, CorrectionMap};

pub const DEFAULT_PROMPT_TEMPLATE: &str = "Here is a word: {cue}. Write the first 3 words that come to mind when you read it. \
Answer with exactly 3 single words or short phrases, one per line, and nothing else.";

const PLACEHOLDER: &str = "{cue}";
const MAX_WORDS_PER_RESPONSE: usize = 3;

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("invalid generation config: {0}")]
    Config(String),
    #[error("could not parse completion: {0}")]
    Parse(String),
    #[error("backend aborted the run: {0}")]
    Backend(BackendError),
    #[error("checkpoint {path} belongs to a different configuration (hash {found}, expected {expected})")]
    ConfigMismatch { path: PathBuf, expected: String, found: String },
    #[error("checkpoint {0} already exists; pass --resume to continue it")]
    CheckpointExists(PathBuf),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> GenerationError {
    let context = context.into();
    move |source| GenerationError::Io { context, source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub endpoint_url: Option<String>,
    pub model_name: String,
    pub temperature: f64,
    pub repetitions: u32,
    pub responses_per_prompt: usize,
    pub prompt_template: String,
    pub system_prompt: Option<String>,
    pub max_tokens: u32,
    pub max_retries: u32,
    pub concurrency_limit: usize,
    pub requests_per_second: Option<f64>,
    pub retry_backoff_ms: u64,
    pub seed: Option<u64>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            endpoint_url: None,
            model_name: "model".into(),
            temperature: 1.0,
            repetitions: 100,
            responses_per_prompt: 3,
            prompt_template: DEFAULT_PROMPT_TEMPLATE.into(),
            system_prompt: None,
            max_tokens: 64,
            max_retries: 3,
            concurrency_limit: 4,
            requests_per_second: None,
            retry_backoff_ms: 500,
            seed: None,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GenerationError> {
        let fail = |m: &str| Err(GenerationError::Config(m.into()));
        if self.model_name.trim().is_empty() {
            return fail("model name is empty");
        }
        if self.model_name == HUMAN_LABEL {
            return fail("model name may not be the human respondent label");
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return fail("temperature must be a non-negative number");
        }
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1");
        }
        if !(1..=Rank::ALL.len()).contains(&self.responses_per_prompt) {
            return fail("responses per prompt must be between 1 and 3");
        }
        if self.concurrency_limit == 0 {
            return fail("concurrency limit must be at least 1");
        }
        if let Some(rps) = self.requests_per_second {
            if !(rps.is_finite() && rps > 0.0) {
                return fail("requests per second must be positive");
            }
        }
        build_prompt(&self.prompt_template, "cue").map(|_| ())
    }

    /// SHA-256 over the config and the backend identity.
    pub fn hash_with(&self, backend_fingerprint: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_json().as_bytes());
        hasher.update([0]);
        hasher.update(backend_fingerprint.as_bytes());
        hex::encode(hasher.finalize())
    }

    fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Substitutes the cue for the single `{cue}` placeholder.
pub fn build_prompt(template: &str, cue: &str) -> Result<String, GenerationError> {
    match template.matches(PLACEHOLDER).count() {
        1 => Ok(template.replacen(PLACEHOLDER, cue, 1)),
        0 => Err(GenerationError::Config("prompt template has no {cue} placeholder".into())),
        _ => Err(GenerationError::Config("prompt template has more than one {cue} placeholder".into())),
    }
}

fn strip_list_marker(item: &str) -> &str {
    let s = item.trim_start();
    for bullet in ["-", "*", "•", "–"] {
        if let Some(rest) = s.strip_prefix(bullet) {
            return rest.trim_start();
        }
    }
    let digits = s.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &s[digits..];
        if let Some(rest) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')).or_else(|| rest.strip_prefix(':')) {
            return rest.trim_start();
        }
    }
    s
}

fn clean_item(item: &str) -> String {
    let s = strip_list_marker(item);
    let quotes: &[char] = &['"', '\'', '`', '“', '”', '‘', '’', '*', '_'];
    let s = s.trim().trim_matches(quotes).trim();
    let s = s.trim_end_matches(['.', '!', '?', ';', ',', ':']).trim();
    s.trim_matches(quotes).trim().to_string()
}

/// Extracts the first `expected` responses from a completion. Accepts
/// numbered or bulleted lists and comma/semicolon separated answers; lines
/// ending in a colon are treated as preamble. Items longer than three words
/// are taken as prose and skipped.
pub fn parse_completion(raw: &str, expected: usize) -> Result<Vec<String>, GenerationError> {
    let mut items = Vec::new();
    for line in raw.lines() {
        let line = line.trim();
        if line.is_empty() || line.ends_with(':') {
            continue;
        }
        for piece in line.split([',', ';']) {
            let item = clean_item(piece);
            if item.is_empty() || item.split_whitespace().count() > MAX_WORDS_PER_RESPONSE {
                continue;
            }
            items.push(item);
        }
    }
    if items.len() < expected {
        return Err(GenerationError::Parse(format!(
            "found {} usable responses, expected {expected}",
            items.len()
        )));
    }
    items.truncate(expected);
    Ok(items)
}

/// Output locations of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPaths {
    pub dataset: PathBuf,
    pub checkpoint: PathBuf,
    pub report: PathBuf,
}

impl RunPaths {
    /// `out`, plus `out.ckpt` and `out.run.json` beside it.
    pub fn for_output(out: &Path) -> Self {
        let with = |suffix: &str| {
            let mut s = out.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        };
        Self { dataset: out.to_path_buf(), checkpoint: with(".ckpt"), report: with(".run.json") }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub resume: bool,
    /// Stop after recording this many repetitions in this invocation, leaving
    /// the checkpoint unfinished. Used to exercise resumption.
    pub stop_after: Option<usize>,
}

/// Counts for one run. Completion and gap totals cover the whole checkpoint;
/// the attempt counters cover this invocation only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub temperature: f64,
    pub config_hash: String,
    pub backend: String,
    pub max_tokens: u32,
    pub cues_requested: usize,
    pub repetitions_per_cue: u32,
    pub completed_repetitions: usize,
    pub gap_repetitions: usize,
    pub instances: usize,
    pub requests: usize,
    pub retries: usize,
    pub parse_failures: usize,
    pub transient_errors: usize,
    pub dropped_cues: Vec<String>,
    pub finished: bool,
}

#[derive(Debug)]
pub struct GenerationRun {
    /// Present once every (cue, repetition) is completed or recorded as a gap.
    pub dataset: Option<AssociationDataset>,
    pub report: RunReport,
}

enum Outcome {
    Done { cue: String, repetition: u32, responses: Vec<(Rank, String)> },
    Gap { cue: String, repetition: u32, reason: String },
    Abort(BackendError),
}

#[derive(Default)]
struct Counters {
    requests: AtomicUsize,
    retries: AtomicUsize,
    parse_failures: AtomicUsize,
    transient_errors: AtomicUsize,
}

fn attempt_repetition(
    config: &GenerationConfig,
    backend: &dyn CompletionBackend,
    limiter: Option<&RateLimiter>,
    counters: &Counters,
    prompt: &str,
    cue: &str,
    repetition: u32,
) -> Outcome {
    let corrections = CorrectionMap::default();
    let mut last_reason = String::new();
    for attempt in 0..=config.max_retries {
        if attempt > 0 {
            counters.retries.fetch_add(1, Ordering::Relaxed);
            if config.retry_backoff_ms > 0 {
                let factor = 1u64 << (attempt - 1).min(6);
                std::thread::sleep(Duration::from_millis(config.retry_backoff_ms.saturating_mul(factor)));
            }
        }
        if let Some(l) = limiter {
            l.acquire();
        }
        counters.requests.fetch_add(1, Ordering::Relaxed);
        let request = CompletionRequest {
            model: &config.model_name,
            system_prompt: config.system_prompt.as_deref(),
            prompt,
            temperature: config.temperature,
            max_tokens: config.max_tokens,
            cue,
            repetition,
            attempt,
        };
        match backend.complete(&request) {
            Ok(text) => match parse_completion(&text, config.responses_per_prompt) {
                Ok(items) => {
                    let responses = items
                        .iter()
                        .enumerate()
                        .filter_map(|(i, raw)| {
                            let token = normalize_token(raw, &corrections);
                            (!token.is_empty()).then(|| (Rank::from_position(i).expect("at most 3 ranks"), token))
                        })
                        .collect();
                    return Outcome::Done { cue: cue.to_string(), repetition, responses };
                }
                Err(e) => {
                    counters.parse_failures.fetch_add(1, Ordering::Relaxed);
                    last_reason = e.to_string();
                }
            },
            Err(BackendError::Transient(msg)) => {
                counters.transient_errors.fetch_add(1, Ordering::Relaxed);
                last_reason = msg;
            }
            Err(fatal) => return Outcome::Abort(fatal),
        }
    }
    Outcome::Gap { cue: cue.to_string(), repetition, reason: last_reason }
}

/// Runs (or resumes) one generation and, once every repetition is accounted
/// for, writes the dataset and run report atomically.
pub fn generate_dataset<S: AsRef<str>>(
    config: &GenerationConfig,
    cues: &[S],
    backend: &dyn CompletionBackend,
    paths: &RunPaths,
    options: &RunOptions,
) -> Result<GenerationRun, GenerationError> {
    config.validate()?;
    let cue_set: BTreeSet<String> = cues
        .iter()
        .map(|c| normalize_token(c.as_ref(), &CorrectionMap::default()))
        .filter(|c| !c.is_empty())
        .collect();
    if cue_set.is_empty() {
        return Err(GenerationError::Config("no cues to generate for".into()));
    }
    let fingerprint = backend.fingerprint();
    let hash = config.hash_with(&fingerprint);
    let ckpt_path = &paths.checkpoint;

    let (state, mut writer) = if ckpt_path.exists() {
        if !options.resume {
            return Err(GenerationError::CheckpointExists(ckpt_path.clone()));
        }
        let state = checkpoint::load(ckpt_path).map_err(io_err(format!("reading {}", ckpt_path.display())))?;
        if state.config_hash != hash {
            return Err(GenerationError::ConfigMismatch {
                path: ckpt_path.clone(),
                expected: hash,
                found: state.config_hash,
            });
        }
        let writer = CheckpointWriter::append_to(ckpt_path, &config.model_name, config.temperature)
            .map_err(io_err(format!("opening {}", ckpt_path.display())))?;
        (state, writer)
    } else {
        let writer =
            CheckpointWriter::create(ckpt_path, &hash, &config.to_json(), &config.model_name, config.temperature)
                .map_err(io_err(format!("creating {}", ckpt_path.display())))?;
        (CheckpointState { config_hash: hash.clone(), ..Default::default() }, writer)
    };

    let jobs: Vec<(&str, u32)> = cue_set
        .iter()
        .flat_map(|cue| (1..=config.repetitions).map(move |rep| (cue.as_str(), rep)))
        .filter(|(cue, rep)| !state.is_finished(cue, *rep))
        .collect();
    log::info!(
        "{} repetitions pending for {}@{} ({} cues)",
        jobs.len(),
        config.model_name,
        config.temperature,
        cue_set.len()
    );

    let counters = Counters::default();
    let limiter = config.requests_per_second.map(RateLimiter::per_second);
    let next_job = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let mut abort: Option<BackendError> = None;
    let mut write_error: Option<std::io::Error> = None;

    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<Outcome>();
        for _ in 0..config.concurrency_limit.min(jobs.len().max(1)) {
            let tx = tx.clone();
            let (jobs, next_job, stop, counters, limiter) = (&jobs, &next_job, &stop, &counters, limiter.as_ref());
            scope.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let i = next_job.fetch_add(1, Ordering::SeqCst);
                let Some(&(cue, rep)) = jobs.get(i) else { break };
                let prompt = match build_prompt(&config.prompt_template, cue) {
                    Ok(p) => p,
                    Err(_) => unreachable!("template validated"),
                };
                let outcome = attempt_repetition(config, backend, limiter, counters, &prompt, cue, rep);
                if tx.send(outcome).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut recorded = 0usize;
        for outcome in rx {
            if stop.load(Ordering::SeqCst) {
                continue;
            }
            let result = match outcome {
                Outcome::Done { cue, repetition, responses } => writer.record_done(&cue, repetition, &responses),
                Outcome::Gap { cue, repetition, reason } => {
                    log::warn!("gap at {cue}#{repetition}: {reason}");
                    writer.record_gap(&cue, repetition, &reason)
                }
                Outcome::Abort(e) => {
                    abort = Some(e);
                    stop.store(true, Ordering::SeqCst);
                    continue;
                }
            };
            if let Err(e) = result {
                write_error = Some(e);
                stop.store(true, Ordering::SeqCst);
                continue;
            }
            recorded += 1;
            if options.stop_after.is_some_and(|n| recorded >= n) {
                stop.store(true, Ordering::SeqCst);
            }
        }
    });
    drop(writer);

    if let Some(e) = abort {
        return Err(GenerationError::Backend(e));
    }
    if let Some(e) = write_error {
        return Err(GenerationError::Io { context: format!("writing {}", ckpt_path.display()), source: e });
    }

    let state = checkpoint::load(ckpt_path).map_err(io_err(format!("reading {}", ckpt_path.display())))?;
    let finished = cue_set.iter().all(|cue| (1..=config.repetitions).all(|rep| state.is_finished(cue, rep)));
    let dataset = if finished {
        Some(AssociationDataset::new(
            config.model_name.clone(),
            Some(config.temperature),
            state.instances.iter().filter(|i| cue_set.contains(&i.cue)).cloned().collect(),
        )?)
    } else {
        None
    };
    let dropped_cues: Vec<String> = match &dataset {
        Some(ds) => cue_set.iter().filter(|c| !ds.contains_cue(c)).cloned().collect(),
        None => Vec::new(),
    };
    for cue in &dropped_cues {
        log::warn!("cue {cue:?} produced no responses and is dropped");
    }

    let report = RunReport {
        label: config.model_name.clone(),
        temperature: config.temperature,
        config_hash: hash,
        backend: fingerprint,
        max_tokens: config.max_tokens,
        cues_requested: cue_set.len(),
        repetitions_per_cue: config.repetitions,
        completed_repetitions: state.done.iter().filter(|(c, _)| cue_set.contains(c)).count(),
        gap_repetitions: state.gaps.keys().filter(|(c, _)| cue_set.contains(c)).count(),
        instances: dataset.as_ref().map_or(0, AssociationDataset::len),
        requests: counters.requests.load(Ordering::Relaxed),
        retries: counters.retries.load(Ordering::Relaxed),
        parse_failures: counters.parse_failures.load(Ordering::Relaxed),
        transient_errors: counters.transient_errors.load(Ordering::Relaxed),
        dropped_cues,
        finished,
    };

    if let Some(ds) = &dataset {
        write_atomic(&paths.dataset, |w| ds.write_tsv(w))
            .map_err(io_err(format!("writing {}", paths.dataset.display())))?;
    }
    write_atomic(&paths.report, |w| {
        serde_json::to_writer_pretty(&mut *w, &report).map_err(std::io::Error::other)?;
        w.write_all(b"\n")
    })
    .map_err(io_err(format!("writing {}", paths.report.display())))?;

    Ok(GenerationRun { dataset, report })
}

/// File-name-safe form of a model name.
pub fn sanitize_model_name(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Output path for one temperature of a sweep: `{model}_t{temperature}.tsv`.
pub fn sweep_output_path(out_dir: &Path, model_name: &str, temperature: f64) -> PathBuf {
    out_dir.join(format!("{}_t{}.tsv", sanitize_model_name(model_name), temperature))
}

/// One independently checkpointed run per temperature.
pub fn temperature_sweep<S: AsRef<str>>(
    base: &GenerationConfig,
    temperatures: &[f64],
    cues: &[S],
    backend: &dyn CompletionBackend,
    out_dir: &Path,
    options: &RunOptions,
) -> Result<Vec<GenerationRun>, GenerationError> {
    if temperatures.is_empty() {
        return Err(GenerationError::Config("temperature list is empty".into()));
    }
    let mut seen = Vec::new();
    for &t in temperatures {
        if seen.iter().any(|s: &f64| s.to_bits() == t.to_bits()) {
            return Err(GenerationError::Config(format!("temperature {t} listed twice")));
        }
        seen.push(t);
    }
    temperatures
        .iter()
        .map(|&t| {
            let config = GenerationConfig { temperature: t, ..base.clone() };
            let paths = RunPaths::for_output(&sweep_output_path(out_dir, &base.model_name, t));
            generate_dataset(&config, cues, backend, &paths, options)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_mass_backend() -> SyntheticBackend {
        let spec = "cue\trank\tresponse\tprobability\n\
            beach\t*\tsand|ocean|towel\t1\n\
            dog\t1\tcat\t0.5\n\
            dog\t1\tbone\t0.5\n\
            dog\t2\tleash\t1\n\
            dog\t3\tbark\t1\n";
        SyntheticBackend::new(SyntheticAgentSpec::read(spec.as_bytes(), 9).unwrap())
    }

    fn quick_config() -> GenerationConfig {
        GenerationConfig { model_name: "toy".into(), repetitions: 10, retry_backoff_ms: 0, ..Default::default() }
    }

    #[test]
    fn prompt_placeholder_rules() {
        assert_eq!(build_prompt("words for: {cue}", "ice cream").unwrap(), "words for: ice cream");
        assert!(build_prompt("no placeholder", "x").is_err());
        assert!(build_prompt("{cue} {cue}", "x").is_err());
        assert!(build_prompt(DEFAULT_PROMPT_TEMPLATE, "beach").unwrap().contains("beach"));
    }

    #[test]
    fn completion_formats() {
        let want = vec!["sand", "ocean", "towel"];
        assert_eq!(parse_completion("1. sand\n2. ocean\n3. towel", 3).unwrap(), want);
        assert_eq!(parse_completion("sand, ocean, towel", 3).unwrap(), want);
        assert_eq!(parse_completion("Here are my words:\n- Sand\n- \"ocean\"\n- towel.", 3).unwrap(), vec!["Sand", "ocean", "towel"]);
        assert_eq!(parse_completion("1) ice cream; 2) sun; 3) waves", 3).unwrap(), vec!["ice cream", "sun", "waves"]);
        assert!(parse_completion("I think of the seaside and the long summer days.", 3).is_err());
        assert!(parse_completion("sand, ocean", 3).is_err());
        assert_eq!(parse_completion("a\nb\nc\nd", 2).unwrap(), vec!["a", "b"]);
    }

    #[test]
    fn config_validation() {
        assert!(quick_config().validate().is_ok());
        for bad in [
            GenerationConfig { repetitions: 0, ..quick_config() },
            GenerationConfig { responses_per_prompt: 4, ..quick_config() },
            GenerationConfig { temperature: -0.1, ..quick_config() },
            GenerationConfig { model_name: HUMAN_LABEL.into(), ..quick_config() },
            GenerationConfig { prompt_template: "none".into(), ..quick_config() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn point_mass_run() {
        let dir = tempfile::tempdir().unwrap();
        let paths = RunPaths::for_output(&dir.path().join("toy.tsv"));
        let run = generate_dataset(&quick_config(), &["beach", "nowhere"], &point_mass_backend(), &paths, &RunOptions::default())
            .unwrap();
        let ds = run.dataset.unwrap();
        assert_eq!(ds.len(), 30);
        assert_eq!(ds.unique_responses("beach", Rank::R1).len(), 1);
        assert_eq!(run.report.dropped_cues, vec!["nowhere".to_string()]);
        assert_eq!(run.report.gap_repetitions, 10);
        assert_eq!(ds.respondent_id(), "toy@1");
        assert!(paths.dataset.exists() && paths.report.exists());

        let again = generate_dataset(&quick_config(), &["beach"], &point_mass_backend(), &paths, &RunOptions::default());
        assert!(matches!(again, Err(GenerationError::CheckpointExists(_))));
        let other = GenerationConfig { repetitions: 11, ..quick_config() };
        let resumed = generate_dataset(&other, &["beach"], &point_mass_backend(), &paths, &RunOptions { resume: true, stop_after: None });
        assert!(matches!(resumed, Err(GenerationError::ConfigMismatch { .. })));
    }

    #[test]
    fn resume_matches_uninterrupted() {
        let dir = tempfile::tempdir().unwrap();
        let config = GenerationConfig { concurrency_limit: 3, ..quick_config() };
        let full = RunPaths::for_output(&dir.path().join("full.tsv"));
        generate_dataset(&config, &["beach", "dog"], &point_mass_backend(), &full, &RunOptions::default()).unwrap();

        let split = RunPaths::for_output(&dir.path().join("split.tsv"));
        let first = generate_dataset(
            &config,
            &["beach", "dog"],
            &point_mass_backend(),
            &split,
            &RunOptions { resume: false, stop_after: Some(7) },
        )
        .unwrap();
        assert!(first.dataset.is_none());
        generate_dataset(&config, &["beach", "dog"], &point_mass_backend(), &split, &RunOptions { resume: true, stop_after: None })
            .unwrap();
        assert_eq!(std::fs::read(&full.dataset).unwrap(), std::fs::read(&split.dataset).unwrap());
    }

    #[test]
    fn transient_failures_retry_or_gap() {
        let dir = tempfile::tempdir().unwrap();
        let mut backend = point_mass_backend();
        backend.failure_rate = 0.3;
        let paths = RunPaths::for_output(&dir.path().join("flaky.tsv"));
        let run = generate_dataset(&quick_config(), &["beach"], &backend, &paths, &RunOptions::default()).unwrap();
        assert!(run.report.retries > 0);
        assert_eq!(run.report.completed_repetitions + run.report.gap_repetitions, 10);

        let mut always = point_mass_backend();
        always.failure_rate = 1.0;
        let paths = RunPaths::for_output(&dir.path().join("dead.tsv"));
        let run = generate_dataset(&quick_config(), &["beach"], &always, &paths, &RunOptions::default()).unwrap();
        assert_eq!(run.report.gap_repetitions, 10);
        assert_eq!(run.report.dropped_cues, vec!["beach".to_string()]);
    }

    struct Unauthorized;
    impl CompletionBackend for Unauthorized {
        fn complete(&self, _: &CompletionRequest<'_>) -> Result<String, BackendError> {
            Err(BackendError::Auth("HTTP 401".into()))
        }
        fn fingerprint(&self) -> String {
            "unauthorized".into()
        }
    }

    #[test]
    fn auth_failure_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let paths = RunPaths::for_output(&dir.path().join("x.tsv"));
        let err = generate_dataset(&quick_config(), &["beach"], &Unauthorized, &paths, &RunOptions::default()).unwrap_err();
        assert!(matches!(err, GenerationError::Backend(BackendError::Auth(_))));
    }

    #[test]
    fn sweep_contract() {
        let dir = tempfile::tempdir().unwrap();
        let backend = point_mass_backend();
        let runs = temperature_sweep(&quick_config(), &[0.3, 1.0], &["beach"], &backend, dir.path(), &RunOptions::default())
            .unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].dataset.as_ref().unwrap().temperature(), Some(0.3));
        assert!(dir.path().join("toy_t0.3.tsv").exists());
        assert!(temperature_sweep(&quick_config(), &[], &["beach"], &backend, dir.path(), &RunOptions::default()).is_err());
        assert!(temperature_sweep(&quick_config(), &[1.0, 1.0], &["beach"], &backend, dir.path(), &RunOptions::default()).is_err());
    }
}
