//! The `wordassoc` command line.
//!
//! Settings are layered: built-in defaults, then a TOML file given with
//! `--config`, then command-line flags. Exit codes: 0 success, 1 fatal
//! error, 2 usage error.

use std::fmt::Display;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::fsutil::write_atomic;
use crate::generation::{
    generate_dataset, temperature_sweep, CompletionBackend, GenerationConfig, GenerationRun, HttpBackend, RunOptions,
    RunPaths, SyntheticAgentSpec, SyntheticBackend,
};
use crate::lexical::{bin_profile, unique_pair_measures, write_pair_measures, BinMean, BinSpec, PairMeasure};
use crate::model::{AssociationDataset, Rank, DATASET_HEADER};
use crate::norms::{
    delimiter_for, normalize_token, parse_concreteness_norms, parse_frequency_norms, parse_human_norms, write_rejects,
    ColumnMapping, CorrectionMap, HumanNormsOptions, LexicalNorms, DEFAULT_MIN_DOC_COUNT,
};
use crate::report::{build_report, emit_report, sidecar_path, ReportInputs, ReportKind, ReportOptions};
use crate::sampling::{representativeness_report, sample_cues, SampleManifest};
use crate::stats::{describe, describe_with, one_way_anova, apa_decimal, pearson, SdMode};
use crate::typicality::{dataset_summary, write_per_cue};

pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Fatal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Fatal(_) => 1,
        }
    }
}

fn fatal(e: impl Display) -> CliError {
    CliError::Fatal(e.to_string())
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "wordassoc", version, about = "Word-association dataset generation and analysis")]
pub struct Cli {
    /// TOML file with default settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a human association table to the canonical dataset format.
    Ingest(IngestArgs),
    /// Draw a seeded cue subset and check how representative it is.
    Sample(SampleArgs),
    /// Generate model datasets by repeated prompting.
    Generate(GenerateArgs),
    /// Relative frequency and concreteness of cue-response pairs.
    Metrics(MetricsArgs),
    /// Per-cue variability and typicality against a human reference.
    Typicality(TypicalityArgs),
    /// ANOVA, Pearson correlation or descriptive statistics.
    Stats(StatsArgs),
    /// Data behind a figure or table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct AnalysisArgs {
    /// Response rank analysed (1, 2 or 3).
    #[arg(long)]
    pub rank: Option<Rank>,
    /// Standard deviation convention: population or sample.
    #[arg(long)]
    pub sd_mode: Option<SdMode>,
    /// Number of cue-frequency bins.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Number of cue-concreteness bins over [1, 5].
    #[arg(long)]
    pub concr_bins: Option<usize>,
    /// Bin means over unique pairs or over cues.
    #[arg(long)]
    pub bin_mean: Option<BinMean>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct NormsArgs {
    /// Frequency list: `token count [doc_count]` per line.
    #[arg(long)]
    pub freq_norms: Option<PathBuf>,
    /// Concreteness ratings table (CSV or TSV with a header row).
    #[arg(long)]
    pub concr_norms: Option<PathBuf>,
    /// Word column of the concreteness table.
    #[arg(long)]
    pub word_col: Option<String>,
    /// Rating column of the concreteness table.
    #[arg(long)]
    pub rating_col: Option<String>,
    /// Minimum document count for frequency tokens.
    #[arg(long)]
    pub min_doc_count: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    Wide,
    Long,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "wide")]
    pub layout: Layout,
    #[arg(long, default_value = "cue")]
    pub cue_col: String,
    /// Wide layout: response columns in rank order.
    #[arg(long, value_delimiter = ',', default_value = "R1,R2,R3")]
    pub response_cols: Vec<String>,
    /// Long layout: response column.
    #[arg(long, default_value = "response")]
    pub response_col: String,
    /// Long layout: rank column.
    #[arg(long, default_value = "rank")]
    pub rank_col: String,
    /// Long layout: participant column, if any.
    #[arg(long)]
    pub participant_col: Option<String>,
    /// Field delimiter; defaults to `,` for .csv and tab otherwise.
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Cell values meaning "no response"; replaces the built-in list.
    #[arg(long = "missing-marker")]
    pub missing_markers: Vec<String>,
    /// TSV of `raw<TAB>corrected` spellings.
    #[arg(long)]
    pub corrections: Option<PathBuf>,
    /// Where to write rejected lines; defaults to `<out>.rejects.tsv`.
    #[arg(long)]
    pub rejects: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Dataset providing the cue inventory.
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Manifest output.
    #[arg(long)]
    pub out: PathBuf,
    /// Drop sampled cues that any of these datasets leaves unanswered.
    #[arg(long, value_delimiter = ',')]
    pub filter_against: Vec<PathBuf>,
    /// Write the reference restricted to the kept cues here.
    #[arg(long)]
    pub restricted_out: Option<PathBuf>,
    /// Write a subset-versus-full comparison table here.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[command(flatten)]
    pub norms: NormsArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Cue list: one cue per line, a sample manifest, or a dataset file.
    #[arg(long)]
    pub cues: PathBuf,
    /// OpenAI-compatible base URL, e.g. http://localhost:8000/v1.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Offline synthetic agent spec instead of an endpoint.
    #[arg(long)]
    pub synthetic_spec: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Comma-separated temperatures; runs one dataset per value into --out-dir.
    #[arg(long, value_delimiter = ',')]
    pub temperatures: Vec<f64>,
    #[arg(long)]
    pub repetitions: Option<u32>,
    #[arg(long)]
    pub responses_per_prompt: Option<usize>,
    #[arg(long)]
    pub concurrency: Option<usize>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long)]
    pub max_tokens: Option<u32>,
    #[arg(long)]
    pub requests_per_second: Option<f64>,
    #[arg(long)]
    pub retry_backoff_ms: Option<u64>,
    #[arg(long)]
    pub prompt_template: Option<String>,
    #[arg(long)]
    pub system_prompt: Option<String>,
    /// Synthetic mode only.
    #[arg(long)]
    pub seed: Option<u64>,
    /// HTTP request timeout in seconds.
    #[arg(long, default_value_t = 60)]
    pub timeout_secs: u64,
    /// Environment variable holding the API key.
    #[arg(long)]
    pub api_key_env: Option<String>,
    /// Continue an existing checkpoint.
    #[arg(long)]
    pub resume: bool,
    /// Dataset output for a single temperature.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output directory for a temperature sweep.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub stop_after: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Pair table output; bin tables go beside it.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[command(flatten)]
    pub norms: NormsArgs,
}

#[derive(Debug, Args)]
pub struct TypicalityArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    /// Cue subset (list, manifest or dataset); defaults to the reference cues.
    #[arg(long)]
    pub cues: Option<PathBuf>,
    /// Per-cue output; the aggregate goes to `<stem>.aggregate.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatTest {
    Anova,
    Pearson,
    Describe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupBy {
    /// Label and temperature together.
    Respondent,
    Label,
    Temperature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Measure {
    /// log2 response/cue frequency ratio per unique pair.
    LogFreqRatio,
    /// Response/cue concreteness ratio per unique pair.
    ConcretenessRatio,
    /// Distinct responses per cue.
    Variability,
    /// Per-cue tok-SS1 (needs --reference).
    TokSs1,
    /// Pearson: cue versus response concreteness.
    Concreteness,
    /// Pearson: log2 cue versus log2 response frequency.
    LogFrequency,
    /// Pearson: per-cue variability versus tok-SS1 (needs --reference).
    VariabilityTypicality,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, value_enum)]
    pub test: StatTest,
    #[arg(long, value_delimiter = ',', required = true)]
    pub datasets: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "respondent")]
    pub groups_by: GroupBy,
    #[arg(long, value_enum)]
    pub measure: Measure,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub cues: Option<PathBuf>,
    /// TSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[command(flatten)]
    pub norms: NormsArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub kind: ReportKind,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub datasets: Vec<PathBuf>,
    #[arg(long)]
    pub cues: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[command(flatten)]
    pub norms: NormsArgs,
}

/// Settings file. Every key is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub rank: Option<u8>,
    pub sd_mode: Option<String>,
    pub bins: Option<usize>,
    pub concr_bins: Option<usize>,
    pub bin_mean: Option<String>,
    pub seed: Option<u64>,
    pub freq_norms: Option<PathBuf>,
    pub concr_norms: Option<PathBuf>,
    pub word_col: Option<String>,
    pub rating_col: Option<String>,
    pub min_doc_count: Option<u64>,
    pub corrections: Option<PathBuf>,
    pub api_key_env: Option<String>,
    pub generation: Option<GenerationConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| fatal(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }
}

/// Effective analysis settings after layering.
#[derive(Debug, Clone)]
struct Analysis {
    rank: Rank,
    report: ReportOptions,
}

fn resolve_analysis(args: &AnalysisArgs, file: &FileConfig) -> Result<Analysis, CliError> {
    let rank = match (args.rank, file.rank) {
        (Some(r), _) => r,
        (None, Some(n)) => Rank::from_number(n).ok_or_else(|| usage(format!("config: invalid rank {n}")))?,
        (None, None) => Rank::R1,
    };
    let sd_mode = match (args.sd_mode, &file.sd_mode) {
        (Some(m), _) => m,
        (None, Some(s)) => s.parse().map_err(|e: String| usage(format!("config: {e}")))?,
        (None, None) => SdMode::Population,
    };
    let bin_mean = match (args.bin_mean, &file.bin_mean) {
        (Some(m), _) => m,
        (None, Some(s)) => s.parse().map_err(|e: String| usage(format!("config: {e}")))?,
        (None, None) => BinMean::Pairs,
    };
    let mut frequency_bins = BinSpec::frequency_default();
    frequency_bins.n_bins = args.bins.or(file.bins).unwrap_or(frequency_bins.n_bins);
    frequency_bins.mean = bin_mean;
    let mut concreteness_bins = BinSpec::concreteness_default();
    concreteness_bins.n_bins = args.concr_bins.or(file.concr_bins).unwrap_or(concreteness_bins.n_bins);
    concreteness_bins.mean = bin_mean;
    if frequency_bins.n_bins == 0 || concreteness_bins.n_bins == 0 {
        return Err(usage("bin counts must be at least 1"));
    }
    Ok(Analysis {
        rank,
        report: ReportOptions { rank, sd_mode, frequency_bins, concreteness_bins, ..ReportOptions::default() },
    })
}

fn load_norms(args: &NormsArgs, file: &FileConfig, required: bool) -> Result<Option<LexicalNorms>, CliError> {
    let freq_path = args.freq_norms.clone().or_else(|| file.freq_norms.clone());
    let concr_path = args.concr_norms.clone().or_else(|| file.concr_norms.clone());
    if freq_path.is_none() && concr_path.is_none() {
        return if required { Err(usage("--freq-norms and/or --concr-norms are required")) } else { Ok(None) };
    }
    let mut frequency = std::collections::HashMap::new();
    if let Some(path) = freq_path {
        let min_doc = args.min_doc_count.or(file.min_doc_count).unwrap_or(DEFAULT_MIN_DOC_COUNT);
        let f = std::fs::File::open(&path).map_err(|e| fatal(format!("{}: {e}", path.display())))?;
        let ingest = parse_frequency_norms(BufReader::new(f), min_doc).map_err(fatal)?;
        log::info!(
            "{}: {} tokens, {} rejected, {} with digits, {} below document threshold",
            path.display(),
            ingest.counts.len(),
            ingest.rejects.len(),
            ingest.excluded_digits,
            ingest.excluded_doc_count
        );
        frequency = ingest.counts;
    }
    let mut concreteness = std::collections::HashMap::new();
    if let Some(path) = concr_path {
        let word = args.word_col.clone().or_else(|| file.word_col.clone()).unwrap_or_else(|| "Word".into());
        let rating = args.rating_col.clone().or_else(|| file.rating_col.clone()).unwrap_or_else(|| "Conc.M".into());
        let f = std::fs::File::open(&path).map_err(|e| fatal(format!("{}: {e}", path.display())))?;
        let ingest = parse_concreteness_norms(f, &word, &rating, delimiter_for(&path)).map_err(fatal)?;
        log::info!("{}: {} ratings, {} rejected", path.display(), ingest.ratings.len(), ingest.rejects.len());
        concreteness = ingest.ratings;
    }
    Ok(Some(LexicalNorms::new(frequency, concreteness)))
}

fn load_dataset(path: &Path) -> Result<AssociationDataset, CliError> {
    AssociationDataset::load(path).map_err(|e| fatal(format!("{}: {e}", path.display())))
}

/// Reads cues from a plain list, a sample manifest (kept cues) or a dataset.
pub fn read_cue_list(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| fatal(format!("{}: {e}", path.display())))?;
    let first = text.lines().next().unwrap_or("");
    if first.trim_end_matches('\r') == DATASET_HEADER {
        return Ok(load_dataset(path)?.cues().map(str::to_string).collect());
    }
    if first.starts_with("# seed=") {
        let manifest = SampleManifest::read(text.as_bytes()).map_err(|e| fatal(format!("{}: {e}", path.display())))?;
        return Ok(manifest.post_filter_cues);
    }
    let corrections = CorrectionMap::default();
    let mut cues: Vec<String> = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(|l| normalize_token(l, &corrections))
        .filter(|c| !c.is_empty())
        .collect();
    cues.sort();
    cues.dedup();
    Ok(cues)
}

fn write_file(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
    write_atomic(path, fill).map_err(|e| fatal(format!("writing {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
        w.write_all(b"\n")
    })
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Ingest(args) => ingest(args, &file),
        Command::Sample(args) => sample(args, &file),
        Command::Generate(args) => generate(args, &file),
        Command::Metrics(args) => metrics(args, &file),
        Command::Typicality(args) => typicality(args, &file),
        Command::Stats(args) => stats(args, &file),
        Command::Report(args) => report(args, &file),
    }
}

fn ingest(args: IngestArgs, file: &FileConfig) -> Result<(), CliError> {
    let corrections = match args.corrections.as_ref().or(file.corrections.as_ref()) {
        Some(path) => CorrectionMap::load(path).map_err(fatal)?,
        None => CorrectionMap::default(),
    };
    let delimiter = match args.delimiter {
        Some(c) if c.is_ascii() => c as u8,
        Some(c) => return Err(usage(format!("delimiter {c:?} is not a single-byte character"))),
        None => delimiter_for(&args.input),
    };
    let mapping = match args.layout {
        Layout::Wide => ColumnMapping::Wide { cue: args.cue_col.clone(), responses: args.response_cols.clone() },
        Layout::Long => ColumnMapping::Long {
            cue: args.cue_col.clone(),
            response: args.response_col.clone(),
            rank: args.rank_col.clone(),
            participant: args.participant_col.clone(),
        },
    };
    let mut options = HumanNormsOptions { mapping, delimiter, ..HumanNormsOptions::default() };
    if !args.missing_markers.is_empty() {
        options.missing_markers = args.missing_markers.clone();
    }
    let input = std::fs::File::open(&args.input).map_err(|e| fatal(format!("{}: {e}", args.input.display())))?;
    let result = parse_human_norms(input, &options, &corrections).map_err(fatal)?;
    write_file(&args.out, |w| result.dataset.write_tsv(w))?;
    if !result.rejects.is_empty() {
        let path = args.rejects.clone().unwrap_or_else(|| sidecar_path(&args.out, "rejects.tsv"));
        write_file(&path, |w| write_rejects(w, &result.rejects))?;
        log::warn!("{} rejected lines written to {}", result.rejects.len(), path.display());
    }
    eprintln!(
        "{}: {} instances, {} cues, {} rejected lines, {} cues without responses",
        args.out.display(),
        result.dataset.len(),
        result.dataset.cue_count(),
        result.rejects.len(),
        result.dropped_cues.len()
    );
    Ok(())
}

fn sample(args: SampleArgs, file: &FileConfig) -> Result<(), CliError> {
    let analysis = resolve_analysis(&args.analysis, file)?;
    let seed = args.seed.or(file.seed).ok_or_else(|| usage("sample needs --seed"))?;
    let reference = load_dataset(&args.reference)?;
    let cues: Vec<&str> = reference.cues().collect();
    let mut manifest = sample_cues(&cues, args.n, seed).map_err(|e| usage(e.to_string()))?;
    if !args.filter_against.is_empty() {
        let others = args.filter_against.iter().map(|p| load_dataset(p)).collect::<Result<Vec<_>, _>>()?;
        let refs: Vec<&AssociationDataset> = std::iter::once(&reference).chain(others.iter()).collect();
        manifest.filter_against(&refs, analysis.rank);
    }
    write_file(&args.out, |w| manifest.write(w))?;
    if let Some(path) = &args.restricted_out {
        let restricted = reference.restrict_to(manifest.post_filter_cues.iter().map(String::as_str));
        write_file(path, |w| restricted.write_tsv(w))?;
    }
    if let Some(path) = &args.compare {
        let norms = load_norms(&args.norms, file, false)?;
        let rows = representativeness_report(
            &manifest.post_filter_cues,
            &reference,
            norms.as_ref(),
            analysis.rank,
            analysis.report.sd_mode,
        )
        .map_err(fatal)?;
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into());
        write_file(path, |w| {
            writeln!(w, "metric\tsubset\tfull\tabs_diff")?;
            for r in &rows {
                writeln!(w, "{}\t{}\t{}\t{}", r.metric, cell(r.subset), cell(r.full), cell(r.abs_diff))?;
            }
            Ok(())
        })?;
    }
    eprintln!(
        "sampled {} of {} cues (seed {}), {} kept after filtering",
        manifest.sampled_cues.len(),
        manifest.source_cue_count,
        seed,
        manifest.post_filter_cues.len()
    );
    Ok(())
}

fn generation_config(args: &GenerateArgs, file: &FileConfig) -> GenerationConfig {
    let mut c = file.generation.clone().unwrap_or_default();
    if let Some(v) = &args.endpoint {
        c.endpoint_url = Some(v.clone());
    }
    if let Some(v) = &args.model {
        c.model_name = v.clone();
    }
    if let Some(v) = args.temperature {
        c.temperature = v;
    }
    if let Some(v) = args.repetitions {
        c.repetitions = v;
    }
    if let Some(v) = args.responses_per_prompt {
        c.responses_per_prompt = v;
    }
    if let Some(v) = args.concurrency {
        c.concurrency_limit = v;
    }
    if let Some(v) = args.max_retries {
        c.max_retries = v;
    }
    if let Some(v) = args.max_tokens {
        c.max_tokens = v;
    }
    if let Some(v) = args.requests_per_second {
        c.requests_per_second = Some(v);
    }
    if let Some(v) = args.retry_backoff_ms {
        c.retry_backoff_ms = v;
    }
    if let Some(v) = &args.prompt_template {
        c.prompt_template = v.clone();
    }
    if let Some(v) = &args.system_prompt {
        c.system_prompt = Some(v.clone());
    }
    if let Some(v) = args.seed.or(file.seed) {
        c.seed = Some(v);
    }
    c
}

fn generate(args: GenerateArgs, file: &FileConfig) -> Result<(), CliError> {
    let mut config = generation_config(&args, file);
    let backend: Box<dyn CompletionBackend> = match (&args.synthetic_spec, &config.endpoint_url) {
        (Some(_), Some(_)) => return Err(usage("give either --endpoint or --synthetic-spec, not both")),
        (None, None) => return Err(usage("generate needs --endpoint or --synthetic-spec")),
        (Some(spec_path), None) => {
            let seed = *config.seed.get_or_insert(0);
            let spec = SyntheticAgentSpec::load(spec_path, seed).map_err(fatal)?;
            spec.validate_for(config.responses_per_prompt).map_err(fatal)?;
            Box::new(SyntheticBackend::new(spec))
        }
        (None, Some(endpoint)) => {
            config.seed = None;
            let var = args
                .api_key_env
                .clone()
                .or_else(|| file.api_key_env.clone())
                .unwrap_or_else(|| DEFAULT_API_KEY_ENV.into());
            let key = std::env::var(&var).ok().filter(|k| !k.is_empty());
            if key.is_none() {
                log::warn!("${var} is not set; sending requests without an API key");
            }
            Box::new(HttpBackend::new(endpoint, key, Duration::from_secs(args.timeout_secs)).map_err(fatal)?)
        }
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let cues = read_cue_list(&args.cues)?;
    if cues.is_empty() {
        return Err(usage(format!("{} lists no cues", args.cues.display())));
    }
    let options = RunOptions { resume: args.resume, stop_after: args.stop_after };

    let runs: Vec<GenerationRun> = if args.temperatures.is_empty() {
        let out = args.out.as_ref().ok_or_else(|| usage("generate needs --out (or --temperatures with --out-dir)"))?;
        vec![generate_dataset(&config, &cues, backend.as_ref(), &RunPaths::for_output(out), &options).map_err(fatal)?]
    } else {
        let dir = args.out_dir.as_ref().ok_or_else(|| usage("--temperatures needs --out-dir"))?;
        temperature_sweep(&config, &args.temperatures, &cues, backend.as_ref(), dir, &options).map_err(|e| match e {
            crate::generation::GenerationError::Config(m) => usage(m),
            other => fatal(other),
        })?
    };
    for run in &runs {
        let r = &run.report;
        eprintln!(
            "{}@{}: {} completed, {} gaps, {} retries, {} parse failures, {} instances{}",
            r.label,
            r.temperature,
            r.completed_repetitions,
            r.gap_repetitions,
            r.retries,
            r.parse_failures,
            r.instances,
            if r.finished { "" } else { " (unfinished; rerun with --resume)" }
        );
    }
    Ok(())
}

fn metrics(args: MetricsArgs, file: &FileConfig) -> Result<(), CliError> {
    let analysis = resolve_analysis(&args.analysis, file)?;
    let norms = load_norms(&args.norms, file, true)?.expect("required");
    let dataset = load_dataset(&args.dataset)?;
    let measures = unique_pair_measures(&dataset, analysis.rank, &norms);
    write_file(&args.out, |w| write_pair_measures(w, &measures))?;
    for (suffix, spec) in [("freq_bins.tsv", analysis.report.frequency_bins), ("concr_bins.tsv", analysis.report.concreteness_bins)] {
        let profile = bin_profile(&measures, &spec, &norms).map_err(fatal)?;
        write_file(&sidecar_path(&args.out, suffix), |w| {
            writeln!(w, "bin\tlower\tupper\tcue_count\tpair_count\tmean_measure")?;
            for (i, b) in profile.bins.iter().enumerate() {
                let mean = b.mean_measure.map(|v| v.to_string()).unwrap_or_else(|| "NA".into());
                writeln!(w, "{}\t{}\t{}\t{}\t{}\t{}", i + 1, b.lower, b.upper, b.cue_count, b.pair_count, mean)?;
            }
            Ok(())
        })?;
    }
    let freq: Vec<f64> = measures.iter().map(|m| m.log2_freq_ratio).collect();
    let conc: Vec<f64> = measures.iter().filter_map(|m| m.concreteness_ratio).collect();
    write_file(&sidecar_path(&args.out, "summary.tsv"), |w| {
        writeln!(w, "measure\tn\tmean\tsd\tmin\tq1\tmedian\tq3\tmax")?;
        for (name, values) in [("log2_freq_ratio", &freq), ("concreteness_ratio", &conc)] {
            writeln!(w, "{name}\t{}", describe_cells(values, analysis.report.sd_mode))?;
        }
        Ok(())
    })?;
    eprintln!("{}: {} unique pairs, {} with concreteness", args.out.display(), measures.len(), conc.len());
    Ok(())
}

fn describe_cells(values: &[f64], mode: SdMode) -> String {
    match describe(values) {
        Ok(d) => {
            let sd = describe_with(values, mode).map(|s| s.sd.to_string()).unwrap_or_else(|_| "NA".into());
            format!("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}", d.n, d.mean, sd, d.min, d.q1, d.median, d.q3, d.max)
        }
        Err(_) => "0\tNA\tNA\tNA\tNA\tNA\tNA\tNA".into(),
    }
}

fn typicality(args: TypicalityArgs, file: &FileConfig) -> Result<(), CliError> {
    let analysis = resolve_analysis(&args.analysis, file)?;
    let dataset = load_dataset(&args.dataset)?;
    let reference = load_dataset(&args.reference)?;
    let cues = match &args.cues {
        Some(p) => read_cue_list(p)?,
        None => reference.cues().map(str::to_string).collect(),
    };
    let summary = dataset_summary(&dataset, &reference, &cues, analysis.rank, analysis.report.sd_mode);
    write_file(&args.out, |w| write_per_cue(w, &summary.per_cue))?;
    write_json(&sidecar_path(&args.out, "aggregate.json"), &summary.aggregate)?;
    let a = &summary.aggregate;
    eprintln!(
        "{}: avg#R{} {:.2}, tok-SS1 {}, typ-SS1 {} over {} cues ({} degenerate, {} missing in reference)",
        dataset.respondent_id(),
        analysis.rank,
        a.avg_variability,
        a.tok_ss1_mean.map(|v| format!("{v:.2}")).unwrap_or_else(|| "NA".into()),
        a.typ_ss1_mean.map(|v| format!("{v:.2}")).unwrap_or_else(|| "NA".into()),
        a.typicality_cues,
        a.skipped_degenerate,
        a.skipped_missing
    );
    Ok(())
}

/// Thousands separators, as in `30,056`.
fn grouped(n: usize) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn group_key(ds: &AssociationDataset, by: GroupBy) -> String {
    match by {
        GroupBy::Respondent => ds.respondent_id(),
        GroupBy::Label => ds.label().to_string(),
        GroupBy::Temperature => ds.temperature().map(|t| t.to_string()).unwrap_or_else(|| ds.label().to_string()),
    }
}

struct StatsContext<'a> {
    rank: Rank,
    sd_mode: SdMode,
    norms: Option<&'a LexicalNorms>,
    reference: Option<&'a AssociationDataset>,
    cues: Option<&'a [String]>,
}

impl StatsContext<'_> {
    fn pairs(&self, ds: &AssociationDataset) -> Result<Vec<PairMeasure>, CliError> {
        let norms = self.norms.ok_or_else(|| usage("this measure needs --freq-norms/--concr-norms"))?;
        Ok(unique_pair_measures(ds, self.rank, norms))
    }

    fn cue_set(&self, ds: &AssociationDataset) -> Vec<String> {
        match (self.cues, self.reference) {
            (Some(c), _) => c.to_vec(),
            (None, Some(r)) => r.cues().map(str::to_string).collect(),
            (None, None) => ds.cues().map(str::to_string).collect(),
        }
    }

    /// Values of a single-variable measure for one dataset.
    fn values(&self, ds: &AssociationDataset, measure: Measure) -> Result<Vec<f64>, CliError> {
        Ok(match measure {
            Measure::LogFreqRatio => self.pairs(ds)?.iter().map(|m| m.log2_freq_ratio).collect(),
            Measure::ConcretenessRatio => self.pairs(ds)?.iter().filter_map(|m| m.concreteness_ratio).collect(),
            Measure::Variability => self
                .cue_set(ds)
                .iter()
                .map(|c| ds.unique_responses(c, self.rank).len())
                .filter(|&v| v > 0)
                .map(|v| v as f64)
                .collect(),
            Measure::TokSs1 => {
                let reference = self.reference.ok_or_else(|| usage("tok_ss1 needs --reference"))?;
                let s = dataset_summary(ds, reference, &self.cue_set(ds), self.rank, self.sd_mode);
                s.per_cue.iter().filter_map(|c| c.tok_ss1).collect()
            }
            other => return Err(usage(format!("{other:?} is a Pearson measure; use --test pearson"))),
        })
    }

    /// Paired observations for a correlation measure.
    fn pairs_xy(&self, ds: &AssociationDataset, measure: Measure) -> Result<(Vec<f64>, Vec<f64>), CliError> {
        Ok(match measure {
            Measure::Concreteness => {
                let norms = self.norms.ok_or_else(|| usage("concreteness needs --concr-norms"))?;
                self.pairs(ds)?
                    .iter()
                    .filter_map(|m| Some((norms.concreteness(&m.cue)?, norms.concreteness(&m.response)?)))
                    .unzip()
            }
            Measure::LogFrequency => {
                let norms = self.norms.ok_or_else(|| usage("log_frequency needs --freq-norms"))?;
                self.pairs(ds)?
                    .iter()
                    .map(|m| {
                        (
                            (norms.lookup_frequency(&m.cue) as f64).log2(),
                            (norms.lookup_frequency(&m.response) as f64).log2(),
                        )
                    })
                    .unzip()
            }
            Measure::VariabilityTypicality => {
                let reference = self.reference.ok_or_else(|| usage("variability_typicality needs --reference"))?;
                let s = dataset_summary(ds, reference, &self.cue_set(ds), self.rank, self.sd_mode);
                crate::report::variability_typicality_points(&s)
            }
            other => return Err(usage(format!("{other:?} is not a Pearson measure"))),
        })
    }
}

fn measure_name(m: Measure) -> String {
    m.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn stats(args: StatsArgs, file: &FileConfig) -> Result<(), CliError> {
    let analysis = resolve_analysis(&args.analysis, file)?;
    let datasets = args.datasets.iter().map(|p| load_dataset(p)).collect::<Result<Vec<_>, _>>()?;
    let reference = args.reference.as_deref().map(load_dataset).transpose()?;
    let cues = args.cues.as_deref().map(read_cue_list).transpose()?;
    let needs_norms = matches!(
        args.measure,
        Measure::LogFreqRatio | Measure::ConcretenessRatio | Measure::Concreteness | Measure::LogFrequency
    );
    let norms = load_norms(&args.norms, file, needs_norms)?;
    let ctx = StatsContext {
        rank: analysis.rank,
        sd_mode: analysis.report.sd_mode,
        norms: norms.as_ref(),
        reference: reference.as_ref(),
        cues: cues.as_deref(),
    };
    let measure = measure_name(args.measure);

    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    let mut table = String::new();
    let mut summary_line = String::new();
    match args.test {
        StatTest::Anova | StatTest::Describe => {
            for ds in &datasets {
                let key = group_key(ds, args.groups_by);
                let values = ctx.values(ds, args.measure)?;
                match groups.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, v)) => v.extend(values),
                    None => groups.push((key, values)),
                }
            }
            if args.test == StatTest::Anova {
                if groups.len() < 2 {
                    return Err(usage("ANOVA needs at least two groups"));
                }
                let values: Vec<&[f64]> = groups.iter().map(|(_, v)| v.as_slice()).collect();
                let a = one_way_anova(&values).map_err(fatal)?;
                let names: Vec<&str> = groups.iter().map(|(k, _)| k.as_str()).collect();
                table.push_str("measure\tgroups\tdf_between\tdf_within\tf\tp\teta_squared\tss_between\tss_within\n");
                table.push_str(&format!(
                    "{measure}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    names.join(","),
                    a.df_between,
                    a.df_within,
                    a.f,
                    a.p,
                    a.eta_squared,
                    a.ss_between,
                    a.ss_within
                ));
                let p = if a.p < 0.001 { "p < .001".to_string() } else { format!("p = {}", apa_decimal(a.p)) };
                summary_line = format!(
                    "F({}, {}) = {:.2}, {p}, eta2 = {}",
                    grouped(a.df_between),
                    grouped(a.df_within),
                    a.f,
                    apa_decimal(a.eta_squared)
                );
            } else {
                table.push_str("group\tmeasure\tn\tmean\tsd\tmin\tq1\tmedian\tq3\tmax\n");
                for (key, values) in &groups {
                    table.push_str(&format!("{key}\t{measure}\t{}\n", describe_cells(values, ctx.sd_mode)));
                }
            }
        }
        StatTest::Pearson => {
            table.push_str("scope\tmeasure\tn\tr\tp\n");
            let (mut all_x, mut all_y) = (Vec::new(), Vec::new());
            let push_row = |scope: &str, x: &[f64], y: &[f64], table: &mut String| -> Result<(), CliError> {
                let c = pearson(x, y).map_err(|e| fatal(format!("{scope}: {e}")))?;
                table.push_str(&format!("{scope}\t{measure}\t{}\t{}\t{}\n", c.n, c.r, c.p));
                Ok(())
            };
            for ds in &datasets {
                let (x, y) = ctx.pairs_xy(ds, args.measure)?;
                push_row(&ds.respondent_id(), &x, &y, &mut table)?;
                all_x.extend(x);
                all_y.extend(y);
            }
            if datasets.len() > 1 {
                push_row("pooled", &all_x, &all_y, &mut table)?;
            }
        }
    }
    match &args.out {
        Some(path) => write_file(path, |w| w.write_all(table.as_bytes()))?,
        None => print!("{table}"),
    }
    if !summary_line.is_empty() {
        eprintln!("{summary_line}");
    }
    Ok(())
}

fn report(args: ReportArgs, file: &FileConfig) -> Result<(), CliError> {
    let analysis = resolve_analysis(&args.analysis, file)?;
    let reference = args.reference.as_deref().map(load_dataset).transpose()?;
    let datasets = args.datasets.iter().map(|p| load_dataset(p)).collect::<Result<Vec<_>, _>>()?;
    let cues = args.cues.as_deref().map(read_cue_list).transpose()?;
    let norms = load_norms(&args.norms, file, false)?;
    let inputs = ReportInputs {
        reference: reference.as_ref(),
        datasets: &datasets,
        norms: norms.as_ref(),
        cues: cues.as_deref(),
    };
    let bundle = build_report(args.kind, &inputs, &analysis.report).map_err(|e| match e {
        crate::report::ReportError::MissingInput { .. } | crate::report::ReportError::NoSeries { .. } => usage(e.to_string()),
        other => fatal(other),
    })?;
    let written = emit_report(&bundle, &args.out).map_err(fatal)?;
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_grouping() {
        assert_eq!(grouped(30056), "30,056");
        assert_eq!(grouped(3), "3");
        assert_eq!(grouped(1234567), "1,234,567");
    }

    #[test]
    fn layering_prefers_flags() {
        let file: FileConfig = toml::from_str("rank = 2\nsd_mode = \"sample\"\nbins = 5\n").unwrap();
        let a = resolve_analysis(&AnalysisArgs::default(), &file).unwrap();
        assert_eq!(a.rank, Rank::R2);
        assert_eq!(a.report.sd_mode, SdMode::Sample);
        assert_eq!(a.report.frequency_bins.n_bins, 5);
        let flags = AnalysisArgs { rank: Some(Rank::R1), bins: Some(7), ..Default::default() };
        let a = resolve_analysis(&flags, &file).unwrap();
        assert_eq!(a.rank, Rank::R1);
        assert_eq!(a.report.frequency_bins.n_bins, 7);
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }

    #[test]
    fn generation_section_layers() {
        let file: FileConfig = toml::from_str("seed = 4\n[generation]\nmodel_name = \"m\"\nrepetitions = 20\n").unwrap();
        let args = Cli::try_parse_from(["wordassoc", "generate", "--cues", "c.txt", "--repetitions", "5"]).unwrap();
        let Command::Generate(g) = args.command else { panic!() };
        let c = generation_config(&g, &file);
        assert_eq!((c.model_name.as_str(), c.repetitions, c.seed), ("m", 5, Some(4)));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["wordassoc", "--no-such-flag"]), 2);
        assert_eq!(run(["wordassoc", "generate", "--cues", "x.txt", "--out", "y.tsv"]), 2);
        assert_eq!(run(["wordassoc", "typicality", "--dataset", "/nonexistent", "--reference", "/nonexistent", "--out", "/tmp/x"]), 1);
        assert_eq!(run(["wordassoc", "--help"]), 0);
    }
}
