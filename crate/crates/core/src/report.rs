//! Data behind each figure and table: TSV payloads plus a JSON metadata
//! sidecar naming every option that shaped them. Plotting is left to other
//! tools.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fsutil::write_atomic;
use crate::lexical::{bin_profile, unique_pair_measures, BinProfile, BinSpec, LexicalError, PairMeasure};
use crate::model::{AssociationDataset, Rank};
use crate::norms::LexicalNorms;
use crate::stats::{describe, one_way_anova, apa_decimal, pearson, SdMode, StatsError, QUARTILE_METHOD};
use crate::typicality::{dataset_summary, DatasetSummary};

pub const DEGENERATE_RULE: &str =
    "cues whose reference R-rank responses all have equal counts (strength SD = 0) are excluded from typicality means and counted";
pub const FREQUENCY_MEASURE: &str = "total corpus occurrences; tokens absent from the frequency norms count as 1";
pub const TOT_R1_DEFINITION: &str = "distinct response words across answered cues (distinct cue-response pairs reported separately)";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{kind} needs {what}")]
    MissingInput { kind: ReportKind, what: &'static str },
    #[error("{kind}: no respondent datasets given")]
    NoSeries { kind: ReportKind },
    #[error(transparent)]
    Lexical(#[from] LexicalError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("table {table}: row {row} has {got} fields, header has {want}")]
    Shape { table: String, row: usize, got: usize, want: usize },
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Fig1FreqDist,
    Fig2FreqBins,
    Fig3ConcrDist,
    Fig4ConcrBins,
    Fig5VarTyp,
    Fig6Scatter,
    Table1,
    AppendixAnova,
    AppendixDists,
}

impl ReportKind {
    pub const ALL: [ReportKind; 9] = [
        ReportKind::Fig1FreqDist,
        ReportKind::Fig2FreqBins,
        ReportKind::Fig3ConcrDist,
        ReportKind::Fig4ConcrBins,
        ReportKind::Fig5VarTyp,
        ReportKind::Fig6Scatter,
        ReportKind::Table1,
        ReportKind::AppendixAnova,
        ReportKind::AppendixDists,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Fig1FreqDist => "fig1_freq_dist",
            ReportKind::Fig2FreqBins => "fig2_freq_bins",
            ReportKind::Fig3ConcrDist => "fig3_concr_dist",
            ReportKind::Fig4ConcrBins => "fig4_concr_bins",
            ReportKind::Fig5VarTyp => "fig5_var_typ",
            ReportKind::Fig6Scatter => "fig6_scatter",
            ReportKind::Table1 => "table1",
            ReportKind::AppendixAnova => "appendix_anova",
            ReportKind::AppendixDists => "appendix_dists",
        }
    }

    fn needs_norms(self) -> bool {
        !matches!(self, ReportKind::Fig5VarTyp | ReportKind::Fig6Scatter | ReportKind::Table1)
    }

    fn needs_reference(self) -> bool {
        matches!(self, ReportKind::Fig5VarTyp | ReportKind::Fig6Scatter | ReportKind::Table1)
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReportKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown report kind {s:?}"))
    }
}

/// Options that change report payloads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportOptions {
    pub rank: Rank,
    pub sd_mode: SdMode,
    pub frequency_bins: BinSpec,
    pub concreteness_bins: BinSpec,
    /// Significance level below which appendix tables print η².
    pub alpha: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            rank: Rank::R1,
            sd_mode: SdMode::Population,
            frequency_bins: BinSpec::frequency_default(),
            concreteness_bins: BinSpec::concreteness_default(),
            alpha: 0.05,
        }
    }
}

impl ReportOptions {
    /// SHA-256 of the options as JSON.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("options serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

pub struct ReportInputs<'a> {
    /// Human reference; also the first series of every figure.
    pub reference: Option<&'a AssociationDataset>,
    pub datasets: &'a [AssociationDataset],
    pub norms: Option<&'a LexicalNorms>,
    /// Cue set for variability and typicality; defaults to the reference cues.
    pub cues: Option<&'a [String]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write_tsv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{}", self.header.join("\t"))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join("\t"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RespondentMeta {
    pub label: String,
    pub temperature: Option<f64>,
    pub instances: usize,
    pub cues: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub kind: ReportKind,
    pub rank: Rank,
    pub sd_mode: SdMode,
    pub quartile_method: &'static str,
    pub frequency_bins: BinSpec,
    pub concreteness_bins: BinSpec,
    pub degenerate_rule: &'static str,
    pub frequency_measure: &'static str,
    pub tot_r1_definition: &'static str,
    pub alpha: f64,
    pub reference: Option<RespondentMeta>,
    pub respondents: Vec<RespondentMeta>,
    pub cue_count: Option<usize>,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub kind: ReportKind,
    /// The first table is the primary payload.
    pub tables: Vec<Table>,
    /// Plain-text rendering, for tables that have a printed form.
    pub text: Option<String>,
    pub metadata: ReportMetadata,
}

impl ReportBundle {
    pub fn validate(&self) -> Result<(), ReportError> {
        for table in &self.tables {
            for (i, row) in table.rows.iter().enumerate() {
                if row.len() != table.header.len() {
                    return Err(ReportError::Shape {
                        table: table.name.clone(),
                        row: i + 1,
                        got: row.len(),
                        want: table.header.len(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "NA".into())
}

fn temp(ds: &AssociationDataset) -> String {
    ds.temperature().map(num).unwrap_or_default()
}

fn meta_of(ds: &AssociationDataset) -> RespondentMeta {
    RespondentMeta {
        label: ds.label().to_string(),
        temperature: ds.temperature(),
        instances: ds.len(),
        cues: ds.cue_count(),
    }
}

const BOX_COLUMNS: [&str; 7] = ["min", "q1", "median", "q3", "max", "mean", "n"];

fn box_fields(values: &[f64]) -> Vec<String> {
    match describe(values) {
        Ok(d) => vec![num(d.min), num(d.q1), num(d.median), num(d.q3), num(d.max), num(d.mean), d.n.to_string()],
        Err(_) => {
            let mut v = vec!["NA".to_string(); 6];
            v.push("0".into());
            v
        }
    }
}

fn with_box(prefix: &[&str]) -> Vec<String> {
    prefix.iter().chain(BOX_COLUMNS.iter()).map(|s| s.to_string()).collect()
}

fn freq_values(m: &[PairMeasure]) -> Vec<f64> {
    m.iter().map(|p| p.log2_freq_ratio).collect()
}

fn concr_values(m: &[PairMeasure]) -> Vec<f64> {
    m.iter().filter_map(|p| p.concreteness_ratio).collect()
}

/// Assembles the bundle for `kind`.
pub fn build_report(kind: ReportKind, inputs: &ReportInputs<'_>, options: &ReportOptions) -> Result<ReportBundle, ReportError> {
    let series: Vec<&AssociationDataset> = inputs.reference.into_iter().chain(inputs.datasets.iter()).collect();
    if series.is_empty() {
        return Err(ReportError::NoSeries { kind });
    }
    if kind.needs_norms() && inputs.norms.is_none() {
        return Err(ReportError::MissingInput { kind, what: "lexical norms (--freq-norms and --concr-norms)" });
    }
    if kind.needs_reference() && inputs.reference.is_none() {
        return Err(ReportError::MissingInput { kind, what: "a human reference dataset (--reference)" });
    }
    let default_cues: Vec<String>;
    let cues: &[String] = match (inputs.cues, inputs.reference) {
        (Some(c), _) => c,
        (None, Some(r)) => {
            default_cues = r.cues().map(str::to_string).collect();
            &default_cues
        }
        (None, None) => &[],
    };

    let mut text = None;
    let tables = match kind {
        ReportKind::Fig1FreqDist | ReportKind::Fig3ConcrDist => {
            let norms = inputs.norms.expect("checked");
            let freq = kind == ReportKind::Fig1FreqDist;
            let name = if freq { "log2_freq_ratio" } else { "concreteness_ratio" };
            let mut t = Table::new(kind.name(), &[]);
            t.header = with_box(&["respondent", "temperature", "measure"]);
            for ds in &series {
                let m = unique_pair_measures(ds, options.rank, norms);
                let values = if freq { freq_values(&m) } else { concr_values(&m) };
                let mut row = vec![ds.label().to_string(), temp(ds), name.to_string()];
                row.extend(box_fields(&values));
                t.push(row);
            }
            vec![t]
        }
        ReportKind::Fig2FreqBins | ReportKind::Fig4ConcrBins => {
            let norms = inputs.norms.expect("checked");
            let spec = if kind == ReportKind::Fig2FreqBins { &options.frequency_bins } else { &options.concreteness_bins };
            let mut t = Table::new(
                kind.name(),
                &["respondent", "temperature", "bin", "lower", "upper", "cue_count", "pair_count", "mean_measure"],
            );
            let mut coverage =
                Table::new("coverage", &["respondent", "temperature", "binned_cues", "out_of_range_cues"]);
            for ds in &series {
                let profile: BinProfile = bin_profile(&unique_pair_measures(ds, options.rank, norms), spec, norms)?;
                for (i, b) in profile.bins.iter().enumerate() {
                    t.push(vec![
                        ds.label().to_string(),
                        temp(ds),
                        (i + 1).to_string(),
                        num(b.lower),
                        num(b.upper),
                        b.cue_count.to_string(),
                        b.pair_count.to_string(),
                        opt_num(b.mean_measure),
                    ]);
                }
                coverage.push(vec![
                    ds.label().to_string(),
                    temp(ds),
                    profile.binned_cues().to_string(),
                    profile.out_of_range.to_string(),
                ]);
            }
            vec![t, coverage]
        }
        ReportKind::Fig5VarTyp => {
            let reference = inputs.reference.expect("checked");
            let mut t = Table::new(kind.name(), &[]);
            t.header = with_box(&["respondent", "temperature", "measure"]);
            for ds in &series {
                let s = dataset_summary(ds, reference, cues, options.rank, options.sd_mode);
                let variability: Vec<f64> =
                    s.per_cue.iter().filter(|c| c.variability > 0).map(|c| c.variability as f64).collect();
                let tok: Vec<f64> = s.per_cue.iter().filter_map(|c| c.tok_ss1).collect();
                for (name, values) in [("variability", variability), ("tok_ss1", tok)] {
                    let mut row = vec![ds.label().to_string(), temp(ds), name.to_string()];
                    row.extend(box_fields(&values));
                    t.push(row);
                }
            }
            vec![t]
        }
        ReportKind::Fig6Scatter => {
            let reference = inputs.reference.expect("checked");
            let mut t = Table::new(kind.name(), &["respondent", "temperature", "avg_r1", "tok_ss1_mean"]);
            let mut corr = Table::new("correlation", &["scope", "n", "r", "p"]);
            let mut pooled: (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
            for ds in &series {
                let s = dataset_summary(ds, reference, cues, options.rank, options.sd_mode);
                t.push(vec![
                    ds.label().to_string(),
                    temp(ds),
                    num(s.aggregate.avg_variability),
                    opt_num(s.aggregate.tok_ss1_mean),
                ]);
                let (x, y) = variability_typicality_points(&s);
                if !ds.is_human() {
                    pooled.0.extend(&x);
                    pooled.1.extend(&y);
                }
                corr.push(correlation_row(&ds.respondent_id(), &x, &y));
            }
            corr.push(correlation_row("models_pooled", &pooled.0, &pooled.1));
            vec![t, corr]
        }
        ReportKind::Table1 => {
            let reference = inputs.reference.expect("checked");
            let mut t = Table::new(
                kind.name(),
                &[
                    "respondent",
                    "temperature",
                    "avg_r1",
                    "tot_r1",
                    "tot_pairs",
                    "tok_ss1_mean",
                    "tok_ss1_sd",
                    "typ_ss1_mean",
                    "typ_ss1_sd",
                    "answered_cues",
                    "typicality_cues",
                    "skipped_degenerate",
                    "skipped_missing",
                ],
            );
            for ds in &series {
                let a = dataset_summary(ds, reference, cues, options.rank, options.sd_mode).aggregate;
                t.push(vec![
                    a.respondent,
                    temp(ds),
                    num(a.avg_variability),
                    a.total_unique_responses.to_string(),
                    a.total_unique_pairs.to_string(),
                    opt_num(a.tok_ss1_mean),
                    opt_num(a.tok_ss1_sd),
                    opt_num(a.typ_ss1_mean),
                    opt_num(a.typ_ss1_sd),
                    a.answered_cues.to_string(),
                    a.typicality_cues.to_string(),
                    a.skipped_degenerate.to_string(),
                    a.skipped_missing.to_string(),
                ]);
            }
            vec![t]
        }
        ReportKind::AppendixAnova => {
            let norms = inputs.norms.expect("checked");
            let (table, rendered) = temperature_anova(inputs.datasets, norms, options)?;
            text = Some(rendered);
            vec![table]
        }
        ReportKind::AppendixDists => {
            let norms = inputs.norms.expect("checked");
            let mut t = Table::new(kind.name(), &[]);
            t.header = with_box(&["respondent", "temperature", "measure"]);
            for ds in &series {
                let m = unique_pair_measures(ds, options.rank, norms);
                for (name, values) in [("log2_freq_ratio", freq_values(&m)), ("concreteness_ratio", concr_values(&m))] {
                    let mut row = vec![ds.label().to_string(), temp(ds), name.to_string()];
                    row.extend(box_fields(&values));
                    t.push(row);
                }
            }
            vec![t]
        }
    };

    let metadata = ReportMetadata {
        kind,
        rank: options.rank,
        sd_mode: options.sd_mode,
        quartile_method: QUARTILE_METHOD,
        frequency_bins: options.frequency_bins,
        concreteness_bins: options.concreteness_bins,
        degenerate_rule: DEGENERATE_RULE,
        frequency_measure: FREQUENCY_MEASURE,
        tot_r1_definition: TOT_R1_DEFINITION,
        alpha: options.alpha,
        reference: inputs.reference.map(meta_of),
        respondents: inputs.datasets.iter().map(meta_of).collect(),
        cue_count: (!cues.is_empty()).then_some(cues.len()),
        config_hash: options.config_hash(),
    };
    let bundle = ReportBundle { kind, tables, text, metadata };
    bundle.validate()?;
    Ok(bundle)
}

/// Per-cue (variability, tok-SS1) points for cues with a typicality value.
pub fn variability_typicality_points(summary: &DatasetSummary) -> (Vec<f64>, Vec<f64>) {
    summary
        .per_cue
        .iter()
        .filter_map(|c| c.tok_ss1.map(|t| (c.variability as f64, t)))
        .unzip()
}

fn correlation_row(scope: &str, x: &[f64], y: &[f64]) -> Vec<String> {
    match pearson(x, y) {
        Ok(c) => vec![scope.to_string(), c.n.to_string(), num(c.r), num(c.p)],
        Err(_) => vec![scope.to_string(), x.len().to_string(), "NA".into(), "NA".into()],
    }
}

/// One-way ANOVA of each model's relative measures across its temperatures.
/// Models with fewer than two temperatures are left out.
fn temperature_anova(
    datasets: &[AssociationDataset],
    norms: &LexicalNorms,
    options: &ReportOptions,
) -> Result<(Table, String), ReportError> {
    let mut by_model: BTreeMap<&str, Vec<&AssociationDataset>> = BTreeMap::new();
    for ds in datasets.iter().filter(|d| !d.is_human()) {
        by_model.entry(ds.label()).or_default().push(ds);
    }
    let mut table = Table::new(
        ReportKind::AppendixAnova.name(),
        &["model", "measure", "temperatures", "df_between", "df_within", "f", "p", "eta_squared"],
    );
    let mut sections: BTreeMap<&str, Vec<(String, String, String, String)>> = BTreeMap::new();
    for (model, mut runs) in by_model {
        runs.sort_by(|a, b| a.temperature().partial_cmp(&b.temperature()).expect("finite temperatures"));
        if runs.len() < 2 {
            log::warn!("model {model} has a single temperature; no ANOVA");
            continue;
        }
        let measures: Vec<Vec<PairMeasure>> = runs.iter().map(|ds| unique_pair_measures(ds, options.rank, norms)).collect();
        let temps = runs.iter().map(|d| temp(d)).collect::<Vec<_>>().join(",");
        for measure in ["log2_freq_ratio", "concreteness_ratio"] {
            let groups: Vec<Vec<f64>> = measures
                .iter()
                .map(|m| if measure == "log2_freq_ratio" { freq_values(m) } else { concr_values(m) })
                .collect();
            let a = one_way_anova(&groups)?;
            table.push(vec![
                model.to_string(),
                measure.to_string(),
                temps.clone(),
                a.df_between.to_string(),
                a.df_within.to_string(),
                num(a.f),
                num(a.p),
                num(a.eta_squared),
            ]);
            let eta = if a.p < options.alpha { apa_decimal(a.eta_squared) } else { "-".to_string() };
            sections.entry(measure).or_default().push((
                model.to_string(),
                format!("{:.2}", a.f).trim_start_matches('0').to_string(),
                apa_decimal(a.p),
                eta,
            ));
        }
    }
    let mut text = String::new();
    for (measure, rows) in sections {
        text.push_str(&format!("Effect of temperature on {measure}\n"));
        text.push_str(&format!("{:<16} {:>10} {:>6} {:>6}\n", "Model", "F", "p", "eta2"));
        for (model, f, p, eta) in rows {
            text.push_str(&format!("{model:<16} {f:>10} {p:>6} {eta:>6}\n"));
        }
        text.push('\n');
    }
    Ok((table, text))
}

/// Sibling path `{stem}.{suffix}` next to `out`.
pub fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}.{suffix}"))
}

/// Writes the primary table to `out`, further tables to `{stem}.{name}.tsv`,
/// metadata to `{stem}.meta.json` and any text form to `{stem}.txt`. Returns
/// the written paths.
pub fn emit_report(bundle: &ReportBundle, out: &Path) -> Result<Vec<PathBuf>, ReportError> {
    bundle.validate()?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ReportError::Io { path, source }
    };
    let mut written = Vec::new();
    for (i, table) in bundle.tables.iter().enumerate() {
        let path = if i == 0 { out.to_path_buf() } else { sidecar_path(out, &format!("{}.tsv", table.name)) };
        write_atomic(&path, |w| table.write_tsv(w)).map_err(io(&path))?;
        written.push(path);
    }
    let meta = sidecar_path(out, "meta.json");
    write_atomic(&meta, |w| {
        serde_json::to_writer_pretty(&mut *w, &bundle.metadata).map_err(std::io::Error::other)?;
        w.write_all(b"\n")
    })
    .map_err(io(&meta))?;
    written.push(meta);
    if let Some(text) = &bundle.text {
        let path = sidecar_path(out, "txt");
        write_atomic(&path, |w| w.write_all(text.as_bytes())).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AssociationInstance;
    use std::collections::HashMap;

    fn dataset(label: &str, t: Option<f64>, rows: &[(&str, &[&str])]) -> AssociationDataset {
        let mut instances = Vec::new();
        for (cue, responses) in rows {
            for (i, r) in responses.iter().enumerate() {
                instances.push(AssociationInstance::new(*cue, *r, i as u32 + 1, Rank::R1).unwrap());
            }
        }
        AssociationDataset::new(label, t, instances).unwrap()
    }

    fn fixtures() -> (AssociationDataset, Vec<AssociationDataset>, LexicalNorms) {
        let human = dataset(
            "human",
            None,
            &[("beach", &["sand", "sand", "sea", "sun"]), ("dog", &["cat", "cat", "bone", "bark", "bark"])],
        );
        let models = vec![
            dataset("toy", Some(1.0), &[("beach", &["sand", "sand", "sand"]), ("dog", &["cat", "bone", "cat"])]),
            dataset("toy", Some(2.0), &[("beach", &["sea", "sun", "sand"]), ("dog", &["bark", "bone", "tail"])]),
        ];
        let freq: HashMap<String, u64> =
            [("beach", 40), ("dog", 400), ("sand", 80), ("sea", 160), ("cat", 100), ("bone", 50)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
        let conc: HashMap<String, f64> = [("beach", 4.8), ("dog", 4.9), ("sand", 4.9), ("sea", 4.6), ("cat", 4.9), ("bark", 3.9)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        (human, models, LexicalNorms::new(freq, conc))
    }

    fn build(kind: ReportKind) -> ReportBundle {
        let (human, models, norms) = fixtures();
        let inputs = ReportInputs { reference: Some(&human), datasets: &models, norms: Some(&norms), cues: None };
        build_report(kind, &inputs, &ReportOptions::default()).unwrap()
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ReportKind::ALL {
            assert_eq!(kind.name().parse::<ReportKind>().unwrap(), kind);
        }
        assert!("fig7".parse::<ReportKind>().is_err());
    }

    #[test]
    fn table1_rows_per_respondent() {
        let b = build(ReportKind::Table1);
        let t = &b.tables[0];
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[0][0], "human");
        assert_eq!(t.rows[0][1], "");
        // human: beach {sand, sea, sun}, dog {cat, bone, bark} -> avg 3
        assert_eq!(t.rows[0][2], "3");
        assert!(t.rows[0][7].parse::<f64>().unwrap().abs() < 1e-9);
        // toy@1: beach {sand}, dog {cat, bone}
        assert_eq!(t.rows[1][2], "1.5");
        assert_eq!(t.rows[1][3], "3");
    }

    #[test]
    fn fig5_has_two_series_per_respondent() {
        let b = build(ReportKind::Fig5VarTyp);
        assert_eq!(b.tables[0].rows.len(), 6);
        assert_eq!(b.tables[0].header.len(), 3 + BOX_COLUMNS.len());
    }

    #[test]
    fn fig6_rows_and_correlations() {
        let b = build(ReportKind::Fig6Scatter);
        assert_eq!(b.tables[0].rows.len(), 3);
        assert_eq!(b.table("correlation").unwrap().rows.len(), 4);
    }

    #[test]
    fn bins_and_distributions() {
        let b = build(ReportKind::Fig2FreqBins);
        assert_eq!(b.tables[0].rows.len(), 3 * 10);
        let b = build(ReportKind::Fig4ConcrBins);
        assert_eq!(b.tables[0].rows.len(), 3 * 8);
        let b = build(ReportKind::Fig1FreqDist);
        assert_eq!(b.tables[0].rows.len(), 3);
        let b = build(ReportKind::AppendixDists);
        assert_eq!(b.tables[0].rows.len(), 6);
    }

    #[test]
    fn anova_per_model_and_measure() {
        let b = build(ReportKind::AppendixAnova);
        let t = &b.tables[0];
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0][3], "1");
        assert!(b.text.as_ref().unwrap().contains("toy"));
    }

    #[test]
    fn missing_inputs_are_reported() {
        let (human, models, _) = fixtures();
        let inputs = ReportInputs { reference: Some(&human), datasets: &models, norms: None, cues: None };
        assert!(matches!(
            build_report(ReportKind::Fig1FreqDist, &inputs, &ReportOptions::default()),
            Err(ReportError::MissingInput { .. })
        ));
        let inputs = ReportInputs { reference: None, datasets: &models, norms: None, cues: None };
        assert!(build_report(ReportKind::Table1, &inputs, &ReportOptions::default()).is_err());
    }

    #[test]
    fn emit_writes_sidecars_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let b = build(ReportKind::Fig6Scatter);
        let out = dir.path().join("fig6.tsv");
        let paths = emit_report(&b, &out).unwrap();
        assert_eq!(paths.len(), 3);
        assert!(dir.path().join("fig6.correlation.tsv").exists());
        let meta = std::fs::read_to_string(dir.path().join("fig6.meta.json")).unwrap();
        assert!(meta.contains("\"quartile_method\"") && meta.contains("\"sd_mode\": \"population\""));
        let first: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
        emit_report(&build(ReportKind::Fig6Scatter), &out).unwrap();
        let second: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
        assert_eq!(first, second);
    }
}
