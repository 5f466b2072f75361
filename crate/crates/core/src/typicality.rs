//! Associative strength, standardized strength, and the per-token / per-type
//! typicality averages of a dataset's responses against a human reference.
//!
//! For a cue `c`, the reference gives each unique response `r` a strength
//! `S(c, r)`: the share of the cue's response tokens at the chosen rank that
//! are `r`. The standardized strength is the z-score of `S(c, r)` among all
//! reference strengths for `c`; responses the reference never produced have
//! strength 0. A dataset's per-token typicality averages the standardized
//! strength over its response tokens, the per-type typicality over its
//! distinct responses.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::model::{AssociationDataset, Rank};
use crate::stats::{SdMode, Welford};

#[derive(Debug, Error, PartialEq)]
pub enum TypicalityError {
    #[error("reference has no responses for cue {cue:?} at rank {rank}")]
    MissingProfile { cue: String, rank: Rank },
    #[error("reference strengths for cue {0:?} have zero spread")]
    Degenerate(String),
    #[error("dataset has no responses for cue {cue:?} at rank {rank}")]
    NoInstances { cue: String, rank: Rank },
}

/// Reference strength distribution for one cue.
#[derive(Debug, Clone, PartialEq)]
pub struct CueStrengthProfile {
    pub cue: String,
    pub rank: Rank,
    pub counts: BTreeMap<String, usize>,
    pub strengths: BTreeMap<String, f64>,
    /// Always 1 / number of unique responses.
    pub mean_strength: f64,
    pub sd_strength: f64,
    pub sd_mode: SdMode,
    pub response_token_total: usize,
}

impl CueStrengthProfile {
    /// Builds a profile from response counts.
    pub fn from_counts<'a>(
        cue: &str,
        rank: Rank,
        counts: impl IntoIterator<Item = (&'a str, usize)>,
        sd_mode: SdMode,
    ) -> Result<Self, TypicalityError> {
        let counts: BTreeMap<String, usize> =
            counts.into_iter().filter(|(_, n)| *n > 0).map(|(r, n)| (r.to_string(), n)).collect();
        let total: usize = counts.values().sum();
        if total == 0 {
            return Err(TypicalityError::MissingProfile { cue: cue.to_string(), rank });
        }
        let strengths: BTreeMap<String, f64> =
            counts.iter().map(|(r, &n)| (r.clone(), n as f64 / total as f64)).collect();
        let k = counts.len();
        let mean_strength = 1.0 / k as f64;
        let all_equal = counts.values().all(|&n| n == *counts.values().next().expect("non-empty"));
        let sd_strength = if all_equal {
            0.0
        } else {
            let ss: f64 = strengths.values().map(|s| (s - mean_strength).powi(2)).sum();
            let denom = match sd_mode {
                SdMode::Population => k as f64,
                SdMode::Sample => (k - 1) as f64,
            };
            (ss / denom).sqrt()
        };
        Ok(Self {
            cue: cue.to_string(),
            rank,
            counts,
            strengths,
            mean_strength,
            sd_strength,
            sd_mode,
            response_token_total: total,
        })
    }

    /// True when every reference response has the same strength, which
    /// includes the single-response case.
    pub fn is_degenerate(&self) -> bool {
        self.sd_strength == 0.0
    }

    pub fn unique_responses(&self) -> usize {
        self.counts.len()
    }

    /// Strength of `response`, 0 when the reference never produced it.
    pub fn strength(&self, response: &str) -> f64 {
        self.strengths.get(response).copied().unwrap_or(0.0)
    }
}

/// Reference strength profile of `cue` at `rank` (population SD).
pub fn associative_strength(
    reference: &AssociationDataset,
    cue: &str,
    rank: Rank,
) -> Result<CueStrengthProfile, TypicalityError> {
    associative_strength_with(reference, cue, rank, SdMode::Population)
}

pub fn associative_strength_with(
    reference: &AssociationDataset,
    cue: &str,
    rank: Rank,
    sd_mode: SdMode,
) -> Result<CueStrengthProfile, TypicalityError> {
    CueStrengthProfile::from_counts(cue, rank, reference.response_counts(cue, rank), sd_mode)
}

/// z-score of the response's reference strength within the cue's profile.
pub fn standardized_strength(profile: &CueStrengthProfile, response: &str) -> Result<f64, TypicalityError> {
    if profile.is_degenerate() {
        return Err(TypicalityError::Degenerate(profile.cue.clone()));
    }
    Ok((profile.strength(response) - profile.mean_strength) / profile.sd_strength)
}

fn dataset_counts<'a>(
    dataset: &'a AssociationDataset,
    profile: &CueStrengthProfile,
) -> Result<BTreeMap<&'a str, usize>, TypicalityError> {
    if profile.is_degenerate() {
        return Err(TypicalityError::Degenerate(profile.cue.clone()));
    }
    let counts = dataset.response_counts(&profile.cue, profile.rank);
    if counts.is_empty() {
        return Err(TypicalityError::NoInstances { cue: profile.cue.clone(), rank: profile.rank });
    }
    Ok(counts)
}

/// Mean standardized strength over the dataset's response tokens for the
/// profile's cue and rank.
pub fn tok_ss1(dataset: &AssociationDataset, profile: &CueStrengthProfile) -> Result<f64, TypicalityError> {
    let counts = dataset_counts(dataset, profile)?;
    let tokens: usize = counts.values().sum();
    let mut sum = 0.0;
    for (response, n) in counts {
        sum += n as f64 * standardized_strength(profile, response)?;
    }
    Ok(sum / tokens as f64)
}

/// Mean standardized strength over the dataset's distinct responses.
pub fn typ_ss1(dataset: &AssociationDataset, profile: &CueStrengthProfile) -> Result<f64, TypicalityError> {
    let counts = dataset_counts(dataset, profile)?;
    let types = counts.len();
    let mut sum = 0.0;
    for response in counts.keys() {
        sum += standardized_strength(profile, response)?;
    }
    Ok(sum / types as f64)
}

/// Why a cue has no typicality values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    DegenerateReference,
    MissingReference,
    NoResponses,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CueTypicalitySummary {
    pub cue: String,
    /// Number of distinct responses in the dataset at the chosen rank.
    pub variability: usize,
    pub tok_ss1: Option<f64>,
    pub typ_ss1: Option<f64>,
    pub skipped: Option<SkipReason>,
}

/// Table-style aggregate over a cue set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub respondent: String,
    pub temperature: Option<f64>,
    /// Cues with at least one response in the dataset.
    pub answered_cues: usize,
    pub avg_variability: f64,
    /// Distinct response words across all answered cues.
    pub total_unique_responses: usize,
    /// Distinct (cue, response) pairs across all answered cues.
    pub total_unique_pairs: usize,
    pub tok_ss1_mean: Option<f64>,
    pub tok_ss1_sd: Option<f64>,
    pub typ_ss1_mean: Option<f64>,
    pub typ_ss1_sd: Option<f64>,
    /// Cues contributing to the typicality means.
    pub typicality_cues: usize,
    pub skipped_degenerate: usize,
    pub skipped_missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub per_cue: Vec<CueTypicalitySummary>,
    pub aggregate: AggregateRow,
}

/// Per-cue variability and typicality of `dataset` against `reference`, plus
/// the aggregate over `cues`. Cues are processed in sorted order; degenerate
/// or missing reference cues are excluded from the typicality means and
/// counted. `sd_mode` applies to both the strength z-scores and the spread of
/// the per-cue values.
pub fn dataset_summary<S: AsRef<str>>(
    dataset: &AssociationDataset,
    reference: &AssociationDataset,
    cues: &[S],
    rank: Rank,
    sd_mode: SdMode,
) -> DatasetSummary {
    let cue_set: BTreeSet<&str> = cues.iter().map(AsRef::as_ref).collect();
    let mut per_cue = Vec::with_capacity(cue_set.len());
    let mut words: BTreeSet<&str> = BTreeSet::new();
    let mut pairs = 0usize;
    let mut answered = 0usize;
    let mut variability_sum = 0usize;
    let mut tok = Welford::default();
    let mut typ = Welford::default();
    let (mut degenerate, mut missing) = (0, 0);

    for cue in cue_set {
        let responses = dataset.unique_responses(cue, rank);
        let variability = responses.len();
        if variability > 0 {
            answered += 1;
            variability_sum += variability;
            pairs += variability;
            words.extend(responses.iter().copied());
        }
        let mut summary = CueTypicalitySummary { cue: cue.to_string(), variability, tok_ss1: None, typ_ss1: None, skipped: None };
        match associative_strength_with(reference, cue, rank, sd_mode) {
            Err(_) => {
                summary.skipped = Some(SkipReason::MissingReference);
                missing += 1;
            }
            Ok(profile) if profile.is_degenerate() => {
                summary.skipped = Some(SkipReason::DegenerateReference);
                degenerate += 1;
            }
            Ok(profile) => match (tok_ss1(dataset, &profile), typ_ss1(dataset, &profile)) {
                (Ok(t), Ok(y)) => {
                    tok.push(t);
                    typ.push(y);
                    summary.tok_ss1 = Some(t);
                    summary.typ_ss1 = Some(y);
                }
                _ => summary.skipped = Some(SkipReason::NoResponses),
            },
        }
        per_cue.push(summary);
    }

    let mean_of = |w: &Welford| (w.count() > 0).then(|| w.mean());
    let aggregate = AggregateRow {
        respondent: dataset.label().to_string(),
        temperature: dataset.temperature(),
        answered_cues: answered,
        avg_variability: if answered > 0 { variability_sum as f64 / answered as f64 } else { 0.0 },
        total_unique_responses: words.len(),
        total_unique_pairs: pairs,
        tok_ss1_mean: mean_of(&tok),
        tok_ss1_sd: tok.sd(sd_mode),
        typ_ss1_mean: mean_of(&typ),
        typ_ss1_sd: typ.sd(sd_mode),
        typicality_cues: tok.count(),
        skipped_degenerate: degenerate,
        skipped_missing: missing,
    };
    DatasetSummary { per_cue, aggregate }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into())
}

/// Per-cue TSV: `cue\tvariability\ttok_ss1\ttyp_ss1\tdegenerate_flag`.
pub fn write_per_cue<W: std::io::Write>(mut out: W, rows: &[CueTypicalitySummary]) -> std::io::Result<()> {
    writeln!(out, "cue\tvariability\ttok_ss1\ttyp_ss1\tdegenerate_flag")?;
    for r in rows {
        let flag = u8::from(r.skipped == Some(SkipReason::DegenerateReference));
        writeln!(out, "{}\t{}\t{}\t{}\t{}", r.cue, r.variability, opt(r.tok_ss1), opt(r.typ_ss1), flag)?;
    }
    Ok(())
}
