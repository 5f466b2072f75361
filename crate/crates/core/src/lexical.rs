//! Response-to-cue relative frequency and concreteness over unique pairs, and
//! their profiles across equal-width bins of cue frequency or concreteness.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::model::{AssociationDataset, Rank};
use crate::norms::LexicalNorms;

#[derive(Debug, Error, PartialEq)]
pub enum LexicalError {
    #[error("bin count must be at least 1")]
    NoBins,
    #[error("no measures to bin")]
    EmptyMeasures,
    #[error("invalid bin range [{0}, {1}]")]
    InvalidRange(f64, f64),
}

/// log2(freq(response) / freq(cue)), with absent tokens at frequency 1.
pub fn relative_frequency(cue: &str, response: &str, norms: &LexicalNorms) -> f64 {
    (norms.lookup_frequency(response) as f64).log2() - (norms.lookup_frequency(cue) as f64).log2()
}

/// concreteness(response) / concreteness(cue), when both are rated.
pub fn relative_concreteness(cue: &str, response: &str, norms: &LexicalNorms) -> Option<f64> {
    Some(norms.concreteness(response)? / norms.concreteness(cue)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairMeasure {
    pub cue: String,
    pub response: String,
    pub log2_freq_ratio: f64,
    pub concreteness_ratio: Option<f64>,
}

/// One measure per distinct (cue, response) pair at `rank`, sorted by cue
/// then response.
pub fn unique_pair_measures(dataset: &AssociationDataset, rank: Rank, norms: &LexicalNorms) -> Vec<PairMeasure> {
    let mut out = Vec::new();
    for cue in dataset.cues() {
        for response in dataset.unique_responses(cue, rank) {
            out.push(PairMeasure {
                cue: cue.to_string(),
                response: response.to_string(),
                log2_freq_ratio: relative_frequency(cue, response, norms),
                concreteness_ratio: relative_concreteness(cue, response, norms),
            });
        }
    }
    out
}

/// Writes the pair-measure table; missing concreteness ratios print as `NA`.
pub fn write_pair_measures<W: std::io::Write>(mut out: W, measures: &[PairMeasure]) -> std::io::Result<()> {
    writeln!(out, "cue\tresponse\tlog2_freq_ratio\tconcreteness_ratio")?;
    for m in measures {
        let conc = m.concreteness_ratio.map(|v| v.to_string()).unwrap_or_else(|| "NA".into());
        writeln!(out, "{}\t{}\t{}\t{}", m.cue, m.response, m.log2_freq_ratio, conc)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BinAxis {
    /// log2 of the cue's corpus frequency; bins the log2 frequency ratio.
    CueLogFrequency,
    /// Raw cue concreteness rating; bins the concreteness ratio.
    CueConcreteness,
}

impl fmt::Display for BinAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinAxis::CueLogFrequency => "cue_log_frequency",
            BinAxis::CueConcreteness => "cue_concreteness",
        })
    }
}

/// Whether bin means weight every unique pair once or every cue once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BinMean {
    #[default]
    Pairs,
    Cues,
}

impl FromStr for BinMean {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pairs" => Ok(BinMean::Pairs),
            "cues" => Ok(BinMean::Cues),
            other => Err(format!("unknown bin mean mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BinRange {
    /// Span the observed minimum and maximum axis values.
    Observed,
    Fixed { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinSpec {
    pub axis: BinAxis,
    pub n_bins: usize,
    pub range: BinRange,
    pub mean: BinMean,
}

impl BinSpec {
    /// 10 bins over the observed log2 cue-frequency range.
    pub fn frequency_default() -> Self {
        Self { axis: BinAxis::CueLogFrequency, n_bins: 10, range: BinRange::Observed, mean: BinMean::Pairs }
    }

    /// 8 bins of width 0.5 over the [1, 5] rating scale.
    pub fn concreteness_default() -> Self {
        Self {
            axis: BinAxis::CueConcreteness,
            n_bins: 8,
            range: BinRange::Fixed { lower: 1.0, upper: 5.0 },
            mean: BinMean::Pairs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub cue_count: usize,
    pub pair_count: usize,
    /// `None` for empty bins.
    pub mean_measure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinProfile {
    pub axis: BinAxis,
    pub mean: BinMean,
    pub bins: Vec<Bin>,
    /// Cues outside a fixed range.
    pub out_of_range: usize,
}

impl BinProfile {
    pub fn binned_cues(&self) -> usize {
        self.bins.iter().map(|b| b.cue_count).sum()
    }
}

/// Assigns each cue to an equal-width bin along `spec.axis` and averages the
/// matching relative measure per bin. The last bin is closed on the right.
pub fn bin_profile(measures: &[PairMeasure], spec: &BinSpec, norms: &LexicalNorms) -> Result<BinProfile, LexicalError> {
    if spec.n_bins < 1 {
        return Err(LexicalError::NoBins);
    }
    if measures.is_empty() {
        return Err(LexicalError::EmptyMeasures);
    }

    // cue -> (axis value, measures)
    let mut per_cue: BTreeMap<&str, (f64, Vec<f64>)> = BTreeMap::new();
    for m in measures {
        let (axis_value, measure) = match spec.axis {
            BinAxis::CueLogFrequency => ((norms.lookup_frequency(&m.cue) as f64).log2(), Some(m.log2_freq_ratio)),
            BinAxis::CueConcreteness => match norms.concreteness(&m.cue) {
                Some(c) => (c, m.concreteness_ratio),
                None => continue,
            },
        };
        if let Some(v) = measure {
            per_cue.entry(&m.cue).or_insert_with(|| (axis_value, Vec::new())).1.push(v);
        }
    }

    let (lower, upper) = match spec.range {
        BinRange::Fixed { lower, upper } => {
            if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                return Err(LexicalError::InvalidRange(lower, upper));
            }
            (lower, upper)
        }
        BinRange::Observed => {
            if per_cue.is_empty() {
                return Err(LexicalError::EmptyMeasures);
            }
            per_cue.values().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (v, _)| (lo.min(*v), hi.max(*v)))
        }
    };

    // A zero-width observed range collapses to one bin holding every cue.
    let n_bins = if upper > lower { spec.n_bins } else { 1 };
    let width = (upper - lower) / n_bins as f64;
    let mut members: Vec<Vec<&[f64]>> = vec![Vec::new(); n_bins];
    let mut out_of_range = 0;
    for (axis_value, values) in per_cue.values() {
        if *axis_value < lower || *axis_value > upper {
            out_of_range += 1;
            continue;
        }
        let idx = if width > 0.0 { (((axis_value - lower) / width).floor() as usize).min(n_bins - 1) } else { 0 };
        members[idx].push(values);
    }

    let bins = members
        .iter()
        .enumerate()
        .map(|(i, cues)| {
            let pair_count: usize = cues.iter().map(|v| v.len()).sum();
            let mean_measure = if cues.is_empty() {
                None
            } else {
                Some(match spec.mean {
                    BinMean::Pairs => cues.iter().flat_map(|v| v.iter()).sum::<f64>() / pair_count as f64,
                    BinMean::Cues => {
                        cues.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).sum::<f64>() / cues.len() as f64
                    }
                })
            };
            let bin_upper = if i + 1 == n_bins { upper } else { lower + width * (i + 1) as f64 };
            Bin { lower: lower + width * i as f64, upper: bin_upper, cue_count: cues.len(), pair_count, mean_measure }
        })
        .collect();

    Ok(BinProfile { axis: spec.axis, mean: spec.mean, bins, out_of_range })
}
