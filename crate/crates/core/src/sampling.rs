//! Seeded uniform cue subsampling and subset-vs-full representativeness.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::lexical::unique_pair_measures;
use crate::model::{AssociationDataset, Rank};
use crate::norms::LexicalNorms;
use crate::stats::SdMode;
use crate::typicality::dataset_summary;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("sample size {requested} outside 1..={available}")]
    OutOfRange { requested: usize, available: usize },
    #[error("empty cue subset")]
    EmptySubset,
    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleManifest {
    pub seed: u64,
    pub requested_n: usize,
    pub source_cue_count: usize,
    /// Sorted.
    pub sampled_cues: Vec<String>,
    /// Sorted subset of `sampled_cues`.
    pub post_filter_cues: Vec<String>,
    pub drop_reasons: BTreeMap<String, String>,
}

/// Draws `n` distinct cues uniformly at random. The inventory is sorted and
/// de-duplicated first, so the result does not depend on input order.
pub fn sample_cues<S: AsRef<str>>(all_cues: &[S], n: usize, seed: u64) -> Result<SampleManifest, SamplingError> {
    let inventory: Vec<&str> = all_cues.iter().map(AsRef::as_ref).collect::<BTreeSet<_>>().into_iter().collect();
    if n < 1 || n > inventory.len() {
        return Err(SamplingError::OutOfRange { requested: n, available: inventory.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, inventory.len(), n).into_vec();
    picked.sort_unstable();
    let sampled: Vec<String> = picked.into_iter().map(|i| inventory[i].to_string()).collect();
    Ok(SampleManifest {
        seed,
        requested_n: n,
        source_cue_count: inventory.len(),
        post_filter_cues: sampled.clone(),
        sampled_cues: sampled,
        drop_reasons: BTreeMap::new(),
    })
}

impl SampleManifest {
    /// Drops sampled cues for which any dataset has no response at `rank`,
    /// recording which respondent caused the drop.
    pub fn filter_against(&mut self, datasets: &[&AssociationDataset], rank: Rank) {
        let mut kept = Vec::new();
        for cue in &self.sampled_cues {
            let missing: Vec<String> = datasets
                .iter()
                .filter(|d| d.select(cue, rank).is_empty())
                .map(|d| d.respondent_id())
                .collect();
            if missing.is_empty() {
                kept.push(cue.clone());
            } else {
                self.drop_reasons
                    .insert(cue.clone(), format!("no R{} responses from {}", rank.number(), missing.join(",")));
            }
        }
        self.post_filter_cues = kept;
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# seed={}", self.seed)?;
        writeln!(out, "# requested_n={}", self.requested_n)?;
        writeln!(out, "# source_cue_count={}", self.source_cue_count)?;
        writeln!(out, "# sampled={}", self.sampled_cues.len())?;
        writeln!(out, "# post_filter={}", self.post_filter_cues.len())?;
        writeln!(out, "cue\tstatus\treason")?;
        let kept: BTreeSet<&String> = self.post_filter_cues.iter().collect();
        for cue in &self.sampled_cues {
            if kept.contains(cue) {
                writeln!(out, "{cue}\tkept\t")?;
            } else {
                let reason = self.drop_reasons.get(cue).map(String::as_str).unwrap_or("dropped");
                writeln!(out, "{cue}\tdropped\t{reason}")?;
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, SamplingError> {
        let mut header: BTreeMap<String, String> = BTreeMap::new();
        let mut manifest = SampleManifest {
            seed: 0,
            requested_n: 0,
            source_cue_count: 0,
            sampled_cues: Vec::new(),
            post_filter_cues: Vec::new(),
            drop_reasons: BTreeMap::new(),
        };
        let mut seen_columns = false;
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            let err = |reason: &str| SamplingError::Manifest { line: idx + 1, reason: reason.into() };
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta.split_once('=').ok_or_else(|| err("expected key=value"))?;
                header.insert(k.to_string(), v.to_string());
                continue;
            }
            if !seen_columns {
                if line != "cue\tstatus\treason" {
                    return Err(err("expected column header"));
                }
                seen_columns = true;
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut parts = line.splitn(3, '\t');
            let cue = parts.next().unwrap_or_default().to_string();
            let status = parts.next().ok_or_else(|| err("missing status"))?;
            let reason = parts.next().unwrap_or_default();
            manifest.sampled_cues.push(cue.clone());
            match status {
                "kept" => manifest.post_filter_cues.push(cue),
                "dropped" => {
                    manifest.drop_reasons.insert(cue, reason.to_string());
                }
                _ => return Err(err("status must be kept or dropped")),
            }
        }
        let num = |key: &str| -> Result<u64, SamplingError> {
            header
                .get(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| SamplingError::Manifest { line: 0, reason: format!("missing {key}") })
        };
        manifest.seed = num("seed")?;
        manifest.requested_n = num("requested_n")? as usize;
        manifest.source_cue_count = num("source_cue_count")? as usize;
        Ok(manifest)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub subset: Option<f64>,
    pub full: Option<f64>,
    pub abs_diff: Option<f64>,
}

/// Compares variability, typicality (reference against itself) and, when
/// norms are given, mean relative lexical measures between a cue subset and
/// every cue of `full`.
pub fn representativeness_report<S: AsRef<str>>(
    subset_cues: &[S],
    full: &AssociationDataset,
    norms: Option<&LexicalNorms>,
    rank: Rank,
    sd_mode: SdMode,
) -> Result<Vec<ComparisonRow>, SamplingError> {
    if subset_cues.is_empty() {
        return Err(SamplingError::EmptySubset);
    }
    let all: Vec<&str> = full.cues().collect();
    let sub = dataset_summary(full, full, subset_cues, rank, sd_mode).aggregate;
    let whole = dataset_summary(full, full, &all, rank, sd_mode).aggregate;

    let mut rows = Vec::new();
    let mut push = |metric: &str, s: Option<f64>, f: Option<f64>| {
        let abs_diff = match (s, f) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        };
        rows.push(ComparisonRow { metric: metric.into(), subset: s, full: f, abs_diff });
    };
    push("cues", Some(sub.answered_cues as f64), Some(whole.answered_cues as f64));
    push("avg_r1", Some(sub.avg_variability), Some(whole.avg_variability));
    push("tot_r1", Some(sub.total_unique_responses as f64), Some(whole.total_unique_responses as f64));
    push("tok_ss1_mean", sub.tok_ss1_mean, whole.tok_ss1_mean);
    push("tok_ss1_sd", sub.tok_ss1_sd, whole.tok_ss1_sd);
    push("typ_ss1_mean", sub.typ_ss1_mean, whole.typ_ss1_mean);
    push("typ_ss1_sd", sub.typ_ss1_sd, whole.typ_ss1_sd);

    if let Some(norms) = norms {
        let sub_ds = full.restrict_to(subset_cues.iter().map(AsRef::as_ref));
        let lexical = |d: &AssociationDataset| {
            let m = unique_pair_measures(d, rank, norms);
            let freq = (!m.is_empty()).then(|| m.iter().map(|x| x.log2_freq_ratio).sum::<f64>() / m.len() as f64);
            let conc: Vec<f64> = m.iter().filter_map(|x| x.concreteness_ratio).collect();
            let conc = (!conc.is_empty()).then(|| conc.iter().sum::<f64>() / conc.len() as f64);
            (freq, conc)
        };
        let (sf, sc) = lexical(&sub_ds);
        let (ff, fc) = lexical(full);
        push("mean_log2_freq_ratio", sf, ff);
        push("mean_concreteness_ratio", sc, fc);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AssociationInstance, HUMAN_LABEL};

    fn inventory(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("cue{i:05}")).collect()
    }

    #[test]
    fn sample_size_and_determinism() {
        let cues = inventory(12_282);
        let a = sample_cues(&cues, 500, 7).unwrap();
        assert_eq!(a.sampled_cues.len(), 500);
        assert_eq!(a.source_cue_count, 12_282);
        assert_eq!(a, sample_cues(&cues, 500, 7).unwrap());
        assert_ne!(a.sampled_cues, sample_cues(&cues, 500, 8).unwrap().sampled_cues);
        assert!(a.sampled_cues.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exhaustive_sample_is_sorted_inventory() {
        let cues = vec!["b", "a", "c", "a"];
        let m = sample_cues(&cues, 3, 1).unwrap();
        assert_eq!(m.sampled_cues, ["a", "b", "c"]);
    }

    #[test]
    fn permutation_invariant() {
        let mut cues = inventory(300);
        let a = sample_cues(&cues, 40, 99).unwrap();
        cues.reverse();
        assert_eq!(a, sample_cues(&cues, 40, 99).unwrap());
    }

    #[test]
    fn out_of_range() {
        let cues = inventory(3);
        assert!(sample_cues(&cues, 0, 1).is_err());
        assert!(sample_cues(&cues, 4, 1).is_err());
    }

    fn ds(label: &str, temp: Option<f64>, rows: &[(&str, &str)]) -> AssociationDataset {
        let mut next: BTreeMap<&str, u32> = BTreeMap::new();
        let inst = rows
            .iter()
            .map(|(c, r)| {
                let p = next.entry(c).or_insert(0);
                *p += 1;
                AssociationInstance::new(*c, *r, *p, Rank::R1).unwrap()
            })
            .collect();
        AssociationDataset::new(label, temp, inst).unwrap()
    }

    #[test]
    fn filter_and_manifest_round_trip() {
        let human = ds(HUMAN_LABEL, None, &[("a", "x"), ("b", "y"), ("c", "z")]);
        let model = ds("m", Some(1.0), &[("a", "x"), ("c", "z")]);
        let mut m = sample_cues(&["a", "b", "c"], 3, 5).unwrap();
        m.filter_against(&[&human, &model], Rank::R1);
        assert_eq!(m.post_filter_cues, ["a", "c"]);
        assert_eq!(m.drop_reasons["b"], "no R1 responses from m@1");
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        let back = SampleManifest::read(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn identity_subset_has_zero_deltas() {
        let human = ds(HUMAN_LABEL, None, &[("a", "x"), ("a", "x"), ("a", "y"), ("b", "y"), ("b", "q"), ("b", "q"), ("b", "q")]);
        let cues: Vec<&str> = human.cues().collect();
        let rows = representativeness_report(&cues, &human, None, Rank::R1, SdMode::Population).unwrap();
        assert!(rows.iter().all(|r| r.abs_diff == Some(0.0)), "{rows:?}");
    }

    #[test]
    fn different_halves_report_differences() {
        // cues a, b: two responses each; cues c, d: four responses each
        let human = ds(
            HUMAN_LABEL,
            None,
            &[
                ("a", "x"), ("a", "x"), ("a", "y"),
                ("b", "x"), ("b", "x"), ("b", "y"),
                ("c", "p"), ("c", "p"), ("c", "q"), ("c", "r"), ("c", "s"),
                ("d", "p"), ("d", "p"), ("d", "q"), ("d", "r"), ("d", "s"),
            ],
        );
        let rows = representativeness_report(&["a", "b"], &human, None, Rank::R1, SdMode::Population).unwrap();
        let avg = rows.iter().find(|r| r.metric == "avg_r1").unwrap();
        assert_eq!(avg.subset, Some(2.0));
        assert_eq!(avg.full, Some(3.0));
        assert_eq!(avg.abs_diff, Some(1.0));
        assert!(representativeness_report::<&str>(&[], &human, None, Rank::R1, SdMode::Population).is_err());
    }
}
