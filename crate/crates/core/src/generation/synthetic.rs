//! Offline agent that answers prompts by sampling from known per-cue
//! distributions. It exercises the full generation pipeline (prompting,
//! completion parsing, retries, checkpointing) with analytically known
//! expectations.
//!
//! Spec file: TSV with header `cue\trank\tresponse\tprobability`. A rank of
//! `1`, `2` or `3` gives an independent categorical per rank; rank `*` gives a
//! distribution over whole answers, with responses joined by `|`.

use std::collections::BTreeMap;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::backend::{BackendError, CompletionBackend, CompletionRequest};
use crate::model::Rank;

const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SyntheticSpecError {
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("cue {cue:?}: probabilities sum to {sum}, expected 1")]
    NotNormalized { cue: String, sum: f64 },
    #[error("cue {0:?} mixes per-rank and whole-answer rows")]
    MixedModes(String),
    #[error("cue {cue:?} cannot produce {needed} responses per prompt")]
    TooFewRanks { cue: String, needed: usize },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CueDistribution {
    PerRank(BTreeMap<Rank, Vec<(String, f64)>>),
    /// Whole answers, each an ordered list of responses.
    Answers(Vec<(Vec<String>, f64)>),
}

impl CueDistribution {
    fn width(&self) -> usize {
        match self {
            CueDistribution::PerRank(ranks) => {
                Rank::ALL.iter().take_while(|r| ranks.contains_key(r)).count()
            }
            CueDistribution::Answers(answers) => answers.iter().map(|(a, _)| a.len()).min().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticAgentSpec {
    pub cues: BTreeMap<String, CueDistribution>,
    pub seed: u64,
}

impl SyntheticAgentSpec {
    pub fn new(cues: BTreeMap<String, CueDistribution>, seed: u64) -> Result<Self, SyntheticSpecError> {
        for (cue, dist) in &cues {
            let sums: Vec<f64> = match dist {
                CueDistribution::PerRank(ranks) => {
                    ranks.values().map(|v| v.iter().map(|(_, p)| p).sum()).collect()
                }
                CueDistribution::Answers(a) => vec![a.iter().map(|(_, p)| p).sum()],
            };
            for sum in sums {
                if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                    return Err(SyntheticSpecError::NotNormalized { cue: cue.clone(), sum });
                }
            }
        }
        Ok(Self { cues, seed })
    }

    pub fn read<R: BufRead>(input: R, seed: u64) -> Result<Self, SyntheticSpecError> {
        let mut cues: BTreeMap<String, CueDistribution> = BTreeMap::new();
        let mut lines = input.lines().enumerate();
        match lines.next() {
            Some((_, Ok(h))) if h.trim_end() == "cue\trank\tresponse\tprobability" => {}
            _ => {
                return Err(SyntheticSpecError::Line {
                    line: 1,
                    reason: "expected header cue\\trank\\tresponse\\tprobability".into(),
                })
            }
        }
        for (idx, line) in lines {
            let line = line.map_err(|e| SyntheticSpecError::Io(e.to_string()))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| SyntheticSpecError::Line { line: idx + 1, reason: reason.into() };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(err("expected 4 tab-separated fields"));
            }
            let cue = fields[0].trim().to_string();
            let p: f64 = fields[3].trim().parse().map_err(|_| err("bad probability"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(err("probability outside [0, 1]"));
            }
            if fields[1].trim() == "*" {
                let answer: Vec<String> = fields[2].split('|').map(|s| s.trim().to_string()).collect();
                if answer.iter().any(String::is_empty) {
                    return Err(err("empty response in answer"));
                }
                match cues.entry(cue.clone()).or_insert_with(|| CueDistribution::Answers(Vec::new())) {
                    CueDistribution::Answers(list) => list.push((answer, p)),
                    CueDistribution::PerRank(_) => return Err(SyntheticSpecError::MixedModes(cue)),
                }
            } else {
                let rank: Rank = fields[1].parse().map_err(|e: String| err(&e))?;
                let response = fields[2].trim().to_string();
                if response.is_empty() {
                    return Err(err("empty response"));
                }
                match cues.entry(cue.clone()).or_insert_with(|| CueDistribution::PerRank(BTreeMap::new())) {
                    CueDistribution::PerRank(ranks) => ranks.entry(rank).or_default().push((response, p)),
                    CueDistribution::Answers(_) => return Err(SyntheticSpecError::MixedModes(cue)),
                }
            }
        }
        Self::new(cues, seed)
    }

    pub fn load(path: &std::path::Path, seed: u64) -> Result<Self, SyntheticSpecError> {
        let file = std::fs::File::open(path).map_err(|e| SyntheticSpecError::Io(format!("{}: {e}", path.display())))?;
        Self::read(std::io::BufReader::new(file), seed)
    }

    /// Checks every cue can answer with `responses_per_prompt` items.
    pub fn validate_for(&self, responses_per_prompt: usize) -> Result<(), SyntheticSpecError> {
        for (cue, dist) in &self.cues {
            if dist.width() < responses_per_prompt {
                return Err(SyntheticSpecError::TooFewRanks { cue: cue.clone(), needed: responses_per_prompt });
            }
        }
        Ok(())
    }

    fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        for (cue, dist) in &self.cues {
            hasher.update(cue.as_bytes());
            hasher.update(format!("{dist:?}").as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Applies temperature to a categorical: weights `p^(1/T)`, argmax at T = 0.
pub fn tempered_weights(probs: &[f64], temperature: f64) -> Vec<f64> {
    if temperature <= 0.0 {
        let best = probs
            .iter()
            .enumerate()
            .fold(0, |best, (i, &p)| if p > probs[best] { i } else { best });
        return probs.iter().enumerate().map(|(i, _)| if i == best { 1.0 } else { 0.0 }).collect();
    }
    probs.iter().map(|&p| if p > 0.0 { p.powf(1.0 / temperature) } else { 0.0 }).collect()
}

fn draw(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Backend answering from a [`SyntheticAgentSpec`]. Each call draws from an
/// RNG keyed by (seed, cue, repetition, attempt), so results do not depend on
/// call order or concurrency.
pub struct SyntheticBackend {
    spec: SyntheticAgentSpec,
    /// Probability that a call fails with a transient error.
    pub failure_rate: f64,
}

impl SyntheticBackend {
    pub fn new(spec: SyntheticAgentSpec) -> Self {
        Self { spec, failure_rate: 0.0 }
    }

    pub fn spec(&self) -> &SyntheticAgentSpec {
        &self.spec
    }

    fn rng_for(&self, request: &CompletionRequest<'_>) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.spec.seed.to_le_bytes());
        hasher.update(request.cue.as_bytes());
        hasher.update([0]);
        hasher.update(request.repetition.to_le_bytes());
        hasher.update(request.attempt.to_le_bytes());
        ChaCha8Rng::from_seed(hasher.finalize().into())
    }
}

impl CompletionBackend for SyntheticBackend {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError> {
        let mut rng = self.rng_for(request);
        if self.failure_rate > 0.0 && rng.gen::<f64>() < self.failure_rate {
            return Err(BackendError::Transient("synthetic failure".into()));
        }
        let Some(dist) = self.spec.cues.get(request.cue) else {
            return Ok("I am not sure what comes to mind for that word.".into());
        };
        let responses: Vec<&str> = match dist {
            CueDistribution::PerRank(ranks) => ranks
                .values()
                .map(|options| {
                    let probs: Vec<f64> = options.iter().map(|(_, p)| *p).collect();
                    options[draw(&mut rng, &tempered_weights(&probs, request.temperature))].0.as_str()
                })
                .collect(),
            CueDistribution::Answers(answers) => {
                let probs: Vec<f64> = answers.iter().map(|(_, p)| *p).collect();
                let picked = &answers[draw(&mut rng, &tempered_weights(&probs, request.temperature))].0;
                picked.iter().map(String::as_str).collect()
            }
        };
        Ok(responses.iter().enumerate().map(|(i, r)| format!("{}. {}", i + 1, r)).collect::<Vec<_>>().join("\n"))
    }

    fn fingerprint(&self) -> String {
        format!("synthetic:{}", self.spec.fingerprint())
    }
}
