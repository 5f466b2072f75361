//! Association instances, datasets, and the canonical TSV interchange format.
//!
//! A dataset is a set of `(cue, response, participant, rank)` records from a
//! single respondent: the human reference, or one model at one sampling
//! temperature. Instances are kept in canonical order (cue, then participant,
//! then rank) so every downstream table is reproducible byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

/// Label reserved for the human reference respondent.
pub const HUMAN_LABEL: &str = "human";

/// Header line of the canonical dataset file.
pub const DATASET_HEADER: &str = "label\ttemperature\tcue\tresponse\tparticipant\trank";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("empty {0} after normalization")]
    EmptyToken(&'static str),
    #[error("participant index must be >= 1")]
    ZeroParticipant,
    #[error("duplicate instance for cue {cue:?}, rank {rank}, participant {participant}")]
    DuplicateInstance { cue: String, rank: Rank, participant: u32 },
    #[error("respondent {label:?}: temperature must be absent for human data and present otherwise")]
    TemperatureMismatch { label: String },
    #[error("invalid temperature {0}")]
    InvalidTemperature(f64),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Response position within one participant's answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    R1,
    R2,
    R3,
}

impl Rank {
    pub const ALL: [Rank; 3] = [Rank::R1, Rank::R2, Rank::R3];

    pub fn number(self) -> u8 {
        match self {
            Rank::R1 => 1,
            Rank::R2 => 2,
            Rank::R3 => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Rank> {
        match n {
            1 => Some(Rank::R1),
            2 => Some(Rank::R2),
            3 => Some(Rank::R3),
            _ => None,
        }
    }

    /// Rank for the zero-based position of a response in a participant's list.
    pub fn from_position(index: usize) -> Option<Rank> {
        u8::try_from(index + 1).ok().and_then(Rank::from_number)
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl serde::Serialize for Rank {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.number())
    }
}

impl FromStr for Rank {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let trimmed = trimmed.strip_prefix(['R', 'r']).unwrap_or(trimmed);
        trimmed
            .parse::<u8>()
            .ok()
            .and_then(Rank::from_number)
            .ok_or_else(|| format!("invalid rank {s:?} (expected 1, 2 or 3)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AssociationInstance {
    pub cue: String,
    pub response: String,
    pub participant: u32,
    pub rank: Rank,
}

impl AssociationInstance {
    pub fn new(
        cue: impl Into<String>,
        response: impl Into<String>,
        participant: u32,
        rank: Rank,
    ) -> Result<Self, ModelError> {
        let cue = cue.into();
        let response = response.into();
        if cue.is_empty() {
            return Err(ModelError::EmptyToken("cue"));
        }
        if response.is_empty() {
            return Err(ModelError::EmptyToken("response"));
        }
        if participant == 0 {
            return Err(ModelError::ZeroParticipant);
        }
        Ok(Self { cue, response, participant, rank })
    }

    fn canonical_key(&self) -> (&str, u32, Rank) {
        (&self.cue, self.participant, self.rank)
    }
}

/// An immutable, cue-indexed collection of instances from one respondent.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationDataset {
    label: String,
    temperature: Option<f64>,
    instances: Vec<AssociationInstance>,
    cue_index: BTreeMap<String, Range<usize>>,
}

impl AssociationDataset {
    /// Builds a dataset, sorting instances canonically and checking that no
    /// participant answers the same cue twice at one rank.
    pub fn new(
        label: impl Into<String>,
        temperature: Option<f64>,
        mut instances: Vec<AssociationInstance>,
    ) -> Result<Self, ModelError> {
        let label = label.into();
        if (label == HUMAN_LABEL) == temperature.is_some() {
            return Err(ModelError::TemperatureMismatch { label });
        }
        if let Some(t) = temperature {
            if !t.is_finite() || t < 0.0 {
                return Err(ModelError::InvalidTemperature(t));
            }
        }
        instances.sort_by(|a, b| a.canonical_key().cmp(&b.canonical_key()));
        if let Some(pair) = instances
            .windows(2)
            .find(|w| w[0].canonical_key() == w[1].canonical_key())
        {
            let dup = &pair[1];
            return Err(ModelError::DuplicateInstance {
                cue: dup.cue.clone(),
                rank: dup.rank,
                participant: dup.participant,
            });
        }

        let cue_index = index_sorted(&instances);
        Ok(Self { label, temperature, instances, cue_index })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn temperature(&self) -> Option<f64> {
        self.temperature
    }

    pub fn is_human(&self) -> bool {
        self.temperature.is_none()
    }

    /// Display identifier combining label and temperature, e.g. `mistral@1.5`.
    pub fn respondent_id(&self) -> String {
        match self.temperature {
            Some(t) => format!("{}@{}", self.label, t),
            None => self.label.clone(),
        }
    }

    pub fn instances(&self) -> &[AssociationInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Cues in lexicographic order.
    pub fn cues(&self) -> impl Iterator<Item = &str> + '_ {
        self.cue_index.keys().map(String::as_str)
    }

    pub fn cue_count(&self) -> usize {
        self.cue_index.len()
    }

    pub fn contains_cue(&self, cue: &str) -> bool {
        self.cue_index.contains_key(cue)
    }

    /// All instances for a cue, any rank.
    pub fn cue_instances(&self, cue: &str) -> &[AssociationInstance] {
        match self.cue_index.get(cue) {
            Some(range) => &self.instances[range.clone()],
            None => &[],
        }
    }

    /// Instances for `(cue, *, *, rank)`, ascending participant index.
    pub fn select(&self, cue: &str, rank: Rank) -> Vec<&AssociationInstance> {
        self.cue_instances(cue).iter().filter(|i| i.rank == rank).collect()
    }

    /// Distinct responses among `select(cue, rank)`. Its size is the cue's
    /// variability (#R1 at rank 1).
    pub fn unique_responses(&self, cue: &str, rank: Rank) -> BTreeSet<&str> {
        self.cue_instances(cue)
            .iter()
            .filter(|i| i.rank == rank)
            .map(|i| i.response.as_str())
            .collect()
    }

    /// Response token counts for `(cue, rank)`.
    pub fn response_counts(&self, cue: &str, rank: Rank) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for inst in self.cue_instances(cue).iter().filter(|i| i.rank == rank) {
            *counts.entry(inst.response.as_str()).or_insert(0) += 1;
        }
        counts
    }

    /// Restricts the dataset to the given cues.
    pub fn restrict_to<'a>(&self, cues: impl IntoIterator<Item = &'a str>) -> AssociationDataset {
        let mut instances = Vec::new();
        let wanted: BTreeSet<&str> = cues.into_iter().collect();
        for cue in wanted {
            instances.extend_from_slice(self.cue_instances(cue));
        }
        let cue_index = index_sorted(&instances);
        AssociationDataset {
            label: self.label.clone(),
            temperature: self.temperature,
            instances,
            cue_index,
        }
    }

    /// Writes the canonical TSV form.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{DATASET_HEADER}")?;
        let temperature = self.temperature.map(|t| t.to_string()).unwrap_or_default();
        for inst in &self.instances {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                self.label, temperature, inst.cue, inst.response, inst.participant, inst.rank
            )?;
        }
        Ok(())
    }

    pub fn to_tsv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dataset tokens are UTF-8")
    }

    /// Parses the canonical TSV form. `fallback_label` names the respondent
    /// when the file has no data rows; such a dataset is treated as human.
    pub fn read_tsv<R: BufRead>(input: R, fallback_label: &str) -> Result<Self, ModelError> {
        let mut lines = input.lines().enumerate();
        match lines.next() {
            Some((_, header)) => {
                let header = header?;
                if header.trim_end_matches('\r') != DATASET_HEADER {
                    return Err(ModelError::Parse {
                        line: 1,
                        reason: format!("expected header {DATASET_HEADER:?}"),
                    });
                }
            }
            None => {
                return Err(ModelError::Parse { line: 1, reason: "missing header".into() });
            }
        }

        let mut label: Option<String> = None;
        let mut temperature: Option<Option<f64>> = None;
        let mut instances = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| ModelError::Parse { line: line_no, reason };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 6 {
                return Err(err(format!("expected 6 fields, found {}", fields.len())));
            }
            let row_temp = if fields[1].is_empty() {
                None
            } else {
                Some(
                    fields[1]
                        .parse::<f64>()
                        .map_err(|e| err(format!("bad temperature: {e}")))?,
                )
            };
            match &label {
                None => label = Some(fields[0].to_string()),
                Some(l) if l != fields[0] => {
                    return Err(err(format!("mixed labels {l:?} and {:?}", fields[0])));
                }
                _ => {}
            }
            match temperature {
                None => temperature = Some(row_temp),
                Some(t) if t != row_temp => return Err(err("mixed temperatures".into())),
                _ => {}
            }
            let participant = fields[4]
                .parse::<u32>()
                .map_err(|e| err(format!("bad participant: {e}")))?;
            let rank = fields[5].parse::<Rank>().map_err(err)?;
            let inst = AssociationInstance::new(fields[2], fields[3], participant, rank)
                .map_err(|e| err(e.to_string()))?;
            instances.push(inst);
        }

        match label {
            Some(label) => Self::new(label, temperature.flatten(), instances),
            None => Self::new(fallback_label, None, Vec::new()),
        }
    }

    /// Reads a dataset file. A header-only file loads as an empty human dataset.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::read_tsv(std::io::BufReader::new(file), HUMAN_LABEL)
    }
}

fn index_sorted(instances: &[AssociationInstance]) -> BTreeMap<String, Range<usize>> {
    let mut index = BTreeMap::new();
    let mut start = 0;
    while start < instances.len() {
        let cue = &instances[start].cue;
        let end = start + instances[start..].iter().take_while(|i| &i.cue == cue).count();
        index.insert(cue.clone(), start..end);
        start = end;
    }
    index
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(cue: &str, resp: &str, p: u32, rank: Rank) -> AssociationInstance {
        AssociationInstance::new(cue, resp, p, rank).unwrap()
    }

    fn beach() -> AssociationDataset {
        AssociationDataset::new(
            HUMAN_LABEL,
            None,
            vec![
                inst("beach", "sand", 1, Rank::R2),
                inst("beach", "ocean", 2, Rank::R1),
                inst("beach", "sand", 1, Rank::R1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn select_filters_by_cue_and_rank() {
        let ds = beach();
        let r1 = ds.select("beach", Rank::R1);
        assert_eq!(r1.len(), 2);
        assert_eq!(r1[0].participant, 1);
        assert_eq!(r1[0].response, "sand");
        assert_eq!(r1[1].response, "ocean");
        assert!(ds.select("mountain", Rank::R1).is_empty());
    }

    #[test]
    fn unique_responses_counts_types() {
        let ds = beach();
        assert_eq!(ds.unique_responses("beach", Rank::R1).len(), 2);
        assert_eq!(ds.unique_responses("beach", Rank::R2).len(), 1);
    }

    #[test]
    fn uniform_cue_has_single_type() {
        let instances = (1..=10).map(|p| inst("dog", "cat", p, Rank::R1)).collect();
        let ds = AssociationDataset::new("m", Some(1.0), instances).unwrap();
        assert_eq!(ds.unique_responses("dog", Rank::R1).len(), 1);
    }

    #[test]
    fn rejects_duplicate_participant() {
        let err = AssociationDataset::new(
            HUMAN_LABEL,
            None,
            vec![inst("a", "b", 1, Rank::R1), inst("a", "c", 1, Rank::R1)],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::DuplicateInstance { .. }));
    }

    #[test]
    fn temperature_must_match_respondent_kind() {
        assert!(AssociationDataset::new(HUMAN_LABEL, Some(1.0), vec![]).is_err());
        assert!(AssociationDataset::new("qwen", None, vec![]).is_err());
        assert!(AssociationDataset::new("qwen", Some(-0.1), vec![]).is_err());
    }

    #[test]
    fn instance_invariants() {
        assert!(AssociationInstance::new("", "x", 1, Rank::R1).is_err());
        assert!(AssociationInstance::new("x", "", 1, Rank::R1).is_err());
        assert!(AssociationInstance::new("x", "y", 0, Rank::R1).is_err());
    }

    #[test]
    fn tsv_round_trip() {
        let ds = AssociationDataset::new(
            "mistral",
            Some(0.3),
            vec![inst("ice cream", "cold", 2, Rank::R1), inst("beach", "sand", 1, Rank::R3)],
        )
        .unwrap();
        let text = ds.to_tsv_string();
        assert!(text.starts_with(DATASET_HEADER));
        let back = AssociationDataset::read_tsv(text.as_bytes(), "x").unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.to_tsv_string(), text);
    }

    #[test]
    fn read_rejects_bad_rows() {
        let bad = format!("{DATASET_HEADER}\nhuman\t\tbeach\tsand\t1\t4\n");
        assert!(AssociationDataset::read_tsv(bad.as_bytes(), "x").is_err());
        let mixed = format!("{DATASET_HEADER}\nhuman\t\ta\tb\t1\t1\nqwen\t1\ta\tb\t2\t1\n");
        assert!(AssociationDataset::read_tsv(mixed.as_bytes(), "x").is_err());
        assert!(AssociationDataset::read_tsv("nope\n".as_bytes(), "x").is_err());
    }

    #[test]
    fn rank_parsing() {
        assert_eq!("1".parse::<Rank>().unwrap(), Rank::R1);
        assert_eq!("R3".parse::<Rank>().unwrap(), Rank::R3);
        assert!("0".parse::<Rank>().is_err());
    }
}
