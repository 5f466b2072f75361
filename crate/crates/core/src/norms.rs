//! Ingestion of human association tables and lexical norms.
//!
//! Everything that enters the toolkit passes through [`normalize_token`], so
//! lookups elsewhere are exact matches on normalized tokens. Rows that cannot
//! be used are collected as [`Reject`]s with their line number; callers are
//! expected to persist them with [`write_rejects`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Read, Write};
use std::path::Path;

use log::warn;
use thiserror::Error;

use crate::model::{AssociationDataset, AssociationInstance, ModelError, Rank, HUMAN_LABEL};

#[derive(Debug, Error)]
pub enum NormsError {
    #[error("cannot read {what}: {source}")]
    Unreadable {
        what: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing column {0:?} in header")]
    MissingColumn(String),
    #[error("no usable lines in {0}")]
    NoUsableLines(&'static str),
    #[error("correction map: {0}")]
    Corrections(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A row that was not ingested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub line: u64,
    pub reason: String,
    pub raw: String,
}

/// Writes rejects as TSV: `line_number\treason\traw_content`.
pub fn write_rejects<W: Write>(mut out: W, rejects: &[Reject]) -> std::io::Result<()> {
    writeln!(out, "line_number\treason\traw_content")?;
    for r in rejects {
        writeln!(out, "{}\t{}\t{}", r.line, escape_field(&r.reason), escape_field(&r.raw))?;
    }
    Ok(())
}

fn escape_field(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\t', "\\t").replace('\n', "\\n").replace('\r', "\\r")
}

/// Raw → corrected spelling substitutions, keyed by normalized raw form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorrectionMap {
    map: BTreeMap<String, String>,
}

impl CorrectionMap {
    /// Builds a map from raw/corrected pairs. Both sides are normalized and
    /// chains (`a→b`, `b→c`) are resolved so that applying the map twice is
    /// the same as applying it once.
    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self, NormsError>
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut raw_map = BTreeMap::new();
        for (raw, corrected) in pairs {
            let raw = basic_normalize(raw.as_ref());
            let corrected = basic_normalize(corrected.as_ref());
            if raw.is_empty() || corrected.is_empty() {
                return Err(NormsError::Corrections("empty entry".into()));
            }
            if raw != corrected {
                raw_map.insert(raw, corrected);
            }
        }
        let mut map = BTreeMap::new();
        for raw in raw_map.keys() {
            let mut current = &raw_map[raw];
            let mut seen = BTreeSet::from([raw.as_str()]);
            while let Some(next) = raw_map.get(current) {
                if !seen.insert(current.as_str()) {
                    return Err(NormsError::Corrections(format!("cycle through {raw:?}")));
                }
                current = next;
            }
            map.insert(raw.clone(), current.clone());
        }
        Ok(Self { map })
    }

    /// Reads a two-column TSV `raw\tcorrected`. Blank lines and `#` comments
    /// are ignored.
    pub fn read<R: BufRead>(input: R) -> Result<Self, NormsError> {
        let mut pairs = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|source| NormsError::Unreadable {
                what: "corrections".into(),
                source,
            })?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(raw), Some(corrected), None) => pairs.push((raw.to_string(), corrected.to_string())),
                _ => {
                    return Err(NormsError::Corrections(format!(
                        "line {}: expected two tab-separated columns",
                        idx + 1
                    )))
                }
            }
        }
        Self::from_pairs(pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NormsError> {
        let file = open(path.as_ref())?;
        Self::read(std::io::BufReader::new(file))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn apply<'a>(&'a self, token: &'a str) -> &'a str {
        self.map.get(token).map(String::as_str).unwrap_or(token)
    }
}

fn basic_normalize(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Trims, lowercases, collapses internal whitespace to single spaces, and
/// applies spelling corrections. An empty result means the response should be
/// discarded.
pub fn normalize_token(raw: &str, corrections: &CorrectionMap) -> String {
    let basic = basic_normalize(raw);
    corrections.apply(&basic).to_string()
}

/// How the columns of a human association table are laid out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnMapping {
    /// One row per participant; `responses` lists the R1, R2, R3 columns in
    /// rank order (R2/R3 may be omitted).
    Wide { cue: String, responses: Vec<String> },
    /// One row per response. Without a participant column, the k-th row for
    /// a (cue, rank) is attributed to participant k.
    Long { cue: String, response: String, rank: String, participant: Option<String> },
}

impl ColumnMapping {
    /// Column names used by the SWOW-EN release files.
    pub fn swow_wide() -> Self {
        ColumnMapping::Wide {
            cue: "cue".into(),
            responses: vec!["R1".into(), "R2".into(), "R3".into()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct HumanNormsOptions {
    pub mapping: ColumnMapping,
    pub delimiter: u8,
    /// Raw cell values meaning "no response" (compared case-insensitively
    /// after trimming).
    pub missing_markers: Vec<String>,
    pub label: String,
}

impl Default for HumanNormsOptions {
    fn default() -> Self {
        Self {
            mapping: ColumnMapping::swow_wide(),
            delimiter: b',',
            missing_markers: vec!["NA".into(), "No more responses".into(), "Unknown word".into()],
            label: HUMAN_LABEL.into(),
        }
    }
}

#[derive(Debug)]
pub struct HumanIngest {
    pub dataset: AssociationDataset,
    pub rejects: Vec<Reject>,
    /// Cues that appeared in the file but kept no response.
    pub dropped_cues: Vec<String>,
}

/// Parses a human association table into a dataset.
pub fn parse_human_norms<R: Read>(
    input: R,
    options: &HumanNormsOptions,
    corrections: &CorrectionMap,
) -> Result<HumanIngest, NormsError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .flexible(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| -> Result<usize, NormsError> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| NormsError::MissingColumn(name.to_string()))
    };
    let missing: BTreeSet<String> =
        options.missing_markers.iter().map(|m| m.trim().to_lowercase()).collect();
    let clean = |raw: &str| -> String {
        if missing.contains(&raw.trim().to_lowercase()) {
            String::new()
        } else {
            normalize_token(raw, corrections)
        }
    };

    let mut rejects = Vec::new();
    let mut instances = Vec::new();
    let mut seen_cues = BTreeSet::new();
    let delim = char::from(options.delimiter).to_string();

    match &options.mapping {
        ColumnMapping::Wide { cue, responses } => {
            if responses.is_empty() || responses.len() > 3 {
                return Err(NormsError::MissingColumn("R1..R3 (1 to 3 response columns)".into()));
            }
            let cue_col = column(cue)?;
            let resp_cols = responses.iter().map(|c| column(c)).collect::<Result<Vec<_>, _>>()?;
            let mut next_participant: HashMap<String, u32> = HashMap::new();
            for record in reader.records() {
                let record = match record {
                    Ok(r) => r,
                    Err(e) => {
                        rejects.push(csv_reject(&e));
                        continue;
                    }
                };
                let line = record.position().map(|p| p.line()).unwrap_or(0);
                let raw = record.iter().collect::<Vec<_>>().join(&delim);
                if record.len() != headers.len() {
                    rejects.push(Reject {
                        line,
                        reason: format!("expected {} fields, found {}", headers.len(), record.len()),
                        raw,
                    });
                    continue;
                }
                let cue_token = clean(&record[cue_col]);
                if cue_token.is_empty() {
                    rejects.push(Reject { line, reason: "empty cue".into(), raw });
                    continue;
                }
                seen_cues.insert(cue_token.clone());
                let kept: Vec<(Rank, String)> = resp_cols
                    .iter()
                    .enumerate()
                    .filter_map(|(pos, &col)| {
                        let token = clean(&record[col]);
                        (!token.is_empty()).then(|| (Rank::from_position(pos).expect("<= 3 columns"), token))
                    })
                    .collect();
                if kept.is_empty() {
                    rejects.push(Reject { line, reason: "no responses".into(), raw });
                    continue;
                }
                let counter = next_participant.entry(cue_token.clone()).or_insert(0);
                *counter += 1;
                for (rank, token) in kept {
                    instances.push(AssociationInstance::new(cue_token.clone(), token, *counter, rank)?);
                }
            }
        }
        ColumnMapping::Long { cue, response, rank, participant } => {
            let cue_col = column(cue)?;
            let resp_col = column(response)?;
            let rank_col = column(rank)?;
            let part_col = participant.as_deref().map(column).transpose()?;
            // per cue: source participant id -> re-indexed id
            let mut participant_ids: HashMap<String, HashMap<String, u32>> = HashMap::new();
            let mut per_rank_counter: HashMap<(String, Rank), u32> = HashMap::new();
            let mut taken: BTreeSet<(String, u32, Rank)> = BTreeSet::new();
            for record in reader.records() {
                let record = match record {
                    Ok(r) => r,
                    Err(e) => {
                        rejects.push(csv_reject(&e));
                        continue;
                    }
                };
                let line = record.position().map(|p| p.line()).unwrap_or(0);
                let raw = record.iter().collect::<Vec<_>>().join(&delim);
                if record.len() != headers.len() {
                    rejects.push(Reject {
                        line,
                        reason: format!("expected {} fields, found {}", headers.len(), record.len()),
                        raw,
                    });
                    continue;
                }
                let cue_token = clean(&record[cue_col]);
                if cue_token.is_empty() {
                    rejects.push(Reject { line, reason: "empty cue".into(), raw });
                    continue;
                }
                seen_cues.insert(cue_token.clone());
                let rk = match record[rank_col].parse::<Rank>() {
                    Ok(r) => r,
                    Err(e) => {
                        rejects.push(Reject { line, reason: e, raw });
                        continue;
                    }
                };
                let token = clean(&record[resp_col]);
                if token.is_empty() {
                    rejects.push(Reject { line, reason: "no responses".into(), raw });
                    continue;
                }
                let pid = match part_col {
                    Some(col) => {
                        let ids = participant_ids.entry(cue_token.clone()).or_default();
                        let next = ids.len() as u32 + 1;
                        *ids.entry(record[col].trim().to_string()).or_insert(next)
                    }
                    None => {
                        let c = per_rank_counter.entry((cue_token.clone(), rk)).or_insert(0);
                        *c += 1;
                        *c
                    }
                };
                if !taken.insert((cue_token.clone(), pid, rk)) {
                    rejects.push(Reject {
                        line,
                        reason: "duplicate response for participant at this rank".into(),
                        raw,
                    });
                    continue;
                }
                instances.push(AssociationInstance::new(cue_token, token, pid, rk)?);
            }
        }
    }

    let dataset = AssociationDataset::new(options.label.clone(), None, instances)?;
    let dropped_cues = seen_cues.into_iter().filter(|c| !dataset.contains_cue(c)).collect();
    Ok(HumanIngest { dataset, rejects, dropped_cues })
}

fn csv_reject(e: &csv::Error) -> Reject {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Reject { line, reason: format!("malformed row: {e}"), raw: String::new() }
}

pub const DEFAULT_MIN_DOC_COUNT: u64 = 3;

#[derive(Debug, Clone, Default)]
pub struct FrequencyIngest {
    pub counts: HashMap<String, u64>,
    pub rejects: Vec<Reject>,
    pub excluded_digits: usize,
    pub excluded_doc_count: usize,
    /// False when some lines had no document-count column.
    pub doc_filter_applied: bool,
}

/// Parses whitespace-separated `token count [doc_count]` lines.
///
/// Tokens containing digits, and tokens seen in fewer than `min_doc_count`
/// documents (when that column exists), are excluded. Duplicate tokens after
/// normalization have their counts summed.
pub fn parse_frequency_norms<R: BufRead>(input: R, min_doc_count: u64) -> Result<FrequencyIngest, NormsError> {
    let mut out = FrequencyIngest { doc_filter_applied: true, ..Default::default() };
    let mut usable = 0usize;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(|source| NormsError::Unreadable { what: "frequency norms".into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let reject = |reason: &str| Reject { line: line_no, reason: reason.into(), raw: line.clone() };
        // The token itself may contain spaces only if the line has extra fields;
        // treat the last one or two numeric fields as counts.
        let (token_parts, count, docs) = match fields.len() {
            0 | 1 => {
                out.rejects.push(reject("expected token and count"));
                continue;
            }
            2 => (&fields[..1], fields[1].parse::<u64>(), None),
            3 => (&fields[..1], fields[1].parse::<u64>(), Some(fields[2].parse::<u64>())),
            _ => {
                out.rejects.push(reject("too many fields"));
                continue;
            }
        };
        let count = match count {
            Ok(c) if c >= 1 => c,
            _ => {
                out.rejects.push(reject("count is not a positive integer"));
                continue;
            }
        };
        let docs = match docs {
            None => None,
            Some(Ok(d)) => Some(d),
            Some(Err(_)) => {
                out.rejects.push(reject("document count is not an integer"));
                continue;
            }
        };
        usable += 1;
        let token = basic_normalize(token_parts[0]);
        if token.chars().any(char::is_numeric) {
            out.excluded_digits += 1;
            continue;
        }
        match docs {
            Some(d) if d < min_doc_count => {
                out.excluded_doc_count += 1;
                continue;
            }
            Some(_) => {}
            None => out.doc_filter_applied = false,
        }
        *out.counts.entry(token).or_insert(0) += count;
    }
    if usable == 0 {
        return Err(NormsError::NoUsableLines("frequency norms"));
    }
    if !out.doc_filter_applied {
        warn!("frequency norms lack a document-count column on some lines; min_doc_count filter skipped there");
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct ConcretenessIngest {
    pub ratings: HashMap<String, f64>,
    pub rejects: Vec<Reject>,
}

/// Parses a delimited concreteness table with a header row.
pub fn parse_concreteness_norms<R: Read>(
    input: R,
    word_col: &str,
    rating_col: &str,
    delimiter: u8,
) -> Result<ConcretenessIngest, NormsError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| NormsError::MissingColumn(name.to_string()))
    };
    let word_idx = find(word_col)?;
    let rating_idx = find(rating_col)?;
    let delim = char::from(delimiter).to_string();
    let none = CorrectionMap::default();

    let mut out = ConcretenessIngest::default();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                out.rejects.push(csv_reject(&e));
                continue;
            }
        };
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let raw = record.iter().collect::<Vec<_>>().join(&delim);
        let (Some(word), Some(rating)) = (record.get(word_idx), record.get(rating_idx)) else {
            out.rejects.push(Reject { line, reason: "missing fields".into(), raw });
            continue;
        };
        let token = normalize_token(word, &none);
        if token.is_empty() {
            out.rejects.push(Reject { line, reason: "empty word".into(), raw });
            continue;
        }
        let value = match rating.trim().parse::<f64>() {
            Ok(v) if (1.0..=5.0).contains(&v) => v,
            Ok(_) => {
                out.rejects.push(Reject { line, reason: "rating outside [1, 5]".into(), raw });
                continue;
            }
            Err(_) => {
                out.rejects.push(Reject { line, reason: "rating is not a number".into(), raw });
                continue;
            }
        };
        if out.ratings.contains_key(&token) {
            out.rejects.push(Reject { line, reason: "duplicate word".into(), raw });
            continue;
        }
        out.ratings.insert(token, value);
    }
    if out.ratings.is_empty() {
        return Err(NormsError::NoUsableLines("concreteness norms"));
    }
    Ok(out)
}

/// Frequency and concreteness lookups over normalized tokens.
#[derive(Debug, Clone, Default)]
pub struct LexicalNorms {
    frequency: HashMap<String, u64>,
    concreteness: HashMap<String, f64>,
}

impl LexicalNorms {
    /// Panics if a frequency is zero or a token has digits, or a rating is
    /// outside [1, 5]; the parsers never produce such entries.
    pub fn new(frequency: HashMap<String, u64>, concreteness: HashMap<String, f64>) -> Self {
        assert!(frequency.values().all(|&c| c >= 1), "frequencies must be >= 1");
        assert!(
            frequency.keys().all(|k| !k.chars().any(char::is_numeric)),
            "frequency tokens must not contain digits"
        );
        assert!(
            concreteness.values().all(|v| (1.0..=5.0).contains(v)),
            "concreteness ratings must lie in [1, 5]"
        );
        Self { frequency, concreteness }
    }

    /// Corpus count for a token; absent tokens count as 1.
    pub fn lookup_frequency(&self, token: &str) -> u64 {
        self.frequency.get(token).copied().unwrap_or(1)
    }

    pub fn has_frequency(&self, token: &str) -> bool {
        self.frequency.contains_key(token)
    }

    pub fn concreteness(&self, token: &str) -> Option<f64> {
        self.concreteness.get(token).copied()
    }

    pub fn has_concreteness(&self, token: &str) -> bool {
        self.concreteness.contains_key(token)
    }

    pub fn frequency_len(&self) -> usize {
        self.frequency.len()
    }

    pub fn concreteness_len(&self) -> usize {
        self.concreteness.len()
    }
}

pub(crate) fn open(path: &Path) -> Result<std::fs::File, NormsError> {
    std::fs::File::open(path).map_err(|source| NormsError::Unreadable {
        what: path.display().to_string(),
        source,
    })
}

/// `,` for `.csv` files, tab otherwise.
pub fn delimiter_for(path: &Path) -> u8 {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => b',',
        _ => b'\t',
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn no_corrections() -> CorrectionMap {
        CorrectionMap::default()
    }

    #[test]
    fn normalize_trims_and_lowercases() {
        assert_eq!(normalize_token("  Sand ", &no_corrections()), "sand");
        assert_eq!(normalize_token("Ice\t  Cream", &no_corrections()), "ice cream");
        assert_eq!(normalize_token("", &no_corrections()), "");
        assert_eq!(normalize_token("   ", &no_corrections()), "");
    }

    #[test]
    fn corrections_apply_after_normalization() {
        let map = CorrectionMap::from_pairs([("ocaen", "ocean")]).unwrap();
        assert_eq!(normalize_token("ocaen", &map), "ocean");
        assert_eq!(normalize_token(" OCAEN", &map), "ocean");
    }

    #[test]
    fn correction_chains_resolve_and_cycles_fail() {
        let map = CorrectionMap::from_pairs([("a", "b"), ("b", "c")]).unwrap();
        assert_eq!(normalize_token("a", &map), "c");
        assert!(CorrectionMap::from_pairs([("a", "b"), ("b", "a")]).is_err());
    }

    #[test]
    fn corrections_file_format() {
        let map = CorrectionMap::read("# comment\nocaen\tOcean\n\nteh\tthe\n".as_bytes()).unwrap();
        assert_eq!(map.len(), 2);
        assert!(CorrectionMap::read("only-one-column\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(raw in "[ \\tA-Za-z]{0,12}") {
            let map = CorrectionMap::from_pairs([("ab", "cd"), ("cd e", "x")]).unwrap();
            let once = normalize_token(&raw, &map);
            prop_assert_eq!(normalize_token(&once, &map), once.clone());
        }
    }

    #[test]
    fn wide_human_table() {
        let csv = "id,cue,R1,R2,R3\n1,beach,sand,Sun,NA\n2,Beach,sand,,\n3,beach,Ocean,waves,NA\n";
        let ingest = parse_human_norms(csv.as_bytes(), &HumanNormsOptions::default(), &no_corrections()).unwrap();
        let ds = &ingest.dataset;
        assert_eq!(ds.select("beach", Rank::R1).len(), 3);
        assert_eq!(ds.unique_responses("beach", Rank::R1).len(), 2);
        assert_eq!(ds.select("beach", Rank::R2).len(), 2);
        assert!(ds.select("beach", Rank::R3).is_empty());
        assert!(ingest.rejects.is_empty());
    }

    #[test]
    fn empty_rows_are_rejected_and_cues_dropped() {
        let csv = "cue,R1,R2,R3\nbeach,sand,,\nvoid,NA,NA,No more responses\nshort,a\n";
        let ingest = parse_human_norms(csv.as_bytes(), &HumanNormsOptions::default(), &no_corrections()).unwrap();
        assert_eq!(ingest.rejects.len(), 2);
        assert_eq!(ingest.rejects[0].line, 3);
        assert_eq!(ingest.rejects[0].reason, "no responses");
        assert_eq!(ingest.dropped_cues, vec!["void".to_string()]);
        assert_eq!(ingest.dataset.cue_count(), 1);
    }

    #[test]
    fn long_human_table_with_participants() {
        let tsv = "cue\tresponse\trank\tpid\nbeach\tsand\t1\tp9\nbeach\tsun\t2\tp9\nbeach\tsea\t1\tp4\nbeach\tx\t1\tp4\n";
        let options = HumanNormsOptions {
            mapping: ColumnMapping::Long {
                cue: "cue".into(),
                response: "response".into(),
                rank: "rank".into(),
                participant: Some("pid".into()),
            },
            delimiter: b'\t',
            ..Default::default()
        };
        let ingest = parse_human_norms(tsv.as_bytes(), &options, &no_corrections()).unwrap();
        let r1 = ingest.dataset.select("beach", Rank::R1);
        assert_eq!(r1.len(), 2);
        assert_eq!((r1[0].participant, r1[0].response.as_str()), (1, "sand"));
        assert_eq!((r1[1].participant, r1[1].response.as_str()), (2, "sea"));
        assert_eq!(ingest.rejects.len(), 1);
    }

    #[test]
    fn missing_column_is_fatal() {
        let csv = "cue,first\nbeach,sand\n";
        let err = parse_human_norms(csv.as_bytes(), &HumanNormsOptions::default(), &no_corrections());
        assert!(matches!(err, Err(NormsError::MissingColumn(_))));
    }

    #[test]
    fn frequency_filters() {
        let text = "beach 151000 9200\ncovid19 88000 5000\nrare 50 2\nBeach 10 10\nbroken line here now\n";
        let f = parse_frequency_norms(text.as_bytes(), DEFAULT_MIN_DOC_COUNT).unwrap();
        assert_eq!(f.counts.get("beach"), Some(&151010));
        assert!(!f.counts.contains_key("covid19"));
        assert!(!f.counts.contains_key("rare"));
        assert_eq!(f.excluded_digits, 1);
        assert_eq!(f.excluded_doc_count, 1);
        assert_eq!(f.rejects.len(), 1);
        assert!(f.doc_filter_applied);
    }

    #[test]
    fn frequency_without_doc_column() {
        let f = parse_frequency_norms("sand 40\nsea 20\n".as_bytes(), 3).unwrap();
        assert!(!f.doc_filter_applied);
        assert_eq!(f.counts.len(), 2);
        assert!(parse_frequency_norms("garbage\n\n".as_bytes(), 3).is_err());
        assert!(parse_frequency_norms("".as_bytes(), 3).is_err());
    }

    #[test]
    fn concreteness_range_checks() {
        let tsv = "Word\tConc.M\nbanana\t5.00\njustice\t0.3\nidea\t1.6\nIdea\t2.0\nnan\tabc\n";
        let c = parse_concreteness_norms(tsv.as_bytes(), "Word", "Conc.M", b'\t').unwrap();
        assert_eq!(c.ratings.get("banana"), Some(&5.0));
        assert!(!c.ratings.contains_key("justice"));
        assert_eq!(c.ratings.get("idea"), Some(&1.6));
        assert_eq!(c.rejects.len(), 3);
        assert_eq!(c.rejects[0].reason, "rating outside [1, 5]");
    }

    #[test]
    fn lookup_defaults_to_one() {
        let norms = LexicalNorms::new(HashMap::from([("sand".to_string(), 4096)]), HashMap::new());
        assert_eq!(norms.lookup_frequency("sand"), 4096);
        assert_eq!(norms.lookup_frequency("Sand"), 1);
        assert_eq!(norms.lookup_frequency("zzz"), 1);
    }

    #[test]
    fn rejects_tsv_escapes_tabs() {
        let mut buf = Vec::new();
        write_rejects(&mut buf, &[Reject { line: 4, reason: "bad".into(), raw: "a\tb".into() }]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "line_number\treason\traw_content\n4\tbad\ta\\tb\n");
    }
}
