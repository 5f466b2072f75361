//! Append-only checkpoint log of completed prompt repetitions.
//!
//! Layout:
//!
//! ```text
//! # wordassoc checkpoint v1
//! # config_hash=<sha256>
//! # config=<json>
//! # started_unix=<seconds>
//! label\ttemperature\tcue\tresponse\tparticipant\trank
//! <instance rows of one repetition>
//! #done\t<cue>\t<repetition>
//! #gap\t<cue>\t<repetition>\t<reason>
//! ```
//!
//! Instance rows only count once their `#done` marker follows; rows left
//! pending by a crash are ignored on reload.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{Seek, SeekFrom, Write};
use std::path::Path;

use crate::model::{AssociationInstance, Rank, DATASET_HEADER};

const MAGIC: &str = "# wordassoc checkpoint v1";

#[derive(Debug, Default, Clone, PartialEq)]
pub struct CheckpointState {
    pub config_hash: String,
    pub instances: Vec<AssociationInstance>,
    pub done: BTreeSet<(String, u32)>,
    pub gaps: BTreeMap<(String, u32), String>,
}

impl CheckpointState {
    pub fn is_finished(&self, cue: &str, repetition: u32) -> bool {
        let key = (cue.to_string(), repetition);
        self.done.contains(&key) || self.gaps.contains_key(&key)
    }
}

/// Reads a checkpoint and truncates anything after the last committed marker
/// (a torn line or the rows of an unfinished repetition), so appends start on
/// a clean block boundary.
pub fn load(path: &Path) -> std::io::Result<CheckpointState> {
    let mut file = OpenOptions::new().read(true).write(true).open(path)?;
    let mut bytes = Vec::new();
    std::io::Read::read_to_end(&mut file, &mut bytes)?;

    let mut state = CheckpointState::default();
    let mut pending: BTreeMap<(String, u32), Vec<AssociationInstance>> = BTreeMap::new();
    let bad = |line: usize, why: &str| {
        std::io::Error::new(std::io::ErrorKind::InvalidData, format!("checkpoint line {line}: {why}"))
    };
    let mut committed_len = 0usize;
    let mut offset = 0usize;
    let mut line_no = 0usize;
    while let Some(rel) = bytes[offset..].iter().position(|&b| b == b'\n') {
        let end = offset + rel + 1;
        let line = std::str::from_utf8(&bytes[offset..end - 1]).map_err(|_| bad(line_no + 1, "invalid UTF-8"))?;
        offset = end;
        line_no += 1;
        if line_no == 1 {
            if line != MAGIC {
                return Err(bad(line_no, "not a checkpoint file"));
            }
            committed_len = end;
            continue;
        }
        if let Some(hash) = line.strip_prefix("# config_hash=") {
            state.config_hash = hash.to_string();
            committed_len = end;
            continue;
        }
        if line.starts_with("# ") || line == DATASET_HEADER || line.is_empty() {
            committed_len = end;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields[0] {
            "#done" if fields.len() == 3 => {
                let rep: u32 = fields[2].parse().map_err(|_| bad(line_no, "bad repetition"))?;
                let key = (fields[1].to_string(), rep);
                state.instances.extend(pending.remove(&key).unwrap_or_default());
                state.done.insert(key);
                committed_len = end;
            }
            "#gap" if fields.len() == 4 => {
                let rep: u32 = fields[2].parse().map_err(|_| bad(line_no, "bad repetition"))?;
                state.gaps.insert((fields[1].to_string(), rep), fields[3].to_string());
                committed_len = end;
            }
            _ if fields.len() == 6 => {
                let participant: u32 = fields[4].parse().map_err(|_| bad(line_no, "bad participant"))?;
                let rank: Rank = fields[5].parse().map_err(|e: String| bad(line_no, &e))?;
                let inst = AssociationInstance::new(fields[2], fields[3], participant, rank)
                    .map_err(|e| bad(line_no, &e.to_string()))?;
                pending.entry((fields[2].to_string(), participant)).or_default().push(inst);
            }
            _ => return Err(bad(line_no, "unrecognized record")),
        }
    }
    if committed_len < bytes.len() {
        file.set_len(committed_len as u64)?;
    }
    file.seek(SeekFrom::End(0))?;
    Ok(state)
}

/// Single writer appending whole repetitions.
pub struct CheckpointWriter {
    file: File,
    label: String,
    temperature: String,
}

impl CheckpointWriter {
    pub fn create(path: &Path, config_hash: &str, config_json: &str, label: &str, temperature: f64) -> std::io::Result<Self> {
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new().write(true).create_new(true).open(path)?;
        let started = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        write!(
            file,
            "{MAGIC}\n# config_hash={config_hash}\n# config={config_json}\n# started_unix={started}\n{DATASET_HEADER}\n"
        )?;
        file.sync_data()?;
        Ok(Self { file, label: label.to_string(), temperature: temperature.to_string() })
    }

    pub fn append_to(path: &Path, label: &str, temperature: f64) -> std::io::Result<Self> {
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(Self { file, label: label.to_string(), temperature: temperature.to_string() })
    }

    pub fn record_done(&mut self, cue: &str, repetition: u32, responses: &[(Rank, String)]) -> std::io::Result<()> {
        let mut buf = String::new();
        for (rank, response) in responses {
            buf.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                self.label, self.temperature, cue, response, repetition, rank
            ));
        }
        buf.push_str(&format!("#done\t{cue}\t{repetition}\n"));
        self.file.write_all(buf.as_bytes())?;
        self.file.flush()
    }

    pub fn record_gap(&mut self, cue: &str, repetition: u32, reason: &str) -> std::io::Result<()> {
        let reason: String = reason.chars().map(|c| if c == '\t' || c == '\n' || c == '\r' { ' ' } else { c }).collect();
        self.file.write_all(format!("#gap\t{cue}\t{repetition}\t{reason}\n").as_bytes())?;
        self.file.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt");
        let mut w = CheckpointWriter::create(&path, "abc", "{}", "m", 1.0).unwrap();
        w.record_done("beach", 1, &[(Rank::R1, "sand".into()), (Rank::R2, "sea".into())]).unwrap();
        w.record_gap("beach", 2, "parse\tfailure").unwrap();
        drop(w);
        // a crash mid-repetition: rows without marker plus a torn line
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"m\t1\tbeach\tsun\t3\t1\nm\t1\tbea").unwrap();
        drop(f);

        let state = load(&path).unwrap();
        assert_eq!(state.config_hash, "abc");
        assert_eq!(state.instances.len(), 2);
        assert!(state.is_finished("beach", 1));
        assert!(state.is_finished("beach", 2));
        assert!(!state.is_finished("beach", 3));
        assert_eq!(state.gaps[&("beach".to_string(), 2)], "parse failure");
        assert!(std::fs::read_to_string(&path).unwrap().ends_with("#gap\tbeach\t2\tparse failure\n"));

        let mut w = CheckpointWriter::append_to(&path, "m", 1.0).unwrap();
        w.record_done("beach", 3, &[(Rank::R1, "sun".into())]).unwrap();
        let state = load(&path).unwrap();
        assert_eq!(state.instances.len(), 3);
    }

    #[test]
    fn refuses_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x");
        std::fs::write(&path, "hello\n").unwrap();
        assert!(load(&path).is_err());
        assert!(CheckpointWriter::create(&path, "h", "{}", "m", 1.0).is_err());
    }
}
