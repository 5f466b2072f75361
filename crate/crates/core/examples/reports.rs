//! Builds every report kind for a human reference and two synthetic
//! temperatures, writing tables and metadata to a temporary directory.

use std::collections::HashMap;

use wordassoc::generation::{temperature_sweep, GenerationConfig, RunOptions, SyntheticAgentSpec, SyntheticBackend};
use wordassoc::model::{AssociationDataset, AssociationInstance, Rank};
use wordassoc::norms::LexicalNorms;
use wordassoc::report::{build_report, emit_report, ReportInputs, ReportKind, ReportOptions};

const WORDS: &[(&str, u64, f64)] = &[
    ("beach", 900, 4.9),
    ("sand", 1200, 4.9),
    ("ocean", 2500, 4.8),
    ("sun", 8000, 4.8),
    ("waves", 700, 4.6),
    ("idea", 9000, 1.6),
    ("thought", 9500, 1.9),
    ("brain", 2000, 4.7),
    ("plan", 6500, 2.1),
    ("light", 12000, 4.2),
];

const SPEC: &str = "cue\trank\tresponse\tprobability\nbeach\t*\tsand|ocean|sun\t0.7\nbeach\t*\tocean|waves|sand\t0.3\nidea\t*\tthought|brain|plan\t0.8\nidea\t*\tlight|thought|brain\t0.2\n";

fn human() -> anyhow::Result<AssociationDataset> {
    let pools = [("beach", ["sand", "ocean", "sun", "waves", "sand"]), ("idea", ["thought", "brain", "plan", "light", "thought"])];
    let mut instances = Vec::new();
    for (cue, pool) in pools {
        for p in 1..=20u32 {
            for (k, rank) in [Rank::R1, Rank::R2, Rank::R3].into_iter().enumerate() {
                let response = pool[(p as usize * (k + 1)) % pool.len()];
                instances.push(AssociationInstance::new(cue, response, p, rank)?);
            }
        }
    }
    Ok(AssociationDataset::new("human", None, instances)?)
}

fn main() -> anyhow::Result<()> {
    let frequency: HashMap<String, u64> = WORDS.iter().map(|(w, f, _)| (w.to_string(), *f)).collect();
    let concreteness: HashMap<String, f64> = WORDS.iter().map(|(w, _, c)| (w.to_string(), *c)).collect();
    let norms = LexicalNorms::new(frequency, concreteness);
    let reference = human()?;

    let dir = tempfile::tempdir()?;
    let backend = SyntheticBackend::new(SyntheticAgentSpec::read(SPEC.as_bytes(), 9)?);
    let config = GenerationConfig { model_name: "agent".into(), repetitions: 40, retry_backoff_ms: 0, ..Default::default() };
    let datasets: Vec<AssociationDataset> =
        temperature_sweep(&config, &[0.5, 1.0], &["beach", "idea"], &backend, dir.path(), &RunOptions::default())?
            .into_iter()
            .filter_map(|run| run.dataset)
            .collect();

    let inputs = ReportInputs { reference: Some(&reference), datasets: &datasets, norms: Some(&norms), cues: None };
    let options = ReportOptions::default();
    for kind in ReportKind::ALL {
        let bundle = build_report(kind, &inputs, &options)?;
        let written = emit_report(&bundle, &dir.path().join(format!("{}.tsv", kind.name())))?;
        println!("{kind}: {} files", written.len());
    }
    let table1 = build_report(ReportKind::Table1, &inputs, &options)?;
    let mut out = Vec::new();
    table1.tables[0].write_tsv(&mut out)?;
    print!("{}", String::from_utf8(out)?);
    Ok(())
}
