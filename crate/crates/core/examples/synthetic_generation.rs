//! Generates a temperature sweep from a seeded synthetic agent, interrupting
//! and resuming one run from its checkpoint.

use wordassoc::generation::{
    generate_dataset, temperature_sweep, GenerationConfig, RunOptions, RunPaths, SyntheticAgentSpec, SyntheticBackend,
};
use wordassoc::model::Rank;

const SPEC: &str = "\
cue\trank\tresponse\tprobability
beach\t1\tsand\t0.6
beach\t1\tocean\t0.3
beach\t1\ttowel\t0.1
beach\t2\twaves\t1
beach\t3\tsun\t1
idea\t*\tthought|brain|plan\t1
";

fn main() -> anyhow::Result<()> {
    let spec = SyntheticAgentSpec::read(SPEC.as_bytes(), 42)?;
    let backend = SyntheticBackend::new(spec);
    let cues = ["beach", "idea"];
    let config = GenerationConfig { model_name: "agent".into(), repetitions: 50, retry_backoff_ms: 0, ..Default::default() };
    let dir = tempfile::tempdir()?;

    for run in temperature_sweep(&config, &[0.0, 0.5, 1.0, 2.0], &cues, &backend, dir.path(), &RunOptions::default())? {
        let ds = run.dataset.expect("sweep runs to completion");
        println!("T = {}: beach R1 {:?}", run.report.temperature, ds.response_counts("beach", Rank::R1));
    }

    let paths = RunPaths::for_output(&dir.path().join("resumed.tsv"));
    let partial = generate_dataset(&config, &cues, &backend, &paths, &RunOptions { resume: false, stop_after: Some(30) })?;
    println!("interrupted after {} repetitions", partial.report.completed_repetitions);
    let done = generate_dataset(&config, &cues, &backend, &paths, &RunOptions { resume: true, stop_after: None })?;
    println!("resumed: {} repetitions, finished {}", done.report.completed_repetitions, done.report.finished);
    Ok(())
}
