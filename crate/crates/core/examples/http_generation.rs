//! Queries an OpenAI-compatible chat-completions endpoint.
//!
//! Usage: `cargo run --example http_generation -- <endpoint> [model]`, or set
//! `WORDASSOC_ENDPOINT`. The bearer token is read from `OPENAI_API_KEY`.

use std::time::Duration;

use wordassoc::generation::{generate_dataset, GenerationConfig, HttpBackend, RunOptions, RunPaths};
use wordassoc::model::Rank;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let Some(endpoint) = args.next().or_else(|| std::env::var("WORDASSOC_ENDPOINT").ok()) else {
        eprintln!("no endpoint given; pass one as the first argument or set WORDASSOC_ENDPOINT");
        return Ok(());
    };
    let model = args.next().unwrap_or_else(|| "gpt-4o-mini".into());
    let backend = HttpBackend::new(&endpoint, std::env::var("OPENAI_API_KEY").ok(), Duration::from_secs(60))?;
    let config = GenerationConfig {
        endpoint_url: Some(endpoint),
        model_name: model,
        repetitions: 5,
        concurrency_limit: 2,
        requests_per_second: Some(2.0),
        ..Default::default()
    };
    let dir = tempfile::tempdir()?;
    let paths = RunPaths::for_output(&dir.path().join("http.tsv"));
    let run = generate_dataset(&config, &["beach", "idea"], &backend, &paths, &RunOptions::default())?;
    println!("{}", serde_json::to_string_pretty(&run.report)?);
    if let Some(ds) = run.dataset {
        for cue in ds.cues() {
            println!("{cue}: {:?}", ds.response_counts(cue, Rank::R1));
        }
    }
    Ok(())
}
