//! Word-association datasets from repeated LLM prompting, and the measures
//! used to compare them with human association norms.
//!
//! * [`model`]: association instances, datasets and the canonical TSV format.
//! * [`norms`]: ingestion of human norms, frequency and concreteness tables.
//! * [`lexical`]: relative frequency / concreteness of cue-response pairs.
//! * [`typicality`]: associative strength profiles and typicality scores.
//! * [`stats`]: descriptive statistics, Pearson correlation, one-way ANOVA.
//! * [`generation`]: prompting backends, checkpointed dataset generation.
//! * [`sampling`]: seeded cue subsets and representativeness checks.
//! * [`report`]: table and figure data emitters.
//! * [`cli`]: the `wordassoc` command line.

pub mod cli;
pub mod generation;
pub mod lexical;
pub mod model;
pub mod norms;
pub mod report;
pub mod sampling;
pub mod stats;
pub mod typicality;

mod fsutil;

pub use fsutil::write_atomic;
