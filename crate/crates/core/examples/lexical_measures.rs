//! Relative frequency and concreteness of cue-response pairs, plus binned
//! profiles along the cue axis.

use std::collections::HashMap;

use wordassoc::lexical::{bin_profile, unique_pair_measures, BinSpec};
use wordassoc::model::{AssociationDataset, AssociationInstance, Rank};
use wordassoc::norms::{parse_frequency_norms, LexicalNorms, DEFAULT_MIN_DOC_COUNT};

const FREQUENCIES: &str = "beach 900 40\nsand 1200 50\nocean 2500 60\nidea 9000 95\nthought 9500 95\nbrain 2000 60\nrare 2 1\n";

fn main() -> anyhow::Result<()> {
    let frequency = parse_frequency_norms(FREQUENCIES.as_bytes(), DEFAULT_MIN_DOC_COUNT)?.counts;
    let concreteness: HashMap<String, f64> =
        [("beach", 4.9), ("sand", 4.9), ("ocean", 4.8), ("idea", 1.6), ("thought", 1.9), ("brain", 4.7)]
            .into_iter()
            .map(|(w, r)| (w.to_string(), r))
            .collect();
    let norms = LexicalNorms::new(frequency, concreteness);

    let answers = [("beach", "sand"), ("beach", "ocean"), ("beach", "rare"), ("idea", "thought"), ("idea", "brain")];
    let instances = answers
        .iter()
        .enumerate()
        .map(|(p, (c, r))| AssociationInstance::new(*c, *r, p as u32 + 1, Rank::R1))
        .collect::<Result<Vec<_>, _>>()?;
    let ds = AssociationDataset::new("human", None, instances)?;

    let pairs = unique_pair_measures(&ds, Rank::R1, &norms);
    for p in &pairs {
        println!("{} -> {}: log2 freq ratio {:.3}, concreteness ratio {:?}", p.cue, p.response, p.log2_freq_ratio, p.concreteness_ratio);
    }
    for spec in [BinSpec::frequency_default(), BinSpec::concreteness_default()] {
        let profile = bin_profile(&pairs, &spec, &norms)?;
        println!("{:?}", profile.axis);
        for bin in profile.bins.iter().filter(|b| b.cue_count > 0) {
            println!("  [{:.2}, {:.2}] cues {} mean {:?}", bin.lower, bin.upper, bin.cue_count, bin.mean_measure);
        }
    }
    Ok(())
}
