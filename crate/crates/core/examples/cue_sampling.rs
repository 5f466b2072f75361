//! Seeded cue sampling with a per-respondent filter and a representativeness
//! comparison against the full cue set.

use wordassoc::model::{AssociationDataset, AssociationInstance, Rank};
use wordassoc::sampling::{representativeness_report, sample_cues};
use wordassoc::stats::SdMode;

fn main() -> anyhow::Result<()> {
    let mut instances = Vec::new();
    for c in 0..40u32 {
        for p in 1..=10u32 {
            let response = format!("word{}", (p * p + c) % (c % 5 + 2));
            instances.push(AssociationInstance::new(format!("cue{c:02}"), response, p, Rank::R1)?);
        }
    }
    let human = AssociationDataset::new("human", None, instances)?;
    let answered = human.instances().iter().filter(|i| !i.cue.ends_with('7')).cloned().collect();
    let model = AssociationDataset::new("model", Some(1.0), answered)?;

    let all: Vec<&str> = human.cues().collect();
    let mut manifest = sample_cues(&all, 12, 2024)?;
    manifest.filter_against(&[&human, &model], Rank::R1);
    println!("kept {} of {} sampled cues; dropped {:?}", manifest.post_filter_cues.len(), manifest.sampled_cues.len(), manifest.drop_reasons);

    for row in representativeness_report(&manifest.post_filter_cues, &human, None, Rank::R1, SdMode::Population)? {
        println!("{:<14} subset {:?} full {:?}", row.metric, row.subset, row.full);
    }
    Ok(())
}
