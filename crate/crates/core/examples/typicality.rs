//! Associative strength, standardized strength and typicality of a model
//! dataset scored against a human reference.

use wordassoc::model::{AssociationDataset, AssociationInstance, Rank};
use wordassoc::stats::SdMode;
use wordassoc::typicality::{associative_strength, dataset_summary, standardized_strength, tok_ss1, typ_ss1};

fn dataset(label: &str, temperature: Option<f64>, counts: &[(&str, usize)]) -> anyhow::Result<AssociationDataset> {
    let mut instances = Vec::new();
    for (response, n) in counts {
        for _ in 0..*n {
            instances.push(AssociationInstance::new("beach", *response, instances.len() as u32 + 1, Rank::R1)?);
        }
    }
    Ok(AssociationDataset::new(label, temperature, instances)?)
}

fn main() -> anyhow::Result<()> {
    let human = dataset("human", None, &[("sand", 47), ("ocean", 30), ("towel", 23)])?;
    let model = dataset("model", Some(1.0), &[("sand", 80), ("sun", 20)])?;

    let profile = associative_strength(&human, "beach", Rank::R1)?;
    for response in ["sand", "ocean", "towel", "sun"] {
        println!("{response}: S1 {:.2}, SS1 {:.3}", profile.strength(response), standardized_strength(&profile, response)?);
    }
    println!("human tok-SS1 {:.3} typ-SS1 {:.3}", tok_ss1(&human, &profile)?, typ_ss1(&human, &profile)?);
    println!("model tok-SS1 {:.3} typ-SS1 {:.3}", tok_ss1(&model, &profile)?, typ_ss1(&model, &profile)?);

    let summary = dataset_summary(&model, &human, &["beach"], Rank::R1, SdMode::Population);
    println!("{}", serde_json::to_string_pretty(&summary.aggregate)?);
    Ok(())
}
