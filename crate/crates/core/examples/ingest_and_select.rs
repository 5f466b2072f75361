//! Ingests a small wide-layout human table, applies spelling corrections and
//! prints per-rank selections.

use wordassoc::model::Rank;
use wordassoc::norms::{parse_human_norms, CorrectionMap, HumanNormsOptions};

const TABLE: &str = "\
participantID,cue,R1,R2,R3
1,BEACH,Sand,ocaen,sun
2,BEACH,sand,waves,No more responses
3,Beach,ocean,sand,towel
4,DOG,cat,bone,bark
5,dog,Cat,leash,NA
";

fn main() -> anyhow::Result<()> {
    let corrections = CorrectionMap::from_pairs([("ocaen", "ocean")])?;
    let ingest = parse_human_norms(TABLE.as_bytes(), &HumanNormsOptions::default(), &corrections)?;
    let ds = &ingest.dataset;
    println!("{} instances over {} cues, {} rejected rows", ds.len(), ds.cue_count(), ingest.rejects.len());
    for cue in ds.cues() {
        for rank in [Rank::R1, Rank::R2, Rank::R3] {
            let counts = ds.response_counts(cue, rank);
            println!("{cue} R{}: {counts:?}", rank.number());
        }
    }
    print!("{}", ds.to_tsv_string());
    Ok(())
}
