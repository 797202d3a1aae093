//! Rough-set approximations of every disease in the bundled knowledge base.

use latticekb::kbio::fixture::lbp_kb;
use latticekb::kbio::BuildSettings;
use latticekb::lattice::Lattice;
use latticekb::label::Label;
use latticekb::roughset::{all_approximations, concepts};
use std::collections::BTreeSet;

fn show(kb: &Lattice, set: &BTreeSet<Label>) -> String {
    let labels: Vec<String> = set.iter().map(|l| kb.render_label(*l)).collect();
    format!("{{{}}}", labels.join(", "))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = lbp_kb(BuildSettings::default())?;
    for (disease, sets) in all_approximations(&kb) {
        let pair = concepts(&kb, &disease)?;
        println!("{disease} ({})", kb.disease_name(&disease));
        println!("  {:<10} {}", "concept1", show(&kb, &pair.concept1));
        println!("  {:<10} {}", "concept2", show(&kb, &pair.concept2));
        for (name, set) in sets.named() {
            println!("  {name:<10} {}", show(&kb, set));
        }
        println!("  crisp: {}  consistent: {}", sets.is_crisp(), sets.is_consistent());
    }
    Ok(())
}
