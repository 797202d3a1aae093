//! Builds a small lattice by hand from atomic decisions and walks it level by level.

use std::collections::BTreeMap;

use latticekb::evidence::{TruthTriple, TruthValue};
use latticekb::label::FactId;
use latticekb::lattice::{build_kb, check_structure, BuildOptions, Fact};
use latticekb::propagation::DecisionEntry;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let facts = vec![
        Fact::new(1, "fever", "yes"),
        Fact::new(2, "cough", "yes"),
        Fact::new(3, "rash", "yes"),
    ];
    let atomic = BTreeMap::from([
        (FactId(1), vec![
            DecisionEntry::atomic(FactId(1), "FLU", TruthValue::Present, 0.6, TruthTriple::new(0.7, 0.1, 0.2)),
            DecisionEntry::atomic(FactId(1), "MEASLES", TruthValue::Inconclusive, 0.3, TruthTriple::new(0.3, 0.2, 0.5)),
        ]),
        (FactId(2), vec![DecisionEntry::atomic(FactId(2), "FLU", TruthValue::Present, 0.5, TruthTriple::new(0.6, 0.1, 0.3))]),
        (FactId(3), vec![
            DecisionEntry::atomic(FactId(3), "FLU", TruthValue::Absent, 0.4, TruthTriple::new(0.1, 0.6, 0.3)),
            DecisionEntry::atomic(FactId(3), "MEASLES", TruthValue::Present, 0.8, TruthTriple::new(0.85, 0.05, 0.1)),
        ]),
    ]);
    let options = BuildOptions { module: "demo".into(), ..BuildOptions::default() };
    let kb = build_kb(facts, atomic, options)?;

    for level in kb.levels() {
        println!("level {}", level.level);
        for node in &level.nodes {
            let decisions: Vec<String> = node
                .decisions
                .iter()
                .map(|d| format!("{}: vd={} cf={:.3}", d.disease, d.vd, d.cf))
                .collect();
            println!("  {}  {}", kb.render_label(node.label), decisions.join(", "));
        }
    }
    let problems = check_structure(&kb);
    println!("\nstructure problems: {}", problems.len());
    Ok(())
}
