//! Edits a built knowledge base and keeps its approximations current from the
//! change log alone.

use latticekb::evidence::{TruthTriple, TruthValue};
use latticekb::kbio::fixture::lbp_kb;
use latticekb::kbio::BuildSettings;
use latticekb::label::{FactId, Label};
use latticekb::lattice::{delete_fact, insert_fact, modify_node, DecisionChange, Fact, NodeChange};
use latticekb::propagation::DecisionEntry;
use latticekb::roughset::{all_approximations, apply_changes};

fn report(changes: &[DecisionChange], order: usize) {
    for c in changes {
        println!("  {:<5} {}  {:?}", c.disease, c.label.render(order), c.kind);
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = lbp_kb(BuildSettings::default())?;
    let approx = all_approximations(&kb);

    println!("force PIVD at f1+f3 to vd=2:");
    let edit = modify_node(&kb, Label::from_bits(0b101), NodeChange::SetTruth { disease: "PIVD".into(), vd: TruthValue::Inconclusive })?;
    report(&edit.changes, kb.order());
    let updated = apply_changes(&approx, &edit.changes)?;
    assert_eq!(updated, all_approximations(&edit.lattice));

    println!("\ninsert a fourth fact with one atomic decision:");
    let fact = Fact::new(4, "pain at night", "yes");
    let entry = DecisionEntry::atomic(FactId(4), "SIJ", TruthValue::Present, 0.42, TruthTriple::new(0.6, 0.1, 0.3));
    let grown = insert_fact(&edit.lattice, fact, vec![entry])?;
    println!("  {} nodes, {} decision changes", grown.lattice.node_count(), grown.changes.len());
    let after_insert = apply_changes(&updated, &grown.changes)?;
    assert_eq!(after_insert, all_approximations(&grown.lattice));

    println!("\ndelete it again:");
    let shrunk = delete_fact(&grown.lattice, FactId(4))?;
    println!("  {} nodes, {} decision changes", shrunk.lattice.node_count(), shrunk.changes.len());
    assert_eq!(shrunk.lattice, edit.lattice);
    println!("\napproximations stayed in sync with full recomputation");
    Ok(())
}
