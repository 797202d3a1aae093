//! Generates certain, possible and uncertain rules from the bundled knowledge
//! base and scores each one.

use latticekb::kbio::fixture::lbp_kb;
use latticekb::kbio::{export_text, render_condition, BuildSettings};
use latticekb::metrics::check_properties;
use latticekb::minimizer::{generate_rules, RuleKind};
use latticekb::precision::Precision;
use latticekb::roughset::all_approximations;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = lbp_kb(BuildSettings { precision: Precision::Round2, ..BuildSettings::default() })?;
    let approx = all_approximations(&kb);
    let rules = generate_rules(&kb, &approx, &[RuleKind::Certain, RuleKind::Possible, RuleKind::Uncertain]);

    print!("{}", export_text(&kb, &rules));

    println!("\nconditions over fact ids:");
    for rule in &rules {
        println!("  {:<9} {:<5} vd={}  {}", rule.kind.as_str(), rule.disease, rule.vd, rule.condition);
    }
    let first = &rules[0];
    println!("\nfirst rule condition spelled out: {}", render_condition(&kb, &first.condition));

    let report = check_properties(&kb, &approx);
    for check in &report.checks {
        println!("property {}: {} classes, {} failures", check.property, check.classes_checked, check.failures.len());
    }
    Ok(())
}
