//! Propagates the bundled low-back-pain evidence through its lattice and
//! prints every node's decisions, once at full precision and once with
//! two-decimal rounding.

use latticekb::kbio::fixture::lbp_kb;
use latticekb::kbio::BuildSettings;
use latticekb::precision::{format_fixed, Precision};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for precision in [Precision::Full, Precision::Round2] {
        let kb = lbp_kb(BuildSettings { precision, ..BuildSettings::default() })?;
        let d = precision.display_decimals().min(4);
        println!("== {precision} ==");
        for (label, entry) in kb.decisions() {
            let tv = entry.tv;
            println!(
                "{}  {:<5} vd={}  cf={}  tv=({}, {}, {})",
                kb.render_label(label),
                entry.disease,
                entry.vd,
                format_fixed(entry.cf, d),
                format_fixed(tv.presence, d),
                format_fixed(tv.absence, d),
                format_fixed(tv.inconclusive, d),
            );
        }
        println!();
    }
    Ok(())
}
