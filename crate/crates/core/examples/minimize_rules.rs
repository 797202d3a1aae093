//! Two-level minimization of arbitrary minterm sets.

use std::collections::BTreeSet;

use latticekb::label::Label;
use latticekb::minimizer::{minimize, prime_implicants};

fn run(order: usize, minterms: &[u32]) -> Result<(), Box<dyn std::error::Error>> {
    let set: BTreeSet<Label> = minterms.iter().map(|&m| Label::from_bits(m)).collect();
    let primes = prime_implicants(minterms, order);
    let cover = minimize(&set, order)?;
    let shown: Vec<String> = set.iter().map(|l| l.render(order)).collect();
    println!("minterms {}", shown.join(" "));
    println!("  {} prime implicants", primes.len());
    println!("  minimal cover: {cover}  ({} literals)", cover.literal_count());
    let (common, rest) = cover.factored();
    if !common.is_empty() {
        println!("  factored: {} common literal(s), {} residual term(s)", common.len(), rest.len());
    }
    assert_eq!(cover.truth_set(), set);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run(3, &[0b100, 0b101])?;
    run(3, &[0b100, 0b101, 0b110, 0b111])?;
    run(4, &[0, 2, 5, 7, 8, 10, 13, 15])?;
    run(4, &[1, 3, 5, 7, 9, 11, 12, 13, 14, 15])?;
    let wide: Vec<u32> = (0..32).filter(|m| m & 0b10000 != 0 || m & 0b11 == 0b11).collect();
    run(5, &wide)?;
    Ok(())
}
