//! Turns graded source counts into a truth triple and a single decision.

use latticekb::evidence::{assess, presence_matrix, Assertion, EvidenceProfile, SourceGrading};
use latticekb::precision::Precision;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grading = SourceGrading::new(5)?;
    for level in 1..=grading.levels() {
        println!("level {level} weighs {}", grading.weight(level)?);
    }

    // Twenty sources say "present", six say "absent", twelve can't tell.
    let profile = EvidenceProfile::from_counts(
        5,
        [
            (Assertion::Presence, 3, 8),
            (Assertion::Presence, 4, 12),
            (Assertion::Absence, 5, 6),
            (Assertion::Inconclusive, 3, 7),
            (Assertion::Inconclusive, 5, 5),
        ],
    )?;

    println!("\npresence matrix (rows: present, absent, inconclusive)\n{}", presence_matrix(&profile));
    for precision in [Precision::Full, Precision::Round2] {
        let (tv, vd, cf) = assess(&profile, &grading, precision)?;
        println!(
            "{precision:>6}: tv = ({:.4}, {:.4}, {:.4})  vd = {vd}  cf = {cf:.4}",
            tv.presence, tv.absence, tv.inconclusive
        );
    }
    Ok(())
}
