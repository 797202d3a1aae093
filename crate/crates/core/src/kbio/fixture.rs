//! The bundled low-back-pain knowledge base.

use super::grammar::{parse_evidence, EvidenceDocument};
use super::{build_from_document, BuildSettings, KbError};
use crate::lattice::Lattice;

/// Evidence file for three LBP symptoms and five diagnoses.
pub const LBP_EVIDENCE: &str = include_str!("../../data/lbp.evidence");

pub fn lbp_document() -> EvidenceDocument {
    parse_evidence(LBP_EVIDENCE).expect("bundled fixture parses")
}

pub fn lbp_kb(settings: BuildSettings) -> Result<Lattice, KbError> {
    build_from_document(&lbp_document(), settings)
}
