//! Evidence ingestion, KB persistence, rule export and the command line.

pub mod cli;
pub mod export;
pub mod fixture;
pub mod grammar;
pub mod store;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::evidence::{assess, EvidenceError, EvidenceProfile, SourceGrading};
use crate::label::{FactId, Label};
use crate::lattice::{build_kb, BuildOptions, Fact, Lattice, LatticeError, DEFAULT_MAX_ORDER};
use crate::metrics::MetricsError;
use crate::precision::Precision;
use crate::propagation::{AlphaThreshold, DecisionEntry, ExternalEvidence, PropagationError, PropagationInputs};
use crate::roughset::RoughSetError;

pub use export::{export_records, export_text, render_condition, RuleExport};
pub use grammar::{parse_evidence, render_evidence, EvidenceDocument, EvidenceRecord, FactDecl, ParseError, PriorityDecl};
pub use store::{load_kb, serialize_kb, StoreError};

#[derive(Debug, Error)]
pub enum KbError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    RoughSet(#[from] RoughSetError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Knobs applied on top of what the document declares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildSettings {
    /// Overrides the document's `alpha` line.
    pub alpha: Option<f64>,
    pub precision: Precision,
    pub max_order: usize,
}

impl Default for BuildSettings {
    fn default() -> Self {
        Self {
            alpha: None,
            precision: Precision::Full,
            max_order: DEFAULT_MAX_ORDER,
        }
    }
}

/// Evidence profiles grouped by fact set and disease, in first-seen order.
pub fn collect_profiles(doc: &EvidenceDocument) -> Vec<(Vec<FactId>, String, EvidenceProfile)> {
    let mut out: Vec<(Vec<FactId>, String, EvidenceProfile)> = Vec::new();
    for rec in &doc.evidence {
        let i = match out
            .iter()
            .position(|(f, d, _)| *f == rec.facts && *d == rec.disease)
        {
            Some(i) => i,
            None => {
                out.push((rec.facts.clone(), rec.disease.clone(), EvidenceProfile::new(doc.grading)));
                out.len() - 1
            }
        };
        out[i]
            .2
            .add(rec.assertion, rec.level, rec.count)
            .expect("parser validated the level");
    }
    out
}

/// Parses nothing: turns a validated document into a propagated lattice.
/// Fact-disease pairs whose evidence has no weight are left out.
pub fn build_from_document(doc: &EvidenceDocument, settings: BuildSettings) -> Result<Lattice, KbError> {
    let grading = SourceGrading::new(doc.grading)?;
    let precision = settings.precision;
    let alpha = AlphaThreshold::new(settings.alpha.or(doc.alpha).unwrap_or(0.0))?;

    let mut inputs = PropagationInputs {
        alpha,
        precision,
        ..PropagationInputs::default()
    };
    for p in &doc.priorities {
        match p {
            PriorityDecl::Global {
                disease,
                fact,
                priority,
            } => inputs.priorities.set_global(disease.clone(), *fact, *priority),
            PriorityDecl::Scoped {
                disease,
                facts,
                priorities,
            } => inputs.priorities.set_scoped(
                disease.clone(),
                Label::from_facts(facts.iter().copied()),
                priorities.iter().copied().collect(),
            ),
        }
    }

    let mut atomic: BTreeMap<FactId, Vec<DecisionEntry>> = BTreeMap::new();
    for (facts, disease, profile) in collect_profiles(doc) {
        let (tv, vd, cf) = match assess(&profile, &grading, precision) {
            Ok(r) => r,
            Err(EvidenceError::ZeroEvidence) => continue,
            Err(e) => return Err(e.into()),
        };
        if let [fact] = facts.as_slice() {
            atomic
                .entry(*fact)
                .or_default()
                .push(DecisionEntry::atomic(*fact, disease, vd, cf, tv));
        } else {
            inputs
                .external
                .insert((Label::from_facts(facts), disease), ExternalEvidence { tv, vd, cf });
        }
    }

    let options = BuildOptions {
        module: doc.module.clone(),
        grading,
        max_order: settings.max_order,
        diseases: doc.diseases.iter().cloned().collect(),
        inputs,
    };
    let facts = doc
        .facts
        .iter()
        .map(|f| Fact {
            id: f.id,
            attribute: f.attribute.clone(),
            value: f.value.clone(),
        })
        .collect();
    Ok(build_kb(facts, atomic, options)?)
}
