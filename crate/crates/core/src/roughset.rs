//! Presence and absence concepts per disease and their rough approximations.
//!
//! Every node label is its own elementary set, so the lower approximation of
//! the presence concept is the set of nodes deciding the disease is present,
//! the upper approximation adds the inconclusive nodes, and the boundary is
//! exactly the inconclusive nodes. The absence concept mirrors this.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::evidence::TruthValue;
use crate::label::Label;
use crate::lattice::{ChangeKind, DecisionChange, Lattice};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoughSetError {
    #[error("unknown disease `{0}`")]
    UnknownDisease(String),
    #[error("node {0:b} is already in the approximations")]
    AlreadyPresent(u32),
    #[error("node {0:b} is not in the approximations with the expected truth value")]
    NotPresent(u32),
    #[error("truth value {0} did not change")]
    InvalidTransition(TruthValue),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConceptPair {
    pub disease: String,
    /// Nodes where the disease is present or inconclusive.
    pub concept1: BTreeSet<Label>,
    /// Nodes where the disease is absent or inconclusive.
    pub concept2: BTreeSet<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ApproximationSets {
    pub lower1: BTreeSet<Label>,
    pub upper1: BTreeSet<Label>,
    pub boundary1: BTreeSet<Label>,
    pub lower2: BTreeSet<Label>,
    pub upper2: BTreeSet<Label>,
    pub boundary2: BTreeSet<Label>,
}

fn check_disease(kb: &Lattice, disease: &str) -> Result<(), RoughSetError> {
    if kb.has_disease(disease) {
        Ok(())
    } else {
        Err(RoughSetError::UnknownDisease(disease.to_string()))
    }
}

fn labels_with(kb: &Lattice, disease: &str, keep: impl Fn(TruthValue) -> bool) -> BTreeSet<Label> {
    kb.decisions()
        .filter(|(_, d)| d.disease == disease && keep(d.vd))
        .map(|(l, _)| l)
        .collect()
}

pub fn concepts(kb: &Lattice, disease: &str) -> Result<ConceptPair, RoughSetError> {
    check_disease(kb, disease)?;
    Ok(ConceptPair {
        disease: disease.to_string(),
        concept1: labels_with(kb, disease, |vd| vd != TruthValue::Absent),
        concept2: labels_with(kb, disease, |vd| vd != TruthValue::Present),
    })
}

pub fn approximations(kb: &Lattice, disease: &str) -> Result<ApproximationSets, RoughSetError> {
    check_disease(kb, disease)?;
    let mut out = ApproximationSets::default();
    for (label, d) in kb.decisions().filter(|(_, d)| d.disease == disease) {
        out.insert(label, d.vd);
    }
    Ok(out)
}

/// Approximations of every registered disease.
pub fn all_approximations(kb: &Lattice) -> BTreeMap<String, ApproximationSets> {
    kb.diseases()
        .keys()
        .map(|d| (d.clone(), approximations(kb, d).expect("registered disease")))
        .collect()
}

impl ApproximationSets {
    /// Every `(name, set)` pair in a fixed order.
    pub fn named(&self) -> [(&'static str, &BTreeSet<Label>); 6] {
        [
            ("lower1", &self.lower1),
            ("upper1", &self.upper1),
            ("boundary1", &self.boundary1),
            ("lower2", &self.lower2),
            ("upper2", &self.upper2),
            ("boundary2", &self.boundary2),
        ]
    }

    /// Truth value a node was routed with, if it is present at all.
    pub fn vd_of(&self, label: Label) -> Option<TruthValue> {
        if self.lower1.contains(&label) {
            Some(TruthValue::Present)
        } else if self.lower2.contains(&label) {
            Some(TruthValue::Absent)
        } else if self.boundary1.contains(&label) {
            Some(TruthValue::Inconclusive)
        } else {
            None
        }
    }

    pub fn contains(&self, label: Label) -> bool {
        self.named().iter().any(|(_, s)| s.contains(&label))
    }

    /// The concept is crisp when nothing is inconclusive.
    pub fn is_crisp(&self) -> bool {
        self.boundary1.is_empty()
    }

    /// Lower and upper nesting, boundaries as differences, equal boundaries
    /// and disjoint lower regions.
    pub fn is_consistent(&self) -> bool {
        let diff = |u: &BTreeSet<Label>, l: &BTreeSet<Label>| u.difference(l).copied().collect::<BTreeSet<_>>();
        self.lower1.is_subset(&self.upper1)
            && self.lower2.is_subset(&self.upper2)
            && diff(&self.upper1, &self.lower1) == self.boundary1
            && diff(&self.upper2, &self.lower2) == self.boundary2
            && self.boundary1 == self.boundary2
            && self.lower1.is_disjoint(&self.lower2)
            && self.lower1.is_disjoint(&self.boundary1)
            && self.lower2.is_disjoint(&self.boundary1)
    }

    fn insert(&mut self, label: Label, vd: TruthValue) {
        match vd {
            TruthValue::Present => {
                self.upper1.insert(label);
                self.lower1.insert(label);
            }
            TruthValue::Absent => {
                self.upper2.insert(label);
                self.lower2.insert(label);
            }
            TruthValue::Inconclusive => {
                self.upper1.insert(label);
                self.boundary1.insert(label);
                self.upper2.insert(label);
                self.boundary2.insert(label);
            }
        }
    }

    fn remove(&mut self, label: Label, vd: TruthValue) {
        match vd {
            TruthValue::Present => {
                self.upper1.remove(&label);
                self.lower1.remove(&label);
            }
            TruthValue::Absent => {
                self.upper2.remove(&label);
                self.lower2.remove(&label);
            }
            TruthValue::Inconclusive => {
                self.upper1.remove(&label);
                self.boundary1.remove(&label);
                self.upper2.remove(&label);
                self.boundary2.remove(&label);
            }
        }
    }

    /// Routes nodes that newly carry the disease into the sets.
    pub fn on_decisions_added(&self, added: &[(Label, TruthValue)]) -> Result<Self, RoughSetError> {
        let mut out = self.clone();
        for &(label, vd) in added {
            if out.contains(label) {
                return Err(RoughSetError::AlreadyPresent(label.bits()));
            }
            out.insert(label, vd);
        }
        Ok(out)
    }

    /// Drops nodes that no longer carry the disease.
    pub fn on_decisions_removed(&self, removed: &[Label]) -> Result<Self, RoughSetError> {
        let mut out = self.clone();
        for &label in removed {
            let vd = out
                .vd_of(label)
                .ok_or(RoughSetError::NotPresent(label.bits()))?;
            out.remove(label, vd);
        }
        Ok(out)
    }

    /// Moves a node whose truth value changed from `old` to `new`.
    pub fn on_truth_changed(&self, label: Label, old: TruthValue, new: TruthValue) -> Result<Self, RoughSetError> {
        if old == new {
            return Err(RoughSetError::InvalidTransition(old));
        }
        if self.vd_of(label) != Some(old) {
            return Err(RoughSetError::NotPresent(label.bits()));
        }
        let mut out = self.clone();
        out.remove(label, old);
        out.insert(label, new);
        Ok(out)
    }

    /// Re-encodes every label; labels mapped to `None` are dropped.
    pub fn relabel(&self, f: impl Fn(Label) -> Option<Label>) -> Self {
        let map = |s: &BTreeSet<Label>| s.iter().filter_map(|&l| f(l)).collect();
        Self {
            lower1: map(&self.lower1),
            upper1: map(&self.upper1),
            boundary1: map(&self.boundary1),
            lower2: map(&self.lower2),
            upper2: map(&self.upper2),
            boundary2: map(&self.boundary2),
        }
    }
}

/// Applies a change log from a lattice edit to per-disease approximations.
/// Diseases first seen in the log start from empty sets.
pub fn apply_changes(
    approx: &BTreeMap<String, ApproximationSets>,
    changes: &[DecisionChange],
) -> Result<BTreeMap<String, ApproximationSets>, RoughSetError> {
    let mut out = approx.clone();
    for change in changes {
        let sets = out.entry(change.disease.clone()).or_default();
        *sets = match change.kind {
            ChangeKind::Added(vd) => sets.on_decisions_added(&[(change.label, vd)])?,
            ChangeKind::Removed(_) => sets.on_decisions_removed(&[change.label])?,
            ChangeKind::TruthChanged { old, new } => sets.on_truth_changed(change.label, old, new)?,
            ChangeKind::Updated(_) => continue,
        };
    }
    Ok(out)
}
