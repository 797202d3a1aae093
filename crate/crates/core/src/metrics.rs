//! Credibility-weighted support, strength, certainty and coverage of rules,
//! plus the probabilistic identities they satisfy.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::evidence::TruthValue;
use crate::label::Label;
use crate::lattice::Lattice;
use crate::minimizer::{generate_rules, MinimizedRule, RuleKind};
use crate::roughset::ApproximationSets;

/// Tolerance for the property identities.
pub const PROPERTY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("rule refers to node {0:b}, which has no decision for its disease")]
    DanglingLabel(u32),
    #[error("no credibility mass for the {0}")]
    ZeroMass(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleMetrics {
    pub support: f64,
    pub strength: f64,
    pub certainty: f64,
    pub coverage: f64,
}

fn cf_at(kb: &Lattice, label: Label, disease: &str) -> Option<(TruthValue, f64)> {
    kb.node(label)?.decision(disease).map(|d| (d.vd, d.cf))
}

/// Truth values a rule's certainty and coverage classes admit.
fn class_values(rule: &MinimizedRule) -> Vec<TruthValue> {
    match rule.kind {
        RuleKind::Certain => vec![rule.vd],
        RuleKind::Uncertain => vec![TruthValue::Inconclusive],
        RuleKind::Possible => vec![rule.vd, TruthValue::Inconclusive],
    }
}

fn half_if_inconclusive(rule: &MinimizedRule, ratio: f64) -> f64 {
    if rule.vd == TruthValue::Inconclusive {
        ratio / 2.0
    } else {
        ratio
    }
}

fn ratio(num: f64, den: f64, what: &'static str) -> Result<f64, MetricsError> {
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(MetricsError::ZeroMass(what))
    }
}

/// Sum of the credibility factors of the rule's constituent nodes.
pub fn support(rule: &MinimizedRule, kb: &Lattice) -> Result<f64, MetricsError> {
    rule.source_labels
        .iter()
        .map(|&l| {
            cf_at(kb, l, &rule.disease)
                .map(|(_, cf)| cf)
                .ok_or(MetricsError::DanglingLabel(l.bits()))
        })
        .sum()
}

/// Credibility mass of every node carrying the disease, whatever its truth
/// value.
pub fn disease_mass(kb: &Lattice, disease: &str) -> f64 {
    kb.decisions()
        .filter(|(_, d)| d.disease == disease)
        .map(|(_, d)| d.cf)
        .sum()
}

/// Credibility mass of the disease's nodes whose truth value is in `values`.
pub fn truth_class_mass(kb: &Lattice, disease: &str, values: &[TruthValue]) -> f64 {
    kb.decisions()
        .filter(|(_, d)| d.disease == disease && values.contains(&d.vd))
        .map(|(_, d)| d.cf)
        .sum()
}

/// Support over the disease's total credibility mass.
pub fn strength(rule: &MinimizedRule, kb: &Lattice) -> Result<f64, MetricsError> {
    ratio(support(rule, kb)?, disease_mass(kb, &rule.disease), "disease")
}

/// Support over the mass of nodes that satisfy the condition and fall in the
/// rule's truth class; halved for inconclusive rules.
pub fn certainty(rule: &MinimizedRule, kb: &Lattice) -> Result<f64, MetricsError> {
    let values = class_values(rule);
    let mass: f64 = kb
        .decisions()
        .filter(|(l, d)| d.disease == rule.disease && values.contains(&d.vd) && rule.condition.evaluate(*l))
        .map(|(_, d)| d.cf)
        .sum();
    Ok(half_if_inconclusive(rule, ratio(support(rule, kb)?, mass, "condition class")?))
}

/// Support over the mass of the disease's nodes in the rule's truth class;
/// halved for inconclusive rules.
pub fn coverage(rule: &MinimizedRule, kb: &Lattice) -> Result<f64, MetricsError> {
    let mass = truth_class_mass(kb, &rule.disease, &class_values(rule));
    Ok(half_if_inconclusive(rule, ratio(support(rule, kb)?, mass, "truth-value class")?))
}

pub fn rule_metrics(rule: &MinimizedRule, kb: &Lattice) -> Result<RuleMetrics, MetricsError> {
    Ok(RuleMetrics {
        support: support(rule, kb)?,
        strength: strength(rule, kb)?,
        certainty: certainty(rule, kb)?,
        coverage: coverage(rule, kb)?,
    })
}

/// Outcome of one property over all classes it applies to.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub property: u8,
    pub classes_checked: usize,
    pub failures: Vec<String>,
}

impl PropertyCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(PropertyCheck::passed)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= PROPERTY_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// A set of single-node rules sharing a disease, with the mass the class is
/// normalized by.
struct RuleClass {
    name: String,
    cfs: Vec<f64>,
    mass: f64,
    disease_mass: f64,
}

impl RuleClass {
    /// Property pairs (1, 3, 5) or (2, 4, 6): the class ratios sum to one,
    /// scaled by the class share they equal the summed strengths, and each
    /// ratio is its strength normalized by the summed strengths.
    fn check(&self, checks: &mut [PropertyCheck], ids: [u8; 3]) {
        let ratios: Vec<f64> = self.cfs.iter().map(|cf| cf / self.mass).collect();
        let strengths: Vec<f64> = self.cfs.iter().map(|cf| cf / self.disease_mass).collect();
        let ratio_sum: f64 = ratios.iter().sum();
        let strength_sum: f64 = strengths.iter().sum();
        let share = self.mass / self.disease_mass;

        let sums_to_one = close(ratio_sum, 1.0);
        let scaled = close(ratio_sum * share, strength_sum);
        let normalized = ratios
            .iter()
            .zip(&strengths)
            .all(|(r, s)| close(*r, s / strength_sum));
        for (id, ok) in ids.into_iter().zip([sums_to_one, scaled, normalized]) {
            let check = &mut checks[id as usize - 1];
            check.classes_checked += 1;
            if !ok {
                check.failures.push(self.name.clone());
            }
        }
    }
}

/// Evaluates the six identities over the certain rules' constituent classes
/// and over every `(disease, vd)` class with vd present or absent.
pub fn check_properties(kb: &Lattice, approx: &BTreeMap<String, ApproximationSets>) -> PropertyReport {
    let mut checks: Vec<PropertyCheck> = (1..=6)
        .map(|property| PropertyCheck {
            property,
            classes_checked: 0,
            failures: Vec::new(),
        })
        .collect();

    for rule in generate_rules(kb, approx, &[RuleKind::Certain]) {
        let cfs: Vec<f64> = rule
            .source_labels
            .iter()
            .filter_map(|&l| cf_at(kb, l, &rule.disease).map(|(_, cf)| cf))
            .collect();
        let mass: f64 = cfs.iter().sum();
        let disease_mass = disease_mass(kb, &rule.disease);
        if mass <= 0.0 || cfs.len() != rule.source_labels.len() {
            continue;
        }
        RuleClass {
            name: format!("{} vd={} condition {}", rule.disease, rule.vd, rule.condition),
            cfs,
            mass,
            disease_mass,
        }
        .check(&mut checks, [1, 3, 5]);
    }

    let diseases: BTreeSet<&str> = kb.decisions().map(|(_, d)| d.disease.as_str()).collect();
    for disease in diseases {
        for vd in [TruthValue::Absent, TruthValue::Present] {
            let cfs: Vec<f64> = kb
                .decisions()
                .filter(|(_, d)| d.disease == disease && d.vd == vd)
                .map(|(_, d)| d.cf)
                .collect();
            let mass: f64 = cfs.iter().sum();
            if mass <= 0.0 {
                continue;
            }
            RuleClass {
                name: format!("{disease} vd={vd}"),
                cfs,
                mass,
                disease_mass: disease_mass(kb, disease),
            }
            .check(&mut checks, [2, 4, 6]);
        }
    }
    PropertyReport { checks }
}
