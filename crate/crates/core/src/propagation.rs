//! Credibility propagation from constituent rules to composite nodes.
//!
//! Level-2 nodes combine their two atomic constituents pairwise. Nodes at
//! level three and above fix their truth value by folding over the immediate
//! predecessors left to right, then average the per-fact credibility sums.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::evidence::{TruthTriple, TruthValue};
use crate::label::{FactId, Label};
use crate::lattice::Lattice;
use crate::precision::Precision;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagationError {
    #[error("alpha {0} outside [0, 1]")]
    AlphaOutOfRange(f64),
}

/// One disease-level decision attached to a node.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionEntry {
    pub disease: String,
    pub vd: TruthValue,
    pub cf: f64,
    pub tv: TruthTriple,
    /// Conditional weightage of every fact in the owning node's condition.
    pub weights: BTreeMap<FactId, f64>,
}

impl DecisionEntry {
    /// Entry of an atomic rule about `fact`.
    pub fn atomic(fact: FactId, disease: impl Into<String>, vd: TruthValue, cf: f64, tv: TruthTriple) -> Self {
        Self {
            disease: disease.into(),
            vd,
            cf,
            tv,
            weights: BTreeMap::from([(fact, 1.0)]),
        }
    }
}

/// Gate below which a weighted credibility is treated as zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlphaThreshold(f64);

impl AlphaThreshold {
    pub fn new(alpha: f64) -> Result<Self, PropagationError> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(Self(alpha))
        } else {
            Err(PropagationError::AlphaOutOfRange(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Strict gate: only values above alpha pass.
    pub fn passes(self, x: f64) -> bool {
        x > self.0
    }
}

/// Evidence gathered directly for a composite condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExternalEvidence {
    pub tv: TruthTriple,
    pub vd: TruthValue,
    pub cf: f64,
}

/// Fact priorities per disease, either lattice-wide or scoped to one node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Priorities {
    global: BTreeMap<(String, FactId), u32>,
    scoped: BTreeMap<(String, Label), BTreeMap<FactId, u32>>,
}

impl Priorities {
    pub fn set_global(&mut self, disease: impl Into<String>, fact: FactId, priority: u32) {
        self.global.insert((disease.into(), fact), priority);
    }

    pub fn set_scoped(&mut self, disease: impl Into<String>, label: Label, priorities: BTreeMap<FactId, u32>) {
        self.scoped.insert((disease.into(), label), priorities);
    }

    pub fn global(&self) -> impl Iterator<Item = (&str, FactId, u32)> {
        self.global.iter().map(|((d, f), p)| (d.as_str(), *f, *p))
    }

    pub fn scoped(&self) -> impl Iterator<Item = (&str, Label, &BTreeMap<FactId, u32>)> {
        self.scoped.iter().map(|((d, l), p)| (d.as_str(), *l, p))
    }

    /// Priority of `fact` for `disease` inside the node `label`. Unspecified
    /// priorities default to 1, giving uniform weights.
    pub fn priority(&self, disease: &str, label: Label, fact: FactId) -> u32 {
        if let Some(p) = self
            .scoped
            .get(&(disease.to_string(), label))
            .and_then(|m| m.get(&fact))
        {
            return *p;
        }
        self.global
            .get(&(disease.to_string(), fact))
            .copied()
            .unwrap_or(1)
    }

    /// Conditional weightages `p_f / sum(p)` for the facts of `label`.
    pub fn weights(&self, disease: &str, label: Label) -> BTreeMap<FactId, f64> {
        let priorities: Vec<(FactId, u32)> = label
            .facts()
            .map(|f| (f, self.priority(disease, label, f).max(1)))
            .collect();
        let total: u32 = priorities.iter().map(|(_, p)| p).sum();
        priorities
            .into_iter()
            .map(|(f, p)| (f, p as f64 / total as f64))
            .collect()
    }

    /// Applies a relabelling, dropping entries whose node or fact disappears.
    pub(crate) fn remap(
        &self,
        label_map: impl Fn(Label) -> Option<Label>,
        fact_map: impl Fn(FactId) -> Option<FactId>,
    ) -> Self {
        let global = self
            .global
            .iter()
            .filter_map(|((d, f), p)| Some(((d.clone(), fact_map(*f)?), *p)))
            .collect();
        let scoped = self
            .scoped
            .iter()
            .filter_map(|((d, l), m)| {
                let l = label_map(*l)?;
                let m = m
                    .iter()
                    .filter_map(|(f, p)| Some((fact_map(*f)?, *p)))
                    .collect();
                Some(((d.clone(), l), m))
            })
            .collect();
        Self { global, scoped }
    }
}

/// Everything besides the atomic decisions that drives propagation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropagationInputs {
    pub alpha: AlphaThreshold,
    pub precision: Precision,
    pub priorities: Priorities,
    pub external: BTreeMap<(Label, String), ExternalEvidence>,
}

impl PropagationInputs {
    pub(crate) fn remap(
        &self,
        label_map: impl Fn(Label) -> Option<Label> + Copy,
        fact_map: impl Fn(FactId) -> Option<FactId> + Copy,
    ) -> Self {
        Self {
            alpha: self.alpha,
            precision: self.precision,
            priorities: self.priorities.remap(label_map, fact_map),
            external: self
                .external
                .iter()
                .filter_map(|((l, d), e)| Some(((label_map(*l)?, d.clone()), *e)))
                .collect(),
        }
    }
}

/// Two constituents agreeing on the truth value.
pub fn combine_same_vd(cf_i: f64, w_i: f64, cf_j: f64, w_j: f64, alpha: AlphaThreshold) -> f64 {
    let (a, b) = (cf_i * w_i, cf_j * w_j);
    let value = match (alpha.passes(a), alpha.passes(b)) {
        (true, true) => a + b,
        (true, false) => a,
        (false, true) => b,
        (false, false) => 0.0,
    };
    value.clamp(0.0, 1.0)
}

/// Two constituents disagreeing on the truth value. The truth value follows
/// the constituent with the larger unweighted credibility; equal credibilities
/// leave it inconclusive.
pub fn combine_diff_vd(
    (vd_i, cf_i): (TruthValue, f64),
    (vd_j, cf_j): (TruthValue, f64),
    w_i: f64,
    w_j: f64,
    alpha: AlphaThreshold,
) -> (TruthValue, f64) {
    let vd = if cf_i > cf_j {
        vd_i
    } else if cf_j > cf_i {
        vd_j
    } else {
        TruthValue::Inconclusive
    };
    let (a, b) = (cf_i * w_i, cf_j * w_j);
    let cf = match (alpha.passes(a), alpha.passes(b)) {
        (true, true) => (a - b).abs(),
        (true, false) => a,
        (false, true) => b,
        (false, false) => 0.0,
    };
    (vd, cf.clamp(0.0, 1.0))
}

/// Reconciles the lattice-derived decision with external evidence.
pub fn merge_external(
    vd_star: TruthValue,
    cf_star: f64,
    vd_ext: TruthValue,
    cf_ext: f64,
    tv3_merged: f64,
) -> (TruthValue, f64) {
    if vd_star == vd_ext {
        return (vd_star, (cf_star + cf_ext).min(1.0));
    }
    if cf_ext > cf_star {
        (vd_ext, cf_ext - cf_star)
    } else if cf_ext < cf_star {
        (vd_star, cf_star - cf_ext)
    } else {
        (TruthValue::Inconclusive, tv3_merged)
    }
}

/// Component-wise mean of the constituent triples and, when present, the
/// external triple.
pub fn merged_truth_triple(triples: &[TruthTriple], external: Option<TruthTriple>) -> TruthTriple {
    let all: Vec<TruthTriple> = triples.iter().copied().chain(external).collect();
    if all.is_empty() {
        return TruthTriple::default();
    }
    let n = all.len() as f64;
    let sum = all.iter().fold(TruthTriple::default(), |acc, t| {
        TruthTriple::new(
            acc.presence + t.presence,
            acc.absence + t.absence,
            acc.inconclusive + t.inconclusive,
        )
    });
    sum.map(|v| v / n)
}

/// Left fold over constituents through dummy rules: the side with the larger
/// credibility prevails and carries its credibility forward. A tie between
/// different truth values becomes inconclusive.
pub fn derive_vd_chain(constituents: &[(TruthValue, f64)]) -> TruthValue {
    vd_chain(constituents).0
}

fn vd_chain(constituents: &[(TruthValue, f64)]) -> (TruthValue, f64) {
    let mut iter = constituents.iter().copied();
    let Some(first) = iter.next() else {
        return (TruthValue::Inconclusive, 0.0);
    };
    iter.fold(first, |(vd, cf), (next_vd, next_cf)| {
        if cf > next_cf {
            (vd, cf)
        } else if next_cf > cf {
            (next_vd, next_cf)
        } else if vd == next_vd {
            (vd, cf)
        } else {
            (TruthValue::Inconclusive, cf)
        }
    })
}

/// A constituent rule seen from a composite node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constituent {
    pub label: Label,
    pub vd: TruthValue,
    pub cf: f64,
}

/// Net credibility of the constituents that share one fact. Members are
/// grouped by truth value; the heaviest group is offset by all other groups.
/// For two members this adds agreeing credibilities and takes the absolute
/// difference of disagreeing ones.
pub fn shared_fact_credibility(members: &[Constituent]) -> f64 {
    let mut mass: BTreeMap<TruthValue, f64> = BTreeMap::new();
    for m in members {
        *mass.entry(m.vd).or_default() += m.cf;
    }
    let total: f64 = mass.values().sum();
    let heaviest = mass.values().copied().fold(0.0, f64::max);
    heaviest - (total - heaviest)
}

/// Credibility of a node at `level >= 3` built from its predecessors carrying
/// the disease. Each fact contributes its shared-fact credibility times its
/// weight; contributions at or below alpha are zeroed.
pub fn cf_multi(
    level: usize,
    weights: &BTreeMap<FactId, f64>,
    constituents: &[Constituent],
    alpha: AlphaThreshold,
    precision: Precision,
) -> f64 {
    if level < 2 {
        return 0.0;
    }
    let total: f64 = weights
        .iter()
        .map(|(&fact, &w)| {
            let members: Vec<Constituent> = constituents
                .iter()
                .copied()
                .filter(|c| c.label.contains(fact))
                .collect();
            if members.is_empty() {
                return 0.0;
            }
            let term = shared_fact_credibility(&members) * w;
            if alpha.passes(term) {
                precision.apply(term)
            } else {
                0.0
            }
        })
        .sum();
    (total / (level - 1) as f64).clamp(0.0, 1.0)
}

/// A disease carried by a single constituent joins the new node when its
/// weighted credibility clears the gate.
pub fn carryover_single(vd: TruthValue, cf: f64, w: f64, alpha: AlphaThreshold) -> Option<(TruthValue, f64)> {
    let weighted = cf * w;
    alpha.passes(weighted).then_some((vd, weighted.clamp(0.0, 1.0)))
}

/// Recomputes every composite node of `kb` bottom-up under `inputs`.
pub fn propagate(kb: &Lattice, inputs: PropagationInputs) -> Lattice {
    let mut out = kb.clone();
    out.set_inputs(inputs);
    let labels: Vec<Label> = out
        .levels()
        .iter()
        .skip(2)
        .flat_map(|lv| lv.nodes.iter().map(|n| n.label))
        .collect();
    propagate_labels(&mut out, &labels);
    out
}

/// Recomputes the given composite labels, which must be listed in
/// non-decreasing level order.
pub(crate) fn propagate_labels(kb: &mut Lattice, labels: &[Label]) {
    for &label in labels {
        if label.level() < 2 {
            continue;
        }
        let decisions = compute_node(kb, label);
        kb.node_mut(label)
            .expect("label belongs to the lattice")
            .decisions = decisions;
    }
}

/// Decisions of a composite node derived from its current predecessors.
pub fn compute_node(kb: &Lattice, label: Label) -> Vec<DecisionEntry> {
    let inputs = kb.inputs();
    let alpha = inputs.alpha;
    let precision = inputs.precision;
    let level = label.level();
    let node = kb.node(label).expect("label belongs to the lattice");
    let preds: Vec<_> = node
        .predecessors
        .iter()
        .map(|&l| kb.node(l).expect("predecessor exists"))
        .collect();

    let mut diseases: BTreeSet<&str> = preds
        .iter()
        .flat_map(|p| p.decisions.iter().map(|d| d.disease.as_str()))
        .collect();
    for (l, d) in inputs.external.keys() {
        if *l == label {
            diseases.insert(d);
        }
    }

    let mut out = Vec::new();
    for disease in diseases {
        let weights = inputs.priorities.weights(disease, label);
        let carriers: Vec<(Label, &DecisionEntry)> = preds
            .iter()
            .filter_map(|p| p.decision(disease).map(|d| (p.label, d)))
            .collect();
        let external = inputs.external.get(&(label, disease.to_string()));

        let derived: Option<(TruthValue, f64)> = match carriers.as_slice() {
            [] => None,
            [(l, d)] => {
                let w: f64 = l.facts().map(|f| weights.get(&f).copied().unwrap_or(0.0)).sum();
                carryover_single(d.vd, d.cf, w, alpha)
            }
            [(li, di), (lj, dj)] if level == 2 => {
                let fact_i = li.facts().next().expect("atomic label");
                let fact_j = lj.facts().next().expect("atomic label");
                let (wi, wj) = (weights[&fact_i], weights[&fact_j]);
                Some(if di.vd == dj.vd {
                    (di.vd, combine_same_vd(di.cf, wi, dj.cf, wj, alpha))
                } else {
                    combine_diff_vd((di.vd, di.cf), (dj.vd, dj.cf), wi, wj, alpha)
                })
            }
            _ => {
                let chain: Vec<(TruthValue, f64)> = carriers.iter().map(|(_, d)| (d.vd, d.cf)).collect();
                let constituents: Vec<Constituent> = carriers
                    .iter()
                    .map(|(l, d)| Constituent {
                        label: *l,
                        vd: d.vd,
                        cf: d.cf,
                    })
                    .collect();
                let vd = derive_vd_chain(&chain);
                Some((vd, cf_multi(level, &weights, &constituents, alpha, precision)))
            }
        };

        let used_triples: Vec<TruthTriple> = if derived.is_some() {
            carriers.iter().map(|(_, d)| d.tv).collect()
        } else {
            Vec::new()
        };
        let tv = merged_truth_triple(&used_triples, external.map(|e| e.tv)).map(|v| precision.apply(v));
        let resolved = match (derived, external) {
            (None, None) => continue,
            (Some(d), None) => d,
            (None, Some(e)) => (e.vd, e.cf),
            (Some((vd, cf)), Some(e)) => merge_external(vd, cf, e.vd, e.cf, tv.inconclusive),
        };
        out.push(DecisionEntry {
            disease: disease.to_string(),
            vd: resolved.0,
            cf: precision.apply(resolved.1.clamp(0.0, 1.0)),
            tv,
            weights,
        });
    }
    out
}
