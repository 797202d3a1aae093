//! The order-n powerset lattice that stores the knowledge base.
//!
//! Nodes live level by level, each level in ascending label order. Adjacency
//! lists hold labels rather than positions so edits never leave dangling
//! references.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::evidence::{SourceGrading, TruthValue};
use crate::label::{labels_at_level, predecessor_labels, successor_labels, FactId, Label, MAX_LABEL_BITS};
use crate::propagation::{self, DecisionEntry, PropagationInputs};

/// Default cap on the lattice order; `2^16` nodes.
pub const DEFAULT_MAX_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("lattice order {order} exceeds the cap of {max}")]
    OrderTooLarge { order: usize, max: usize },
    #[error("duplicate fact {0}")]
    DuplicateFact(String),
    #[error("fact ids must run 1..=n: expected f{expected}, found {found}")]
    NonContiguousFacts { expected: u32, found: FactId },
    #[error("unknown fact {0}")]
    UnknownFact(FactId),
    #[error("no node labelled {0}")]
    UnknownLabel(String),
    #[error("condition of node {0} cannot be edited: only atomic nodes own a fact")]
    IllegalConditionEdit(String),
    #[error("the root node carries no decisions")]
    RootDecision,
    #[error("node {label} has no decision for `{disease}`")]
    UnknownDecision { label: String, disease: String },
    #[error("invalid decision for `{disease}`: {reason}")]
    InvalidDecision { disease: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub id: FactId,
    pub attribute: String,
    pub value: String,
}

impl Fact {
    pub fn new(id: u32, attribute: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            id: FactId(id),
            attribute: attribute.into(),
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeNode {
    pub label: Label,
    pub condition: Vec<FactId>,
    pub decisions: Vec<DecisionEntry>,
    pub predecessors: Vec<Label>,
    pub successors: Vec<Label>,
}

impl LatticeNode {
    pub fn level(&self) -> usize {
        self.label.level()
    }

    pub fn decision(&self, disease: &str) -> Option<&DecisionEntry> {
        self.decisions.iter().find(|d| d.disease == disease)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeLevel {
    pub level: usize,
    pub nodes: Vec<LatticeNode>,
}

/// Configuration shared by a lattice's builds and edits.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    pub module: String,
    pub grading: SourceGrading,
    pub max_order: usize,
    /// Disease id to display name. Diseases seen only in decisions are
    /// registered under their id.
    pub diseases: BTreeMap<String, String>,
    pub inputs: PropagationInputs,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            module: "kb".to_string(),
            grading: SourceGrading::new(5).expect("nonzero grading"),
            max_order: DEFAULT_MAX_ORDER,
            diseases: BTreeMap::new(),
            inputs: PropagationInputs::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    module: String,
    grading: SourceGrading,
    max_order: usize,
    facts: Vec<Fact>,
    diseases: BTreeMap<String, String>,
    levels: Vec<LatticeLevel>,
    inputs: PropagationInputs,
}

/// How one disease's decision at one node changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangeKind {
    Added(TruthValue),
    Removed(TruthValue),
    TruthChanged { old: TruthValue, new: TruthValue },
    /// Same truth value, different credibility or triple.
    Updated(TruthValue),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionChange {
    pub disease: String,
    pub label: Label,
    pub kind: ChangeKind,
}

/// An edit applied to one node.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeChange {
    /// Renames the fact of an atomic node.
    SetFactText { attribute: String, value: String },
    /// Adds or replaces the decision for `entry.disease`.
    PutDecision(DecisionEntry),
    RemoveDecision { disease: String },
    SetTruth { disease: String, vd: TruthValue },
    SetCredibility { disease: String, cf: f64 },
}

/// Result of a lattice edit: the new lattice plus every decision change,
/// including those caused by re-propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Modification {
    pub lattice: Lattice,
    pub changes: Vec<DecisionChange>,
    /// Set when a fact was deleted; labels in `changes` use the old encoding.
    pub deleted_fact: Option<FactId>,
}

fn check_facts(facts: &[Fact], max_order: usize) -> Result<(), LatticeError> {
    let cap = max_order.min(MAX_LABEL_BITS);
    if facts.len() > cap {
        return Err(LatticeError::OrderTooLarge {
            order: facts.len(),
            max: cap,
        });
    }
    for (i, fact) in facts.iter().enumerate() {
        if facts[..i].iter().any(|f| f.id == fact.id) {
            return Err(LatticeError::DuplicateFact(fact.id.to_string()));
        }
        if facts[..i]
            .iter()
            .any(|f| f.attribute == fact.attribute && f.value == fact.value)
        {
            return Err(LatticeError::DuplicateFact(format!(
                "(\"{}\", \"{}\")",
                fact.attribute, fact.value
            )));
        }
    }
    for (i, fact) in facts.iter().enumerate() {
        let expected = i as u32 + 1;
        if fact.id.0 != expected {
            return Err(LatticeError::NonContiguousFacts {
                expected,
                found: fact.id,
            });
        }
    }
    Ok(())
}

fn check_entry(entry: &DecisionEntry, label: Label) -> Result<(), LatticeError> {
    let invalid = |reason: String| LatticeError::InvalidDecision {
        disease: entry.disease.clone(),
        reason,
    };
    if entry.disease.is_empty() {
        return Err(invalid("empty disease id".into()));
    }
    if !(0.0..=1.0).contains(&entry.cf) {
        return Err(invalid(format!("credibility {} outside [0, 1]", entry.cf)));
    }
    for (f, w) in &entry.weights {
        if !label.contains(*f) {
            return Err(invalid(format!("weight for {f} outside the condition")));
        }
        if !(*w > 0.0 && *w <= 1.0) {
            return Err(invalid(format!("weight {w} outside (0, 1]")));
        }
    }
    Ok(())
}

fn skeleton(order: usize) -> Vec<LatticeLevel> {
    (0..=order)
        .map(|level| LatticeLevel {
            level,
            nodes: labels_at_level(level, order)
                .into_iter()
                .map(|label| LatticeNode {
                    label,
                    condition: label.facts().collect(),
                    decisions: Vec::new(),
                    predecessors: predecessor_labels(label),
                    successors: successor_labels(label, order),
                })
                .collect(),
        })
        .collect()
}

/// Materializes the lattice over `facts`, installs the atomic decisions and
/// propagates them to every composite node.
pub fn build_kb(
    facts: Vec<Fact>,
    atomic: BTreeMap<FactId, Vec<DecisionEntry>>,
    options: BuildOptions,
) -> Result<Lattice, LatticeError> {
    check_facts(&facts, options.max_order)?;
    let order = facts.len();
    let mut kb = Lattice {
        module: options.module,
        grading: options.grading,
        max_order: options.max_order,
        facts,
        diseases: options.diseases,
        levels: skeleton(order),
        inputs: PropagationInputs::default(),
    };
    for (fact, entries) in atomic {
        if fact.0 == 0 || fact.index() > order {
            return Err(LatticeError::UnknownFact(fact));
        }
        let label = Label::singleton(fact);
        let entries = entries
            .into_iter()
            .map(|e| atomic_entry(fact, e))
            .collect::<Result<Vec<_>, _>>()?;
        for e in &entries {
            kb.register_disease(&e.disease);
        }
        kb.node_mut(label).expect("atomic node").decisions = entries;
    }
    for (_, disease) in options.inputs.external.keys() {
        kb.register_disease(disease);
    }
    Ok(propagation::propagate(&kb, options.inputs))
}

fn atomic_entry(fact: FactId, mut entry: DecisionEntry) -> Result<DecisionEntry, LatticeError> {
    entry.weights = BTreeMap::from([(fact, 1.0)]);
    check_entry(&entry, Label::singleton(fact))?;
    Ok(entry)
}

impl Lattice {
    pub fn module(&self) -> &str {
        &self.module
    }

    pub fn grading(&self) -> SourceGrading {
        self.grading
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Lattice order `n`.
    pub fn order(&self) -> usize {
        self.facts.len()
    }

    /// Number of levels, `n + 1`.
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// The level-0 node every traversal starts from.
    pub fn entry(&self) -> &LatticeNode {
        &self.levels[0].nodes[0]
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn fact(&self, id: FactId) -> Option<&Fact> {
        id.index().checked_sub(1).and_then(|i| self.facts.get(i))
    }

    pub fn diseases(&self) -> &BTreeMap<String, String> {
        &self.diseases
    }

    pub fn disease_name<'a>(&'a self, id: &'a str) -> &'a str {
        self.diseases.get(id).map(String::as_str).unwrap_or(id)
    }

    pub fn has_disease(&self, id: &str) -> bool {
        self.diseases.contains_key(id)
    }

    pub fn register_disease(&mut self, id: &str) {
        self.diseases
            .entry(id.to_string())
            .or_insert_with(|| id.to_string());
    }

    pub fn set_disease_name(&mut self, id: &str, name: &str) {
        self.diseases.insert(id.to_string(), name.to_string());
    }

    pub fn inputs(&self) -> &PropagationInputs {
        &self.inputs
    }

    pub(crate) fn set_inputs(&mut self, inputs: PropagationInputs) {
        self.inputs = inputs;
    }

    pub fn levels(&self) -> &[LatticeLevel] {
        &self.levels
    }

    pub fn level(&self, level: usize) -> Option<&LatticeLevel> {
        self.levels.get(level)
    }

    /// All nodes in level-major, ascending-label order.
    pub fn nodes(&self) -> impl Iterator<Item = &LatticeNode> {
        self.levels.iter().flat_map(|l| l.nodes.iter())
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(|l| l.nodes.len()).sum()
    }

    pub fn node(&self, label: Label) -> Option<&LatticeNode> {
        let level = self.levels.get(label.level())?;
        let i = level.nodes.binary_search_by_key(&label, |n| n.label).ok()?;
        Some(&level.nodes[i])
    }

    pub(crate) fn node_mut(&mut self, label: Label) -> Option<&mut LatticeNode> {
        let level = self.levels.get_mut(label.level())?;
        let i = level.nodes.binary_search_by_key(&label, |n| n.label).ok()?;
        Some(&mut level.nodes[i])
    }

    /// Bit string of `label` at this lattice's order.
    pub fn render_label(&self, label: Label) -> String {
        label.render(self.order())
    }

    /// Every `(label, entry)` pair in level-major order.
    pub fn decisions(&self) -> impl Iterator<Item = (Label, &DecisionEntry)> {
        self.nodes()
            .flat_map(|n| n.decisions.iter().map(move |d| (n.label, d)))
    }

    fn contains_label(&self, label: Label) -> bool {
        label.is_subset_of(Label::full(self.order()))
    }

    fn unknown_label(&self, label: Label) -> LatticeError {
        LatticeError::UnknownLabel(format!("{:b}", label.bits()))
    }

    /// Assembles a lattice from stored parts without re-propagating. Used by
    /// the loader, which trusts persisted decisions.
    pub(crate) fn from_parts(
        options: BuildOptions,
        facts: Vec<Fact>,
        decisions: BTreeMap<Label, Vec<DecisionEntry>>,
    ) -> Result<Lattice, LatticeError> {
        check_facts(&facts, options.max_order)?;
        let order = facts.len();
        let mut kb = Lattice {
            module: options.module,
            grading: options.grading,
            max_order: options.max_order,
            facts,
            diseases: options.diseases,
            levels: skeleton(order),
            inputs: options.inputs,
        };
        for (label, entries) in decisions {
            if label == Label::EMPTY && !entries.is_empty() {
                return Err(LatticeError::RootDecision);
            }
            if !kb.contains_label(label) {
                return Err(kb.unknown_label(label));
            }
            for e in &entries {
                check_entry(e, label)?;
                kb.register_disease(&e.disease);
            }
            kb.node_mut(label).expect("label in range").decisions = entries;
        }
        Ok(kb)
    }
}

/// Structural invariants of a lattice; returns one message per violation.
pub fn check_structure(kb: &Lattice) -> Vec<String> {
    let n = kb.order();
    let mut problems = Vec::new();
    if kb.node_count() as u64 != 1u64 << n {
        problems.push(format!("{} nodes, expected {}", kb.node_count(), 1u64 << n));
    }
    let mut seen = std::collections::BTreeSet::new();
    for (l, level) in kb.levels().iter().enumerate() {
        if level.level != l || level.nodes.len() as u64 != crate::label::binomial(n, l) {
            problems.push(format!("level {l} holds {} nodes", level.nodes.len()));
        }
        if level.nodes.windows(2).any(|w| w[0].label >= w[1].label) {
            problems.push(format!("level {l} is not in ascending label order"));
        }
        for node in &level.nodes {
            let name = kb.render_label(node.label);
            if !seen.insert(node.label) {
                problems.push(format!("label {name} repeated"));
            }
            if node.label.level() != l || !node.label.is_subset_of(Label::full(n)) {
                problems.push(format!("label {name} does not belong to level {l}"));
            }
            if node.condition != node.label.facts().collect::<Vec<_>>() {
                problems.push(format!("condition of {name} disagrees with its label"));
            }
            if node.predecessors.len() != l || node.successors.len() != n - l {
                problems.push(format!("adjacency sizes of {name} are not ({l}, {})", n - l));
            }
            for p in &node.predecessors {
                let covers = p.is_subset_of(node.label) && p.level() + 1 == l;
                let back = kb.node(*p).is_some_and(|pn| pn.successors.contains(&node.label));
                if !covers || !back {
                    problems.push(format!("bad predecessor link {name} -> {}", kb.render_label(*p)));
                }
            }
            for s in &node.successors {
                let covers = node.label.is_subset_of(*s) && s.level() == l + 1;
                let back = kb.node(*s).is_some_and(|sn| sn.predecessors.contains(&node.label));
                if !covers || !back {
                    problems.push(format!("bad successor link {name} -> {}", kb.render_label(*s)));
                }
            }
            if l == 0 && !node.decisions.is_empty() {
                problems.push("root node carries decisions".to_string());
            }
            for d in &node.decisions {
                if let Err(e) = check_entry(d, node.label) {
                    problems.push(format!("node {name}: {e}"));
                }
            }
        }
    }
    problems
}

/// Appends `fact` as bit `n + 1`. Existing nodes keep their labels and
/// decisions; the new nodes are propagated.
pub fn insert_fact(kb: &Lattice, fact: Fact, atomic: Vec<DecisionEntry>) -> Result<Modification, LatticeError> {
    let mut facts = kb.facts.clone();
    facts.push(fact);
    check_facts(&facts, kb.max_order)?;
    let order = facts.len();
    let new_fact = FactId(order as u32);

    let mut levels = skeleton(order);
    for level in &mut levels {
        for node in &mut level.nodes {
            if let Some(old) = kb.node(node.label).filter(|_| !node.label.contains(new_fact)) {
                node.decisions = old.decisions.clone();
            }
        }
    }
    let mut out = Lattice {
        facts,
        levels,
        ..kb.clone()
    };
    let entries = atomic
        .into_iter()
        .map(|e| atomic_entry(new_fact, e))
        .collect::<Result<Vec<_>, _>>()?;
    for e in &entries {
        out.register_disease(&e.disease);
    }
    out.node_mut(Label::singleton(new_fact))
        .expect("new atomic node")
        .decisions = entries;

    let fresh: Vec<Label> = out
        .nodes()
        .map(|n| n.label)
        .filter(|l| l.contains(new_fact))
        .collect();
    propagation::propagate_labels(&mut out, &fresh);
    let changes = fresh
        .iter()
        .flat_map(|&l| diff_decisions(l, &[], &out.node(l).expect("fresh node").decisions))
        .collect();
    Ok(Modification {
        lattice: out,
        changes,
        deleted_fact: None,
    })
}

/// Removes `fact` and every node containing it, re-encoding the surviving
/// labels so the lattice becomes order `n - 1`.
pub fn delete_fact(kb: &Lattice, fact: FactId) -> Result<Modification, LatticeError> {
    if kb.fact(fact).is_none() {
        return Err(LatticeError::UnknownFact(fact));
    }
    let changes = kb
        .nodes()
        .filter(|n| n.label.contains(fact))
        .flat_map(|n| diff_decisions(n.label, &n.decisions, &[]))
        .collect();

    let fact_map = move |f: FactId| match f.0.cmp(&fact.0) {
        std::cmp::Ordering::Less => Some(f),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Some(FactId(f.0 - 1)),
    };
    let label_map = move |l: Label| l.remove_fact(fact);

    let facts: Vec<Fact> = kb
        .facts
        .iter()
        .filter_map(|f| {
            Some(Fact {
                id: fact_map(f.id)?,
                ..f.clone()
            })
        })
        .collect();
    let mut levels = skeleton(facts.len());
    for node in kb.nodes() {
        let Some(label) = label_map(node.label) else {
            continue;
        };
        let level = &mut levels[label.level()];
        let i = level
            .nodes
            .binary_search_by_key(&label, |n| n.label)
            .expect("re-encoded label exists");
        level.nodes[i].decisions = node
            .decisions
            .iter()
            .map(|d| DecisionEntry {
                weights: d
                    .weights
                    .iter()
                    .filter_map(|(f, w)| Some((fact_map(*f)?, *w)))
                    .collect(),
                ..d.clone()
            })
            .collect();
    }
    let out = Lattice {
        facts,
        levels,
        inputs: kb.inputs.remap(label_map, fact_map),
        ..kb.clone()
    };
    Ok(Modification {
        lattice: out,
        changes,
        deleted_fact: Some(fact),
    })
}

/// Applies one edit to the node at `label`. Decision edits re-propagate
/// every strict superset of the node.
pub fn modify_node(kb: &Lattice, label: Label, change: NodeChange) -> Result<Modification, LatticeError> {
    let node = kb.node(label).ok_or_else(|| kb.unknown_label(label))?;
    let mut out = kb.clone();

    if let NodeChange::SetFactText { attribute, value } = change {
        if label.level() != 1 {
            return Err(LatticeError::IllegalConditionEdit(kb.render_label(label)));
        }
        let id = label.facts().next().expect("atomic label");
        if kb
            .facts
            .iter()
            .any(|f| f.id != id && f.attribute == attribute && f.value == value)
        {
            return Err(LatticeError::DuplicateFact(format!("(\"{attribute}\", \"{value}\")")));
        }
        let fact = &mut out.facts[id.index() - 1];
        fact.attribute = attribute;
        fact.value = value;
        return Ok(Modification {
            lattice: out,
            changes: Vec::new(),
            deleted_fact: None,
        });
    }

    if label == Label::EMPTY {
        return Err(LatticeError::RootDecision);
    }
    let mut decisions = node.decisions.clone();
    let missing = |disease: &str| LatticeError::UnknownDecision {
        label: kb.render_label(label),
        disease: disease.to_string(),
    };
    match change {
        NodeChange::SetFactText { .. } => unreachable!("handled above"),
        NodeChange::PutDecision(mut entry) => {
            if label.level() == 1 {
                entry = atomic_entry(label.facts().next().expect("atomic label"), entry)?;
            } else if entry.weights.is_empty() {
                entry.weights = kb.inputs.priorities.weights(&entry.disease, label);
            }
            check_entry(&entry, label)?;
            out.register_disease(&entry.disease);
            match decisions.iter_mut().find(|d| d.disease == entry.disease) {
                Some(slot) => *slot = entry,
                None => decisions.push(entry),
            }
        }
        NodeChange::RemoveDecision { disease } => {
            let i = decisions
                .iter()
                .position(|d| d.disease == disease)
                .ok_or_else(|| missing(&disease))?;
            decisions.remove(i);
        }
        NodeChange::SetTruth { disease, vd } => {
            let slot = decisions
                .iter_mut()
                .find(|d| d.disease == disease)
                .ok_or_else(|| missing(&disease))?;
            slot.vd = vd;
        }
        NodeChange::SetCredibility { disease, cf } => {
            let slot = decisions
                .iter_mut()
                .find(|d| d.disease == disease)
                .ok_or_else(|| missing(&disease))?;
            slot.cf = cf;
            check_entry(slot, label)?;
        }
    }

    let mut changes = diff_decisions(label, &node.decisions, &decisions);
    out.node_mut(label).expect("node exists").decisions = decisions;

    let above: Vec<Label> = out
        .nodes()
        .map(|n| n.label)
        .filter(|&l| l != label && label.is_subset_of(l))
        .collect();
    propagation::propagate_labels(&mut out, &above);
    for &l in &above {
        let before = &kb.node(l).expect("same shape").decisions;
        let after = &out.node(l).expect("same shape").decisions;
        changes.extend(diff_decisions(l, before, after));
    }
    Ok(Modification {
        lattice: out,
        changes,
        deleted_fact: None,
    })
}

/// Per-disease differences between two decision lists of one node.
pub fn diff_decisions(label: Label, before: &[DecisionEntry], after: &[DecisionEntry]) -> Vec<DecisionChange> {
    let mut diseases: Vec<&str> = before
        .iter()
        .chain(after)
        .map(|d| d.disease.as_str())
        .collect();
    diseases.sort_unstable();
    diseases.dedup();
    diseases
        .into_iter()
        .filter_map(|disease| {
            let old = before.iter().find(|d| d.disease == disease);
            let new = after.iter().find(|d| d.disease == disease);
            let kind = match (old, new) {
                (None, Some(n)) => ChangeKind::Added(n.vd),
                (Some(o), None) => ChangeKind::Removed(o.vd),
                (Some(o), Some(n)) if o.vd != n.vd => ChangeKind::TruthChanged { old: o.vd, new: n.vd },
                (Some(o), Some(n)) if o != n => ChangeKind::Updated(n.vd),
                _ => return None,
            };
            Some(DecisionChange {
                disease: disease.to_string(),
                label,
                kind,
            })
        })
        .collect()
}
