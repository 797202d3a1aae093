//! Sum-of-products minimization of approximation regions into rules.
//!
//! A node label fixes every fact, so a region is a set of total minterms.
//! Prime implicants come from Quine–McCluskey merging; the cover is chosen
//! exactly by branch and bound up to [`EXACT_COVER_MAX_ORDER`] facts and
//! greedily above.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::evidence::TruthValue;
use crate::label::{FactId, Label, MAX_LABEL_BITS};
use crate::lattice::Lattice;
use crate::metrics::{rule_metrics, RuleMetrics};
use crate::roughset::ApproximationSets;

pub const EXACT_COVER_MAX_ORDER: usize = 12;

/// Search nodes explored by the exact cover before settling for the best
/// cover found so far.
const SEARCH_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinimizeError {
    #[error("no minterms to minimize")]
    EmptyMintermSet,
    #[error("minterm {0:b} does not fit in {1} facts")]
    MintermOutOfRange(u32, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Positive(FactId),
    Negated(FactId),
}

impl Literal {
    pub fn fact(self) -> FactId {
        match self {
            Literal::Positive(f) | Literal::Negated(f) => f,
        }
    }

    pub fn is_negated(self) -> bool {
        matches!(self, Literal::Negated(_))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Positive(id) => write!(f, "{id}"),
            Literal::Negated(id) => write!(f, "¬{id}"),
        }
    }
}

/// A product term: `care` marks the facts that appear, `value` their
/// polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    care: u32,
    value: u32,
}

impl Term {
    pub fn minterm(label: Label, order: usize) -> Self {
        let care = Label::full(order).bits();
        Term {
            care,
            value: label.bits() & care,
        }
    }

    pub fn from_literals(literals: &[Literal]) -> Self {
        literals.iter().fold(Term { care: 0, value: 0 }, |t, lit| {
            let bit = Label::singleton(lit.fact()).bits();
            Term {
                care: t.care | bit,
                value: if lit.is_negated() { t.value } else { t.value | bit },
            }
        })
    }

    pub fn covers(self, assignment: u32) -> bool {
        assignment & self.care == self.value
    }

    pub fn literal_count(self) -> usize {
        self.care.count_ones() as usize
    }

    /// Literals in ascending fact order.
    pub fn literals(self) -> Vec<Literal> {
        Label::from_bits(self.care)
            .facts()
            .map(|f| {
                if self.value & Label::singleton(f).bits() != 0 {
                    Literal::Positive(f)
                } else {
                    Literal::Negated(f)
                }
            })
            .collect()
    }

    /// Whether every assignment covered by `other` is covered by `self`.
    pub fn subsumes(self, other: Term) -> bool {
        self.care & !other.care == 0 && other.value & self.care == self.value
    }
}

/// A disjunction of product terms over an order-`n` fact set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SopExpression {
    order: usize,
    terms: Vec<Term>,
}

impl SopExpression {
    pub fn new(order: usize, mut terms: Vec<Term>) -> Self {
        terms.sort();
        terms.dedup();
        Self { order, terms }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn literal_count(&self) -> usize {
        self.terms.iter().map(|t| t.literal_count()).sum()
    }

    pub fn evaluate(&self, assignment: Label) -> bool {
        self.terms.iter().any(|t| t.covers(assignment.bits()))
    }

    pub fn is_tautology(&self) -> bool {
        self.terms.iter().any(|t| t.care == 0)
    }

    /// Every assignment that satisfies the expression.
    pub fn truth_set(&self) -> BTreeSet<Label> {
        (0..1u64 << self.order)
            .map(|b| Label::from_bits(b as u32))
            .filter(|&l| self.evaluate(l))
            .collect()
    }

    /// Literals shared by every term, and each term's remaining literals.
    pub fn factored(&self) -> (Vec<Literal>, Vec<Vec<Literal>>) {
        if self.terms.len() < 2 {
            return (self.terms.first().map(|t| t.literals()).unwrap_or_default(), Vec::new());
        }
        let first = self.terms[0].literals();
        let common: Vec<Literal> = first
            .into_iter()
            .filter(|lit| self.terms.iter().all(|t| t.literals().contains(lit)))
            .collect();
        let rest = self
            .terms
            .iter()
            .map(|t| t.literals().into_iter().filter(|l| !common.contains(l)).collect())
            .collect();
        (common, rest)
    }

    /// Renders with caller-supplied literal text and connectives, factoring
    /// out literals common to all terms.
    pub fn render_with(&self, literal: impl Fn(Literal) -> String, and: &str, or: &str) -> String {
        if self.terms.is_empty() {
            return "FALSE".to_string();
        }
        if self.is_tautology() {
            return "TRUE".to_string();
        }
        let conj = |lits: &[Literal]| lits.iter().map(|&l| literal(l)).collect::<Vec<_>>().join(and);
        let (common, rest) = self.factored();
        if rest.is_empty() {
            return conj(&common);
        }
        let alternatives: Vec<String> = rest
            .iter()
            .map(|lits| {
                if lits.len() > 1 && !common.is_empty() {
                    format!("({})", conj(lits))
                } else {
                    conj(lits)
                }
            })
            .collect();
        let disjunction = alternatives.join(or);
        if common.is_empty() {
            disjunction
        } else {
            format!("{}{and}({disjunction})", conj(&common))
        }
    }
}

impl fmt::Display for SopExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(|l| l.to_string(), " ∧ ", " ∨ "))
    }
}

/// Quine–McCluskey prime implicants of a minterm set.
pub fn prime_implicants(minterms: &[u32], order: usize) -> Vec<Term> {
    let full = Label::full(order).bits();
    let mut current: HashSet<Term> = minterms
        .iter()
        .map(|&m| Term {
            care: full,
            value: m & full,
        })
        .collect();
    let mut primes = Vec::new();
    while !current.is_empty() {
        let mut next = HashSet::new();
        let mut merged = HashSet::new();
        for &t in &current {
            let mut care = t.care;
            while care != 0 {
                let bit = care & care.wrapping_neg();
                care &= care - 1;
                if t.value & bit != 0 {
                    continue;
                }
                let partner = Term {
                    care: t.care,
                    value: t.value | bit,
                };
                if current.contains(&partner) {
                    merged.insert(t);
                    merged.insert(partner);
                    next.insert(Term {
                        care: t.care & !bit,
                        value: t.value,
                    });
                }
            }
        }
        primes.extend(current.iter().copied().filter(|t| !merged.contains(t)));
        current = next;
    }
    primes.sort();
    primes
}

type Bits = Vec<u64>;

fn bits_new(n: usize) -> Bits {
    vec![0; n.div_ceil(64)]
}

fn bits_set(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn bits_get(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn bits_is_empty(b: &Bits) -> bool {
    b.iter().all(|&w| w == 0)
}

fn bits_minus(a: &Bits, b: &Bits) -> Bits {
    a.iter().zip(b).map(|(x, y)| x & !y).collect()
}

fn bits_count_and(a: &Bits, b: &Bits) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// Cost of a cover: term count, literal count, then the sorted terms.
fn cost(cover: &[Term]) -> (usize, usize, Vec<Term>) {
    let mut sorted = cover.to_vec();
    sorted.sort();
    (cover.len(), cover.iter().map(|t| t.literal_count()).sum(), sorted)
}

struct CoverSearch<'a> {
    primes: &'a [Term],
    covers: &'a [Bits],
    by_minterm: Vec<Vec<usize>>,
    best: Vec<Term>,
    best_cost: (usize, usize, Vec<Term>),
    visited: usize,
}

impl CoverSearch<'_> {
    fn run(&mut self, uncovered: Bits, chosen: &mut Vec<usize>, literals: usize) {
        self.visited += 1;
        if self.visited > SEARCH_BUDGET {
            return;
        }
        if bits_is_empty(&uncovered) {
            let cover: Vec<Term> = chosen.iter().map(|&i| self.primes[i]).collect();
            let c = cost(&cover);
            if c < self.best_cost {
                self.best = cover;
                self.best_cost = c;
            }
            return;
        }
        let (best_terms, best_literals) = (self.best_cost.0, self.best_cost.1);
        if (chosen.len() + 1, literals + 1) > (best_terms, best_literals) {
            return;
        }
        // Branch on the uncovered minterm with the fewest candidate primes.
        let pick = (0..self.by_minterm.len())
            .filter(|&m| bits_get(&uncovered, m))
            .min_by_key(|&m| self.by_minterm[m].len())
            .expect("nonempty");
        let mut candidates = self.by_minterm[pick].clone();
        candidates.sort_by_key(|&p| (self.primes[p].literal_count(), self.primes[p]));
        for p in candidates {
            let next = bits_minus(&uncovered, &self.covers[p]);
            chosen.push(p);
            self.run(next, chosen, literals + self.primes[p].literal_count());
            chosen.pop();
        }
    }
}

fn greedy_cover(primes: &[Term], covers: &[Bits], mut uncovered: Bits, mut chosen: Vec<usize>) -> Vec<usize> {
    while !bits_is_empty(&uncovered) {
        let best = (0..primes.len())
            .filter(|p| !chosen.contains(p))
            .max_by(|&a, &b| {
                let ka = (bits_count_and(&covers[a], &uncovered), std::cmp::Reverse((primes[a].literal_count(), primes[a])));
                let kb = (bits_count_and(&covers[b], &uncovered), std::cmp::Reverse((primes[b].literal_count(), primes[b])));
                ka.cmp(&kb)
            })
            .expect("primes cover every minterm");
        uncovered = bits_minus(&uncovered, &covers[best]);
        chosen.push(best);
    }
    chosen
}

/// Drops terms whose minterms are all covered by the others, trying the
/// costliest terms first.
fn drop_redundant(mut chosen: Vec<usize>, primes: &[Term], covers: &[Bits], n: usize) -> Vec<usize> {
    chosen.sort_by_key(|&p| std::cmp::Reverse((primes[p].literal_count(), primes[p])));
    let mut i = 0;
    while i < chosen.len() {
        let mut others = bits_new(n);
        for (j, &p) in chosen.iter().enumerate() {
            if j != i {
                for (w, c) in others.iter_mut().zip(&covers[p]) {
                    *w |= c;
                }
            }
        }
        if bits_is_empty(&bits_minus(&covers[chosen[i]], &others)) {
            chosen.remove(i);
        } else {
            i += 1;
        }
    }
    chosen
}

/// Minimal sum of products whose truth set is exactly `minterms`.
pub fn minimize(minterms: &BTreeSet<Label>, order: usize) -> Result<SopExpression, MinimizeError> {
    if minterms.is_empty() {
        return Err(MinimizeError::EmptyMintermSet);
    }
    let full = Label::full(order.min(MAX_LABEL_BITS));
    if let Some(bad) = minterms.iter().find(|l| !l.is_subset_of(full)) {
        return Err(MinimizeError::MintermOutOfRange(bad.bits(), order));
    }
    let ms: Vec<u32> = minterms.iter().map(|l| l.bits()).collect();
    let primes = prime_implicants(&ms, order);
    let covers: Vec<Bits> = primes
        .iter()
        .map(|t| {
            let mut b = bits_new(ms.len());
            for (i, &m) in ms.iter().enumerate() {
                if t.covers(m) {
                    bits_set(&mut b, i);
                }
            }
            b
        })
        .collect();
    let by_minterm: Vec<Vec<usize>> = (0..ms.len())
        .map(|i| (0..primes.len()).filter(|&p| bits_get(&covers[p], i)).collect())
        .collect();

    let mut uncovered = bits_new(ms.len());
    for i in 0..ms.len() {
        bits_set(&mut uncovered, i);
    }
    let mut essential: Vec<usize> = by_minterm
        .iter()
        .filter(|c| c.len() == 1)
        .map(|c| c[0])
        .collect();
    essential.sort_unstable();
    essential.dedup();
    for &p in &essential {
        uncovered = bits_minus(&uncovered, &covers[p]);
    }

    let greedy = drop_redundant(
        greedy_cover(&primes, &covers, uncovered.clone(), essential.clone()),
        &primes,
        &covers,
        ms.len(),
    );
    let greedy_terms: Vec<Term> = greedy.iter().map(|&p| primes[p]).collect();
    if order > EXACT_COVER_MAX_ORDER {
        return Ok(SopExpression::new(order, greedy_terms));
    }

    let mut search = CoverSearch {
        primes: &primes,
        covers: &covers,
        by_minterm,
        best_cost: cost(&greedy_terms),
        best: greedy_terms,
        visited: 0,
    };
    let literals = essential.iter().map(|&p| primes[p].literal_count()).sum();
    let mut chosen = essential;
    search.run(uncovered, &mut chosen, literals);
    Ok(SopExpression::new(order, search.best))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    Certain,
    Possible,
    Uncertain,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Certain => "certain",
            RuleKind::Possible => "possible",
            RuleKind::Uncertain => "uncertain",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RuleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "certain" => Ok(RuleKind::Certain),
            "possible" => Ok(RuleKind::Possible),
            "uncertain" => Ok(RuleKind::Uncertain),
            other => Err(format!("unknown rule kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizedRule {
    pub condition: SopExpression,
    pub disease: String,
    pub vd: TruthValue,
    pub kind: RuleKind,
    pub source_labels: BTreeSet<Label>,
    /// `None` when a metric has no mass to normalize by.
    pub metrics: Option<RuleMetrics>,
}

/// Regions of one disease's approximations and the rule each yields.
pub fn rule_regions(approx: &ApproximationSets) -> [(RuleKind, TruthValue, &BTreeSet<Label>); 5] {
    [
        (RuleKind::Certain, TruthValue::Present, &approx.lower1),
        (RuleKind::Certain, TruthValue::Absent, &approx.lower2),
        (RuleKind::Uncertain, TruthValue::Inconclusive, &approx.boundary1),
        (RuleKind::Possible, TruthValue::Present, &approx.upper1),
        (RuleKind::Possible, TruthValue::Absent, &approx.upper2),
    ]
}

/// Minimizes every nonempty selected region into one rule, ordered by
/// disease id and then by descending strength.
pub fn generate_rules(
    kb: &Lattice,
    approx: &BTreeMap<String, ApproximationSets>,
    kinds: &[RuleKind],
) -> Vec<MinimizedRule> {
    let mut rules = Vec::new();
    for (disease, sets) in approx {
        for (kind, vd, region) in rule_regions(sets) {
            if region.is_empty() || !kinds.contains(&kind) {
                continue;
            }
            let condition = minimize(region, kb.order()).expect("region labels belong to the lattice");
            let mut rule = MinimizedRule {
                condition,
                disease: disease.clone(),
                vd,
                kind,
                source_labels: region.clone(),
                metrics: None,
            };
            rule.metrics = rule_metrics(&rule, kb).ok();
            rules.push(rule);
        }
    }
    rules.sort_by(|a, b| {
        let strength = |r: &MinimizedRule| r.metrics.map(|m| m.strength).unwrap_or(f64::NEG_INFINITY);
        a.disease
            .cmp(&b.disease)
            .then(strength(b).total_cmp(&strength(a)))
            .then(a.kind.cmp(&b.kind))
            .then(b.vd.cmp(&a.vd))
    });
    rules
}
