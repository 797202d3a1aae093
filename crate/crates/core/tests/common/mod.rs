//! Reference implementations used as oracles by the integration tests.
//! Each one is written directly from the definitions, without calling the
//! library routine it checks.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use latticekb::evidence::{TruthTriple, TruthValue};
use latticekb::label::{FactId, Label};
use latticekb::lattice::{build_kb, BuildOptions, Fact, Lattice};
use latticekb::precision::Precision;
use latticekb::propagation::{AlphaThreshold, DecisionEntry, ExternalEvidence, PropagationInputs};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Atomic resolution, transcribed case by case.

fn vd_code(v: TruthValue) -> u8 {
    v.code()
}

/// `m[x][y]` is true when row `x` (presence, absence, inconclusive) has a
/// source at level `y`. Returns `(vd code, cf)`.
pub fn resolve_by_cases(m: &[Vec<bool>; 3], t: [f64; 3]) -> (u8, f64) {
    let q = m[0].len();
    let (t1, t2, t3) = (t[0], t[1], t[2]);
    let used = [
        m[0].iter().any(|&b| b),
        m[1].iter().any(|&b| b),
        m[2].iter().any(|&b| b),
    ];
    let n_used = used.iter().filter(|&&u| u).count();
    assert!(n_used > 0, "empty matrix");

    if n_used == 1 {
        if used[0] {
            return (1, t1);
        }
        if used[1] {
            return (0, t2);
        }
        return (2, t3);
    }

    let y = (0..q).find(|&y| m[0][y] || m[1][y] || m[2][y]).unwrap();
    let (a, b, c) = (m[0][y], m[1][y], m[2][y]);

    if a && !b && !c {
        return (1, t1);
    }
    if !a && b && !c {
        return (0, t2);
    }
    if !a && !b && c {
        return (2, t3);
    }

    if a && b && !c {
        if t1 > t2 {
            return (1, t1);
        }
        if t1 < t2 {
            return (0, t2);
        }
        for yp in y + 1..q {
            if m[0][yp] && !m[1][yp] {
                return (1, t1);
            }
            if !m[0][yp] && m[1][yp] {
                return (0, t2);
            }
        }
        return (2, t1);
    }

    if a && !b && c {
        // Presence wins with its own mass.
        if t1 > t3 {
            return (1, t1);
        }
        if t1 < t3 {
            return (2, t3);
        }
        for yp in y + 1..q {
            if m[0][yp] && !m[2][yp] {
                return (1, t1);
            }
            if !m[0][yp] && m[2][yp] {
                return (2, t3);
            }
        }
        return (2, t3);
    }

    if !a && b && c {
        if t2 > t3 {
            return (0, t2);
        }
        if t2 < t3 {
            return (2, t3);
        }
        for yp in y + 1..q {
            if m[1][yp] && !m[2][yp] {
                return (0, t2);
            }
            if !m[1][yp] && m[2][yp] {
                return (2, t3);
            }
        }
        return (2, t3);
    }

    // All three rows at the first column.
    if t1 > t2 && t1 > t3 {
        return (1, t1);
    }
    if t1 < t2 && t2 > t3 {
        return (0, t2);
    }
    if t3 > t1 && t3 > t2 {
        return (2, t3);
    }
    if t1 == t2 && t1 < t3 {
        return (2, t3);
    }
    if t1 == t3 && t1 < t2 {
        return (0, t2);
    }
    if t2 == t3 && t2 < t1 {
        return (1, t1);
    }
    if t1 == t2 && t1 > t3 {
        return (2, t1);
    }
    if !(t1 == t2 && t2 == t3) {
        return (2, t3);
    }

    // Three-way tie: scan on.
    for yp in y + 1..q {
        let r = [m[0][yp], m[1][yp], m[2][yp]];
        let k = r.iter().filter(|&&b| b).count();
        if k == 0 || k == 3 {
            continue;
        }
        if k == 1 {
            if r[0] {
                return (1, t1);
            }
            if r[1] {
                return (0, t2);
            }
            return (2, t3);
        }
        if r[0] && r[1] {
            for yy in yp + 1..q {
                if m[0][yy] && !m[1][yy] {
                    return (1, t1);
                }
                if m[1][yy] && !m[0][yy] {
                    return (0, t2);
                }
            }
            return (2, t1);
        }
        if r[0] && r[2] {
            for yy in yp + 1..q {
                if m[0][yy] && !m[2][yy] {
                    return (1, t1);
                }
                if m[2][yy] && !m[0][yy] {
                    return (2, t3);
                }
            }
            return (2, t3);
        }
        for yy in yp + 1..q {
            if m[1][yy] && !m[2][yy] {
                return (0, t2);
            }
            if m[2][yy] && !m[1][yy] {
                return (2, t3);
            }
        }
        return (2, t3);
    }
    (2, t3)
}

/// Builds the `3 x q` matrix whose cell `(x, y)` is bit `x * q + y` of `mask`.
pub fn matrix_from_mask(q: usize, mask: u32) -> [Vec<bool>; 3] {
    std::array::from_fn(|x| (0..q).map(|y| mask >> (x * q + y) & 1 == 1).collect())
}

// ---------------------------------------------------------------------------
// Minimization by exhaustive search.

/// A cube over `n` variables: `fixed` marks bound variables, `value` their
/// values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cube {
    pub fixed: u32,
    pub value: u32,
}

impl Cube {
    pub fn covers(self, x: u32) -> bool {
        x & self.fixed == self.value
    }
}

fn all_cubes(n: usize) -> Vec<Cube> {
    let mut out = Vec::new();
    for fixed in 0..1u32 << n {
        for value in 0..1u32 << n {
            if value & !fixed == 0 {
                out.push(Cube { fixed, value });
            }
        }
    }
    out
}

/// Cubes lying inside `on`, not contained in a larger such cube.
pub fn brute_primes(on: &BTreeSet<u32>, n: usize) -> Vec<Cube> {
    let implicants: Vec<Cube> = all_cubes(n)
        .into_iter()
        .filter(|c| (0..1u32 << n).filter(|&x| c.covers(x)).all(|x| on.contains(&x)))
        .collect();
    implicants
        .iter()
        .copied()
        .filter(|c| {
            !implicants
                .iter()
                .any(|d| d != c && d.fixed & c.fixed == d.fixed && c.value & d.fixed == d.value)
        })
        .collect()
}

/// Fewest cubes whose union is exactly `on`.
pub fn brute_min_cover(on: &BTreeSet<u32>, n: usize) -> usize {
    if on.is_empty() {
        return 0;
    }
    let primes = brute_primes(on, n);
    let mut best = on.len();
    fn search(uncovered: &BTreeSet<u32>, primes: &[Cube], used: usize, best: &mut usize) {
        if used >= *best {
            return;
        }
        let Some(&x) = uncovered.iter().next() else {
            *best = used;
            return;
        };
        for p in primes.iter().filter(|p| p.covers(x)) {
            let rest: BTreeSet<u32> = uncovered.iter().copied().filter(|&y| !p.covers(y)).collect();
            search(&rest, primes, used + 1, best);
        }
    }
    search(on, &primes, 0, &mut best);
    best
}

// ---------------------------------------------------------------------------
// Random knowledge bases.

pub const DISEASES: [&str; 3] = ["A", "B", "C"];

pub struct RandomKb {
    pub facts: Vec<Fact>,
    pub atomic: BTreeMap<FactId, Vec<DecisionEntry>>,
    pub options: BuildOptions,
}

impl RandomKb {
    pub fn build(&self) -> Lattice {
        build_kb(self.facts.clone(), self.atomic.clone(), self.options.clone()).unwrap()
    }
}

pub fn random_vd(r: &mut StdRng) -> TruthValue {
    TruthValue::ALL[r.random_range(0..3)]
}

pub fn random_triple(r: &mut StdRng) -> TruthTriple {
    let a: f64 = r.random_range(0.05..1.0);
    let b: f64 = r.random_range(0.05..1.0);
    let c: f64 = r.random_range(0.05..1.0);
    let s = a + b + c;
    TruthTriple::new(a / s, b / s, c / s)
}

/// `n` facts, each carrying each disease with probability `density`, random
/// global priorities and a few external verdicts on composite nodes.
pub fn random_kb(r: &mut StdRng, n: usize, density: f64, alpha: f64, with_external: bool) -> RandomKb {
    let facts: Vec<Fact> = (1..=n as u32)
        .map(|i| Fact::new(i, format!("attr{i}"), "yes"))
        .collect();
    let mut atomic: BTreeMap<FactId, Vec<DecisionEntry>> = BTreeMap::new();
    for f in 1..=n as u32 {
        for d in DISEASES {
            if r.random_bool(density) {
                let tv = random_triple(r);
                let vd = random_vd(r);
                let cf = r.random_range(0.01..1.0);
                atomic
                    .entry(FactId(f))
                    .or_default()
                    .push(DecisionEntry::atomic(FactId(f), d, vd, cf, tv));
            }
        }
    }
    let mut inputs = PropagationInputs {
        alpha: AlphaThreshold::new(alpha).unwrap(),
        precision: Precision::Full,
        ..PropagationInputs::default()
    };
    for d in DISEASES {
        for f in 1..=n as u32 {
            if r.random_bool(0.4) {
                inputs.priorities.set_global(d, FactId(f), r.random_range(1..4));
            }
        }
    }
    if with_external && n >= 2 {
        for _ in 0..r.random_range(0..3) {
            let bits = loop {
                let b = r.random_range(1..1u32 << n);
                if b.count_ones() >= 2 {
                    break b;
                }
            };
            let d = DISEASES[r.random_range(0..DISEASES.len())];
            inputs.external.insert(
                (Label::from_bits(bits), d.to_string()),
                ExternalEvidence {
                    tv: random_triple(r),
                    vd: random_vd(r),
                    cf: r.random_range(0.0..1.0),
                },
            );
        }
    }
    RandomKb {
        facts,
        atomic,
        options: BuildOptions {
            inputs,
            diseases: DISEASES.iter().map(|d| (d.to_string(), format!("disease {d}"))).collect(),
            ..BuildOptions::default()
        },
    }
}

// ---------------------------------------------------------------------------
// Propagation recomputed node by node from the atomic decisions.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub vd: u8,
    pub cf: f64,
    pub tv: [f64; 3],
}

fn priority_of(inputs: &PropagationInputs, disease: &str, bits: u32, fact: u32) -> u32 {
    let label = Label::from_bits(bits);
    for (d, l, m) in inputs.priorities.scoped() {
        if d == disease && l == label {
            if let Some(p) = m.get(&FactId(fact)) {
                return (*p).max(1);
            }
        }
    }
    for (d, f, p) in inputs.priorities.global() {
        if d == disease && f == FactId(fact) {
            return p.max(1);
        }
    }
    1
}

fn node_weights(inputs: &PropagationInputs, disease: &str, bits: u32, n: usize) -> Vec<(u32, f64)> {
    let facts: Vec<u32> = (0..n as u32).filter(|i| bits >> i & 1 == 1).map(|i| i + 1).collect();
    let ps: Vec<u32> = facts.iter().map(|&f| priority_of(inputs, disease, bits, f)).collect();
    let total: u32 = ps.iter().sum();
    facts
        .into_iter()
        .zip(ps)
        .map(|(f, p)| (f, p as f64 / total as f64))
        .collect()
}

/// Every `(node bits, disease) -> verdict` of a lattice propagated at full
/// precision from `atomic`.
pub fn propagation_oracle(
    n: usize,
    atomic: &BTreeMap<FactId, Vec<DecisionEntry>>,
    inputs: &PropagationInputs,
) -> BTreeMap<(u32, String), Verdict> {
    let alpha = inputs.alpha.value();
    let gate = |x: f64| x > alpha;
    let mut out: BTreeMap<(u32, String), Verdict> = BTreeMap::new();
    for (f, entries) in atomic {
        for e in entries {
            out.insert(
                (1 << (f.0 - 1), e.disease.clone()),
                Verdict {
                    vd: e.vd.code(),
                    cf: e.cf,
                    tv: [e.tv.presence, e.tv.absence, e.tv.inconclusive],
                },
            );
        }
    }
    let mut nodes: Vec<u32> = (0..1u32 << n).filter(|b| b.count_ones() >= 2).collect();
    nodes.sort_by_key(|b| (b.count_ones(), *b));

    for bits in nodes {
        let level = bits.count_ones() as usize;
        let preds: Vec<u32> = {
            let mut p: Vec<u32> = (0..n).filter(|i| bits >> i & 1 == 1).map(|i| bits & !(1 << i)).collect();
            p.sort();
            p
        };
        let mut diseases: BTreeSet<String> = BTreeSet::new();
        for p in &preds {
            for d in DISEASES {
                if out.contains_key(&(*p, d.to_string())) {
                    diseases.insert(d.to_string());
                }
            }
        }
        for (l, d) in inputs.external.keys() {
            if l.bits() == bits {
                diseases.insert(d.clone());
            }
        }

        for d in diseases {
            let w = node_weights(inputs, &d, bits, n);
            let weight = |f: u32| w.iter().find(|(g, _)| *g == f).map(|(_, x)| *x).unwrap();
            let carriers: Vec<(u32, Verdict)> = preds
                .iter()
                .filter_map(|p| out.get(&(*p, d.clone())).map(|v| (*p, *v)))
                .collect();

            let derived: Option<(u8, f64)> = if carriers.is_empty() {
                None
            } else if carriers.len() == 1 {
                let (p, v) = carriers[0];
                let wsum: f64 = (0..n as u32).filter(|i| p >> i & 1 == 1).map(|i| weight(i + 1)).sum();
                let x = v.cf * wsum;
                if gate(x) {
                    Some((v.vd, x.min(1.0)))
                } else {
                    None
                }
            } else if level == 2 {
                let (pi, vi) = carriers[0];
                let (pj, vj) = carriers[1];
                let a = vi.cf * weight(pi.trailing_zeros() + 1);
                let b = vj.cf * weight(pj.trailing_zeros() + 1);
                let same = vi.vd == vj.vd;
                let cf = match (gate(a), gate(b)) {
                    (true, true) if same => a + b,
                    (true, true) => (a - b).abs(),
                    (true, false) => a,
                    (false, true) => b,
                    (false, false) => 0.0,
                };
                let vd = if same {
                    vi.vd
                } else if vi.cf > vj.cf {
                    vi.vd
                } else if vj.cf > vi.cf {
                    vj.vd
                } else {
                    2
                };
                Some((vd, cf.clamp(0.0, 1.0)))
            } else {
                // Dummy-rule chain for the truth value.
                let (mut vd, mut cf) = (carriers[0].1.vd, carriers[0].1.cf);
                for (_, v) in &carriers[1..] {
                    if v.cf > cf {
                        vd = v.vd;
                        cf = v.cf;
                    } else if v.cf == cf && v.vd != vd {
                        vd = 2;
                    }
                }
                // Per fact: heaviest truth-value group minus the rest.
                let mut total = 0.0;
                for (f, wf) in &w {
                    let members: Vec<&Verdict> = carriers
                        .iter()
                        .filter(|(p, _)| p >> (f - 1) & 1 == 1)
                        .map(|(_, v)| v)
                        .collect();
                    if members.is_empty() {
                        continue;
                    }
                    let mut groups = [0.0f64; 3];
                    for m in &members {
                        groups[m.vd as usize] += m.cf;
                    }
                    let top = groups.iter().copied().fold(0.0, f64::max);
                    let net = top - (groups.iter().sum::<f64>() - top);
                    let term = net * wf;
                    if gate(term) {
                        total += term;
                    }
                }
                Some((vd, (total / (level - 1) as f64).clamp(0.0, 1.0)))
            };

            let ext = inputs.external.get(&(Label::from_bits(bits), d.clone()));
            let mut tvs: Vec<[f64; 3]> = if derived.is_some() {
                carriers.iter().map(|(_, v)| v.tv).collect()
            } else {
                Vec::new()
            };
            if let Some(e) = ext {
                tvs.push([e.tv.presence, e.tv.absence, e.tv.inconclusive]);
            }
            let k = tvs.len().max(1) as f64;
            let tv: [f64; 3] = std::array::from_fn(|i| tvs.iter().map(|t| t[i]).sum::<f64>() / k);

            let (vd, cf) = match (derived, ext) {
                (None, None) => continue,
                (Some(x), None) => x,
                (None, Some(e)) => (vd_code(e.vd), e.cf),
                (Some((vd, cf)), Some(e)) => {
                    let ev = vd_code(e.vd);
                    if ev == vd {
                        (vd, (cf + e.cf).min(1.0))
                    } else if e.cf > cf {
                        (ev, e.cf - cf)
                    } else if e.cf < cf {
                        (vd, cf - e.cf)
                    } else {
                        (2, tv[2])
                    }
                }
            };
            out.insert((bits, d.clone()), Verdict { vd, cf: cf.clamp(0.0, 1.0), tv });
        }
    }
    out
}

/// The lattice's decisions in the oracle's shape.
pub fn verdicts(kb: &Lattice) -> BTreeMap<(u32, String), Verdict> {
    kb.decisions()
        .map(|(l, d)| {
            (
                (l.bits(), d.disease.clone()),
                Verdict {
                    vd: d.vd.code(),
                    cf: d.cf,
                    tv: [d.tv.presence, d.tv.absence, d.tv.inconclusive],
                },
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Rough-set regions and rule measures from their definitions.

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Regions {
    pub lower1: BTreeSet<u32>,
    pub upper1: BTreeSet<u32>,
    pub boundary1: BTreeSet<u32>,
    pub lower2: BTreeSet<u32>,
    pub upper2: BTreeSet<u32>,
    pub boundary2: BTreeSet<u32>,
}

/// Concept 1 collects nodes with the disease present or inconclusive, concept
/// 2 those with it absent or inconclusive. Each node is its own elementary
/// set, so a node is certain for a concept when the other concept misses it.
pub fn regions_oracle(kb: &Lattice, disease: &str) -> Regions {
    let mut c1 = BTreeSet::new();
    let mut c2 = BTreeSet::new();
    for node in kb.nodes() {
        for d in &node.decisions {
            if d.disease != disease {
                continue;
            }
            match d.vd {
                TruthValue::Present => {
                    c1.insert(node.label.bits());
                }
                TruthValue::Absent => {
                    c2.insert(node.label.bits());
                }
                TruthValue::Inconclusive => {
                    c1.insert(node.label.bits());
                    c2.insert(node.label.bits());
                }
            }
        }
    }
    let lower1: BTreeSet<u32> = c1.difference(&c2).copied().collect();
    let lower2: BTreeSet<u32> = c2.difference(&c1).copied().collect();
    Regions {
        boundary1: c1.difference(&lower1).copied().collect(),
        boundary2: c2.difference(&lower2).copied().collect(),
        lower1,
        lower2,
        upper1: c1,
        upper2: c2,
    }
}

pub fn regions_of(sets: &latticekb::roughset::ApproximationSets) -> Regions {
    let bits = |s: &BTreeSet<Label>| s.iter().map(|l| l.bits()).collect::<BTreeSet<u32>>();
    Regions {
        lower1: bits(&sets.lower1),
        upper1: bits(&sets.upper1),
        boundary1: bits(&sets.boundary1),
        lower2: bits(&sets.lower2),
        upper2: bits(&sets.upper2),
        boundary2: bits(&sets.boundary2),
    }
}

fn cf_of(kb: &Lattice, bits: u32, disease: &str) -> Option<(TruthValue, f64)> {
    for (l, d) in kb.decisions() {
        if l.bits() == bits && d.disease == disease {
            return Some((d.vd, d.cf));
        }
    }
    None
}

/// Sum of credibilities over the rule's source nodes.
pub fn support_oracle(kb: &Lattice, sources: &BTreeSet<u32>, disease: &str) -> f64 {
    let mut s = 0.0;
    for &b in sources {
        s += cf_of(kb, b, disease).unwrap().1;
    }
    s
}

/// Support over the credibility mass of every node carrying the disease.
pub fn strength_oracle(kb: &Lattice, sources: &BTreeSet<u32>, disease: &str) -> f64 {
    let mut mass = 0.0;
    for b in 0..1u32 << kb.order() {
        if let Some((_, cf)) = cf_of(kb, b, disease) {
            mass += cf;
        }
    }
    support_oracle(kb, sources, disease) / mass
}

fn admits(kind: &str, rule_vd: TruthValue, vd: TruthValue) -> bool {
    match kind {
        "certain" => vd == rule_vd,
        "uncertain" => vd == TruthValue::Inconclusive,
        _ => vd == rule_vd || vd == TruthValue::Inconclusive,
    }
}

/// Support over the mass of nodes in the rule's class that satisfy its
/// condition, halved for inconclusive rules.
pub fn certainty_oracle(
    kb: &Lattice,
    sources: &BTreeSet<u32>,
    satisfies: impl Fn(u32) -> bool,
    disease: &str,
    kind: &str,
    rule_vd: TruthValue,
) -> f64 {
    let mut mass = 0.0;
    for b in 0..1u32 << kb.order() {
        if let Some((vd, cf)) = cf_of(kb, b, disease) {
            if satisfies(b) && admits(kind, rule_vd, vd) {
                mass += cf;
            }
        }
    }
    let r = support_oracle(kb, sources, disease) / mass;
    if rule_vd == TruthValue::Inconclusive {
        r / 2.0
    } else {
        r
    }
}

/// Support over the mass of the disease's nodes in the rule's class, halved
/// for inconclusive rules.
pub fn coverage_oracle(kb: &Lattice, sources: &BTreeSet<u32>, disease: &str, kind: &str, rule_vd: TruthValue) -> f64 {
    let mut mass = 0.0;
    for b in 0..1u32 << kb.order() {
        if let Some((vd, cf)) = cf_of(kb, b, disease) {
            if admits(kind, rule_vd, vd) {
                mass += cf;
            }
        }
    }
    let r = support_oracle(kb, sources, disease) / mass;
    if rule_vd == TruthValue::Inconclusive {
        r / 2.0
    } else {
        r
    }
}
