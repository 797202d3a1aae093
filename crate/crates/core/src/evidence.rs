//! Graded evidence: truth triples, presence matrices and the resolution of an
//! atomic assertion into a truth value with a credibility factor.
//!
//! Knowledge sources are graded into `q` acceptability levels, level 1 being
//! the most trusted. A source at level `j` contributes weight `q - j + 1` to
//! the mass of the assertion kind it supports.

use std::fmt;

use thiserror::Error;

use crate::precision::Precision;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvidenceError {
    #[error("grading needs at least one acceptability level")]
    NoLevels,
    #[error("acceptability level {level} outside 1..={levels}")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error("profile has {profile} levels but the grading has {grading}")]
    LevelMismatch { profile: usize, grading: usize },
    #[error("no weighted evidence: the assertion must be omitted")]
    ZeroEvidence,
    #[error("presence matrix has no true cell: the assertion is absent")]
    EmptyMatrix,
    #[error("priority {priority} outside 1..={total}")]
    OutOfRange { priority: u32, total: u32 },
}

/// What a knowledge source claims about a disease for a condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assertion {
    /// Certain presence (row 1).
    Presence,
    /// Certain absence (row 2).
    Absence,
    /// May or may not be present (row 3).
    Inconclusive,
}

impl Assertion {
    pub const ALL: [Assertion; 3] = [
        Assertion::Presence,
        Assertion::Absence,
        Assertion::Inconclusive,
    ];

    pub fn row(self) -> usize {
        match self {
            Assertion::Presence => 0,
            Assertion::Absence => 1,
            Assertion::Inconclusive => 2,
        }
    }

    /// 1-based index `m` used by evidence files.
    pub fn index(self) -> u8 {
        self.row() as u8 + 1
    }

    pub fn from_index(m: u8) -> Option<Self> {
        match m {
            1 => Some(Assertion::Presence),
            2 => Some(Assertion::Absence),
            3 => Some(Assertion::Inconclusive),
            _ => None,
        }
    }

    /// Truth value a decision takes when this assertion prevails.
    pub fn truth_value(self) -> TruthValue {
        match self {
            Assertion::Presence => TruthValue::Present,
            Assertion::Absence => TruthValue::Absent,
            Assertion::Inconclusive => TruthValue::Inconclusive,
        }
    }
}

/// Ternary truth value of a decision: 0 absent, 1 present, 2 inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TruthValue {
    Absent,
    Present,
    Inconclusive,
}

impl TruthValue {
    pub const ALL: [TruthValue; 3] = [
        TruthValue::Absent,
        TruthValue::Present,
        TruthValue::Inconclusive,
    ];

    pub fn code(self) -> u8 {
        match self {
            TruthValue::Absent => 0,
            TruthValue::Present => 1,
            TruthValue::Inconclusive => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(TruthValue::Absent),
            1 => Some(TruthValue::Present),
            2 => Some(TruthValue::Inconclusive),
            _ => None,
        }
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Number of acceptability levels `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SourceGrading {
    levels: usize,
}

impl SourceGrading {
    pub fn new(levels: usize) -> Result<Self, EvidenceError> {
        if levels == 0 {
            return Err(EvidenceError::NoLevels);
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Weight of a source at 1-based `level`: `q - level + 1`.
    pub fn weight(&self, level: usize) -> Result<u64, EvidenceError> {
        self.check_level(level)?;
        Ok((self.levels - level + 1) as u64)
    }

    pub fn check_level(&self, level: usize) -> Result<(), EvidenceError> {
        if level == 0 || level > self.levels {
            Err(EvidenceError::LevelOutOfRange {
                level,
                levels: self.levels,
            })
        } else {
            Ok(())
        }
    }
}

/// Source counts per assertion kind and acceptability level.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvidenceProfile {
    counts: [Vec<u64>; 3],
}

impl EvidenceProfile {
    pub fn new(levels: usize) -> Self {
        Self {
            counts: [vec![0; levels], vec![0; levels], vec![0; levels]],
        }
    }

    /// Builds a profile from `(assertion, level, count)` triples.
    pub fn from_counts(
        levels: usize,
        entries: impl IntoIterator<Item = (Assertion, usize, u64)>,
    ) -> Result<Self, EvidenceError> {
        let mut profile = Self::new(levels);
        for (assertion, level, count) in entries {
            profile.add(assertion, level, count)?;
        }
        Ok(profile)
    }

    pub fn levels(&self) -> usize {
        self.counts[0].len()
    }

    pub fn add(&mut self, assertion: Assertion, level: usize, count: u64) -> Result<(), EvidenceError> {
        let levels = self.levels();
        if level == 0 || level > levels {
            return Err(EvidenceError::LevelOutOfRange { level, levels });
        }
        self.counts[assertion.row()][level - 1] += count;
        Ok(())
    }

    pub fn count(&self, assertion: Assertion, level: usize) -> u64 {
        self.counts[assertion.row()]
            .get(level.wrapping_sub(1))
            .copied()
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().flatten().all(|&c| c == 0)
    }

    /// Level-weighted mass of one assertion kind.
    pub fn weighted_mass(&self, assertion: Assertion, grading: &SourceGrading) -> u64 {
        let q = grading.levels() as u64;
        self.counts[assertion.row()]
            .iter()
            .enumerate()
            .map(|(j, &c)| (q - j as u64) * c)
            .sum()
    }
}

/// Normalized evidence mass for presence, absence and inconclusiveness.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TruthTriple {
    pub presence: f64,
    pub absence: f64,
    pub inconclusive: f64,
}

impl TruthTriple {
    pub fn new(presence: f64, absence: f64, inconclusive: f64) -> Self {
        Self {
            presence,
            absence,
            inconclusive,
        }
    }

    pub fn get(&self, assertion: Assertion) -> f64 {
        match assertion {
            Assertion::Presence => self.presence,
            Assertion::Absence => self.absence,
            Assertion::Inconclusive => self.inconclusive,
        }
    }

    /// Complement `1 - Tv` of one component.
    pub fn complement(&self, assertion: Assertion) -> f64 {
        1.0 - self.get(assertion)
    }

    pub fn sum(&self) -> f64 {
        self.presence + self.absence + self.inconclusive
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(f(self.presence), f(self.absence), f(self.inconclusive))
    }
}

/// Computes the truth triple of a profile.
pub fn truth_triple(
    profile: &EvidenceProfile,
    grading: &SourceGrading,
) -> Result<TruthTriple, EvidenceError> {
    if profile.levels() != grading.levels() {
        return Err(EvidenceError::LevelMismatch {
            profile: profile.levels(),
            grading: grading.levels(),
        });
    }
    let x = profile.weighted_mass(Assertion::Presence, grading);
    let y = profile.weighted_mass(Assertion::Absence, grading);
    let z = profile.weighted_mass(Assertion::Inconclusive, grading);
    let w = x + y + z;
    if w == 0 {
        return Err(EvidenceError::ZeroEvidence);
    }
    let w = w as f64;
    Ok(TruthTriple::new(x as f64 / w, y as f64 / w, z as f64 / w))
}

/// 3 x q indicator of which (assertion, level) cells have any source.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PresenceMatrix {
    rows: [Vec<bool>; 3],
}

impl PresenceMatrix {
    pub fn from_rows(rows: [Vec<bool>; 3]) -> Self {
        debug_assert!(rows[0].len() == rows[1].len() && rows[1].len() == rows[2].len());
        Self { rows }
    }

    /// Decodes a matrix from a bit mask: bit `row * levels + column`.
    pub fn from_mask(levels: usize, mask: u64) -> Self {
        let row = |r: usize| (0..levels).map(|c| mask >> (r * levels + c) & 1 == 1).collect();
        Self::from_rows([row(0), row(1), row(2)])
    }

    pub fn levels(&self) -> usize {
        self.rows[0].len()
    }

    /// Cell at 0-based row and column.
    pub fn get(&self, row: usize, column: usize) -> bool {
        self.rows[row][column]
    }

    pub fn row(&self, row: usize) -> &[bool] {
        &self.rows[row]
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().flatten().all(|&b| !b)
    }

    fn rows_at(&self, column: usize) -> Vec<usize> {
        (0..3).filter(|&r| self.rows[r][column]).collect()
    }
}

impl fmt::Display for PresenceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            write!(f, "K{}", i + 1)?;
            for &cell in row {
                write!(f, " {}", u8::from(cell))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn presence_matrix(profile: &EvidenceProfile) -> PresenceMatrix {
    PresenceMatrix::from_rows(profile.counts.clone().map(|row| row.iter().map(|&c| c > 0).collect()))
}

/// Truth value and credibility factor of an atomic assertion.
pub type Resolution = (TruthValue, f64);

fn outcome(row: usize, t: &TruthTriple) -> Resolution {
    let assertion = Assertion::ALL[row];
    (assertion.truth_value(), t.get(assertion))
}

/// Resolves a presence matrix and its truth triple into `(Vd, CF)`.
///
/// Columns are read left to right. The first column holding any source
/// decides unless several rows compete there, in which case the larger truth
/// mass wins and exact ties are broken by scanning later columns.
pub fn resolve_decision(m: &PresenceMatrix, t: &TruthTriple) -> Result<Resolution, EvidenceError> {
    let active: Vec<usize> = (0..3).filter(|&r| m.row(r).iter().any(|&b| b)).collect();
    match active.as_slice() {
        [] => return Err(EvidenceError::EmptyMatrix),
        [row] => return Ok(outcome(*row, t)),
        _ => {}
    }
    let first = (0..m.levels())
        .find(|&c| (0..3).any(|r| m.get(r, c)))
        .expect("non-empty matrix has a populated column");
    let rows = m.rows_at(first);
    Ok(match rows.as_slice() {
        [row] => outcome(*row, t),
        [a, b] => resolve_pair(m, t, *a, *b, first),
        _ => resolve_all_rows(m, t, first),
    })
}

fn component(t: &TruthTriple, row: usize) -> f64 {
    t.get(Assertion::ALL[row])
}

/// Two competing rows `a < b` at `column`.
fn resolve_pair(m: &PresenceMatrix, t: &TruthTriple, a: usize, b: usize, column: usize) -> Resolution {
    let (ta, tb) = (component(t, a), component(t, b));
    if ta > tb {
        return outcome(a, t);
    }
    if ta < tb {
        return outcome(b, t);
    }
    pair_tie_break(m, t, a, b, column + 1)
}

/// First later column where exactly one row of the pair has a source decides;
/// otherwise the decision stays inconclusive.
fn pair_tie_break(m: &PresenceMatrix, t: &TruthTriple, a: usize, b: usize, from: usize) -> Resolution {
    for c in from..m.levels() {
        match (m.get(a, c), m.get(b, c)) {
            (true, false) => return outcome(a, t),
            (false, true) => return outcome(b, t),
            _ => {}
        }
    }
    let cf = if b == 2 { t.inconclusive } else { t.presence };
    (TruthValue::Inconclusive, cf)
}

/// All three rows compete at `column`.
fn resolve_all_rows(m: &PresenceMatrix, t: &TruthTriple, column: usize) -> Resolution {
    let TruthTriple {
        presence: t1,
        absence: t2,
        inconclusive: t3,
    } = *t;
    if t1 > t2 && t1 > t3 {
        return (TruthValue::Present, t1);
    }
    if t2 > t1 && t2 > t3 {
        return (TruthValue::Absent, t2);
    }
    if t3 > t1 && t3 > t2 {
        return (TruthValue::Inconclusive, t3);
    }
    if t1 == t2 && t2 == t3 {
        return all_equal_tie_break(m, t, column + 1);
    }
    // Exactly two components tie for the maximum.
    if t1 == t2 {
        (TruthValue::Inconclusive, t1)
    } else {
        (TruthValue::Inconclusive, t3)
    }
}

fn all_equal_tie_break(m: &PresenceMatrix, t: &TruthTriple, from: usize) -> Resolution {
    for c in from..m.levels() {
        match m.rows_at(c).as_slice() {
            [] => continue,
            [row] => return outcome(*row, t),
            [a, b] => return pair_tie_break(m, t, *a, *b, c + 1),
            _ => continue,
        }
    }
    (TruthValue::Inconclusive, t.inconclusive)
}

/// Conditional weightage `priority / total` of a fact for a decision.
pub fn conditional_weight(priority: u32, total: u32) -> Result<f64, EvidenceError> {
    if priority == 0 || priority > total {
        return Err(EvidenceError::OutOfRange { priority, total });
    }
    Ok(priority as f64 / total as f64)
}

/// Runs the whole atomic pipeline: triple (rounded per `precision`), matrix and
/// resolution. The returned credibility is taken from the rounded triple.
pub fn assess(
    profile: &EvidenceProfile,
    grading: &SourceGrading,
    precision: Precision,
) -> Result<(TruthTriple, TruthValue, f64), EvidenceError> {
    let triple = truth_triple(profile, grading)?.map(|v| precision.apply(v));
    let (vd, cf) = resolve_decision(&presence_matrix(profile), &triple)?;
    Ok((triple, vd, cf))
}
