//! Bit labels identifying lattice nodes.
//!
//! Bit `i - 1` stands for fact `f_i`. Labels print most-significant fact
//! first, so in an order-3 lattice `f1` is `001` and `f3` is `100`.

use std::fmt;

use thiserror::Error;

/// Largest lattice order a label can address.
pub const MAX_LABEL_BITS: usize = 31;

/// 1-based identifier of a fact within one lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactId(pub u32);

impl FactId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    fn bit(self) -> u32 {
        1 << (self.0 - 1)
    }
}

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("`{0}` is not a bit string")]
    NotBits(String),
    #[error("bit string longer than {MAX_LABEL_BITS} bits")]
    TooLong,
    #[error("level {level} / ordinal {ordinal} outside an order-{order} lattice")]
    OutOfRange {
        level: usize,
        ordinal: usize,
        order: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Label(u32);

impl Label {
    pub const EMPTY: Label = Label(0);

    pub fn from_bits(bits: u32) -> Self {
        Label(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Label whose only set bit is `fact`.
    pub fn singleton(fact: FactId) -> Self {
        Label(fact.bit())
    }

    /// All-ones label of an order-`n` lattice.
    pub fn full(order: usize) -> Self {
        Label(if order == 0 { 0 } else { u32::MAX >> (32 - order) })
    }

    pub fn from_facts(facts: impl IntoIterator<Item = FactId>) -> Self {
        Label(facts.into_iter().fold(0, |acc, f| acc | f.bit()))
    }

    /// Lattice level, i.e. the number of facts in the condition.
    pub fn level(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, fact: FactId) -> bool {
        self.0 & fact.bit() != 0
    }

    pub fn is_subset_of(self, other: Label) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn with(self, fact: FactId) -> Self {
        Label(self.0 | fact.bit())
    }

    pub fn without(self, fact: FactId) -> Self {
        Label(self.0 & !fact.bit())
    }

    pub fn union(self, other: Label) -> Self {
        Label(self.0 | other.0)
    }

    /// Facts of the condition in ascending id order.
    pub fn facts(self) -> impl Iterator<Item = FactId> {
        let bits = self.0;
        (1..=32u32).filter(move |&i| bits >> (i - 1) & 1 == 1).map(FactId)
    }

    /// Re-encodes the label after `fact` is removed from the lattice: bits of
    /// higher facts move one place toward the least significant end.
    /// Returns `None` when the label contains the removed fact.
    pub fn remove_fact(self, fact: FactId) -> Option<Self> {
        if self.contains(fact) {
            return None;
        }
        let low_mask = fact.bit() - 1;
        let low = self.0 & low_mask;
        let high = (self.0 >> fact.0) << (fact.0 - 1);
        Some(Label(low | high))
    }

    /// Bit string of width `order`, most significant fact first.
    pub fn render(self, order: usize) -> String {
        (0..order)
            .rev()
            .map(|i| if self.0 >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Parses a bit string, returning the label and its width.
    pub fn parse(text: &str) -> Result<(Self, usize), LabelError> {
        if text.is_empty() || !text.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(LabelError::NotBits(text.to_string()));
        }
        if text.len() > MAX_LABEL_BITS {
            return Err(LabelError::TooLong);
        }
        let bits = text
            .bytes()
            .fold(0u32, |acc, b| (acc << 1) | u32::from(b == b'1'));
        Ok((Label(bits), text.len()))
    }
}

/// Labels of one level in ascending numeric order.
pub fn labels_at_level(level: usize, order: usize) -> Vec<Label> {
    if level > order {
        return Vec::new();
    }
    if level == 0 {
        return vec![Label::EMPTY];
    }
    let limit = 1u64 << order;
    let mut out = Vec::with_capacity(binomial(order, level) as usize);
    let mut v: u64 = (1u64 << level) - 1;
    while v < limit {
        out.push(Label(v as u32));
        // Next integer with the same popcount.
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (!t).wrapping_neg()) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

/// The `ordinal`-th (1-based) label of `level` in enumeration order.
pub fn label_at(level: usize, ordinal: usize, order: usize) -> Result<Label, LabelError> {
    let out_of_range = LabelError::OutOfRange {
        level,
        ordinal,
        order,
    };
    if level > order || ordinal == 0 || order > MAX_LABEL_BITS {
        return Err(out_of_range);
    }
    // Unrank by choosing the highest bit first among ascending combinations.
    let mut rank = (ordinal - 1) as u64;
    if rank >= binomial(order, level) {
        return Err(out_of_range);
    }
    let mut bits = 0u32;
    let mut remaining = level;
    let mut top = order;
    while remaining > 0 {
        // Smallest position p such that C(p, remaining) > rank picks the bit.
        let mut p = remaining - 1;
        while binomial(p + 1, remaining) <= rank {
            p += 1;
        }
        debug_assert!(p < top);
        rank -= binomial(p, remaining);
        bits |= 1 << p;
        top = p;
        remaining -= 1;
    }
    Ok(Label(bits))
}

/// Labels one level down: clear each set bit, leftmost first.
pub fn predecessor_labels(label: Label) -> Vec<Label> {
    let mut set: Vec<FactId> = label.facts().collect();
    set.reverse();
    set.into_iter().map(|f| label.without(f)).collect()
}

/// Labels one level up in an order-`order` lattice: set each clear bit,
/// rightmost first.
pub fn successor_labels(label: Label, order: usize) -> Vec<Label> {
    (1..=order as u32)
        .map(FactId)
        .filter(|&f| !label.contains(f))
        .map(|f| label.with(f))
        .collect()
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}
