//! Canonical text form of a knowledge base.
//!
//! ```text
//! kbfmt 1
//! module LBP
//! grading 5
//! cap 16
//! alpha 0
//! precision full
//! order 3
//! fact f1 "LBP without leg pain" "yes"
//! disease SIJ "Sacroiliac joint pain"
//! priority SIJ f1 2
//! scoped DP 011 f1=2 f2=1
//! external 011 SIJ vd=1 cf=0.5 tv=0.2,0.3,0.5
//! node 000
//! node 001
//! decision SIJ vd=2 cf=0.46 tv=0.43,0.11,0.46 w=f1:1
//! ...
//! end
//! ```
//!
//! Nodes appear in level-major, ascending label order; every node is listed
//! even without decisions. Reals are written in shortest round-trip form so
//! loading restores them bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::grammar::{quote, tokenize};
use crate::evidence::{SourceGrading, TruthTriple, TruthValue};
use crate::label::{FactId, Label};
use crate::lattice::{BuildOptions, Fact, Lattice};
use crate::precision::Precision;
use crate::propagation::{AlphaThreshold, DecisionEntry, ExternalEvidence, PropagationInputs};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("unsupported KB format `{0}`, expected `kbfmt {FORMAT_VERSION}`")]
    VersionMismatch(String),
    #[error("corrupt KB record at line {line}: {message}")]
    CorruptRecord { line: usize, message: String },
}

fn triple(t: &TruthTriple) -> String {
    format!("{},{},{}", t.presence, t.absence, t.inconclusive)
}

pub fn serialize_kb(kb: &Lattice) -> String {
    let order = kb.order();
    let inputs = kb.inputs();
    let mut out = String::new();
    let _ = writeln!(out, "kbfmt {FORMAT_VERSION}");
    let _ = writeln!(out, "module {}", kb.module());
    let _ = writeln!(out, "grading {}", kb.grading().levels());
    let _ = writeln!(out, "cap {}", kb.max_order());
    let _ = writeln!(out, "alpha {}", inputs.alpha.value());
    let _ = writeln!(out, "precision {}", inputs.precision);
    let _ = writeln!(out, "order {order}");
    for f in kb.facts() {
        let _ = writeln!(out, "fact {} {} {}", f.id, quote(&f.attribute), quote(&f.value));
    }
    for (id, name) in kb.diseases() {
        let _ = writeln!(out, "disease {id} {}", quote(name));
    }
    for (d, f, p) in inputs.priorities.global() {
        let _ = writeln!(out, "priority {d} {f} {p}");
    }
    for (d, l, ps) in inputs.priorities.scoped() {
        let items: Vec<String> = ps.iter().map(|(f, p)| format!("{f}={p}")).collect();
        let _ = writeln!(out, "scoped {d} {} {}", l.render(order), items.join(" "));
    }
    for ((l, d), e) in &inputs.external {
        let _ = writeln!(
            out,
            "external {} {d} vd={} cf={} tv={}",
            l.render(order),
            e.vd,
            e.cf,
            triple(&e.tv)
        );
    }
    for node in kb.nodes() {
        let _ = writeln!(out, "node {}", render_empty_label(order, node.label));
        for d in &node.decisions {
            let weights: Vec<String> = d.weights.iter().map(|(f, w)| format!("{f}:{w}")).collect();
            let _ = writeln!(
                out,
                "decision {} vd={} cf={} tv={} w={}",
                d.disease,
                d.vd,
                d.cf,
                triple(&d.tv),
                weights.join(",")
            );
        }
    }
    out.push_str("end\n");
    out
}

struct Loader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    line: usize,
}

impl Loader<'_> {
    fn corrupt(&self, message: impl Into<String>) -> StoreError {
        StoreError::CorruptRecord {
            line: self.line,
            message: message.into(),
        }
    }

    fn next_tokens(&mut self) -> Result<Option<Vec<String>>, StoreError> {
        let Some((i, text)) = self.lines.next() else {
            self.line += 1;
            return Ok(None);
        };
        self.line = i + 1;
        tokenize(text, self.line)
            .map(Some)
            .map_err(|e| self.corrupt(e.to_string()))
    }

    fn peek_keyword(&mut self) -> Option<&str> {
        self.lines
            .peek()
            .and_then(|(_, t)| t.split_whitespace().next())
    }

    fn expect(&mut self, keyword: &str) -> Result<Vec<String>, StoreError> {
        match self.next_tokens()? {
            Some(t) if t.first().map(String::as_str) == Some(keyword) => Ok(t),
            Some(t) => Err(self.corrupt(format!("expected `{keyword}`, found `{}`", t.join(" ")))),
            None => Err(self.corrupt(format!("truncated: expected `{keyword}`"))),
        }
    }

    fn single<T: std::str::FromStr>(&mut self, keyword: &str) -> Result<T, StoreError> {
        let t = self.expect(keyword)?;
        match t.as_slice() {
            [_, v] => v.parse().map_err(|_| self.corrupt(format!("bad {keyword} `{v}`"))),
            _ => Err(self.corrupt(format!("malformed `{keyword}` line"))),
        }
    }

    fn parse<T: std::str::FromStr>(&self, tok: &str, what: &str) -> Result<T, StoreError> {
        tok.parse()
            .map_err(|_| self.corrupt(format!("bad {what} `{tok}`")))
    }

    fn keyed<'t>(&self, tok: &'t str, key: &str) -> Result<&'t str, StoreError> {
        tok.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| self.corrupt(format!("expected `{key}=`, found `{tok}`")))
    }

    fn fact(&self, tok: &str, order: usize) -> Result<FactId, StoreError> {
        let n: u32 = tok
            .strip_prefix('f')
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| self.corrupt(format!("bad fact `{tok}`")))?;
        if n == 0 || n as usize > order {
            return Err(self.corrupt(format!("fact `{tok}` outside the lattice")));
        }
        Ok(FactId(n))
    }

    fn label(&self, tok: &str, order: usize) -> Result<Label, StoreError> {
        match Label::parse(tok) {
            Ok((l, width)) if width == order => Ok(l),
            _ if order == 0 && tok == "-" => Ok(Label::EMPTY),
            _ => Err(self.corrupt(format!("bad label `{tok}`"))),
        }
    }

    fn truth(&self, tok: &str) -> Result<TruthValue, StoreError> {
        let code: u8 = self.parse(self.keyed(tok, "vd")?, "truth value")?;
        TruthValue::from_code(code).ok_or_else(|| self.corrupt(format!("truth value {code} outside 0..=2")))
    }

    fn triple(&self, tok: &str) -> Result<TruthTriple, StoreError> {
        let parts: Vec<f64> = self
            .keyed(tok, "tv")?
            .split(',')
            .map(|p| self.parse(p, "truth triple"))
            .collect::<Result<_, _>>()?;
        match parts.as_slice() {
            [a, b, c] => Ok(TruthTriple::new(*a, *b, *c)),
            _ => Err(self.corrupt("truth triple needs three components")),
        }
    }
}

fn render_empty_label(order: usize, l: Label) -> String {
    if order == 0 {
        "-".to_string()
    } else {
        l.render(order)
    }
}

/// Inverse of [`serialize_kb`]. Decisions are taken as stored; nothing is
/// re-propagated.
pub fn load_kb(text: &str) -> Result<Lattice, StoreError> {
    let mut ld = Loader {
        lines: text.lines().enumerate().peekable(),
        line: 0,
    };
    match ld.next_tokens()? {
        Some(t) if t.len() == 2 && t[0] == "kbfmt" && t[1] == FORMAT_VERSION.to_string() => {}
        Some(t) => return Err(StoreError::VersionMismatch(t.join(" "))),
        None => return Err(StoreError::VersionMismatch(String::new())),
    }
    let module = {
        let t = ld.expect("module")?;
        match t.as_slice() {
            [_, m] => m.clone(),
            _ => return Err(ld.corrupt("malformed `module` line")),
        }
    };
    let q: usize = ld.single("grading")?;
    let grading = SourceGrading::new(q).map_err(|e| ld.corrupt(e.to_string()))?;
    let max_order: usize = ld.single("cap")?;
    let alpha: f64 = ld.single("alpha")?;
    let alpha = AlphaThreshold::new(alpha).map_err(|e| ld.corrupt(e.to_string()))?;
    let precision: String = ld.single("precision")?;
    let precision: Precision = precision.parse().map_err(|e: String| ld.corrupt(e))?;
    let order: usize = ld.single("order")?;

    let mut facts = Vec::new();
    for i in 1..=order {
        let t = ld.expect("fact")?;
        match t.as_slice() {
            [_, id, attribute, value] if *id == format!("f{i}") => facts.push(Fact {
                id: FactId(i as u32),
                attribute: attribute.clone(),
                value: value.clone(),
            }),
            _ => return Err(ld.corrupt(format!("expected fact f{i}"))),
        }
    }

    let mut inputs = PropagationInputs {
        alpha,
        precision,
        ..PropagationInputs::default()
    };
    let mut diseases = BTreeMap::new();
    loop {
        match ld.peek_keyword() {
            Some("disease") => {
                let t = ld.expect("disease")?;
                match t.as_slice() {
                    [_, id, name] => {
                        diseases.insert(id.clone(), name.clone());
                    }
                    _ => return Err(ld.corrupt("malformed `disease` line")),
                }
            }
            Some("priority") => {
                let t = ld.expect("priority")?;
                match t.as_slice() {
                    [_, d, f, p] => {
                        let f = ld.fact(f, order)?;
                        let p: u32 = ld.parse(p, "priority")?;
                        inputs.priorities.set_global(d.clone(), f, p);
                    }
                    _ => return Err(ld.corrupt("malformed `priority` line")),
                }
            }
            Some("scoped") => {
                let t = ld.expect("scoped")?;
                let [_, d, l, items @ ..] = t.as_slice() else {
                    return Err(ld.corrupt("malformed `scoped` line"));
                };
                let label = ld.label(l, order)?;
                let mut ps = BTreeMap::new();
                for item in items {
                    let (f, p) = item
                        .split_once('=')
                        .ok_or_else(|| ld.corrupt(format!("bad priority `{item}`")))?;
                    ps.insert(ld.fact(f, order)?, ld.parse(p, "priority")?);
                }
                inputs.priorities.set_scoped(d.clone(), label, ps);
            }
            Some("external") => {
                let t = ld.expect("external")?;
                let [_, l, d, vd, cf, tv] = t.as_slice() else {
                    return Err(ld.corrupt("malformed `external` line"));
                };
                let label = ld.label(l, order)?;
                let e = ExternalEvidence {
                    vd: ld.truth(vd)?,
                    cf: ld.parse(ld.keyed(cf, "cf")?, "credibility")?,
                    tv: ld.triple(tv)?,
                };
                inputs.external.insert((label, d.clone()), e);
            }
            _ => break,
        }
    }

    let mut decisions: BTreeMap<Label, Vec<DecisionEntry>> = BTreeMap::new();
    let expected: Vec<Label> = (0..=order)
        .flat_map(|lv| crate::label::labels_at_level(lv, order))
        .collect();
    for want in expected {
        let t = ld.expect("node")?;
        let [_, l] = t.as_slice() else {
            return Err(ld.corrupt("malformed `node` line"));
        };
        let label = ld.label(l, order)?;
        if label != want {
            return Err(ld.corrupt(format!(
                "expected node {}, found {l}",
                render_empty_label(order, want)
            )));
        }
        let mut entries = Vec::new();
        while ld.peek_keyword() == Some("decision") {
            let t = ld.expect("decision")?;
            let [_, d, vd, cf, tv, w] = t.as_slice() else {
                return Err(ld.corrupt("malformed `decision` line"));
            };
            let mut weights = BTreeMap::new();
            let w = ld.keyed(w, "w")?;
            for item in w.split(',').filter(|s| !s.is_empty()) {
                let (f, x) = item
                    .split_once(':')
                    .ok_or_else(|| ld.corrupt(format!("bad weight `{item}`")))?;
                weights.insert(ld.fact(f, order)?, ld.parse(x, "weight")?);
            }
            entries.push(DecisionEntry {
                disease: d.clone(),
                vd: ld.truth(vd)?,
                cf: ld.parse(ld.keyed(cf, "cf")?, "credibility")?,
                tv: ld.triple(tv)?,
                weights,
            });
        }
        if !entries.is_empty() {
            decisions.insert(label, entries);
        }
    }
    ld.expect("end")?;
    if let Some(t) = ld.next_tokens()?.filter(|t| !t.is_empty()) {
        return Err(ld.corrupt(format!("trailing data `{}`", t.join(" "))));
    }

    let options = BuildOptions {
        module,
        grading,
        max_order,
        diseases,
        inputs,
    };
    Lattice::from_parts(options, facts, decisions).map_err(|e| ld.corrupt(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kbio::fixture::lbp_kb;
    use crate::kbio::BuildSettings;

    #[test]
    fn round_trip_is_exact() {
        for precision in [Precision::Full, Precision::Round2] {
            let kb = lbp_kb(BuildSettings {
                precision,
                ..BuildSettings::default()
            })
            .unwrap();
            let text = serialize_kb(&kb);
            let back = load_kb(&text).unwrap();
            assert_eq!(back, kb);
            assert_eq!(serialize_kb(&back), text);
        }
    }

    #[test]
    fn rejects_other_versions() {
        let text = serialize_kb(&lbp_kb(BuildSettings::default()).unwrap()).replacen("kbfmt 1", "kbfmt 9", 1);
        assert!(matches!(load_kb(&text), Err(StoreError::VersionMismatch(_))));
    }

    #[test]
    fn rejects_truncation_and_garbage() {
        let text = serialize_kb(&lbp_kb(BuildSettings::default()).unwrap());
        let truncated: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(matches!(load_kb(&truncated), Err(StoreError::CorruptRecord { .. })));
        let garbled = text.replacen("node 011", "node 0x1", 1);
        assert!(matches!(load_kb(&garbled), Err(StoreError::CorruptRecord { .. })));
        assert!(load_kb("").is_err());
    }
}
