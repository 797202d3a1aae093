//! Rule export.
//!
//! The text form prints one rule per line:
//!
//! ```text
//! certain   ("LBP without leg pain", "yes") -> (Myofascial pain syndrome, 1)  support=2.46 strength=1.00 certainty=1.00 coverage=1.00
//! ```
//!
//! The record form is tab-separated with a header line. Fields, in order:
//! `disease`, `vd`, `kind`, `support`, `strength`, `certainty`, `coverage`,
//! `condition` (fact notation such as `f3 & (!f1 | !f2)`) and `sources`
//! (comma-separated node labels). Missing metrics print as `-`.

use std::fmt::Write as _;

use crate::evidence::TruthValue;
use crate::lattice::Lattice;
use crate::metrics::RuleMetrics;
use crate::minimizer::{Literal, MinimizedRule, RuleKind, SopExpression};
use crate::precision::format_fixed;

pub const RECORD_FIELDS: [&str; 9] = [
    "disease",
    "vd",
    "kind",
    "support",
    "strength",
    "certainty",
    "coverage",
    "condition",
    "sources",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RuleRecord {
    pub condition: String,
    pub disease: String,
    pub vd: TruthValue,
    pub kind: RuleKind,
    pub metrics: Option<RuleMetrics>,
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleExport {
    pub records: Vec<RuleRecord>,
}

fn flip(value: &str) -> Option<&'static str> {
    match value {
        "yes" => Some("no"),
        "no" => Some("yes"),
        _ => None,
    }
}

/// Condition in attribute-value form. A negated yes/no fact flips its value;
/// other negations are prefixed with `NOT`.
pub fn render_condition(kb: &Lattice, condition: &SopExpression) -> String {
    condition.render_with(
        |lit| {
            let Some(fact) = kb.fact(lit.fact()) else {
                return lit.to_string();
            };
            match lit {
                Literal::Positive(_) => format!("(\"{}\", \"{}\")", fact.attribute, fact.value),
                Literal::Negated(_) => match flip(&fact.value) {
                    Some(v) => format!("(\"{}\", \"{v}\")", fact.attribute),
                    None => format!("NOT (\"{}\", \"{}\")", fact.attribute, fact.value),
                },
            }
        },
        " AND ",
        " OR ",
    )
}

fn fact_notation(condition: &SopExpression) -> String {
    condition.render_with(
        |lit| match lit {
            Literal::Positive(f) => f.to_string(),
            Literal::Negated(f) => format!("!{f}"),
        },
        " & ",
        " | ",
    )
}

pub fn build_export(kb: &Lattice, rules: &[MinimizedRule]) -> RuleExport {
    RuleExport {
        records: rules
            .iter()
            .map(|r| RuleRecord {
                condition: render_condition(kb, &r.condition),
                disease: r.disease.clone(),
                vd: r.vd,
                kind: r.kind,
                metrics: r.metrics,
                sources: r.source_labels.iter().map(|l| kb.render_label(*l)).collect(),
            })
            .collect(),
    }
}

fn metric(value: Option<f64>, decimals: usize) -> String {
    value.map_or_else(|| "-".to_string(), |v| format_fixed(v, decimals))
}

pub fn export_text(kb: &Lattice, rules: &[MinimizedRule]) -> String {
    let decimals = kb.inputs().precision.display_decimals();
    let mut out = String::new();
    for r in rules {
        let m = r.metrics;
        let _ = writeln!(
            out,
            "{:<9} {} -> ({}, {})  support={} strength={} certainty={} coverage={}",
            r.kind.as_str(),
            render_condition(kb, &r.condition),
            kb.disease_name(&r.disease),
            r.vd,
            metric(m.map(|m| m.support), decimals),
            metric(m.map(|m| m.strength), decimals),
            metric(m.map(|m| m.certainty), decimals),
            metric(m.map(|m| m.coverage), decimals),
        );
    }
    out
}

pub fn export_records(kb: &Lattice, rules: &[MinimizedRule]) -> String {
    let decimals = kb.inputs().precision.display_decimals();
    let mut out = RECORD_FIELDS.join("\t");
    out.push('\n');
    for r in rules {
        let m = r.metrics;
        let sources: Vec<String> = r.source_labels.iter().map(|l| kb.render_label(*l)).collect();
        let fields = [
            r.disease.clone(),
            r.vd.to_string(),
            r.kind.to_string(),
            metric(m.map(|m| m.support), decimals),
            metric(m.map(|m| m.strength), decimals),
            metric(m.map(|m| m.certainty), decimals),
            metric(m.map(|m| m.coverage), decimals),
            fact_notation(&r.condition),
            sources.join(","),
        ];
        out.push_str(&fields.join("\t"));
        out.push('\n');
    }
    out
}
