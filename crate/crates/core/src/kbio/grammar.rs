//! Line-oriented evidence files.
//!
//! ```text
//! module LBP
//! grading q=5
//! alpha 0
//! fact f1 "LBP without leg pain" "yes"
//! disease DP "Discogenic pain"
//! priority DP f1 2
//! priority DP f1+f3 f1=2 f3=1
//! evidence f1 SIJ m=1 level=3 count=8
//! evidence f1+f2 SIJ m=3 level=5 count=2
//! ```
//!
//! `#` starts a comment. A `priority` line with a single fact sets a
//! lattice-wide priority; with a fact set it scopes the priorities to that
//! node. Evidence for a fact set of two or more facts is external evidence
//! for the composite node.

use std::fmt::Write as _;

use thiserror::Error;

use crate::evidence::Assertion;
use crate::label::FactId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("line {line}: unknown fact `{name}`")]
    UnknownFactRef { line: usize, name: String },
    #[error("line {line}: acceptability level {level} outside 1..={levels}")]
    LevelOutOfRange { line: usize, level: usize, levels: usize },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::SyntaxError { line, .. }
            | ParseError::UnknownFactRef { line, .. }
            | ParseError::LevelOutOfRange { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactDecl {
    pub id: FactId,
    pub attribute: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PriorityDecl {
    Global {
        disease: String,
        fact: FactId,
        priority: u32,
    },
    Scoped {
        disease: String,
        facts: Vec<FactId>,
        priorities: Vec<(FactId, u32)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceRecord {
    pub facts: Vec<FactId>,
    pub disease: String,
    pub assertion: Assertion,
    pub level: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceDocument {
    pub module: String,
    pub grading: usize,
    pub alpha: Option<f64>,
    pub facts: Vec<FactDecl>,
    pub diseases: Vec<(String, String)>,
    pub priorities: Vec<PriorityDecl>,
    pub evidence: Vec<EvidenceRecord>,
}

pub const DEFAULT_GRADING: usize = 5;

pub(crate) fn tokenize(line: &str, line_no: usize) -> Result<Vec<String>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.next_if(|c| c.is_whitespace()).is_some() {}
        let Some(&c) = chars.peek() else { break };
        if c == '#' {
            break;
        }
        if c == '"' {
            chars.next();
            let mut tok = String::new();
            loop {
                match chars.next() {
                    None => {
                        return Err(ParseError::SyntaxError {
                            line: line_no,
                            message: "unterminated string".into(),
                        })
                    }
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some(e @ ('"' | '\\')) => tok.push(e),
                        _ => {
                            return Err(ParseError::SyntaxError {
                                line: line_no,
                                message: "bad escape in string".into(),
                            })
                        }
                    },
                    Some(other) => tok.push(other),
                }
            }
            tokens.push(tok);
        } else {
            let mut tok = String::new();
            while let Some(c) = chars.next_if(|c| !c.is_whitespace()) {
                tok.push(c);
            }
            tokens.push(tok);
        }
    }
    Ok(tokens)
}

struct Parser {
    line: usize,
    doc: EvidenceDocument,
    have_module: bool,
    have_grading: bool,
}

impl Parser {
    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::SyntaxError {
            line: self.line,
            message: message.into(),
        }
    }

    fn ident(&self, tok: &str, what: &str) -> Result<String, ParseError> {
        let ok = !tok.is_empty()
            && tok
                .chars()
                .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'));
        if ok {
            Ok(tok.to_string())
        } else {
            Err(self.syntax(format!("bad {what} `{tok}`")))
        }
    }

    fn number<T: std::str::FromStr>(&self, tok: &str, what: &str) -> Result<T, ParseError> {
        tok.parse()
            .map_err(|_| self.syntax(format!("bad {what} `{tok}`")))
    }

    fn keyed<'a>(&self, tok: &'a str, key: &str) -> Result<&'a str, ParseError> {
        tok.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| self.syntax(format!("expected `{key}=...`, found `{tok}`")))
    }

    fn fact_ref(&self, tok: &str) -> Result<FactId, ParseError> {
        let unknown = || ParseError::UnknownFactRef {
            line: self.line,
            name: tok.to_string(),
        };
        let n: u32 = tok
            .strip_prefix('f')
            .and_then(|d| d.parse().ok())
            .ok_or_else(unknown)?;
        if n == 0 || n as usize > self.doc.facts.len() {
            return Err(unknown());
        }
        Ok(FactId(n))
    }

    fn fact_set(&self, tok: &str) -> Result<Vec<FactId>, ParseError> {
        let mut facts = tok
            .split('+')
            .map(|t| self.fact_ref(t))
            .collect::<Result<Vec<_>, _>>()?;
        facts.sort();
        let n = facts.len();
        facts.dedup();
        if facts.len() != n {
            return Err(self.syntax(format!("repeated fact in `{tok}`")));
        }
        Ok(facts)
    }

    fn directive(&mut self, tokens: &[String]) -> Result<(), ParseError> {
        let words: Vec<&str> = tokens.iter().map(String::as_str).collect();
        if words[0] != "module" && !self.have_module {
            return Err(self.syntax("no module header"));
        }
        match words.as_slice() {
            ["module", name] => {
                if self.have_module {
                    return Err(self.syntax("second module header"));
                }
                self.doc.module = self.ident(name, "module name")?;
                self.have_module = true;
            }
            ["grading", q] => {
                if self.have_grading {
                    return Err(self.syntax("grading declared twice"));
                }
                if !self.doc.evidence.is_empty() {
                    return Err(self.syntax("grading must precede evidence"));
                }
                let q: usize = self.number(self.keyed(q, "q")?, "grading")?;
                if q == 0 {
                    return Err(self.syntax("grading needs q >= 1"));
                }
                self.doc.grading = q;
                self.have_grading = true;
            }
            ["alpha", x] => {
                let alpha: f64 = self.number(x, "alpha")?;
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(self.syntax(format!("alpha {alpha} outside [0, 1]")));
                }
                self.doc.alpha = Some(alpha);
            }
            ["fact", id, attribute, value] => {
                let expected = format!("f{}", self.doc.facts.len() + 1);
                if *id != expected {
                    return Err(self.syntax(format!("expected fact `{expected}`, found `{id}`")));
                }
                if self
                    .doc
                    .facts
                    .iter()
                    .any(|f| f.attribute == *attribute && f.value == *value)
                {
                    return Err(self.syntax(format!("duplicate fact (\"{attribute}\", \"{value}\")")));
                }
                self.doc.facts.push(FactDecl {
                    id: FactId(self.doc.facts.len() as u32 + 1),
                    attribute: attribute.to_string(),
                    value: value.to_string(),
                });
            }
            ["disease", id, name] => {
                let id = self.ident(id, "disease id")?;
                if self.doc.diseases.iter().any(|(d, _)| *d == id) {
                    return Err(self.syntax(format!("disease `{id}` declared twice")));
                }
                self.doc.diseases.push((id, name.to_string()));
            }
            ["priority", disease, fact, p] if !fact.contains('+') && !p.contains('=') => {
                let decl = PriorityDecl::Global {
                    disease: self.ident(disease, "disease id")?,
                    fact: self.fact_ref(fact)?,
                    priority: self.priority(p)?,
                };
                self.doc.priorities.push(decl);
            }
            ["priority", disease, set, rest @ ..] if !rest.is_empty() => {
                let disease = self.ident(disease, "disease id")?;
                let facts = self.fact_set(set)?;
                if facts.len() < 2 {
                    return Err(self.syntax("scoped priorities need a fact set"));
                }
                let mut priorities = Vec::new();
                for item in rest {
                    let (f, p) = item
                        .split_once('=')
                        .ok_or_else(|| self.syntax(format!("expected `fN=P`, found `{item}`")))?;
                    let f = self.fact_ref(f)?;
                    if !facts.contains(&f) {
                        return Err(self.syntax(format!("{f} is not in `{set}`")));
                    }
                    if priorities.iter().any(|(g, _)| *g == f) {
                        return Err(self.syntax(format!("{f} given twice")));
                    }
                    priorities.push((f, self.priority(p)?));
                }
                self.doc.priorities.push(PriorityDecl::Scoped {
                    disease,
                    facts,
                    priorities,
                });
            }
            ["evidence", set, disease, m, level, count] => {
                let facts = self.fact_set(set)?;
                let disease = self.ident(disease, "disease id")?;
                let m: u8 = self.number(self.keyed(m, "m")?, "assertion")?;
                let assertion = Assertion::from_index(m)
                    .ok_or_else(|| self.syntax(format!("assertion m={m} outside 1..=3")))?;
                let level: usize = self.number(self.keyed(level, "level")?, "level")?;
                if level == 0 || level > self.doc.grading {
                    return Err(ParseError::LevelOutOfRange {
                        line: self.line,
                        level,
                        levels: self.doc.grading,
                    });
                }
                let count: u64 = self.number(self.keyed(count, "count")?, "count")?;
                self.doc.evidence.push(EvidenceRecord {
                    facts,
                    disease,
                    assertion,
                    level,
                    count,
                });
            }
            [keyword, ..] => {
                return Err(self.syntax(format!("unrecognized or malformed `{keyword}` line")));
            }
            [] => unreachable!("blank lines are skipped"),
        }
        Ok(())
    }

    fn priority(&self, tok: &str) -> Result<u32, ParseError> {
        let p: u32 = self.number(tok, "priority")?;
        if p == 0 {
            return Err(self.syntax("priorities start at 1"));
        }
        Ok(p)
    }
}

/// Parses an evidence file, stopping at the first error.
pub fn parse_evidence(text: &str) -> Result<EvidenceDocument, ParseError> {
    let mut parser = Parser {
        line: 0,
        doc: EvidenceDocument {
            module: String::new(),
            grading: DEFAULT_GRADING,
            alpha: None,
            facts: Vec::new(),
            diseases: Vec::new(),
            priorities: Vec::new(),
            evidence: Vec::new(),
        },
        have_module: false,
        have_grading: false,
    };
    for (i, raw) in text.lines().enumerate() {
        parser.line = i + 1;
        let tokens = tokenize(raw, parser.line)?;
        if tokens.is_empty() {
            continue;
        }
        parser.directive(&tokens)?;
    }
    if !parser.have_module {
        return Err(ParseError::SyntaxError {
            line: parser.line.max(1),
            message: "no module header".into(),
        });
    }
    Ok(parser.doc)
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn fact_set(facts: &[FactId]) -> String {
    facts
        .iter()
        .map(FactId::to_string)
        .collect::<Vec<_>>()
        .join("+")
}

/// Canonical text of a document; parsing it yields the same document.
pub fn render_evidence(doc: &EvidenceDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "module {}", doc.module);
    let _ = writeln!(out, "grading q={}", doc.grading);
    if let Some(alpha) = doc.alpha {
        let _ = writeln!(out, "alpha {alpha}");
    }
    for f in &doc.facts {
        let _ = writeln!(out, "fact {} {} {}", f.id, quote(&f.attribute), quote(&f.value));
    }
    for (id, name) in &doc.diseases {
        let _ = writeln!(out, "disease {id} {}", quote(name));
    }
    for p in &doc.priorities {
        match p {
            PriorityDecl::Global {
                disease,
                fact,
                priority,
            } => {
                let _ = writeln!(out, "priority {disease} {fact} {priority}");
            }
            PriorityDecl::Scoped {
                disease,
                facts,
                priorities,
            } => {
                let items: Vec<String> = priorities.iter().map(|(f, p)| format!("{f}={p}")).collect();
                let _ = writeln!(out, "priority {disease} {} {}", fact_set(facts), items.join(" "));
            }
        }
    }
    for e in &doc.evidence {
        let _ = writeln!(
            out,
            "evidence {} {} m={} level={} count={}",
            fact_set(&e.facts),
            e.disease,
            e.assertion.index(),
            e.level,
            e.count
        );
    }
    out
}
