//! The `latticekb` command line.
//!
//! Exit status is 0 on success, 1 on a domain error (bad evidence, corrupt KB,
//! failed check) and 2 on a usage error. Edits write the KB file atomically
//! by renaming a sibling temporary file over it.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use super::export::{export_records, export_text};
use super::grammar::parse_evidence;
use super::store::{load_kb, serialize_kb};
use super::{build_from_document, BuildSettings, KbError};
use crate::evidence::{assess, Assertion, EvidenceError, EvidenceProfile, TruthTriple, TruthValue};
use crate::label::{FactId, Label};
use crate::lattice::{
    check_structure, delete_fact, insert_fact, modify_node, ChangeKind, DecisionChange, Fact, Lattice, Modification,
    NodeChange, DEFAULT_MAX_ORDER,
};
use crate::metrics::check_properties;
use crate::minimizer::{generate_rules, RuleKind};
use crate::precision::Precision;
use crate::propagation::DecisionEntry;
use crate::roughset::{all_approximations, apply_changes, approximations, concepts, ApproximationSets};

#[derive(Debug, Parser)]
#[command(name = "latticekb", version, about = "Build and query powerset-lattice knowledge bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse an evidence file, build and propagate the lattice, save the KB.
    Build {
        evidence: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Gate for weighted credibilities; overrides the file's `alpha`.
        #[arg(long)]
        alpha: Option<f64>,
        /// Round intermediates to two decimals.
        #[arg(long)]
        round2: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
        max_order: usize,
    },
    /// Print the concepts and six approximation sets of one disease.
    Approx {
        kb: PathBuf,
        #[arg(long)]
        disease: String,
    },
    /// Minimize the approximations into ranked rules.
    Rules {
        kb: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "certain")]
        kinds: Vec<RuleKind>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Append a fact with optional atomic evidence.
    InsertFact {
        kb: PathBuf,
        #[arg(long)]
        attribute: String,
        #[arg(long)]
        value: String,
        /// `DISEASE m=M level=J count=K`; repeat for more records.
        #[arg(long)]
        evidence: Vec<String>,
    },
    /// Remove a fact and every node containing it.
    DeleteFact {
        kb: PathBuf,
        /// Fact id such as `f2`.
        #[arg(long)]
        fact: String,
    },
    /// Add, change or remove one decision at a node.
    SetDecision {
        kb: PathBuf,
        /// Node label as a bit string, most significant fact first.
        #[arg(long)]
        label: String,
        #[arg(long)]
        disease: String,
        #[arg(long)]
        vd: Option<u8>,
        #[arg(long)]
        cf: Option<f64>,
        /// Truth triple `p,a,i` for a new decision; defaults to all mass on `vd`.
        #[arg(long)]
        tv: Option<String>,
        #[arg(long, conflicts_with_all = ["vd", "cf", "tv"])]
        remove: bool,
    },
    /// Verify structure, approximations and the rule-metric identities.
    Check { kb: PathBuf },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
}

impl From<KbError> for Failure {
    fn from(e: KbError) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn domain(e: impl Into<KbError>) -> Failure {
    Failure::from(e.into())
}

/// Runs the CLI with `args` (including the program name) and returns the exit
/// status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Domain(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn read_kb(path: &Path) -> Result<Lattice, Failure> {
    load_kb(&read(path)?).map_err(domain)
}

/// Writes `text` to a temporary sibling of `path` and renames it into place.
pub fn write_atomically(path: &Path, text: &str) -> std::io::Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "kb".to_string());
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn save(path: &Path, kb: &Lattice) -> Result<(), Failure> {
    write_atomically(path, &serialize_kb(kb)).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn set_line(kb: &Lattice, set: &std::collections::BTreeSet<Label>) -> String {
    let items: Vec<String> = set.iter().map(|l| kb.render_label(*l)).collect();
    format!("{{{}}}", items.join(", "))
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    let mut text = String::new();
    match command {
        Command::Build {
            evidence,
            output,
            alpha,
            round2,
            max_order,
        } => {
            let doc = parse_evidence(&read(&evidence)?).map_err(domain)?;
            let settings = BuildSettings {
                alpha,
                precision: if round2 { Precision::Round2 } else { Precision::Full },
                max_order,
            };
            let kb = build_from_document(&doc, settings)?;
            save(&output, &kb)?;
            text = format!(
                "built {}: {} facts, {} nodes, {} diseases\n",
                kb.module(),
                kb.order(),
                kb.node_count(),
                kb.diseases().len()
            );
        }
        Command::Approx { kb, disease } => {
            let kb = read_kb(&kb)?;
            let c = concepts(&kb, &disease).map_err(domain)?;
            let a = approximations(&kb, &disease).map_err(domain)?;
            text.push_str(&format!("disease {disease} ({})\n", kb.disease_name(&disease)));
            text.push_str(&format!("{:<10} {}\n", "concept1", set_line(&kb, &c.concept1)));
            text.push_str(&format!("{:<10} {}\n", "concept2", set_line(&kb, &c.concept2)));
            for (name, set) in a.named() {
                text.push_str(&format!("{name:<10} {}\n", set_line(&kb, set)));
            }
        }
        Command::Rules { kb, kinds, format } => {
            let kb = read_kb(&kb)?;
            let rules = generate_rules(&kb, &all_approximations(&kb), &kinds);
            text = match format {
                Format::Text => export_text(&kb, &rules),
                Format::Records => export_records(&kb, &rules),
            };
        }
        Command::InsertFact {
            kb: path,
            attribute,
            value,
            evidence,
        } => {
            let kb = read_kb(&path)?;
            let id = FactId(kb.order() as u32 + 1);
            let atomic = atomic_from_flags(&kb, id, &evidence)?;
            let m = insert_fact(&kb, Fact { id, attribute, value }, atomic).map_err(domain)?;
            text = maintain(&kb, &m)?;
            save(&path, &m.lattice)?;
        }
        Command::DeleteFact { kb: path, fact } => {
            let kb = read_kb(&path)?;
            let id = fact
                .strip_prefix('f')
                .and_then(|n| n.parse().ok())
                .map(FactId)
                .ok_or_else(|| Failure::Usage(format!("bad fact `{fact}`, expected fN")))?;
            let m = delete_fact(&kb, id).map_err(domain)?;
            text = maintain(&kb, &m)?;
            save(&path, &m.lattice)?;
        }
        Command::SetDecision {
            kb: path,
            label,
            disease,
            vd,
            cf,
            tv,
            remove,
        } => {
            let kb = read_kb(&path)?;
            let label = parse_label(&kb, &label)?;
            let change = decision_change(&kb, label, disease, vd, cf, tv, remove)?;
            let mut m = modify_node(&kb, label, change.0).map_err(domain)?;
            for extra in change.1 {
                let next = modify_node(&m.lattice, label, extra).map_err(domain)?;
                m.changes.extend(next.changes);
                m.lattice = next.lattice;
            }
            text = maintain(&kb, &m)?;
            save(&path, &m.lattice)?;
        }
        Command::Check { kb } => {
            let kb = read_kb(&kb)?;
            let mut failed = false;
            let problems = check_structure(&kb);
            if problems.is_empty() {
                text.push_str(&format!("ok   structure ({} nodes)\n", kb.node_count()));
            } else {
                failed = true;
                for p in problems {
                    text.push_str(&format!("FAIL structure: {p}\n"));
                }
            }
            let approx = all_approximations(&kb);
            let bad: Vec<&String> = approx.iter().filter(|(_, a)| !a.is_consistent()).map(|(d, _)| d).collect();
            if bad.is_empty() {
                text.push_str(&format!("ok   approximations ({} diseases)\n", approx.len()));
            } else {
                failed = true;
                text.push_str(&format!("FAIL approximations: {bad:?}\n"));
            }
            for check in check_properties(&kb, &approx).checks {
                if check.passed() {
                    text.push_str(&format!("ok   property {} ({} classes)\n", check.property, check.classes_checked));
                } else {
                    failed = true;
                    text.push_str(&format!("FAIL property {}: {}\n", check.property, check.failures.join("; ")));
                }
            }
            out.write_all(text.as_bytes()).map_err(|e| Failure::Domain(e.to_string()))?;
            return if failed {
                Err(Failure::Domain("check failed".into()))
            } else {
                Ok(())
            };
        }
    }
    out.write_all(text.as_bytes()).map_err(|e| Failure::Domain(e.to_string()))
}

fn parse_label(kb: &Lattice, text: &str) -> Result<Label, Failure> {
    match Label::parse(text) {
        Ok((l, width)) if width == kb.order() => Ok(l),
        Ok(_) => Err(Failure::Usage(format!("label `{text}` must have {} bits", kb.order()))),
        Err(e) => Err(Failure::Usage(e.to_string())),
    }
}

fn atomic_from_flags(kb: &Lattice, fact: FactId, records: &[String]) -> Result<Vec<DecisionEntry>, Failure> {
    let grading = kb.grading();
    let mut profiles: BTreeMap<String, EvidenceProfile> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for rec in records {
        let words: Vec<&str> = rec.split_whitespace().collect();
        let field = |w: &str, key: &str| -> Result<u64, Failure> {
            w.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Failure::Usage(format!("bad evidence `{rec}`: expected {key}=N")))
        };
        let [disease, m, level, count] = words.as_slice() else {
            return Err(Failure::Usage(format!(
                "bad evidence `{rec}`: expected `DISEASE m=M level=J count=K`"
            )));
        };
        let assertion = Assertion::from_index(field(m, "m")? as u8)
            .ok_or_else(|| Failure::Usage(format!("bad evidence `{rec}`: m outside 1..=3")))?;
        let level = field(level, "level")? as usize;
        let count = field(count, "count")?;
        if !profiles.contains_key(*disease) {
            order.push(disease.to_string());
        }
        profiles
            .entry(disease.to_string())
            .or_insert_with(|| EvidenceProfile::new(grading.levels()))
            .add(assertion, level, count)
            .map_err(domain)?;
    }
    let mut entries = Vec::new();
    for disease in order {
        match assess(&profiles[&disease], &grading, kb.inputs().precision) {
            Ok((tv, vd, cf)) => entries.push(DecisionEntry::atomic(fact, disease, vd, cf, tv)),
            Err(EvidenceError::ZeroEvidence) => {}
            Err(e) => return Err(domain(e)),
        }
    }
    Ok(entries)
}

type DecisionEdit = (NodeChange, Vec<NodeChange>);

fn decision_change(
    kb: &Lattice,
    label: Label,
    disease: String,
    vd: Option<u8>,
    cf: Option<f64>,
    tv: Option<String>,
    remove: bool,
) -> Result<DecisionEdit, Failure> {
    if remove {
        return Ok((NodeChange::RemoveDecision { disease }, Vec::new()));
    }
    let vd = vd
        .map(|c| TruthValue::from_code(c).ok_or_else(|| Failure::Usage(format!("vd {c} outside 0..=2"))))
        .transpose()?;
    let tv = tv.map(|t| parse_triple(&t)).transpose()?;
    let existing = kb.node(label).and_then(|n| n.decision(&disease)).cloned();
    match existing {
        Some(mut entry) if tv.is_some() => {
            entry.tv = tv.expect("checked");
            entry.vd = vd.unwrap_or(entry.vd);
            entry.cf = cf.unwrap_or(entry.cf);
            Ok((NodeChange::PutDecision(entry), Vec::new()))
        }
        Some(_) => {
            let mut edits = Vec::new();
            if let Some(vd) = vd {
                edits.push(NodeChange::SetTruth {
                    disease: disease.clone(),
                    vd,
                });
            }
            if let Some(cf) = cf {
                edits.push(NodeChange::SetCredibility { disease, cf });
            }
            if edits.is_empty() {
                return Err(Failure::Usage("nothing to change: give --vd, --cf, --tv or --remove".into()));
            }
            let first = edits.remove(0);
            Ok((first, edits))
        }
        None => {
            let (Some(vd), Some(cf)) = (vd, cf) else {
                return Err(Failure::Usage("a new decision needs both --vd and --cf".into()));
            };
            let tv = tv.unwrap_or_else(|| match vd {
                TruthValue::Present => TruthTriple::new(1.0, 0.0, 0.0),
                TruthValue::Absent => TruthTriple::new(0.0, 1.0, 0.0),
                TruthValue::Inconclusive => TruthTriple::new(0.0, 0.0, 1.0),
            });
            let entry = DecisionEntry {
                disease,
                vd,
                cf,
                tv,
                weights: BTreeMap::new(),
            };
            Ok((NodeChange::PutDecision(entry), Vec::new()))
        }
    }
}

fn parse_triple(text: &str) -> Result<TruthTriple, Failure> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("bad truth triple `{text}`")))?;
    match parts.as_slice() {
        [a, b, c] => Ok(TruthTriple::new(*a, *b, *c)),
        _ => Err(Failure::Usage(format!("truth triple `{text}` needs three values"))),
    }
}

fn change_line(kb: &Lattice, c: &DecisionChange) -> String {
    let label = kb.render_label(c.label);
    match c.kind {
        ChangeKind::Added(vd) => format!("added    {} {label} vd={vd}", c.disease),
        ChangeKind::Removed(vd) => format!("removed  {} {label} vd={vd}", c.disease),
        ChangeKind::TruthChanged { old, new } => format!("changed  {} {label} vd={old}->{new}", c.disease),
        ChangeKind::Updated(vd) => format!("updated  {} {label} vd={vd}", c.disease),
    }
}

/// Carries the approximations across an edit using the change log and checks
/// the result against a recomputation. Returns the change report.
fn maintain(before: &Lattice, m: &Modification) -> Result<String, Failure> {
    let old = all_approximations(before);
    let mut updated = apply_changes(&old, &m.changes).map_err(domain)?;
    if let Some(fact) = m.deleted_fact {
        updated = updated
            .into_iter()
            .map(|(d, a)| (d, a.relabel(|l| l.remove_fact(fact))))
            .collect();
    }
    let fresh = all_approximations(&m.lattice);
    let nonempty = |map: BTreeMap<String, ApproximationSets>| -> BTreeMap<String, ApproximationSets> {
        map.into_iter().filter(|(_, a)| *a != ApproximationSets::default()).collect()
    };
    if nonempty(updated) != nonempty(fresh) {
        return Err(Failure::Domain("incremental approximations diverged from recomputation".into()));
    }
    let shown = if m.deleted_fact.is_some() { before } else { &m.lattice };
    let mut text = String::new();
    for c in &m.changes {
        text.push_str(&change_line(shown, c));
        text.push('\n');
    }
    text.push_str(&format!("{} decision changes\n", m.changes.len()));
    Ok(text)
}
