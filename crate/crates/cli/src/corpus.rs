//! The fixture corpus on disk.
//!
//! `corpus.json` indexes script files, formula files and certificate files
//! relative to its own directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use wpscript_core::fixtures::{self, DEFAULT_LOCK_TIME, DEFAULT_PBKH};
use wpscript_core::hoare::DEFAULT_MAX_HEIGHT;
use wpscript_core::{
    check_iff_triple, check_pred_equiv, derive_wp, parse_formula, parse_script, render_formula,
    render_script, verify_certificate, Direction, DomainSeeds, Nat, Predicate, Script, ToyOracle,
    Verdict, WpFormula,
};

use crate::args::DomainArgs;
use crate::certfile::CertificateFile;
use crate::commands::Report;
use crate::error::{CliError, Status};
use crate::input;

/// Stack height used for fixtures whose domains grow fastest.
pub const MULTISIG_MAX_HEIGHT: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Holds,
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryFile {
    pub name: String,
    pub script: String,
    pub wp: String,
    pub max_height: usize,
    pub expect: Expect,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionFile {
    pub name: String,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateEntry {
    pub name: String,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Index {
    pub entries: Vec<EntryFile>,
    #[serde(default)]
    pub conditions: Vec<ConditionFile>,
    #[serde(default)]
    pub certificates: Vec<CertificateEntry>,
}

fn corpus_err(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Corpus {
        path: path.into(),
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.into(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn height_for(name: &str) -> usize {
    if name.starts_with("p2ms") || name.starts_with("combined") {
        MULTISIG_MAX_HEIGHT
    } else {
        DEFAULT_MAX_HEIGHT
    }
}

fn commented(notes: &str, body: &str) -> String {
    if notes.is_empty() {
        format!("{body}\n")
    } else {
        format!("# {notes}\n{body}\n")
    }
}

/// Writes the built-in fixtures as a corpus directory.
pub fn export(dir: &Path) -> Result<Index, CliError> {
    let mut index = Index {
        entries: Vec::new(),
        conditions: Vec::new(),
        certificates: Vec::new(),
    };
    let formula_file = |name: &str, notes: &str, f: &WpFormula| -> Result<String, CliError> {
        let rel = format!("formulas/{name}.wp");
        write(&dir.join(&rel), &commented(notes, &render_formula(f)))?;
        Ok(rel)
    };
    for e in fixtures::fixture_corpus() {
        let script_rel = format!("scripts/{}.script", e.name);
        write(
            &dir.join(&script_rel),
            &commented(&e.notes, &render_script(&e.script)),
        )?;
        let wp_rel = formula_file(&e.name, &e.notes, &e.wp)?;
        index.entries.push(EntryFile {
            name: e.name.clone(),
            script: script_rel,
            wp: wp_rel,
            max_height: height_for(&e.name),
            expect: Expect::Holds,
            notes: e.notes.clone(),
        });
    }
    index.entries.push(EntryFile {
        name: "p2pkh-faulty-against-p2pkh-wp".into(),
        script: "scripts/p2pkh-faulty.script".into(),
        wp: "formulas/p2pkh.wp".into(),
        max_height: DEFAULT_MAX_HEIGHT,
        expect: Expect::Backward,
        notes: "the faulty script accepts states the P2PKH condition rejects".into(),
    });

    let h = Nat::from(DEFAULT_PBKH);
    let conditions: [(&str, WpFormula); 5] = [
        ("accept1", fixtures::accept1()),
        ("accept2", fixtures::accept2()),
        ("accept3", fixtures::accept3()),
        ("accept4", fixtures::accept4(h.clone())),
        ("accept5", fixtures::accept5(h.clone())),
    ];
    for (name, f) in &conditions {
        let rel = formula_file(
            name,
            "intermediate condition of the P2PKH step-by-step chain",
            f,
        )?;
        index.conditions.push(ConditionFile {
            name: (*name).into(),
            formula: rel,
        });
    }

    let certs = [
        (
            "p2pkh-steps",
            fixtures::step_by_step_p2pkh_certificate(h),
            DEFAULT_MAX_HEIGHT,
        ),
        (
            "combined",
            fixtures::combined_certificate(Nat::from(DEFAULT_LOCK_TIME), fixtures::default_keys()),
            MULTISIG_MAX_HEIGHT,
        ),
    ];
    for (name, cert, height) in certs {
        let rel = format!("certificates/{name}.json");
        let file = CertificateFile::from_certificate(&cert, Some(height));
        let text = serde_json::to_string_pretty(&file).expect("certificate serializes");
        write(&dir.join(&rel), &format!("{text}\n"))?;
        index.certificates.push(CertificateEntry {
            name: name.into(),
            file: rel,
        });
    }
    let text = serde_json::to_string_pretty(&index).expect("index serializes");
    write(&dir.join("corpus.json"), &format!("{text}\n"))?;
    Ok(index)
}

pub fn load_index(dir: &Path) -> Result<Index, CliError> {
    let path = dir.join("corpus.json");
    serde_json::from_str(&read(&path)?).map_err(|e| corpus_err(&path, e.to_string()))
}

fn load_script(dir: &Path, rel: &str) -> Result<Script, CliError> {
    let path = dir.join(rel);
    parse_script(&read(&path)?).map_err(|source| CliError::Script {
        origin: path.display().to_string(),
        source,
    })
}

fn load_formula(dir: &Path, rel: &str) -> Result<WpFormula, CliError> {
    let path = dir.join(rel);
    parse_formula(&read(&path)?).map_err(|source| CliError::Formula {
        origin: path.display().to_string(),
        source,
    })
}

/// Parsing the rendering gives back the same script and rendering twice
/// changes nothing.
pub fn script_round_trips(s: &Script) -> bool {
    let once = render_script(s);
    parse_script(&once).is_ok_and(|back| back == *s && render_script(&back) == once)
}

pub fn formula_round_trips(f: &WpFormula) -> bool {
    parse_formula(&render_formula(f)).is_ok_and(|back| back == *f)
}

fn expected(v: &Verdict, e: &Expect) -> bool {
    match (v, e) {
        (Verdict::Holds { .. }, Expect::Holds) => true,
        (Verdict::Counterexample(c), Expect::Forward) => c.direction == Direction::Forward,
        (Verdict::Counterexample(c), Expect::Backward) => c.direction == Direction::Backward,
        _ => false,
    }
}

struct Line {
    name: String,
    ok: bool,
    detail: String,
}

fn check_entry(
    oracle: &ToyOracle,
    domain: &DomainArgs,
    dir: &Path,
    e: &EntryFile,
) -> Result<Line, CliError> {
    let script = load_script(dir, &e.script)?;
    let wp = load_formula(dir, &e.wp)?;
    let mut problems = Vec::new();
    if !script_round_trips(&script) {
        problems.push("script round trip".to_string());
    }
    if !formula_round_trips(&wp) {
        problems.push("formula round trip".to_string());
    }
    let seeds = DomainSeeds::new().script(&script).formula(&wp);
    let d = input::domain(oracle, domain, &seeds, e.max_height);
    let v = check_iff_triple(
        oracle,
        &Predicate::from(&wp),
        &script,
        &Predicate::Accept,
        &d,
    );
    if !expected(&v, &e.expect) {
        problems.push(format!("iff triple: {v}"));
    }
    let mut detail = format!("iff {v}");
    if e.expect == Expect::Holds {
        match derive_wp(&script) {
            Ok(derived) => {
                let same = check_pred_equiv(
                    oracle,
                    &Predicate::from(&derived),
                    &Predicate::from(&wp),
                    &d,
                );
                if !same.holds() {
                    problems.push(format!("derived precondition differs: {same}"));
                }
                detail.push_str("; derived equal");
            }
            Err(err) => problems.push(format!("derivation: {err}")),
        }
    }
    if !problems.is_empty() {
        detail = problems.join("; ");
    }
    Ok(Line {
        name: e.name.clone(),
        ok: problems.is_empty(),
        detail,
    })
}

fn check_certificate(
    oracle: &ToyOracle,
    domain: &DomainArgs,
    dir: &Path,
    c: &CertificateEntry,
) -> Result<Line, CliError> {
    let path = dir.join(&c.file);
    let file = CertificateFile::read(&path)?;
    let cert = file.to_certificate(&path)?;
    let d = input::domain(
        oracle,
        domain,
        &cert.seeds(),
        file.max_height.unwrap_or(DEFAULT_MAX_HEIGHT),
    );
    let report =
        verify_certificate(oracle, &cert, &d).map_err(|e| corpus_err(&path, e.to_string()))?;
    let detail = match report.first_failure() {
        None => format!(
            "{} steps, end-to-end {}",
            report.steps.len(),
            report.end_to_end.as_ref().unwrap()
        ),
        Some(stage) => format!("fails at {stage}"),
    };
    Ok(Line {
        name: format!("certificate {}", c.name),
        ok: report.holds(),
        detail,
    })
}

pub fn check(oracle: &ToyOracle, domain: &DomainArgs, dir: &Path) -> Result<Report, CliError> {
    let index = load_index(dir)?;
    let mut lines = Vec::new();
    for e in &index.entries {
        lines.push(check_entry(oracle, domain, dir, e)?);
    }
    for c in &index.conditions {
        let f = load_formula(dir, &c.formula)?;
        let ok = formula_round_trips(&f);
        lines.push(Line {
            name: format!("condition {}", c.name),
            ok,
            detail: if ok {
                "parses and round-trips".into()
            } else {
                "formula round trip".into()
            },
        });
    }
    for c in &index.certificates {
        lines.push(check_certificate(oracle, domain, dir, c)?);
    }
    let failures = lines.iter().filter(|l| !l.ok).count();
    let mut text = String::new();
    for l in &lines {
        let _ = writeln!(
            text,
            "{} {}: {}",
            if l.ok { "ok  " } else { "FAIL" },
            l.name,
            l.detail
        );
    }
    let _ = write!(text, "{} checks, {} failures", lines.len(), failures);
    let results: Vec<Value> = lines
        .iter()
        .map(|l| json!({ "name": l.name, "ok": l.ok, "detail": l.detail }))
        .collect();
    Ok(Report {
        status: if failures == 0 {
            Status::Ok
        } else {
            Status::Failed
        },
        text,
        json: json!({ "command": "corpus", "results": results, "failures": failures }),
    })
}

pub fn write_corpus(dir: &Path) -> Result<Report, CliError> {
    let index = export(dir)?;
    let files = index.entries.len() + index.conditions.len() + index.certificates.len();
    Ok(Report {
        status: Status::Ok,
        text: format!("wrote {files} corpus items to {}", dir.display()),
        json: json!({ "command": "corpus", "written": PathBuf::from(dir), "items": files }),
    })
}
