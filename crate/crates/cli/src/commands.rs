use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use wpscript_core::certificate::{LinkOutcome, StepOutcome};
use wpscript_core::hoare::EquivVerdict;
use wpscript_core::symexec::{derive_with_stages, render_tree};
use wpscript_core::{
    check_iff_triple, check_script_equiv, eval_script, fixtures, lift_predicate, render_formula,
    verify_certificate, Domain, DomainSeeds, Nat, Predicate, StackState, ToyOracle, Verdict,
    WpFormula,
};

use crate::args::DomainArgs;
use crate::certfile::CertificateFile;
use crate::error::{CliError, Status};
use crate::input;
use crate::json;

/// What a command prints, in both formats, and how it exits.
pub struct Report {
    pub status: Status,
    pub text: String,
    pub json: Value,
}

pub fn run(
    oracle: &ToyOracle,
    script: &str,
    stack: &str,
    msg: Nat,
    time: Nat,
) -> Result<Report, CliError> {
    let script = input::script(script)?;
    let state = StackState::new(time, msg, input::stack(stack)?);
    let out = eval_script(oracle, &script, state);
    let mut body = json::outcome(&out);
    body["command"] = json!("run");
    Ok(Report {
        status: if out.is_success() {
            Status::Ok
        } else {
            Status::Failed
        },
        text: out.to_string(),
        json: body,
    })
}

pub fn wp(script: &str, post: Option<&str>, tree: bool) -> Result<Report, CliError> {
    let script = input::script(script)?;
    let post = match post {
        Some(p) => input::formula(p)?,
        None => fixtures::accept_formula(),
    };
    let d = derive_with_stages(&script, &post)?;
    let mut text = render_formula(&d.simplified);
    let mut body = json!({
        "command": "wp",
        "text": text,
        "formula": json::formula(&d.simplified),
        "paths": d.paths.len(),
    });
    if tree {
        let rendered = render_tree(&d.run.tree);
        text.push_str("\n\n");
        text.push_str(rendered.trim_end());
        body["tree"] = json!(rendered);
    }
    Ok(Report {
        status: Status::Ok,
        text,
        json: body,
    })
}

fn verdict_status(v: &Verdict) -> Status {
    if v.holds() {
        Status::Ok
    } else {
        Status::Failed
    }
}

pub fn check_wp(
    oracle: &ToyOracle,
    domain: &DomainArgs,
    script: &str,
    formula: &str,
    post: Option<&str>,
) -> Result<Report, CliError> {
    let script = input::script(script)?;
    let pre = input::formula(formula)?;
    let post_formula: Option<WpFormula> = post.map(input::formula).transpose()?;
    let mut seeds = DomainSeeds::new().script(&script).formula(&pre);
    if let Some(p) = &post_formula {
        seeds = seeds.formula(p);
    }
    let d = input::domain(oracle, domain, &seeds, input::DEFAULT_MAX_HEIGHT);
    let post = post_formula.map_or(Predicate::Accept, Predicate::from);
    let v = check_iff_triple(oracle, &Predicate::from(&pre), &script, &post, &d);
    let mut text = format!("{v}\ndomain: {d}");
    if let Some(c) = v.counterexample() {
        let out = eval_script(oracle, &script, c.state.clone());
        let _ = write!(
            text,
            "\n  precondition: {}\n  run: {out}\n  postcondition: {}",
            pre.eval(oracle, &c.state),
            lift_predicate(oracle, &post, &out)
        );
    }
    Ok(Report {
        status: verdict_status(&v),
        text,
        json: json!({ "command": "check-wp", "result": json::verdict(&v), "domain": json::domain(&d) }),
    })
}

pub fn equiv(
    oracle: &ToyOracle,
    domain: &DomainArgs,
    left: &str,
    right: &str,
) -> Result<Report, CliError> {
    let l = input::script(left)?;
    let r = input::script(right)?;
    let seeds = DomainSeeds::new().script(&l).script(&r);
    let d = input::domain(oracle, domain, &seeds, input::DEFAULT_MAX_HEIGHT);
    let v = check_script_equiv(oracle, &l, &r, &d);
    let (status, text) = match &v {
        EquivVerdict::Holds { states } => (Status::Ok, format!("Holds ({states} states)")),
        EquivVerdict::Differs {
            state,
            index,
            left,
            right,
        } => (
            Status::Failed,
            format!("Differs #{index}: {state}\n  left: {left}\n  right: {right}"),
        ),
    };
    Ok(Report {
        status,
        text: format!("{text}\ndomain: {d}"),
        json: json!({ "command": "equiv", "result": json::equiv(&v), "domain": json::domain(&d) }),
    })
}

pub fn certify(oracle: &ToyOracle, domain: &DomainArgs, path: &Path) -> Result<Report, CliError> {
    let file = CertificateFile::read(path)?;
    let cert = file.to_certificate(path)?;
    let height = file.max_height.unwrap_or(input::DEFAULT_MAX_HEIGHT);
    let d = input::domain(oracle, domain, &cert.seeds(), height);
    certify_with(oracle, &cert, &d)
}

pub fn certify_with(
    oracle: &ToyOracle,
    cert: &wpscript_core::Certificate,
    d: &Domain,
) -> Result<Report, CliError> {
    let report = verify_certificate(oracle, cert, d).map_err(|e| CliError::Certificate {
        path: "<certificate>".into(),
        message: e.to_string(),
    })?;
    let mut text = String::new();
    for (s, l) in report.steps.iter().zip(&report.links) {
        let step = &cert.steps[s.index];
        let outcome = match &s.outcome {
            StepOutcome::Checked(v) => v.to_string(),
            StepOutcome::Unsupported(why) => format!("Unsupported: {why}"),
        };
        let _ = writeln!(
            text,
            "step {} [{}] {:?}: {outcome}",
            s.index,
            s.evidence,
            wpscript_core::render_script(&step.segment)
        );
        let link = match &l.outcome {
            LinkOutcome::Identical => "identical".to_string(),
            LinkOutcome::Equivalent(v) => v.to_string(),
        };
        let _ = writeln!(text, "link {}: {link}", l.index);
    }
    match &report.end_to_end {
        Some(v) => {
            let _ = writeln!(text, "end-to-end: {v}");
        }
        None => text.push_str("end-to-end: skipped\n"),
    }
    let _ = writeln!(text, "domain: {d}");
    let status = match report.first_failure() {
        None => {
            text.push_str("certificate holds");
            Status::Ok
        }
        Some(stage) => {
            let _ = write!(text, "certificate fails at {stage}");
            Status::Failed
        }
    };
    let mut body = json::certificate(&report);
    body["command"] = json!("certify");
    body["domain"] = json::domain(d);
    Ok(Report {
        status,
        text,
        json: body,
    })
}
