//! JSON views of library values.

use serde_json::{json, Value};
use wpscript_core::certificate::{LinkOutcome, StepOutcome};
use wpscript_core::hoare::EquivVerdict;
use wpscript_core::{
    Atom, CertificateReport, Domain, ExecOutcome, Prop, Stack, StackState, Term, Verdict, WpFormula,
};

pub fn stack(s: &Stack) -> Value {
    Value::Array(s.iter().map(|n| Value::String(n.to_string())).collect())
}

pub fn state(s: &StackState) -> Value {
    json!({
        "time": s.time.0.to_string(),
        "msg": s.msg.0.to_string(),
        "stack": stack(&s.stack),
    })
}

pub fn outcome(o: &ExecOutcome) -> Value {
    match o {
        ExecOutcome::Failed => json!({ "outcome": "failed" }),
        ExecOutcome::Succeeded(s) => json!({ "outcome": "succeeded", "stack": stack(&s.stack) }),
    }
}

pub fn domain(d: &Domain) -> Value {
    json!({
        "max_height": d.max_height(),
        "values": d.values().iter().map(ToString::to_string).collect::<Vec<_>>(),
        "msgs": d.msgs().iter().map(|m| m.0.to_string()).collect::<Vec<_>>(),
        "times": d.times().iter().map(|t| t.0.to_string()).collect::<Vec<_>>(),
        "states": d.len(),
    })
}

pub fn verdict(v: &Verdict) -> Value {
    match v {
        Verdict::Holds { states } => json!({ "verdict": "holds", "states": states }),
        Verdict::Counterexample(c) => json!({
            "verdict": "counterexample",
            "direction": c.direction.to_string(),
            "index": c.index,
            "state": state(&c.state),
        }),
    }
}

pub fn equiv(v: &EquivVerdict) -> Value {
    match v {
        EquivVerdict::Holds { states } => json!({ "verdict": "holds", "states": states }),
        EquivVerdict::Differs {
            state: s,
            index,
            left,
            right,
        } => json!({
            "verdict": "differs",
            "index": index,
            "state": state(s),
            "left": outcome(left),
            "right": outcome(right),
        }),
    }
}

fn term(t: &Term, names: &[String]) -> Value {
    match t {
        Term::Var(i) => {
            json!({ "var": names.get(*i).cloned().unwrap_or_else(|| format!("#{i}")), "slot": i })
        }
        Term::Lit(n) => json!({ "lit": n.to_string() }),
        Term::Hash(a) => json!({ "hash": term(a, names) }),
        Term::Now => json!("now"),
        Term::LockTime(n) => json!({ "locktime": n.to_string() }),
    }
}

fn atom(a: &Atom, names: &[String]) -> Value {
    match a {
        Atom::Eq(x, y) => json!({ "eq": [term(x, names), term(y, names)] }),
        Atom::Signed { sig, pbk } => {
            json!({ "signed": { "sig": term(sig, names), "pbk": term(pbk, names) } })
        }
        Atom::Positive(x) => json!({ "positive": term(x, names) }),
        Atom::TimeLe(x) => json!({ "locktime_le_now": term(x, names) }),
    }
}

fn prop(p: &Prop, names: &[String]) -> Value {
    match p {
        Prop::True => json!(true),
        Prop::False => json!(false),
        Prop::Atom(a) => atom(a, names),
        Prop::Not(q) => json!({ "not": prop(q, names) }),
        Prop::And(qs) => json!({ "and": qs.iter().map(|q| prop(q, names)).collect::<Vec<_>>() }),
        Prop::Or(qs) => json!({ "or": qs.iter().map(|q| prop(q, names)).collect::<Vec<_>>() }),
    }
}

pub fn formula(f: &WpFormula) -> Value {
    Value::Array(
        f.clauses
            .iter()
            .map(|c| json!({ "stack": c.names, "body": prop(&c.body, &c.names) }))
            .collect(),
    )
}

pub fn certificate(r: &CertificateReport) -> Value {
    let steps: Vec<Value> = r
        .steps
        .iter()
        .map(|s| {
            let result = match &s.outcome {
                StepOutcome::Checked(v) => verdict(v),
                StepOutcome::Unsupported(why) => json!({ "verdict": "unsupported", "reason": why }),
            };
            json!({ "index": s.index, "evidence": s.evidence.name(), "result": result })
        })
        .collect();
    let links: Vec<Value> = r
        .links
        .iter()
        .map(|l| match &l.outcome {
            LinkOutcome::Identical => json!({ "index": l.index, "verdict": "identical" }),
            LinkOutcome::Equivalent(v) => json!({ "index": l.index, "result": verdict(v) }),
        })
        .collect();
    json!({
        "holds": r.holds(),
        "first_failure": r.first_failure().map(|s| s.to_string()),
        "steps": steps,
        "links": links,
        "end_to_end": r.end_to_end.as_ref().map(verdict),
    })
}
