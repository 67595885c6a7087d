//! Chains of iff-triples over script segments.
//!
//! Every step carries its own evidence; neighbouring steps must agree on the
//! intermediate condition, either syntactically or by a checked equivalence.
//! When every step and link holds, the whole chain is cross-checked against
//! the concatenated script.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::formula::WpFormula;
use crate::hoare::{check_iff_triple, check_pred_equiv, Domain, DomainSeeds, Verdict};
use crate::oracle::CryptoOracle;
use crate::predicate::Predicate;
use crate::symexec::derive_wp_for;
use crate::vm::Script;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Evidence {
    /// Enumerate the domain and check the iff-triple directly.
    Enumerated,
    /// Derive the precondition symbolically and compare.
    Symbolic,
    /// The segment is empty and `pre` is a restatement of `post`.
    Rewrite,
}

impl Evidence {
    pub fn name(self) -> &'static str {
        match self {
            Evidence::Enumerated => "enumerated",
            Evidence::Symbolic => "symbolic",
            Evidence::Rewrite => "rewrite",
        }
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Evidence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "enumerated" => Ok(Evidence::Enumerated),
            "symbolic" => Ok(Evidence::Symbolic),
            "rewrite" => Ok(Evidence::Rewrite),
            other => Err(alloc::format!("unknown evidence kind {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertStep {
    pub pre: WpFormula,
    pub segment: Script,
    pub post: WpFormula,
    pub evidence: Evidence,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub steps: Vec<CertStep>,
    pub final_post: WpFormula,
}

impl Certificate {
    pub fn script(&self) -> Script {
        self.steps
            .iter()
            .fold(Script::empty(), |acc, s| acc.concat(&s.segment))
    }

    /// Seeds covering every constant in the chain.
    pub fn seeds(&self) -> DomainSeeds {
        let mut seeds = DomainSeeds::new()
            .script(&self.script())
            .formula(&self.final_post);
        for s in &self.steps {
            seeds = seeds.formula(&s.pre).formula(&s.post);
        }
        seeds
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Checked(Verdict),
    /// The evidence could not be produced for this step.
    Unsupported(String),
}

impl StepOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, StepOutcome::Checked(v) if v.holds())
    }
}

impl fmt::Display for StepOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepOutcome::Checked(v) => write!(f, "{v}"),
            StepOutcome::Unsupported(why) => write!(f, "Unsupported: {why}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinkOutcome {
    Identical,
    Equivalent(Verdict),
}

impl LinkOutcome {
    pub fn holds(&self) -> bool {
        match self {
            LinkOutcome::Identical => true,
            LinkOutcome::Equivalent(v) => v.holds(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepReport {
    pub index: usize,
    pub evidence: Evidence,
    pub outcome: StepOutcome,
}

/// Connection from step `index`'s post to the next step's pre (or to the
/// final postcondition after the last step).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkReport {
    pub index: usize,
    pub outcome: LinkOutcome,
}

/// Where a certificate first failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Step(usize),
    Link(usize),
    EndToEnd,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Step(i) => write!(f, "step {i}"),
            Stage::Link(i) => write!(f, "link after step {i}"),
            Stage::EndToEnd => f.write_str("end-to-end check"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateReport {
    pub steps: Vec<StepReport>,
    pub links: Vec<LinkReport>,
    /// Only run when every step and link holds.
    pub end_to_end: Option<Verdict>,
}

impl CertificateReport {
    pub fn holds(&self) -> bool {
        self.end_to_end.as_ref().is_some_and(Verdict::holds)
    }

    pub fn failing_steps(&self) -> Vec<usize> {
        self.steps
            .iter()
            .filter(|s| !s.outcome.holds())
            .map(|s| s.index)
            .collect()
    }

    pub fn failing_links(&self) -> Vec<usize> {
        self.links
            .iter()
            .filter(|l| !l.outcome.holds())
            .map(|l| l.index)
            .collect()
    }

    /// The first failing stage in chain order, steps before their outgoing
    /// link.
    pub fn first_failure(&self) -> Option<Stage> {
        for (s, l) in self.steps.iter().zip(&self.links) {
            if !s.outcome.holds() {
                return Some(Stage::Step(s.index));
            }
            if !l.outcome.holds() {
                return Some(Stage::Link(l.index));
            }
        }
        match &self.end_to_end {
            Some(v) if v.holds() => None,
            _ => Some(Stage::EndToEnd),
        }
    }

    /// The overall verdict: the end-to-end result, or the first failing
    /// counterexample. `None` when a failure has no counterexample.
    pub fn verdict(&self) -> Option<Verdict> {
        match self.first_failure() {
            None => self.end_to_end.clone(),
            Some(Stage::Step(i)) => match &self.steps[i].outcome {
                StepOutcome::Checked(v) => Some(v.clone()),
                StepOutcome::Unsupported(_) => None,
            },
            Some(Stage::Link(i)) => match &self.links[i].outcome {
                LinkOutcome::Equivalent(v) => Some(v.clone()),
                LinkOutcome::Identical => None,
            },
            Some(Stage::EndToEnd) => self.end_to_end.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("certificate has no steps")]
    Empty,
}

fn check_step<O: CryptoOracle + ?Sized>(oracle: &O, step: &CertStep, d: &Domain) -> StepOutcome {
    let pre = Predicate::from(&step.pre);
    let post = Predicate::from(&step.post);
    match step.evidence {
        Evidence::Enumerated => {
            StepOutcome::Checked(check_iff_triple(oracle, &pre, &step.segment, &post, d))
        }
        Evidence::Symbolic => match derive_wp_for(&step.segment, &step.post) {
            Ok(derived) => StepOutcome::Checked(check_pred_equiv(oracle, &pre, &derived.into(), d)),
            Err(e) => StepOutcome::Unsupported(e.to_string()),
        },
        Evidence::Rewrite => {
            if step.segment.is_empty() {
                StepOutcome::Checked(check_pred_equiv(oracle, &pre, &post, d))
            } else {
                StepOutcome::Unsupported("a rewrite step must have an empty segment".into())
            }
        }
    }
}

fn check_link<O: CryptoOracle + ?Sized>(
    oracle: &O,
    from: &WpFormula,
    to: &WpFormula,
    d: &Domain,
) -> LinkOutcome {
    if from.same_structure(to) {
        LinkOutcome::Identical
    } else {
        LinkOutcome::Equivalent(check_pred_equiv(oracle, &from.into(), &to.into(), d))
    }
}

/// Checks every step and link, then the composed triple
/// `⟨steps[0].pre⟩ iff segments ⟨final_post⟩`.
pub fn verify_certificate<O: CryptoOracle + ?Sized>(
    oracle: &O,
    cert: &Certificate,
    d: &Domain,
) -> Result<CertificateReport, CertificateError> {
    if cert.steps.is_empty() {
        return Err(CertificateError::Empty);
    }
    let mut steps = Vec::with_capacity(cert.steps.len());
    let mut links = Vec::with_capacity(cert.steps.len());
    for (i, step) in cert.steps.iter().enumerate() {
        steps.push(StepReport {
            index: i,
            evidence: step.evidence,
            outcome: check_step(oracle, step, d),
        });
        let next_pre = cert.steps.get(i + 1).map_or(&cert.final_post, |s| &s.pre);
        links.push(LinkReport {
            index: i,
            outcome: check_link(oracle, &step.post, next_pre, d),
        });
    }
    let all_hold =
        steps.iter().all(|s| s.outcome.holds()) && links.iter().all(|l| l.outcome.holds());
    let end_to_end = all_hold.then(|| {
        check_iff_triple(
            oracle,
            &Predicate::from(&cert.steps[0].pre),
            &cert.script(),
            &Predicate::from(&cert.final_post),
            d,
        )
    });
    Ok(CertificateReport {
        steps,
        links,
        end_to_end,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::formula::Prop;
    use crate::nat::Nat;
    use crate::oracle::ToyOracle;
    use alloc::vec;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    fn domain(cert: &Certificate, height: usize) -> Domain {
        Domain::adequate(&ToyOracle::default(), height, &cert.seeds())
    }

    #[test]
    fn p2pkh_chain_holds() {
        let o = ToyOracle::default();
        let cert = step_by_step_p2pkh_certificate(n(7));
        let r = verify_certificate(&o, &cert, &domain(&cert, 5)).unwrap();
        assert!(r.holds(), "{r:?}");
        assert_eq!(r.first_failure(), None);
        assert!(r.links.iter().all(|l| l.outcome == LinkOutcome::Identical));
    }

    #[test]
    fn combined_chain_holds() {
        let o = ToyOracle::default();
        let cert = combined_certificate(n(5), default_keys());
        let r = verify_certificate(&o, &cert, &domain(&cert, 4)).unwrap();
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn single_step_is_plain_iff() {
        let o = ToyOracle::default();
        let cert = Certificate {
            steps: vec![CertStep {
                pre: wp_p2pkh(n(7)),
                segment: script_p2pkh(n(7)),
                post: accept_formula(),
                evidence: Evidence::Enumerated,
            }],
            final_post: accept_formula(),
        };
        let d = domain(&cert, 4);
        let r = verify_certificate(&o, &cert, &d).unwrap();
        let direct = check_iff_triple(
            &o,
            &wp_p2pkh(n(7)).into(),
            &script_p2pkh(n(7)),
            &Predicate::Accept,
            &d,
        );
        assert_eq!(r.end_to_end, Some(direct));
    }

    #[test]
    fn broken_link_is_reported() {
        let o = ToyOracle::default();
        let mut cert = step_by_step_p2pkh_certificate(n(7));
        // step 2 now starts from a different condition than step 1 ends in
        cert.steps[2].pre = accept5(n(7));
        let r = verify_certificate(&o, &cert, &domain(&cert, 5)).unwrap();
        assert!(!r.holds());
        assert_eq!(r.failing_links(), vec![1]);
        assert_eq!(r.end_to_end, None);
    }

    #[test]
    fn rewrite_steps() {
        let o = ToyOracle::default();
        let mut renamed = accept_formula();
        renamed.clauses[0].names = vec!["top".into()];
        let cert = Certificate {
            steps: vec![CertStep {
                pre: renamed.clone(),
                segment: Script::empty(),
                post: accept_formula(),
                evidence: Evidence::Rewrite,
            }],
            final_post: accept_formula(),
        };
        let r = verify_certificate(&o, &cert, &domain(&cert, 3)).unwrap();
        assert!(r.holds());
        let mut bad = cert.clone();
        bad.steps[0].pre.clauses[0].body = Prop::True;
        let r = verify_certificate(&o, &bad, &domain(&bad, 3)).unwrap();
        assert_eq!(r.first_failure(), Some(Stage::Step(0)));
    }

    #[test]
    fn empty_certificate_is_rejected() {
        let cert = Certificate {
            steps: vec![],
            final_post: accept_formula(),
        };
        let d = Domain::bounded(1, 1, &[0], &[0]);
        assert_eq!(
            verify_certificate(&ToyOracle::default(), &cert, &d),
            Err(CertificateError::Empty)
        );
    }
}
