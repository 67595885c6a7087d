//! Executable state predicates.

use alloc::boxed::Box;
use alloc::sync::Arc;
use core::fmt;

use crate::formula::WpFormula;
use crate::oracle::CryptoOracle;
use crate::vm::{eval_script, ExecOutcome, Script, StackState};

/// Stack non-empty with a positive top.
pub fn accept_state(state: &StackState) -> bool {
    state.stack.top().is_some_and(|n| n.is_positive())
}

/// A predicate over machine states. Evaluation needs an oracle because
/// formulas mention hashes and signatures.
#[derive(Clone)]
pub enum Predicate {
    Const(bool),
    Accept,
    Formula(WpFormula),
    /// `s ↦ post⁺(eval(script, s))`.
    SemanticWp {
        script: Script,
        post: Box<Predicate>,
    },
    And(Box<Predicate>, Box<Predicate>),
    Custom(Arc<dyn Fn(&StackState) -> bool + Send + Sync>),
}

impl Predicate {
    pub fn custom(f: impl Fn(&StackState) -> bool + Send + Sync + 'static) -> Self {
        Predicate::Custom(Arc::new(f))
    }

    pub fn holds<O: CryptoOracle + ?Sized>(&self, oracle: &O, state: &StackState) -> bool {
        match self {
            Predicate::Const(b) => *b,
            Predicate::Accept => accept_state(state),
            Predicate::Formula(f) => f.eval(oracle, state),
            Predicate::SemanticWp { script, post } => {
                lift_predicate(oracle, post, &eval_script(oracle, script, state.clone()))
            }
            Predicate::And(a, b) => a.holds(oracle, state) && b.holds(oracle, state),
            Predicate::Custom(f) => f(state),
        }
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Const(b) => write!(f, "Const({b})"),
            Predicate::Accept => f.write_str("Accept"),
            Predicate::Formula(w) => f.debug_tuple("Formula").field(w).finish(),
            Predicate::SemanticWp { script, post } => f
                .debug_struct("SemanticWp")
                .field("script", script)
                .field("post", post)
                .finish(),
            Predicate::And(a, b) => f.debug_tuple("And").field(a).field(b).finish(),
            Predicate::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl From<WpFormula> for Predicate {
    fn from(f: WpFormula) -> Self {
        Predicate::Formula(f)
    }
}

impl From<&WpFormula> for Predicate {
    fn from(f: &WpFormula) -> Self {
        Predicate::Formula(f.clone())
    }
}

/// `post⁺`: false on failure, `post` on success.
pub fn lift_predicate<O: CryptoOracle + ?Sized>(
    oracle: &O,
    post: &Predicate,
    outcome: &ExecOutcome,
) -> bool {
    outcome.state().is_some_and(|s| post.holds(oracle, s))
}

/// The ground-truth weakest precondition, evaluated by running the script.
pub fn semantic_wp(script: Script, post: Predicate) -> Predicate {
    Predicate::SemanticWp {
        script,
        post: Box::new(post),
    }
}

pub fn conj_sp(a: impl Into<Predicate>, b: impl Into<Predicate>) -> Predicate {
    Predicate::And(Box::new(a.into()), Box::new(b.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{time_check_pre, wp_multisig24, wp_p2pkh};
    use crate::oracle::ToyOracle;
    use crate::vm::{Instruction, Stack};
    use alloc::vec;

    fn state(time: u64, items: &[u64]) -> StackState {
        StackState::new(time, 10, Stack::from_top(items.iter().copied()))
    }

    #[test]
    fn accept_examples() {
        assert!(!accept_state(&state(0, &[])));
        assert!(!accept_state(&state(0, &[0, 9])));
        assert!(accept_state(&state(0, &[2])));
    }

    #[test]
    fn lift_examples() {
        let o = ToyOracle::default();
        assert!(!lift_predicate(
            &o,
            &Predicate::Const(true),
            &ExecOutcome::Failed
        ));
        assert!(lift_predicate(
            &o,
            &Predicate::Accept,
            &ExecOutcome::Succeeded(state(0, &[1]))
        ));
        assert!(!lift_predicate(
            &o,
            &Predicate::Accept,
            &ExecOutcome::Succeeded(state(0, &[]))
        ));
    }

    #[test]
    fn semantic_wp_examples() {
        let o = ToyOracle::default();
        let drop3 = Script::new(vec![Instruction::Drop; 3]);
        let wp = semantic_wp(drop3, Predicate::Accept);
        assert!(wp.holds(&o, &state(0, &[9, 9, 9, 5])));
        assert!(!wp.holds(&o, &state(0, &[1, 2, 3])));
        let id = semantic_wp(Script::empty(), Predicate::Accept);
        for s in [state(0, &[]), state(0, &[0]), state(0, &[4, 0])] {
            assert_eq!(id.holds(&o, &s), accept_state(&s));
        }
    }

    #[test]
    fn formula_predicates() {
        let o = ToyOracle::default();
        let p = Predicate::from(wp_p2pkh(7u64.into()));
        assert!(p.holds(&o, &state(0, &[3, 13])));
        assert!(!p.holds(&o, &state(0, &[3])));
    }

    #[test]
    fn conj_examples() {
        let o = ToyOracle::default();
        let g = Predicate::Accept;
        let s = state(0, &[1]);
        assert!(!conj_sp(Predicate::Const(false), g.clone()).holds(&o, &s));
        assert_eq!(
            conj_sp(Predicate::Const(true), g.clone()).holds(&o, &s),
            g.holds(&o, &s)
        );
        let ms = wp_multisig24([2u64, 4, 6, 8].map(Into::into));
        let both = conj_sp(time_check_pre(5u64.into()), ms);
        // signatures 2 + 10 and 6 + 10 would satisfy the multisig part
        assert!(!both.holds(&o, &state(4, &[16, 12, 0])));
        assert!(both.holds(&o, &state(5, &[16, 12, 0])));
    }
}
