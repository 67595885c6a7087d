//! Hoare triples checked by exhaustive enumeration of a finite domain.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::formula::WpFormula;
use crate::nat::{Msg, Nat, Time};
use crate::oracle::CryptoOracle;
use crate::predicate::{lift_predicate, Predicate};
use crate::vm::{eval_script, ExecOutcome, Instruction, Stack, StackState};

pub const DEFAULT_MAX_HEIGHT: usize = 6;

/// A finite set of states: every stack up to `max_height` over `values`,
/// paired with every message and time.
///
/// States are indexed. Stacks come first by height, then lexicographically
/// with the top as the most significant digit; message and time vary fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    max_height: usize,
    values: Vec<Nat>,
    msgs: Vec<Msg>,
    times: Vec<Time>,
    // offsets[h] = number of stacks lower than h
    offsets: Vec<usize>,
}

impl Domain {
    /// Values, messages and times are sorted and deduplicated.
    pub fn new(
        max_height: usize,
        values: impl IntoIterator<Item = Nat>,
        msgs: impl IntoIterator<Item = Msg>,
        times: impl IntoIterator<Item = Time>,
    ) -> Self {
        let values: Vec<Nat> = values
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let msgs: Vec<Msg> = msgs
            .into_iter()
            .map(|m| m.0)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(Msg)
            .collect();
        let times: Vec<Time> = times
            .into_iter()
            .map(|t| t.0)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(Time)
            .collect();
        let mut offsets = vec![0usize];
        let mut layer = 1usize;
        for _ in 0..=max_height {
            let last = *offsets.last().unwrap();
            offsets.push(last.saturating_add(layer));
            layer = layer.saturating_mul(values.len());
        }
        Domain {
            max_height,
            values,
            msgs,
            times,
            offsets,
        }
    }

    /// Values `0..=max_value`.
    pub fn bounded(max_height: usize, max_value: u64, msgs: &[u64], times: &[u64]) -> Self {
        Domain::new(
            max_height,
            (0..=max_value).map(Nat::from),
            msgs.iter().map(|&m| Msg::from(m)),
            times.iter().map(|&t| Time::from(t)),
        )
    }

    pub fn max_height(&self) -> usize {
        self.max_height
    }

    pub fn values(&self) -> &[Nat] {
        &self.values
    }

    pub fn msgs(&self) -> &[Msg] {
        &self.msgs
    }

    pub fn times(&self) -> &[Time] {
        &self.times
    }

    pub fn stack_count(&self) -> usize {
        self.offsets[self.max_height + 1]
    }

    /// Number of states. Saturates for absurdly large domains.
    pub fn len(&self) -> usize {
        self.stack_count()
            .saturating_mul(self.msgs.len())
            .saturating_mul(self.times.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stack_at(&self, index: usize) -> Stack {
        let height = self.offsets.partition_point(|&o| o <= index) - 1;
        let mut rem = index - self.offsets[height];
        let base = self.values.len();
        // digits least significant first = bottom first
        let mut bottom_first = Vec::with_capacity(height);
        for _ in 0..height {
            bottom_first.push(self.values[rem % base].clone());
            rem /= base;
        }
        Stack::from_top(bottom_first.into_iter().rev())
    }

    pub fn state_at(&self, index: usize) -> StackState {
        let per_stack = self.msgs.len() * self.times.len();
        let stack = self.stack_at(index / per_stack);
        let rem = index % per_stack;
        StackState {
            time: self.times[rem % self.times.len()].clone(),
            msg: self.msgs[rem / self.times.len()].clone(),
            stack,
        }
    }

    pub fn states(&self) -> impl Iterator<Item = StackState> + '_ {
        (0..self.len()).map(|i| self.state_at(i))
    }

    /// Smallest index whose state satisfies `pred`.
    pub fn find_first<F>(&self, pred: F) -> Option<(usize, StackState)>
    where
        F: Fn(&StackState) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..self.len())
                .into_par_iter()
                .map(|i| (i, self.state_at(i)))
                .find_first(|(_, s)| pred(s))
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..self.len())
                .map(|i| (i, self.state_at(i)))
                .find(|(_, s)| pred(s))
        }
    }

    /// A domain large enough to exercise the constants of a problem under
    /// `oracle`. See [`DomainSeeds`].
    pub fn adequate<O: CryptoOracle + ?Sized>(
        oracle: &O,
        max_height: usize,
        seeds: &DomainSeeds,
    ) -> Self {
        let msgs: Vec<Msg> = if seeds.msgs.is_empty() {
            vec![Msg::from(0u64), Msg::from(1u64)]
        } else {
            seeds.msgs.clone()
        };
        let mut base: BTreeSet<Nat> = [Nat::zero(), Nat::one()].into_iter().collect();
        base.extend(seeds.constants.iter().cloned());
        let mut frontier: Vec<Nat> = base.iter().cloned().collect();
        for _ in 0..3 {
            let mut next = Vec::new();
            for d in &frontier {
                for p in oracle.preimages(d) {
                    if base.insert(p.clone()) {
                        next.push(p);
                    }
                }
            }
            frontier = next;
        }
        let mut values = base.clone();
        for m in &msgs {
            for p in &base {
                values.extend(oracle.signatures_for(m, p));
            }
        }
        let mut times: BTreeSet<Nat> = [Nat::zero()].into_iter().collect();
        times.extend(seeds.times.iter().cloned());
        for lock in &seeds.time_locks {
            if let Some(p) = lock.checked_pred() {
                times.insert(p);
            }
            times.insert(lock.clone());
            times.insert(lock.succ());
        }
        Domain::new(max_height, values, msgs, times.into_iter().map(Time))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list =
            |f: &mut fmt::Formatter<'_>, items: &mut dyn Iterator<Item = &Nat>| -> fmt::Result {
                f.write_str("{")?;
                for (i, v) in items.enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            };
        write!(f, "height<={} values=", self.max_height)?;
        list(f, &mut self.values.iter())?;
        f.write_str(" msgs=")?;
        list(f, &mut self.msgs.iter().map(|m| &m.0))?;
        f.write_str(" times=")?;
        list(f, &mut self.times.iter().map(|t| &t.0))?;
        write!(f, " ({} states)", self.len())
    }
}

/// Constants a domain must cover.
#[derive(Clone, Debug, Default)]
pub struct DomainSeeds {
    pub constants: Vec<Nat>,
    pub time_locks: Vec<Nat>,
    /// Extra times included as given.
    pub times: Vec<Nat>,
    /// Messages to use; empty means `{0, 1}`.
    pub msgs: Vec<Msg>,
}

impl DomainSeeds {
    pub fn new() -> Self {
        DomainSeeds::default()
    }

    /// Pushed literals; a push directly before `OP_CHECKLOCKTIMEVERIFY` is
    /// also a lock time.
    pub fn script(mut self, script: &[Instruction]) -> Self {
        for (i, instr) in script.iter().enumerate() {
            if let Instruction::Push(n) = instr {
                self.constants.push(n.clone());
                if script.get(i + 1) == Some(&Instruction::CheckLockTimeVerify) {
                    self.time_locks.push(n.clone());
                }
            }
        }
        self
    }

    pub fn formula(mut self, f: &WpFormula) -> Self {
        self.constants.extend(f.constants());
        self.time_locks.extend(f.time_locks());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// The precondition holds but the postcondition does not.
    Forward,
    /// The postcondition holds without the precondition.
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub state: StackState,
    pub direction: Direction,
    /// Position of `state` in the domain's enumeration order.
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds { states: usize },
    Counterexample(Counterexample),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::Holds { .. } => None,
            Verdict::Counterexample(c) => Some(c),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds { states } => write!(f, "Holds ({states} states)"),
            Verdict::Counterexample(c) => {
                write!(
                    f,
                    "Counterexample ({}) #{}: {}",
                    c.direction, c.index, c.state
                )
            }
        }
    }
}

fn first_mismatch<F>(d: &Domain, classify: F) -> Verdict
where
    F: Fn(&StackState) -> Option<Direction> + Sync + Send,
{
    match d.find_first(|s| classify(s).is_some()) {
        None => Verdict::Holds { states: d.len() },
        Some((index, state)) => {
            let direction = classify(&state).expect("classified as mismatch");
            Verdict::Counterexample(Counterexample {
                state,
                direction,
                index,
            })
        }
    }
}

/// `pre(s) ⇒ post⁺(eval(script, s))` for every state of `d`.
pub fn check_triple<O: CryptoOracle + ?Sized>(
    oracle: &O,
    pre: &Predicate,
    script: &[Instruction],
    post: &Predicate,
    d: &Domain,
) -> Verdict {
    first_mismatch(d, |s| {
        let violated = pre.holds(oracle, s)
            && !lift_predicate(oracle, post, &eval_script(oracle, script, s.clone()));
        violated.then_some(Direction::Forward)
    })
}

/// `pre(s) ⇔ post⁺(eval(script, s))` for every state of `d`.
pub fn check_iff_triple<O: CryptoOracle + ?Sized>(
    oracle: &O,
    pre: &Predicate,
    script: &[Instruction],
    post: &Predicate,
    d: &Domain,
) -> Verdict {
    first_mismatch(d, |s| {
        let lhs = pre.holds(oracle, s);
        let rhs = lift_predicate(oracle, post, &eval_script(oracle, script, s.clone()));
        direction(lhs, rhs)
    })
}

fn direction(lhs: bool, rhs: bool) -> Option<Direction> {
    match (lhs, rhs) {
        (true, false) => Some(Direction::Forward),
        (false, true) => Some(Direction::Backward),
        _ => None,
    }
}

/// Pointwise equality. `Forward` means `a` holds and `b` does not.
pub fn check_pred_equiv<O: CryptoOracle + ?Sized>(
    oracle: &O,
    a: &Predicate,
    b: &Predicate,
    d: &Domain,
) -> Verdict {
    first_mismatch(d, |s| direction(a.holds(oracle, s), b.holds(oracle, s)))
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivVerdict {
    Holds {
        states: usize,
    },
    Differs {
        state: StackState,
        index: usize,
        left: ExecOutcome,
        right: ExecOutcome,
    },
}

/// Full outcome equality of two scripts over `d`.
pub fn check_script_equiv<O: CryptoOracle + ?Sized>(
    oracle: &O,
    left: &[Instruction],
    right: &[Instruction],
    d: &Domain,
) -> EquivVerdict {
    let run = |s: &StackState| {
        (
            eval_script(oracle, left, s.clone()),
            eval_script(oracle, right, s.clone()),
        )
    };
    match d.find_first(|s| {
        let (l, r) = run(s);
        l != r
    }) {
        None => EquivVerdict::Holds { states: d.len() },
        Some((index, state)) => {
            let (left, right) = run(&state);
            EquivVerdict::Differs {
                state,
                index,
                left,
                right,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::oracle::ToyOracle;
    use crate::predicate::semantic_wp;
    use crate::vm::Script;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(Domain::bounded(0, 5, &[0], &[0]).len(), 1);
        let d = Domain::bounded(1, 1, &[0], &[0]);
        let stacks: Vec<_> = d.states().map(|s| s.stack).collect();
        assert_eq!(
            stacks,
            vec![
                Stack::new(),
                Stack::from_top([0u64]),
                Stack::from_top([1u64])
            ]
        );
        assert_eq!(Domain::bounded(2, 2, &[0, 1], &[0]).len(), 26);
    }

    #[test]
    fn enumeration_is_ordered_and_unique() {
        let d = Domain::bounded(3, 2, &[0, 1], &[3, 4]);
        let all: Vec<StackState> = d.states().collect();
        assert_eq!(all.len(), 2 * 2 * (1 + 3 + 9 + 27));
        let set: BTreeSet<_> = all
            .iter()
            .map(|s| (s.stack.clone(), s.msg.0.clone(), s.time.0.clone()))
            .collect();
        assert_eq!(set.len(), all.len());
        // height-2 stacks: top is the most significant digit
        let h2: Vec<Stack> = (4..13).map(|i| d.stack_at(i)).collect();
        assert_eq!(h2[0], Stack::from_top([0u64, 0]));
        assert_eq!(h2[1], Stack::from_top([0u64, 1]));
        assert_eq!(h2[3], Stack::from_top([1u64, 0]));
    }

    #[test]
    fn adequate_domain_for_p2pkh() {
        let o = ToyOracle::default();
        let seeds = DomainSeeds::new()
            .script(&script_p2pkh(n(7)))
            .formula(&wp_p2pkh(n(7)));
        let d = Domain::adequate(&o, 6, &seeds);
        let want: Vec<Nat> = [0u64, 1, 2, 3, 4, 7, 8].map(Nat::from).to_vec();
        assert_eq!(d.values(), &want[..]);
        assert_eq!(d.times(), &[Time::from(0u64)]);
        let ms = DomainSeeds::new().script(&combined_script(n(5), default_keys()));
        let d = Domain::adequate(&o, 4, &ms);
        assert_eq!(d.values().len(), 10);
        assert_eq!(d.times().len(), 4);
    }

    #[test]
    fn triple_examples() {
        let o = ToyOracle::default();
        let d = Domain::adequate(&o, 3, &DomainSeeds::new().formula(&wp_p2pkh(n(7))));
        let pre = Predicate::from(wp_p2pkh(n(7)));
        assert!(check_triple(&o, &pre, &script_p2pkh(n(7)), &Predicate::Accept, &d).holds());
        assert!(check_triple(&o, &pre, &script_p2pkh_faulty(n(7)), &Predicate::Accept, &d).holds());
        let v = check_triple(
            &o,
            &Predicate::Const(true),
            &[Instruction::Verify],
            &Predicate::Accept,
            &d,
        );
        let c = v.counterexample().unwrap();
        assert!(c.state.stack.is_empty());
        assert_eq!(c.index, 0);
    }

    #[test]
    fn iff_examples() {
        let o = ToyOracle::default();
        let d = Domain::adequate(&o, 3, &DomainSeeds::new().formula(&wp_p2pkh(n(7))));
        let pre = Predicate::from(wp_p2pkh(n(7)));
        assert!(check_iff_triple(&o, &pre, &script_p2pkh(n(7)), &Predicate::Accept, &d).holds());
        let v = check_iff_triple(&o, &pre, &script_p2pkh_faulty(n(7)), &Predicate::Accept, &d);
        let c = v.counterexample().unwrap();
        assert_eq!(c.direction, Direction::Backward);
        assert_eq!(c.state.stack, Stack::from_top([3u64]));
        let never = Script::new(vec![Instruction::push(0u64)]);
        assert!(
            check_iff_triple(&o, &Predicate::Const(false), &never, &Predicate::Accept, &d).holds()
        );
    }

    #[test]
    fn equivalence_examples() {
        let o = ToyOracle::default();
        let d = Domain::bounded(5, 2, &[0], &[0]);
        let a = Predicate::from(accept1());
        assert!(check_pred_equiv(&o, &a, &a, &d).holds());
        let drop3 = Script::new(vec![Instruction::Drop; 3]);
        let readable =
            crate::formula_text::parse_formula("stack = a :: b :: c :: d :: rest => d > 0")
                .unwrap();
        let v = check_pred_equiv(
            &o,
            &semantic_wp(drop3, Predicate::Accept),
            &readable.into(),
            &d,
        );
        assert!(v.holds());
        let d = Domain::adequate(&o, 3, &DomainSeeds::new().formula(&wp_p2pkh(n(7))));
        let v = check_pred_equiv(&o, &wp_p2pkh(n(7)).into(), &wp_faulty(n(7)).into(), &d);
        assert_eq!(v.counterexample().unwrap().direction, Direction::Backward);
    }

    #[test]
    fn script_equivalence() {
        let o = ToyOracle::default();
        let d = Domain::bounded(3, 3, &[0], &[0]);
        let p = script_p2pkh(n(7));
        assert_eq!(
            check_script_equiv(&o, &p, &p, &d),
            EquivVerdict::Holds { states: d.len() }
        );
        assert!(matches!(
            check_script_equiv(&o, &p, &script_p2pkh_faulty(n(7)), &d),
            EquivVerdict::Differs { .. }
        ));
        let push_drop = Script::new(vec![Instruction::push(1u64), Instruction::Drop]);
        assert!(matches!(
            check_script_equiv(&o, &push_drop, &[], &d),
            EquivVerdict::Holds { .. }
        ));
    }
}
