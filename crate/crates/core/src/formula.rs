//! Human-readable precondition formulas.
//!
//! A [`WpFormula`] is a list of clauses. Each clause binds the top `k` stack
//! elements to named slots (the rest of the stack is bound but never
//! constrained) and carries a propositional body over [`Atom`]s. A state
//! satisfies the formula iff some clause's pattern matches it (height ≥ k)
//! and that clause's body holds under the binding. No clause, no truth.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::nat::Nat;
use crate::oracle::CryptoOracle;
use crate::vm::StackState;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Stack slot bound by the clause pattern; 0 is the top.
    Var(usize),
    Lit(Nat),
    Hash(Box<Term>),
    /// The state's current time.
    Now,
    /// A lock time literal.
    LockTime(Nat),
}

impl Term {
    pub fn var(slot: usize) -> Term {
        Term::Var(slot)
    }

    pub fn lit(n: impl Into<Nat>) -> Term {
        Term::Lit(n.into())
    }

    pub fn hash(t: Term) -> Term {
        Term::Hash(Box::new(t))
    }

    pub fn eval<O: CryptoOracle + ?Sized>(&self, oracle: &O, state: &StackState) -> Option<Nat> {
        Some(match self {
            Term::Var(i) => state.stack.get(*i)?.clone(),
            Term::Lit(n) | Term::LockTime(n) => n.clone(),
            Term::Hash(t) => oracle.hash(&t.eval(oracle, state)?),
            Term::Now => state.time.0.clone(),
        })
    }

    pub fn min_var(&self) -> Option<usize> {
        match self {
            Term::Var(i) => Some(*i),
            Term::Hash(t) => t.min_var(),
            _ => None,
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Term::Var(i) => Some(*i),
            Term::Hash(t) => t.max_var(),
            _ => None,
        }
    }

    fn constants(&self, out: &mut Vec<Nat>) {
        match self {
            Term::Lit(n) | Term::LockTime(n) => out.push(n.clone()),
            Term::Hash(t) => t.constants(out),
            _ => {}
        }
    }

    pub fn map_vars(&self, f: &impl Fn(usize) -> usize) -> Term {
        match self {
            Term::Var(i) => Term::Var(f(*i)),
            Term::Hash(t) => Term::Hash(Box::new(t.map_vars(f))),
            other => other.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Eq(Term, Term),
    /// `isSigned(msg, sig, pbk)` with the state's message.
    Signed {
        sig: Term,
        pbk: Term,
    },
    Positive(Term),
    /// `lock <= currentTime`.
    TimeLe(Term),
}

fn min_opt(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl Atom {
    /// Equality with a canonical argument order: terms mentioning slots go
    /// left, lower slots first.
    pub fn eq(a: Term, b: Term) -> Atom {
        let key = |t: &Term| (t.min_var().is_none(), t.min_var());
        if key(&b) < key(&a) {
            Atom::Eq(b, a)
        } else {
            Atom::Eq(a, b)
        }
    }

    pub fn signed(sig: Term, pbk: Term) -> Atom {
        Atom::Signed { sig, pbk }
    }

    pub fn eval<O: CryptoOracle + ?Sized>(&self, oracle: &O, state: &StackState) -> bool {
        let ev = |t: &Term| t.eval(oracle, state);
        match self {
            Atom::Eq(a, b) => matches!((ev(a), ev(b)), (Some(x), Some(y)) if x == y),
            Atom::Signed { sig, pbk } => match (ev(sig), ev(pbk)) {
                (Some(s), Some(p)) => oracle.is_signed(&state.msg, &s, &p),
                _ => false,
            },
            Atom::Positive(t) => ev(t).is_some_and(|n| n.is_positive()),
            Atom::TimeLe(t) => ev(t).is_some_and(|n| n <= state.time.0),
        }
    }

    fn terms(&self) -> impl Iterator<Item = &Term> {
        let (a, b) = match self {
            Atom::Eq(a, b) => (a, Some(b)),
            Atom::Signed { sig, pbk } => (sig, Some(pbk)),
            Atom::Positive(t) | Atom::TimeLe(t) => (t, None),
        };
        core::iter::once(a).chain(b)
    }

    pub fn min_var(&self) -> Option<usize> {
        self.terms().fold(None, |acc, t| min_opt(acc, t.min_var()))
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms().filter_map(Term::max_var).max()
    }

    /// Rank of the constructor name, for canonical ordering.
    fn kind_rank(&self) -> u8 {
        match self {
            Atom::Eq(..) => 0,
            Atom::Signed { .. } => 1,
            Atom::Positive(_) => 2,
            Atom::TimeLe(_) => 3,
        }
    }

    pub fn map_vars(&self, f: &impl Fn(usize) -> usize) -> Atom {
        match self {
            Atom::Eq(a, b) => Atom::eq(a.map_vars(f), b.map_vars(f)),
            Atom::Signed { sig, pbk } => Atom::signed(sig.map_vars(f), pbk.map_vars(f)),
            Atom::Positive(t) => Atom::Positive(t.map_vars(f)),
            Atom::TimeLe(t) => Atom::TimeLe(t.map_vars(f)),
        }
    }

    /// Canonical order inside conjunctions: slot-free atoms first, then by
    /// lowest slot, then constructor, then structure.
    pub fn canonical_cmp(&self, other: &Atom) -> Ordering {
        let key = |a: &Atom| (a.min_var().map_or(0, |v| v + 1), a.kind_rank());
        key(self).cmp(&key(other)).then_with(|| self.cmp(other))
    }
}

/// An atom or its negation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            positive: false,
        }
    }

    pub fn negated(&self) -> Self {
        Literal {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }

    pub fn to_prop(&self) -> Prop {
        let a = Prop::Atom(self.atom.clone());
        if self.positive {
            a
        } else {
            Prop::Not(Box::new(a))
        }
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.atom
            .canonical_cmp(&other.atom)
            .then_with(|| other.positive.cmp(&self.positive))
    }
}

/// Propositional clause body.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Prop {
    True,
    False,
    Atom(Atom),
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
}

impl Prop {
    pub fn atom(a: Atom) -> Prop {
        Prop::Atom(a)
    }

    pub fn negate(p: Prop) -> Prop {
        Prop::Not(Box::new(p))
    }

    /// Conjunction that collapses the trivial cases.
    pub fn and(mut parts: Vec<Prop>) -> Prop {
        parts.retain(|p| *p != Prop::True);
        if parts.contains(&Prop::False) {
            return Prop::False;
        }
        match parts.len() {
            0 => Prop::True,
            1 => parts.pop().unwrap(),
            _ => Prop::And(parts),
        }
    }

    /// Disjunction that collapses the trivial cases.
    pub fn or(mut parts: Vec<Prop>) -> Prop {
        parts.retain(|p| *p != Prop::False);
        if parts.contains(&Prop::True) {
            return Prop::True;
        }
        match parts.len() {
            0 => Prop::False,
            1 => parts.pop().unwrap(),
            _ => Prop::Or(parts),
        }
    }

    pub fn eval<O: CryptoOracle + ?Sized>(&self, oracle: &O, state: &StackState) -> bool {
        self.eval_with(&mut |a| a.eval(oracle, state))
    }

    /// Evaluates with an arbitrary atom valuation.
    pub fn eval_with(&self, val: &mut impl FnMut(&Atom) -> bool) -> bool {
        match self {
            Prop::True => true,
            Prop::False => false,
            Prop::Atom(a) => val(a),
            Prop::Not(p) => !p.eval_with(val),
            Prop::And(ps) => ps.iter().all(|p| p.eval_with(val)),
            Prop::Or(ps) => ps.iter().any(|p| p.eval_with(val)),
        }
    }

    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Prop::True | Prop::False => {}
            Prop::Atom(a) => f(a),
            Prop::Not(p) => p.for_each_atom(f),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().for_each(|p| p.for_each_atom(f)),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        let mut m = None;
        self.for_each_atom(&mut |a| m = m.max(a.max_var()));
        m
    }

    pub fn map_atoms(&self, f: &impl Fn(&Atom) -> Atom) -> Prop {
        match self {
            Prop::True => Prop::True,
            Prop::False => Prop::False,
            Prop::Atom(a) => Prop::Atom(f(a)),
            Prop::Not(p) => Prop::negate(p.map_atoms(f)),
            Prop::And(ps) => Prop::And(ps.iter().map(|p| p.map_atoms(f)).collect()),
            Prop::Or(ps) => Prop::Or(ps.iter().map(|p| p.map_atoms(f)).collect()),
        }
    }

    /// `Some(lit)` when this is an atom or a negated atom.
    pub fn as_literal(&self) -> Option<Literal> {
        match self {
            Prop::Atom(a) => Some(Literal::pos(a.clone())),
            Prop::Not(p) => match &**p {
                Prop::Atom(a) => Some(Literal::neg(a.clone())),
                _ => None,
            },
            _ => None,
        }
    }
}

/// One case of a formula: a stack pattern of named slots plus a body.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    /// Slot names, top first. The pattern depth is `names.len()`.
    pub names: Vec<String>,
    pub body: Prop,
}

impl Clause {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>, body: Prop) -> Self {
        Clause {
            names: names.into_iter().map(Into::into).collect(),
            body,
        }
    }

    pub fn depth(&self) -> usize {
        self.names.len()
    }

    pub fn matches(&self, state: &StackState) -> bool {
        state.stack.height() >= self.depth()
    }

    pub fn holds<O: CryptoOracle + ?Sized>(&self, oracle: &O, state: &StackState) -> bool {
        self.matches(state) && self.body.eval(oracle, state)
    }

    pub fn is_well_formed(&self) -> bool {
        self.body.max_var().is_none_or(|m| m < self.depth())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct WpFormula {
    pub clauses: Vec<Clause>,
}

impl WpFormula {
    pub fn new(clauses: Vec<Clause>) -> Self {
        WpFormula { clauses }
    }

    /// False on every state.
    pub fn falsity() -> Self {
        WpFormula::default()
    }

    /// True on every state.
    pub fn truth() -> Self {
        WpFormula::single(Clause::new::<&str>([], Prop::True))
    }

    pub fn single(clause: Clause) -> Self {
        WpFormula {
            clauses: alloc::vec![clause],
        }
    }

    pub fn eval<O: CryptoOracle + ?Sized>(&self, oracle: &O, state: &StackState) -> bool {
        self.clauses.iter().any(|c| c.holds(oracle, state))
    }

    pub fn is_well_formed(&self) -> bool {
        self.clauses.iter().all(Clause::is_well_formed)
    }

    pub fn max_depth(&self) -> usize {
        self.clauses.iter().map(Clause::depth).max().unwrap_or(0)
    }

    /// Conjunction. Both operands bind slots from the top of the same stack,
    /// so two clauses combine into one at the larger depth.
    pub fn and(&self, other: &WpFormula) -> WpFormula {
        let mut clauses = Vec::new();
        for a in &self.clauses {
            for b in &other.clauses {
                let names = if a.depth() >= b.depth() {
                    &a.names
                } else {
                    &b.names
                };
                clauses.push(Clause {
                    names: names.clone(),
                    body: Prop::and(alloc::vec![a.body.clone(), b.body.clone()]),
                });
            }
        }
        WpFormula { clauses }
    }

    /// Structural equality that ignores slot names.
    pub fn same_structure(&self, other: &WpFormula) -> bool {
        self.clauses.len() == other.clauses.len()
            && self
                .clauses
                .iter()
                .zip(&other.clauses)
                .all(|(a, b)| a.depth() == b.depth() && a.body == b.body)
    }

    /// Every literal constant the formula mentions.
    pub fn constants(&self) -> Vec<Nat> {
        let mut out = Vec::new();
        for c in &self.clauses {
            c.body
                .for_each_atom(&mut |a| a.terms().for_each(|t| t.constants(&mut out)));
        }
        out
    }

    /// Constants compared against the current time.
    pub fn time_locks(&self) -> Vec<Nat> {
        let mut out = Vec::new();
        for c in &self.clauses {
            c.body.for_each_atom(&mut |a| {
                if let Atom::TimeLe(t) = a {
                    t.constants(&mut out);
                }
            });
        }
        out
    }

    /// Distinct atoms in first-occurrence order.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out: Vec<Atom> = Vec::new();
        for c in &self.clauses {
            c.body.for_each_atom(&mut |a| {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ToyOracle;
    use crate::vm::Stack;
    use alloc::vec;

    fn state(items: &[u64]) -> StackState {
        StackState::new(0, 10, Stack::from_top(items.iter().copied()))
    }

    fn p2pkh(h: u64) -> WpFormula {
        WpFormula::single(Clause::new(
            ["pbk", "sig"],
            Prop::and(vec![
                Prop::atom(Atom::eq(Term::hash(Term::var(0)), Term::lit(h))),
                Prop::atom(Atom::signed(Term::var(1), Term::var(0))),
            ]),
        ))
    }

    #[test]
    fn eval_examples() {
        let o = ToyOracle::default();
        assert!(p2pkh(7).eval(&o, &state(&[3, 13])));
        assert!(!p2pkh(7).eval(&o, &state(&[3])));
        assert!(!p2pkh(7).eval(&o, &state(&[])));
        assert!(!p2pkh(7).eval(&o, &state(&[3, 12])));
    }

    #[test]
    fn eq_is_canonicalised() {
        let a = Atom::eq(Term::lit(7u64), Term::hash(Term::var(0)));
        assert_eq!(a, Atom::Eq(Term::hash(Term::var(0)), Term::lit(7u64)));
        let b = Atom::eq(Term::var(1), Term::var(0));
        assert_eq!(b, Atom::Eq(Term::var(0), Term::var(1)));
    }

    #[test]
    fn clauses_are_existential() {
        let o = ToyOracle::default();
        // shallow clause false, deeper clause true on a tall stack
        let f = WpFormula::new(vec![
            Clause::new(["x"], Prop::atom(Atom::Positive(Term::var(0)))),
            Clause::new(["a", "b"], Prop::atom(Atom::Positive(Term::var(1)))),
        ]);
        assert!(f.eval(&o, &state(&[0, 5])));
        assert!(!f.eval(&o, &state(&[0])));
        assert!(f.eval(&o, &state(&[1])));
    }

    #[test]
    fn and_merges_patterns() {
        let o = ToyOracle::default();
        let time = WpFormula::single(Clause::new::<&str>(
            [],
            Prop::atom(Atom::TimeLe(Term::lit(5u64))),
        ));
        let both = time.and(&p2pkh(7));
        assert_eq!(both.clauses.len(), 1);
        assert_eq!(both.clauses[0].depth(), 2);
        let mut s = state(&[3, 13]);
        assert!(!both.eval(&o, &s));
        s.time = 5u64.into();
        assert!(both.eval(&o, &s));
    }

    #[test]
    fn well_formedness() {
        assert!(p2pkh(1).is_well_formed());
        let bad = WpFormula::single(Clause::new(["x"], Prop::atom(Atom::Positive(Term::var(1)))));
        assert!(!bad.is_well_formed());
    }

    #[test]
    fn literal_order() {
        let s = Literal::pos(Atom::signed(Term::var(1), Term::var(0)));
        let h = Literal::pos(Atom::eq(Term::hash(Term::var(0)), Term::lit(7u64)));
        let t = Literal::pos(Atom::TimeLe(Term::lit(3u64)));
        let mut v = vec![s.clone(), h.clone(), t.clone()];
        v.sort();
        assert_eq!(v, vec![t, h, s]);
    }
}
