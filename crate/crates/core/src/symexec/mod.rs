//! Symbolic execution into decision trees, and weakest preconditions read
//! off their accepting paths.
//!
//! The pipeline is [`sym_eval`] → [`extract_paths`] → [`paths_to_formula`]
//! → [`simplify_formula`]; [`derive_wp_for`] runs all of it. Symbolic
//! execution never consults an oracle: hashes and signature checks stay
//! blocked terms and become atoms of the resulting formula.

mod compile;
mod engine;
mod extract;
mod render;
mod simplify;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::formula::WpFormula;
use crate::nat::Nat;
use crate::vm::Instruction;

pub use compile::{compile_tree, CompiledTree};
pub use engine::{sym_eval, sym_step, Namer, MAX_SYMBOLIC_MULTISIG_COUNT};
pub use extract::{extract_accept_paths, extract_paths, paths_to_dnf, paths_to_formula};
pub use render::render_tree;
pub use simplify::{
    formula_to_dnf, propositionally_equivalent, simplify_dnf, simplify_formula, Disjunct, Dnf,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TailId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for TailId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// A natural number whose value may depend on unknown inputs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymNat {
    Var(VarId),
    Lit(Nat),
    Hash(Box<SymNat>),
    /// `compareNaturals(a, b)`: 1 when equal, else 0.
    CompareEq(Box<SymNat>, Box<SymNat>),
    BoolToNat(Box<SymBool>),
    /// The state's time.
    Now,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymBool {
    /// Against the run's message.
    IsSigned { sig: SymNat, pbk: SymNat },
    /// `lock <= now`.
    LeTime(SymNat),
}

impl SymNat {
    pub fn compare_eq(a: SymNat, b: SymNat) -> SymNat {
        SymNat::CompareEq(Box::new(a), Box::new(b))
    }

    pub fn hash(a: SymNat) -> SymNat {
        SymNat::Hash(Box::new(a))
    }

    pub fn bool_to_nat(b: SymBool) -> SymNat {
        SymNat::BoolToNat(Box::new(b))
    }
}

impl fmt::Display for SymNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymNat::Var(v) => write!(f, "{v}"),
            SymNat::Lit(n) => write!(f, "{n}"),
            SymNat::Hash(a) => write!(f, "hash({a})"),
            SymNat::CompareEq(a, b) => write!(f, "eq({a}, {b})"),
            SymNat::BoolToNat(b) => write!(f, "b2n({b})"),
            SymNat::Now => f.write_str("now"),
        }
    }
}

impl fmt::Display for SymBool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymBool::IsSigned { sig, pbk } => write!(f, "signed({sig}, {pbk})"),
            SymBool::LeTime(lock) => write!(f, "{lock} <= now"),
        }
    }
}

/// Known cells on top of an unknown remainder.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymStack {
    /// Top first.
    pub known: Vec<SymNat>,
    pub tail: TailId,
}

impl fmt::Display for SymStack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for e in &self.known {
            write!(f, "{e} :: ")?;
        }
        write!(f, "{}]", self.tail)
    }
}

/// One decision taken along a path.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PathAtom {
    StackEmpty(TailId),
    StackCons {
        tail: TailId,
        head: VarId,
        rest: TailId,
    },
    NatIsZero(SymNat),
    /// The value is `pred + 1`.
    NatIsSucc(SymNat, VarId),
    BoolIs(SymBool, bool),
}

impl fmt::Display for PathAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathAtom::StackEmpty(t) => write!(f, "{t} = []"),
            PathAtom::StackCons { tail, head, rest } => write!(f, "{tail} = {head} :: {rest}"),
            PathAtom::NatIsZero(e) => write!(f, "{e} = 0"),
            PathAtom::NatIsSucc(e, p) => write!(f, "{e} = suc {p}"),
            PathAtom::BoolIs(b, v) => write!(f, "{b} = {v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecisionTree {
    SplitStack {
        tail: TailId,
        on_empty: Box<DecisionTree>,
        head: VarId,
        rest: TailId,
        on_cons: Box<DecisionTree>,
    },
    SplitNat {
        expr: SymNat,
        on_zero: Box<DecisionTree>,
        pred: VarId,
        on_succ: Box<DecisionTree>,
    },
    SplitBool {
        cond: SymBool,
        on_true: Box<DecisionTree>,
        on_false: Box<DecisionTree>,
    },
    Fail,
    Ok(SymStack),
}

impl DecisionTree {
    pub fn node_count(&self) -> usize {
        match self {
            DecisionTree::SplitStack {
                on_empty, on_cons, ..
            } => 1 + on_empty.node_count() + on_cons.node_count(),
            DecisionTree::SplitNat {
                on_zero, on_succ, ..
            } => 1 + on_zero.node_count() + on_succ.node_count(),
            DecisionTree::SplitBool {
                on_true, on_false, ..
            } => 1 + on_true.node_count() + on_false.node_count(),
            DecisionTree::Fail | DecisionTree::Ok(_) => 1,
        }
    }

    /// Number of `Ok` leaves.
    pub fn success_leaves(&self) -> usize {
        match self {
            DecisionTree::SplitStack {
                on_empty: a,
                on_cons: b,
                ..
            }
            | DecisionTree::SplitNat {
                on_zero: a,
                on_succ: b,
                ..
            }
            | DecisionTree::SplitBool {
                on_true: a,
                on_false: b,
                ..
            } => a.success_leaves() + b.success_leaves(),
            DecisionTree::Fail => 0,
            DecisionTree::Ok(_) => 1,
        }
    }
}

/// A decision tree together with the naming state it was built with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicRun {
    pub tree: DecisionTree,
    pub initial: SymStack,
    pub next_var: u32,
    pub next_tail: u32,
}

/// Decisions along one root-to-leaf path that ends in acceptance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSummary {
    pub atoms: Vec<PathAtom>,
    pub result: SymStack,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SymError {
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl SymError {
    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        SymError::Unsupported(msg.into())
    }
}

/// Every stage of a derivation, for inspection.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub run: SymbolicRun,
    pub paths: Vec<PathSummary>,
    /// One disjunct per accepting path.
    pub raw: WpFormula,
    pub simplified: WpFormula,
}

pub fn derive_with_stages(
    script: &[Instruction],
    post: &WpFormula,
) -> Result<Derivation, SymError> {
    let run = sym_eval(script)?;
    let paths = extract_paths(&run, post)?;
    let dnf = paths_to_dnf(&paths, run.initial.tail)?;
    let raw = dnf.to_formula(None);
    let simplified = simplify_formula(&raw);
    Ok(Derivation {
        run,
        paths,
        raw,
        simplified,
    })
}

/// The weakest precondition of `script` for `post`, in readable form.
pub fn derive_wp_for(script: &[Instruction], post: &WpFormula) -> Result<WpFormula, SymError> {
    derive_with_stages(script, post).map(|d| d.simplified)
}

/// The weakest precondition of `script` for acceptance.
pub fn derive_wp(script: &[Instruction]) -> Result<WpFormula, SymError> {
    derive_wp_for(script, &crate::fixtures::accept_formula())
}

#[cfg(test)]
mod tests;
