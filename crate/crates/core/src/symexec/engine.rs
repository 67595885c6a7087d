use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::{DecisionTree, SymBool, SymError, SymNat, SymStack, SymbolicRun, TailId, VarId};
use crate::nat::bool_to_nat;
use crate::vm::Instruction;

/// Largest literal key or signature count `OP_MULTISIG` is unfolded for.
pub const MAX_SYMBOLIC_MULTISIG_COUNT: usize = 20;

/// Fresh-name supply for stack cells and tails.
#[derive(Clone, Debug, Default)]
pub struct Namer {
    next_var: u32,
    next_tail: u32,
}

impl Namer {
    pub fn new(next_var: u32, next_tail: u32) -> Self {
        Namer {
            next_var,
            next_tail,
        }
    }

    pub fn var(&mut self) -> VarId {
        self.next_var += 1;
        VarId(self.next_var - 1)
    }

    pub fn tail(&mut self) -> TailId {
        self.next_tail += 1;
        TailId(self.next_tail - 1)
    }

    pub fn counts(&self) -> (u32, u32) {
        (self.next_var, self.next_tail)
    }
}

/// Outcomes already decided on the current path.
#[derive(Clone, Debug, Default)]
pub(crate) struct Facts {
    nats: Vec<(SymNat, bool)>,
    bools: Vec<(SymBool, bool)>,
}

impl Facts {
    pub(crate) fn assume_positive(&mut self, e: SymNat, v: bool) {
        self.nats.push((e, v));
    }

    pub(crate) fn assume_bool(&mut self, b: SymBool, v: bool) {
        self.bools.push((b, v));
    }

    pub(crate) fn bool_value(&self, b: &SymBool) -> Option<bool> {
        self.bools.iter().find(|(k, _)| k == b).map(|(_, v)| *v)
    }

    /// Whether `e > 0`, when the path already determines it.
    pub(crate) fn positive(&self, e: &SymNat) -> Option<bool> {
        match e {
            SymNat::Lit(n) => return Some(n.is_positive()),
            SymNat::BoolToNat(b) => return self.bool_value(b),
            SymNat::CompareEq(a, b) => {
                if a == b {
                    return Some(true);
                }
                if let (SymNat::Lit(x), SymNat::Lit(y)) = (&**a, &**b) {
                    return Some(x == y);
                }
                let flipped = SymNat::CompareEq(b.clone(), a.clone());
                if let Some(v) = self.lookup(&flipped) {
                    return Some(v);
                }
            }
            _ => {}
        }
        self.lookup(e)
    }

    fn lookup(&self, e: &SymNat) -> Option<bool> {
        self.nats.iter().find(|(k, _)| k == e).map(|(_, v)| *v)
    }
}

pub(crate) type Tree = Result<DecisionTree, SymError>;
pub(crate) type Cont<'a> = &'a mut dyn FnMut(SymStack, &mut Namer, &Facts) -> Tree;
type Decide<'a> = &'a mut dyn FnMut(bool, &mut Namer, &Facts) -> Tree;

/// Splits the tail until at least `depth` cells are known; every empty
/// branch fails.
pub(crate) fn need(
    depth: usize,
    st: SymStack,
    namer: &mut Namer,
    facts: &Facts,
    cont: Cont<'_>,
) -> Tree {
    if st.known.len() >= depth {
        return cont(st, namer, facts);
    }
    let head = namer.var();
    let rest = namer.tail();
    let tail = st.tail;
    let mut next = st;
    next.known.push(SymNat::Var(head));
    next.tail = rest;
    let on_cons = need(depth, next, namer, facts, cont)?;
    Ok(DecisionTree::SplitStack {
        tail,
        on_empty: Box::new(DecisionTree::Fail),
        head,
        rest,
        on_cons: Box::new(on_cons),
    })
}

pub(crate) fn branch_bool(b: SymBool, namer: &mut Namer, facts: &Facts, on: Decide<'_>) -> Tree {
    if let Some(v) = facts.bool_value(&b) {
        return on(v, namer, facts);
    }
    let mut yes = facts.clone();
    yes.assume_bool(b.clone(), true);
    let on_true = on(true, namer, &yes)?;
    let mut no = facts.clone();
    no.assume_bool(b.clone(), false);
    let on_false = on(false, namer, &no)?;
    Ok(DecisionTree::SplitBool {
        cond: b,
        on_true: Box::new(on_true),
        on_false: Box::new(on_false),
    })
}

/// Branches on `e > 0`. A boolean-to-number cell branches on the boolean.
pub(crate) fn branch_positive(e: SymNat, namer: &mut Namer, facts: &Facts, on: Decide<'_>) -> Tree {
    if let Some(v) = facts.positive(&e) {
        return on(v, namer, facts);
    }
    if let SymNat::BoolToNat(b) = e {
        return branch_bool(*b, namer, facts, on);
    }
    let pred = namer.var();
    let mut zero = facts.clone();
    zero.assume_positive(e.clone(), false);
    let on_zero = on(false, namer, &zero)?;
    let mut succ = facts.clone();
    succ.assume_positive(e.clone(), true);
    let on_succ = on(true, namer, &succ)?;
    Ok(DecisionTree::SplitNat {
        expr: e,
        on_zero: Box::new(on_zero),
        pred,
        on_succ: Box::new(on_succ),
    })
}

fn literal_count(e: &SymNat, what: &str) -> Result<usize, SymError> {
    let SymNat::Lit(n) = e else {
        return Err(SymError::unsupported("symbolic multisig count"));
    };
    match n.to_usize() {
        Some(k) if k <= MAX_SYMBOLIC_MULTISIG_COUNT => Ok(k),
        _ => Err(SymError::unsupported(alloc::format!(
            "multisig {what} count {n} above {MAX_SYMBOLIC_MULTISIG_COUNT}"
        ))),
    }
}

/// Unfolds the in-order signature matching as boolean splits.
fn cmp_multi_sigs(
    sigs: &[SymNat],
    pbks: &[SymNat],
    namer: &mut Namer,
    facts: &Facts,
    on: Decide<'_>,
) -> Tree {
    let Some((sig, rest_sigs)) = sigs.split_first() else {
        return on(true, namer, facts);
    };
    let Some((pbk, rest_pbks)) = pbks.split_first() else {
        return on(false, namer, facts);
    };
    let test = SymBool::IsSigned {
        sig: sig.clone(),
        pbk: pbk.clone(),
    };
    branch_bool(test, namer, facts, &mut |ok, namer, facts| {
        if ok {
            cmp_multi_sigs(rest_sigs, rest_pbks, namer, facts, on)
        } else {
            cmp_multi_sigs(sigs, rest_pbks, namer, facts, on)
        }
    })
}

fn multisig(st: SymStack, namer: &mut Namer, facts: &Facts, cont: Cont<'_>) -> Tree {
    need(1, st, namer, facts, &mut |st, namer, facts| {
        let n = literal_count(&st.known[0], "key")?;
        need(n + 2, st, namer, facts, &mut |st, namer, facts| {
            let m = literal_count(&st.known[n + 1], "signature")?;
            let total = n + m + 3;
            need(total, st, namer, facts, &mut |mut st, namer, facts| {
                let cells: Vec<SymNat> = st.known.drain(..total).collect();
                // popped top first; comparison runs in push order
                let pbks: Vec<SymNat> = cells[1..=n].iter().rev().cloned().collect();
                let sigs: Vec<SymNat> = cells[n + 2..n + 2 + m].iter().rev().cloned().collect();
                cmp_multi_sigs(&sigs, &pbks, namer, facts, &mut |ok, namer, facts| {
                    let mut out = st.clone();
                    out.known.insert(0, SymNat::Lit(bool_to_nat(ok)));
                    cont(out, namer, facts)
                })
            })
        })
    })
}

fn pop_top(mut st: SymStack) -> (SymNat, SymStack) {
    let top = st.known.remove(0);
    (top, st)
}

/// Runs one instruction and hands every surviving stack to `cont`.
pub(crate) fn step_then(
    instr: &Instruction,
    st: SymStack,
    namer: &mut Namer,
    facts: &Facts,
    cont: Cont<'_>,
) -> Tree {
    match instr {
        Instruction::Push(n) => {
            let mut st = st;
            st.known.insert(0, SymNat::Lit(n.clone()));
            cont(st, namer, facts)
        }
        Instruction::Dup => need(1, st, namer, facts, &mut |mut st, namer, facts| {
            st.known.insert(0, st.known[0].clone());
            cont(st, namer, facts)
        }),
        Instruction::Hash => need(1, st, namer, facts, &mut |st, namer, facts| {
            let (top, mut st) = pop_top(st);
            st.known.insert(0, SymNat::hash(top));
            cont(st, namer, facts)
        }),
        Instruction::Drop => need(1, st, namer, facts, &mut |st, namer, facts| {
            cont(pop_top(st).1, namer, facts)
        }),
        Instruction::Equal => need(2, st, namer, facts, &mut |st, namer, facts| {
            let (a, st) = pop_top(st);
            let (b, mut st) = pop_top(st);
            st.known.insert(0, SymNat::compare_eq(a, b));
            cont(st, namer, facts)
        }),
        Instruction::Verify => need(1, st, namer, facts, &mut |st, namer, facts| {
            let (top, st) = pop_top(st);
            branch_positive(top, namer, facts, &mut |ok, namer, facts| {
                if ok {
                    cont(st.clone(), namer, facts)
                } else {
                    Ok(DecisionTree::Fail)
                }
            })
        }),
        Instruction::CheckSig => need(2, st, namer, facts, &mut |st, namer, facts| {
            let (pbk, st) = pop_top(st);
            let (sig, mut st) = pop_top(st);
            st.known
                .insert(0, SymNat::bool_to_nat(SymBool::IsSigned { sig, pbk }));
            cont(st, namer, facts)
        }),
        Instruction::CheckLockTimeVerify => need(1, st, namer, facts, &mut |st, namer, facts| {
            let test = SymBool::LeTime(st.known[0].clone());
            branch_bool(test, namer, facts, &mut |ok, namer, facts| {
                if ok {
                    cont(st.clone(), namer, facts)
                } else {
                    Ok(DecisionTree::Fail)
                }
            })
        }),
        Instruction::MultiSig => multisig(st, namer, facts, cont),
    }
}

/// The tree of one instruction on `st`.
pub fn sym_step(
    instr: &Instruction,
    st: SymStack,
    namer: &mut Namer,
) -> Result<DecisionTree, SymError> {
    step_then(instr, st, namer, &Facts::default(), &mut |st, _, _| {
        Ok(DecisionTree::Ok(st))
    })
}

fn run(script: &[Instruction], st: SymStack, namer: &mut Namer, facts: &Facts) -> Tree {
    match script.split_first() {
        None => Ok(DecisionTree::Ok(st)),
        Some((instr, rest)) => step_then(instr, st, namer, facts, &mut |st, namer, facts| {
            run(rest, st, namer, facts)
        }),
    }
}

/// Symbolically evaluates `script` on a fully unknown stack `t0`.
pub fn sym_eval(script: &[Instruction]) -> Result<SymbolicRun, SymError> {
    let mut namer = Namer::default();
    let initial = SymStack {
        known: vec![],
        tail: namer.tail(),
    };
    let tree = run(script, initial.clone(), &mut namer, &Facts::default())?;
    let (next_var, next_tail) = namer.counts();
    Ok(SymbolicRun {
        tree,
        initial,
        next_var,
        next_tail,
    })
}
