use alloc::vec;
use alloc::vec::Vec;

use super::{DecisionTree, SymBool, SymNat, SymbolicRun};
use crate::nat::{bool_to_nat, compare_naturals, Nat};
use crate::oracle::CryptoOracle;
use crate::vm::{ExecOutcome, Stack, StackState};

/// A decision tree turned back into an executable function on states.
pub struct CompiledTree<'a, O: ?Sized> {
    oracle: &'a O,
    run: &'a SymbolicRun,
}

pub fn compile_tree<'a, O: CryptoOracle + ?Sized>(
    oracle: &'a O,
    run: &'a SymbolicRun,
) -> CompiledTree<'a, O> {
    CompiledTree { oracle, run }
}

struct Env {
    vars: Vec<Option<Nat>>,
    tails: Vec<Option<Stack>>,
}

impl Env {
    fn set_var(&mut self, i: u32, n: Nat) {
        let i = i as usize;
        if self.vars.len() <= i {
            self.vars.resize(i + 1, None);
        }
        self.vars[i] = Some(n);
    }

    fn set_tail(&mut self, i: u32, s: Stack) {
        let i = i as usize;
        if self.tails.len() <= i {
            self.tails.resize(i + 1, None);
        }
        self.tails[i] = Some(s);
    }
}

impl<O: CryptoOracle + ?Sized> CompiledTree<'_, O> {
    fn nat(&self, e: &SymNat, env: &Env, state: &StackState) -> Nat {
        match e {
            SymNat::Var(v) => env.vars[v.0 as usize]
                .clone()
                .expect("variable bound on this path"),
            SymNat::Lit(n) => n.clone(),
            SymNat::Hash(a) => self.oracle.hash(&self.nat(a, env, state)),
            SymNat::CompareEq(a, b) => {
                compare_naturals(&self.nat(a, env, state), &self.nat(b, env, state))
            }
            SymNat::BoolToNat(b) => bool_to_nat(self.boolean(b, env, state)),
            SymNat::Now => state.time.0.clone(),
        }
    }

    fn boolean(&self, b: &SymBool, env: &Env, state: &StackState) -> bool {
        match b {
            SymBool::IsSigned { sig, pbk } => self.oracle.is_signed(
                &state.msg,
                &self.nat(sig, env, state),
                &self.nat(pbk, env, state),
            ),
            SymBool::LeTime(lock) => self.nat(lock, env, state) <= state.time.0,
        }
    }

    pub fn run(&self, state: &StackState) -> ExecOutcome {
        let mut env = Env {
            vars: vec![None; self.run.next_var as usize],
            tails: vec![None; self.run.next_tail as usize],
        };
        env.set_tail(self.run.initial.tail.0, state.stack.clone());
        let mut node = &self.run.tree;
        loop {
            match node {
                DecisionTree::Fail => return ExecOutcome::Failed,
                DecisionTree::Ok(st) => {
                    let mut out = env.tails[st.tail.0 as usize]
                        .clone()
                        .expect("tail bound on this path");
                    for e in st.known.iter().rev() {
                        out.push(self.nat(e, &env, state));
                    }
                    return ExecOutcome::Succeeded(state.with_stack(out));
                }
                DecisionTree::SplitStack {
                    tail,
                    on_empty,
                    head,
                    rest,
                    on_cons,
                } => {
                    let mut s = env.tails[tail.0 as usize]
                        .clone()
                        .expect("tail bound on this path");
                    match s.pop() {
                        None => node = on_empty,
                        Some(top) => {
                            env.set_var(head.0, top);
                            env.set_tail(rest.0, s);
                            node = on_cons;
                        }
                    }
                }
                DecisionTree::SplitNat {
                    expr,
                    on_zero,
                    pred,
                    on_succ,
                } => match self.nat(expr, &env, state).checked_pred() {
                    None => node = on_zero,
                    Some(p) => {
                        env.set_var(pred.0, p);
                        node = on_succ;
                    }
                },
                DecisionTree::SplitBool {
                    cond,
                    on_true,
                    on_false,
                } => {
                    node = if self.boolean(cond, &env, state) {
                        on_true
                    } else {
                        on_false
                    };
                }
            }
        }
    }
}
