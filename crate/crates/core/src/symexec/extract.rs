use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::engine::{Facts, Namer};
use super::simplify::{Disjunct, Dnf};
use super::{
    DecisionTree, PathAtom, PathSummary, SymBool, SymError, SymNat, SymStack, SymbolicRun, TailId,
    VarId,
};
use crate::formula::{Atom, Clause, Literal, Prop, Term, WpFormula};

/// A formula atom after substituting the stack cells it talks about.
enum Cond {
    Positive(SymNat),
    Bool(SymBool),
}

fn sym_of(t: &Term, binding: &[SymNat]) -> Result<SymNat, SymError> {
    Ok(match t {
        Term::Var(i) => binding
            .get(*i)
            .cloned()
            .ok_or_else(|| SymError::unsupported("postcondition slot outside its pattern"))?,
        Term::Lit(n) | Term::LockTime(n) => SymNat::Lit(n.clone()),
        Term::Hash(inner) => SymNat::hash(sym_of(inner, binding)?),
        Term::Now => SymNat::Now,
    })
}

fn cond_of(atom: &Atom, binding: &[SymNat]) -> Result<Cond, SymError> {
    Ok(match atom {
        Atom::Eq(a, b) => {
            Cond::Positive(SymNat::compare_eq(sym_of(a, binding)?, sym_of(b, binding)?))
        }
        Atom::Signed { sig, pbk } => Cond::Bool(SymBool::IsSigned {
            sig: sym_of(sig, binding)?,
            pbk: sym_of(pbk, binding)?,
        }),
        Atom::Positive(t) => Cond::Positive(sym_of(t, binding)?),
        Atom::TimeLe(t) => Cond::Bool(SymBool::LeTime(sym_of(t, binding)?)),
    })
}

fn decided(cond: &Cond, facts: &Facts) -> Option<bool> {
    match cond {
        Cond::Positive(e) => facts.positive(e),
        Cond::Bool(b) => facts.bool_value(b),
    }
}

/// Kleene evaluation; `None` is unknown.
fn eval3(p: &Prop, val: &mut dyn FnMut(&Atom) -> Option<bool>) -> Option<bool> {
    match p {
        Prop::True => Some(true),
        Prop::False => Some(false),
        Prop::Atom(a) => val(a),
        Prop::Not(q) => eval3(q, val).map(|v| !v),
        Prop::And(qs) => {
            let mut unknown = false;
            for q in qs {
                match eval3(q, val) {
                    Some(false) => return Some(false),
                    None => unknown = true,
                    Some(true) => {}
                }
            }
            if unknown {
                None
            } else {
                Some(true)
            }
        }
        Prop::Or(qs) => {
            let mut unknown = false;
            for q in qs {
                match eval3(q, val) {
                    Some(true) => return Some(true),
                    None => unknown = true,
                    Some(false) => {}
                }
            }
            if unknown {
                None
            } else {
                Some(false)
            }
        }
    }
}

struct Walker<'a> {
    post: &'a WpFormula,
    namer: Namer,
    out: Vec<PathSummary>,
}

impl Walker<'_> {
    fn tree(
        &mut self,
        t: &DecisionTree,
        path: &mut Vec<PathAtom>,
        facts: &Facts,
    ) -> Result<(), SymError> {
        match t {
            DecisionTree::Fail => Ok(()),
            DecisionTree::Ok(st) => {
                for clause in &self.post.clauses {
                    self.clause(clause, st.clone(), path, facts)?;
                }
                Ok(())
            }
            DecisionTree::SplitStack {
                tail,
                on_empty,
                head,
                rest,
                on_cons,
            } => {
                path.push(PathAtom::StackEmpty(*tail));
                self.tree(on_empty, path, facts)?;
                path.pop();
                path.push(PathAtom::StackCons {
                    tail: *tail,
                    head: *head,
                    rest: *rest,
                });
                self.tree(on_cons, path, facts)?;
                path.pop();
                Ok(())
            }
            DecisionTree::SplitNat {
                expr,
                on_zero,
                pred,
                on_succ,
            } => {
                let mut f = facts.clone();
                f.assume_positive(expr.clone(), false);
                path.push(PathAtom::NatIsZero(expr.clone()));
                self.tree(on_zero, path, &f)?;
                path.pop();
                let mut f = facts.clone();
                f.assume_positive(expr.clone(), true);
                path.push(PathAtom::NatIsSucc(expr.clone(), *pred));
                self.tree(on_succ, path, &f)?;
                path.pop();
                Ok(())
            }
            DecisionTree::SplitBool {
                cond,
                on_true,
                on_false,
            } => {
                for (v, sub) in [(true, on_true), (false, on_false)] {
                    let mut f = facts.clone();
                    f.assume_bool(cond.clone(), v);
                    path.push(PathAtom::BoolIs(cond.clone(), v));
                    self.tree(sub, path, &f)?;
                    path.pop();
                }
                Ok(())
            }
        }
    }

    fn clause(
        &mut self,
        clause: &Clause,
        mut st: SymStack,
        path: &[PathAtom],
        facts: &Facts,
    ) -> Result<(), SymError> {
        let mut path = path.to_vec();
        // a missing cell means the clause cannot match on this branch
        while st.known.len() < clause.depth() {
            let head = self.namer.var();
            let rest = self.namer.tail();
            path.push(PathAtom::StackCons {
                tail: st.tail,
                head,
                rest,
            });
            st.known.push(SymNat::Var(head));
            st.tail = rest;
        }
        let binding: Vec<SymNat> = st.known[..clause.depth()].to_vec();
        self.solve(&clause.body, &binding, &st, &mut path, facts)
    }

    fn solve(
        &mut self,
        body: &Prop,
        binding: &[SymNat],
        st: &SymStack,
        path: &mut Vec<PathAtom>,
        facts: &Facts,
    ) -> Result<(), SymError> {
        let mut first_unknown: Option<Cond> = None;
        let mut failure = None;
        let verdict = eval3(body, &mut |a| match cond_of(a, binding) {
            Ok(c) => {
                let v = decided(&c, facts);
                if v.is_none() && first_unknown.is_none() {
                    first_unknown = Some(c);
                }
                v
            }
            Err(e) => {
                failure = Some(e);
                Some(false)
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        match verdict {
            Some(true) => {
                self.out.push(PathSummary {
                    atoms: path.clone(),
                    result: st.clone(),
                });
                Ok(())
            }
            Some(false) => Ok(()),
            None => {
                let cond = first_unknown.expect("an undecided atom exists");
                self.split(cond, body, binding, st, path, facts)
            }
        }
    }

    fn split(
        &mut self,
        cond: Cond,
        body: &Prop,
        binding: &[SymNat],
        st: &SymStack,
        path: &mut Vec<PathAtom>,
        facts: &Facts,
    ) -> Result<(), SymError> {
        let cond = match cond {
            Cond::Positive(SymNat::BoolToNat(b)) => Cond::Bool(*b),
            other => other,
        };
        match cond {
            Cond::Bool(b) => {
                for v in [true, false] {
                    let mut f = facts.clone();
                    f.assume_bool(b.clone(), v);
                    path.push(PathAtom::BoolIs(b.clone(), v));
                    self.solve(body, binding, st, path, &f)?;
                    path.pop();
                }
                Ok(())
            }
            Cond::Positive(e) => {
                let pred = self.namer.var();
                for v in [true, false] {
                    let mut f = facts.clone();
                    f.assume_positive(e.clone(), v);
                    path.push(if v {
                        PathAtom::NatIsSucc(e.clone(), pred)
                    } else {
                        PathAtom::NatIsZero(e.clone())
                    });
                    self.solve(body, binding, st, path, &f)?;
                    path.pop();
                }
                Ok(())
            }
        }
    }
}

/// Accepting paths of `run` for the postcondition `post`. Leaves are
/// refined further (stack splits, positivity and boolean splits) until
/// each clause of `post` is decided.
pub fn extract_paths(run: &SymbolicRun, post: &WpFormula) -> Result<Vec<PathSummary>, SymError> {
    let mut w = Walker {
        post,
        namer: Namer::new(run.next_var, run.next_tail),
        out: Vec::new(),
    };
    w.tree(&run.tree, &mut Vec::new(), &Facts::default())?;
    Ok(w.out)
}

pub fn extract_accept_paths(run: &SymbolicRun) -> Result<Vec<PathSummary>, SymError> {
    extract_paths(run, &crate::fixtures::accept_formula())
}

fn term_of(e: &SymNat, slots: &BTreeMap<VarId, usize>) -> Result<Term, SymError> {
    Ok(match e {
        SymNat::Var(v) => Term::Var(*slots.get(v).ok_or_else(|| {
            SymError::unsupported("path mentions a cell that is not an input slot")
        })?),
        SymNat::Lit(n) => Term::Lit(n.clone()),
        SymNat::Hash(a) => Term::hash(term_of(a, slots)?),
        SymNat::Now => Term::Now,
        SymNat::CompareEq(..) | SymNat::BoolToNat(_) => {
            return Err(SymError::unsupported(alloc::format!(
                "nested comparison {e} in a path condition"
            )))
        }
    })
}

fn bool_literal(b: &SymBool, v: bool, slots: &BTreeMap<VarId, usize>) -> Result<Literal, SymError> {
    let atom = match b {
        SymBool::IsSigned { sig, pbk } => Atom::signed(term_of(sig, slots)?, term_of(pbk, slots)?),
        SymBool::LeTime(lock) => Atom::TimeLe(term_of(lock, slots)?),
    };
    Ok(Literal { atom, positive: v })
}

fn positivity_literal(
    e: &SymNat,
    v: bool,
    slots: &BTreeMap<VarId, usize>,
) -> Result<Literal, SymError> {
    match e {
        SymNat::CompareEq(a, b) => Ok(Literal {
            atom: Atom::eq(term_of(a, slots)?, term_of(b, slots)?),
            positive: v,
        }),
        SymNat::BoolToNat(b) => bool_literal(b, v, slots),
        other => Ok(Literal {
            atom: Atom::Positive(term_of(other, slots)?),
            positive: v,
        }),
    }
}

fn path_disjunct(path: &PathSummary, root: TailId) -> Result<Disjunct, SymError> {
    let mut cons: BTreeMap<TailId, (VarId, TailId)> = BTreeMap::new();
    for a in &path.atoms {
        match a {
            PathAtom::StackCons { tail, head, rest } => {
                cons.insert(*tail, (*head, *rest));
            }
            PathAtom::StackEmpty(_) => {
                return Err(SymError::unsupported(
                    "accepting path requires an empty stack",
                ));
            }
            _ => {}
        }
    }
    let mut slots = BTreeMap::new();
    let mut t = root;
    while let Some((head, rest)) = cons.get(&t) {
        slots.insert(*head, slots.len());
        t = *rest;
    }
    let mut literals = BTreeSet::new();
    for a in &path.atoms {
        let lit = match a {
            PathAtom::StackCons { .. } | PathAtom::StackEmpty(_) => continue,
            PathAtom::NatIsZero(e) => positivity_literal(e, false, &slots)?,
            PathAtom::NatIsSucc(e, _) => positivity_literal(e, true, &slots)?,
            PathAtom::BoolIs(b, v) => bool_literal(b, *v, &slots)?,
        };
        literals.insert(lit);
    }
    Ok(Disjunct {
        depth: slots.len(),
        literals,
    })
}

/// One disjunct per path: the input-stack depth the path inspects, and its
/// decisions as literals.
pub fn paths_to_dnf(paths: &[PathSummary], root: TailId) -> Result<Dnf, SymError> {
    let disjuncts = paths
        .iter()
        .map(|p| path_disjunct(p, root))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dnf { disjuncts })
}

/// Unsimplified disjunction of path conditions, with inferred slot names.
pub fn paths_to_formula(paths: &[PathSummary], root: TailId) -> Result<WpFormula, SymError> {
    Ok(paths_to_dnf(paths, root)?.to_formula(None))
}
