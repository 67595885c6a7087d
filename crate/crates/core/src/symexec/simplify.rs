use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::formula::{Atom, Clause, Literal, Prop, Term, WpFormula};

/// Largest disjunction [`formula_to_dnf`] will build.
const MAX_DISJUNCTS: usize = 4096;
/// Largest atom count [`propositionally_equivalent`] enumerates.
const MAX_TABLE_ATOMS: usize = 16;

/// A conjunction of literals over the top `depth` stack slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disjunct {
    pub depth: usize,
    pub literals: BTreeSet<Literal>,
}

impl Disjunct {
    fn is_contradictory(&self) -> bool {
        self.literals
            .iter()
            .any(|l| !l.positive && self.literals.contains(&l.negated()))
    }
}

/// Disjunctive normal form with per-disjunct pattern depths.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dnf {
    pub disjuncts: Vec<Disjunct>,
}

impl Dnf {
    /// One clause per distinct depth, shallowest first. Slot names come from
    /// a clause of `names` with the same depth when there is one.
    pub fn to_formula(&self, names: Option<&WpFormula>) -> WpFormula {
        let mut depths: Vec<usize> = self.disjuncts.iter().map(|d| d.depth).collect();
        depths.sort_unstable();
        depths.dedup();
        let clauses = depths
            .into_iter()
            .map(|depth| {
                let group: Vec<&Disjunct> =
                    self.disjuncts.iter().filter(|d| d.depth == depth).collect();
                let body = Prop::or(
                    group
                        .iter()
                        .map(|d| Prop::and(d.literals.iter().map(Literal::to_prop).collect()))
                        .collect(),
                );
                let slot_names = names
                    .and_then(|f| f.clauses.iter().find(|c| c.depth() == depth))
                    .map(|c| c.names.clone())
                    .unwrap_or_else(|| infer_names(depth, &group));
                Clause {
                    names: slot_names,
                    body,
                }
            })
            .collect();
        WpFormula::new(clauses)
    }
}

fn numbered(base: &str, slots: &[usize]) -> Vec<(usize, String)> {
    if slots.len() == 1 {
        return vec![(slots[0], String::from(base))];
    }
    // deepest slot gets number 1
    let mut sorted = slots.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, format!("{base}{}", i + 1)))
        .collect()
}

fn letter_names(count: usize, taken: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut i = 0usize;
    while out.len() < count {
        let mut name = String::new();
        let mut k = i;
        loop {
            name.insert(0, char::from(b'a' + (k % 26) as u8));
            if k < 26 {
                break;
            }
            k = k / 26 - 1;
        }
        if !taken.contains(&name) && !RESERVED.contains(&name.as_str()) {
            out.push(name);
        }
        i += 1;
    }
    out
}

const RESERVED: &[&str] = &[
    "stack", "rest", "now", "hash", "signed", "locktime", "true", "false",
];

/// Slot names from the roles slots play in signature checks.
fn infer_names(depth: usize, group: &[&Disjunct]) -> Vec<String> {
    let mut pbks = BTreeSet::new();
    let mut sigs = BTreeSet::new();
    let mut mentioned = BTreeSet::new();
    for d in group {
        for l in &d.literals {
            if let Atom::Signed { sig, pbk } = &l.atom {
                if let Term::Var(i) = pbk {
                    pbks.insert(*i);
                }
                if let Term::Var(i) = sig {
                    sigs.insert(*i);
                }
            }
            let mut vars = Vec::new();
            collect_vars(&l.atom, &mut vars);
            mentioned.extend(vars);
        }
    }
    let sigs: Vec<usize> = sigs.difference(&pbks).copied().collect();
    let pbks: Vec<usize> = pbks.into_iter().collect();
    let mut names: Vec<Option<String>> = vec![None; depth];
    if pbks.is_empty() && sigs.is_empty() {
        let letters = if depth == 1 {
            vec![String::from("x")]
        } else {
            letter_names(depth, &[])
        };
        return letters;
    }
    for (slot, name) in numbered("pbk", &pbks)
        .into_iter()
        .chain(numbered("sig", &sigs))
    {
        if slot < depth {
            names[slot] = Some(name);
        }
    }
    let unnamed: Vec<usize> = (0..depth).filter(|s| names[*s].is_none()).collect();
    let (others, unused): (Vec<usize>, Vec<usize>) =
        unnamed.into_iter().partition(|s| mentioned.contains(s));
    if !unused.is_empty() {
        for (slot, name) in numbered("dummy", &unused) {
            names[slot] = Some(name);
        }
    }
    if others.len() == 1 {
        names[others[0]] = Some(String::from("x"));
    } else if !others.is_empty() {
        let taken: Vec<String> = names.iter().flatten().cloned().collect();
        for (slot, name) in others.iter().zip(letter_names(others.len(), &taken)) {
            names[*slot] = Some(name);
        }
    }
    names
        .into_iter()
        .map(|n| n.expect("every slot named"))
        .collect()
}

fn collect_vars(atom: &Atom, out: &mut Vec<usize>) {
    fn term(t: &Term, out: &mut Vec<usize>) {
        match t {
            Term::Var(i) => out.push(*i),
            Term::Hash(a) => term(a, out),
            Term::Lit(_) | Term::Now | Term::LockTime(_) => {}
        }
    }
    match atom {
        Atom::Eq(a, b) | Atom::Signed { sig: a, pbk: b } => {
            term(a, out);
            term(b, out);
        }
        Atom::Positive(t) | Atom::TimeLe(t) => term(t, out),
    }
}

type LitSets = Vec<BTreeSet<Literal>>;

fn prop_dnf(p: &Prop, positive: bool) -> Option<LitSets> {
    match (p, positive) {
        (Prop::True, true) | (Prop::False, false) => Some(vec![BTreeSet::new()]),
        (Prop::True, false) | (Prop::False, true) => Some(Vec::new()),
        (Prop::Atom(a), v) => Some(vec![BTreeSet::from([Literal {
            atom: a.clone(),
            positive: v,
        }])]),
        (Prop::Not(q), v) => prop_dnf(q, !v),
        (Prop::Or(qs), true) | (Prop::And(qs), false) => {
            let mut out = Vec::new();
            for q in qs {
                out.extend(prop_dnf(q, positive)?);
                if out.len() > MAX_DISJUNCTS {
                    return None;
                }
            }
            Some(out)
        }
        (Prop::And(qs), true) | (Prop::Or(qs), false) => {
            let mut acc: LitSets = vec![BTreeSet::new()];
            for q in qs {
                let part = prop_dnf(q, positive)?;
                if acc.len().saturating_mul(part.len()) > MAX_DISJUNCTS {
                    return None;
                }
                let mut next = Vec::with_capacity(acc.len() * part.len());
                for a in &acc {
                    for b in &part {
                        next.push(a.union(b).cloned().collect());
                    }
                }
                acc = next;
            }
            Some(acc)
        }
    }
}

/// `None` when the normal form would be too large.
pub fn formula_to_dnf(f: &WpFormula) -> Option<Dnf> {
    let mut disjuncts = Vec::new();
    for c in &f.clauses {
        for literals in prop_dnf(&c.body, true)? {
            disjuncts.push(Disjunct {
                depth: c.depth(),
                literals,
            });
        }
        if disjuncts.len() > MAX_DISJUNCTS {
            return None;
        }
    }
    Some(Dnf { disjuncts })
}

fn subsumes(small: &Disjunct, big: &Disjunct) -> bool {
    small.depth <= big.depth && small.literals.is_subset(&big.literals)
}

/// The literal `absorber` lets `target` drop, if any.
fn absorbable(absorber: &Disjunct, target: &Disjunct) -> Option<Literal> {
    if absorber.depth > target.depth {
        return None;
    }
    absorber.literals.iter().find_map(|x| {
        let neg = x.negated();
        if !target.literals.contains(&neg) {
            return None;
        }
        let rest_ok = absorber
            .literals
            .iter()
            .filter(|l| *l != x)
            .all(|l| *l != neg && target.literals.contains(l));
        rest_ok.then_some(neg)
    })
}

/// Drops contradictions, duplicates and subsumed disjuncts, and removes
/// literals whose negation another disjunct covers.
pub fn simplify_dnf(dnf: &Dnf) -> Dnf {
    let mut ds: Vec<Disjunct> = Vec::new();
    for d in &dnf.disjuncts {
        if !d.is_contradictory() && !ds.contains(d) {
            ds.push(d.clone());
        }
    }
    loop {
        let mut changed = false;
        'scan: for i in 0..ds.len() {
            for j in 0..ds.len() {
                if i == j {
                    continue;
                }
                if subsumes(&ds[i], &ds[j]) {
                    ds.remove(j);
                    changed = true;
                    break 'scan;
                }
                if let Some(lit) = absorbable(&ds[i], &ds[j]) {
                    ds[j].literals.remove(&lit);
                    changed = true;
                    break 'scan;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Dnf { disjuncts: ds }
}

/// Truth-table comparison treating atoms as independent, at every stack
/// height where the active clauses change. `None` when there are too many
/// atoms; `Some(false)` may be a false negative for semantically related
/// atoms.
pub fn propositionally_equivalent(a: &WpFormula, b: &WpFormula) -> Option<bool> {
    let mut atoms = a.atoms();
    for x in b.atoms() {
        if !atoms.contains(&x) {
            atoms.push(x);
        }
    }
    if atoms.len() > MAX_TABLE_ATOMS {
        return None;
    }
    let mut heights: Vec<usize> = a
        .clauses
        .iter()
        .chain(&b.clauses)
        .map(Clause::depth)
        .collect();
    heights.sort_unstable();
    heights.dedup();
    let holds = |f: &WpFormula, h: usize, bits: u32| {
        f.clauses.iter().any(|c| {
            c.depth() <= h
                && c.body.eval_with(&mut |atom| {
                    let k = atoms
                        .iter()
                        .position(|x| x == atom)
                        .expect("atom collected");
                    bits & (1 << k) != 0
                })
        })
    };
    for h in heights {
        for bits in 0..(1u32 << atoms.len()) {
            if holds(a, h, bits) != holds(b, h, bits) {
                return Some(false);
            }
        }
    }
    Some(true)
}

/// Normalizes to DNF, simplifies and rebuilds, keeping the input's slot
/// names. The input comes back untouched when nothing simplifies or the
/// result cannot be confirmed equivalent.
pub fn simplify_formula(f: &WpFormula) -> WpFormula {
    let Some(dnf) = formula_to_dnf(f) else {
        return f.clone();
    };
    let simplified = simplify_dnf(&dnf);
    if simplified == dnf {
        return f.clone();
    }
    let out = simplified.to_formula(Some(f));
    if propositionally_equivalent(f, &out) == Some(false) {
        return f.clone();
    }
    out
}
