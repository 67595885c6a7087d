//! Reference scripts, their weakest preconditions, and the step-by-step
//! intermediate conditions for P2PKH.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::certificate::{CertStep, Certificate, Evidence};
use crate::formula::{Atom, Clause, Prop, Term, WpFormula};
use crate::nat::{bool_to_nat, compare_naturals, Msg, Nat};
use crate::oracle::CryptoOracle;
use crate::vm::{Instruction, Script, Stack};

pub const DEFAULT_PBKH: u64 = 7;
pub const DEFAULT_KEYS: [u64; 4] = [2, 4, 6, 8];
pub const DEFAULT_LOCK_TIME: u64 = 5;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FixtureError {
    #[error("multisig needs fewer required signatures than keys (m = {m}, n = {n})")]
    TooManySignatures { m: Nat, n: usize },
}

pub fn script_p2pkh(pbkh: Nat) -> Script {
    Script::new(vec![
        Instruction::Dup,
        Instruction::Hash,
        Instruction::Push(pbkh),
        Instruction::Equal,
        Instruction::Verify,
        Instruction::CheckSig,
    ])
}

/// P2PKH without the signature check.
pub fn script_p2pkh_faulty(pbkh: Nat) -> Script {
    Script::new(vec![
        Instruction::Dup,
        Instruction::Hash,
        Instruction::Push(pbkh),
        Instruction::Equal,
    ])
}

pub fn op_push_list<I>(values: I) -> Script
where
    I: IntoIterator,
    I::Item: Into<Nat>,
{
    values.into_iter().map(Instruction::push).collect()
}

/// `m k1 .. kn n OP_MULTISIG`; requires `m < n`.
pub fn multisig_script(m: Nat, pbks: &[Nat]) -> Result<Script, FixtureError> {
    if m >= Nat::from(pbks.len()) {
        return Err(FixtureError::TooManySignatures { m, n: pbks.len() });
    }
    let mut instrs = vec![Instruction::Push(m)];
    instrs.extend(pbks.iter().cloned().map(Instruction::Push));
    instrs.push(Instruction::push(pbks.len()));
    instrs.push(Instruction::MultiSig);
    Ok(Script::new(instrs))
}

pub fn multisig24_script(keys: [Nat; 4]) -> Script {
    multisig_script(Nat::from(2u64), &keys).expect("2 < 4")
}

pub fn check_time_script(lock: Nat) -> Script {
    Script::new(vec![
        Instruction::Push(lock),
        Instruction::CheckLockTimeVerify,
        Instruction::Drop,
    ])
}

pub fn combined_script(lock: Nat, keys: [Nat; 4]) -> Script {
    check_time_script(lock).concat(&multisig24_script(keys))
}

fn signed(sig: usize, pbk: usize) -> Prop {
    Prop::atom(Atom::signed(Term::var(sig), Term::var(pbk)))
}

fn hash_is(slot: usize, digest: Nat) -> Prop {
    Prop::atom(Atom::eq(Term::hash(Term::var(slot)), Term::Lit(digest)))
}

/// `stack = x :: rest => x > 0`
pub fn accept_formula() -> WpFormula {
    WpFormula::single(Clause::new(["x"], Prop::atom(Atom::Positive(Term::var(0)))))
}

pub fn wp_p2pkh(pbkh: Nat) -> WpFormula {
    WpFormula::single(Clause::new(
        ["pbk", "sig"],
        Prop::And(vec![hash_is(0, pbkh), signed(1, 0)]),
    ))
}

pub fn wp_faulty(pbkh: Nat) -> WpFormula {
    WpFormula::single(Clause::new(["pbk"], hash_is(0, pbkh)))
}

pub fn accept1() -> WpFormula {
    WpFormula::single(Clause::new(["pbk", "sig"], signed(1, 0)))
}

pub fn accept2() -> WpFormula {
    WpFormula::single(Clause::new(
        ["x", "pbk", "sig"],
        Prop::And(vec![Prop::atom(Atom::Positive(Term::var(0))), signed(2, 1)]),
    ))
}

pub fn accept3() -> WpFormula {
    WpFormula::single(Clause::new(
        ["pbkh2", "pbkh1", "pbk", "sig"],
        Prop::And(vec![
            Prop::atom(Atom::eq(Term::var(0), Term::var(1))),
            signed(3, 2),
        ]),
    ))
}

pub fn accept4(pbkh: Nat) -> WpFormula {
    WpFormula::single(Clause::new(
        ["pbkh2", "pbk", "sig"],
        Prop::And(vec![
            Prop::atom(Atom::eq(Term::var(0), Term::Lit(pbkh))),
            signed(2, 1),
        ]),
    ))
}

pub fn accept5(pbkh: Nat) -> WpFormula {
    WpFormula::single(Clause::new(
        ["pbk1", "pbk", "sig"],
        Prop::And(vec![hash_is(0, pbkh), signed(2, 1)]),
    ))
}

/// Two signatures matching two of four keys in key order. The deeper slot
/// holds the first signature.
pub fn wp_multisig24(keys: [Nat; 4]) -> WpFormula {
    let mut pairs = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            pairs.push(Prop::And(vec![
                Prop::atom(Atom::signed(Term::var(0), Term::Lit(keys[j].clone()))),
                Prop::atom(Atom::signed(Term::var(1), Term::Lit(keys[i].clone()))),
            ]));
        }
    }
    WpFormula::single(Clause::new(["sig2", "sig1", "dummy"], Prop::Or(pairs)))
}

/// `locktime t <= now` on any stack.
pub fn time_check_pre(lock: Nat) -> WpFormula {
    WpFormula::single(Clause::new::<&str>(
        [],
        Prop::atom(Atom::TimeLe(Term::Lit(lock))),
    ))
}

pub fn wp_time_lock(lock: Nat) -> WpFormula {
    time_check_pre(lock).and(&accept_formula())
}

pub fn wp_combined(lock: Nat, keys: [Nat; 4]) -> WpFormula {
    time_check_pre(lock).and(&wp_multisig24(keys))
}

/// The hand-decoded P2PKH function.
pub fn p2pkh_decoded<O: CryptoOracle + ?Sized>(
    oracle: &O,
    pbkh: &Nat,
    msg: &Msg,
    stack: &Stack,
) -> Option<Stack> {
    let mut rest = stack.clone();
    let pbk = rest.pop()?;
    let cmp = compare_naturals(pbkh, &oracle.hash(&pbk));
    decoded_aux(oracle, &pbk, msg, rest, cmp)
}

fn decoded_aux<O: CryptoOracle + ?Sized>(
    oracle: &O,
    pbk: &Nat,
    msg: &Msg,
    mut rest: Stack,
    cmp: Nat,
) -> Option<Stack> {
    let sig = rest.pop()?;
    if cmp.is_zero() {
        return None;
    }
    rest.push(bool_to_nat(oracle.is_signed(msg, &sig, pbk)));
    Some(rest)
}

fn single_step(pre: WpFormula, instr: Instruction, post: WpFormula) -> CertStep {
    CertStep {
        pre,
        segment: Script::new(vec![instr]),
        post,
        evidence: Evidence::Enumerated,
    }
}

/// One iff-step per P2PKH instruction, from the full precondition down to
/// acceptance.
pub fn step_by_step_p2pkh_certificate(pbkh: Nat) -> Certificate {
    Certificate {
        steps: vec![
            single_step(
                wp_p2pkh(pbkh.clone()),
                Instruction::Dup,
                accept5(pbkh.clone()),
            ),
            single_step(
                accept5(pbkh.clone()),
                Instruction::Hash,
                accept4(pbkh.clone()),
            ),
            single_step(accept4(pbkh.clone()), Instruction::Push(pbkh), accept3()),
            single_step(accept3(), Instruction::Equal, accept2()),
            single_step(accept2(), Instruction::Verify, accept1()),
            single_step(accept1(), Instruction::CheckSig, accept_formula()),
        ],
        final_post: accept_formula(),
    }
}

/// Time check first, then the 2-of-4 multisig.
pub fn combined_certificate(lock: Nat, keys: [Nat; 4]) -> Certificate {
    Certificate {
        steps: vec![
            CertStep {
                pre: wp_combined(lock.clone(), keys.clone()),
                segment: check_time_script(lock),
                post: wp_multisig24(keys.clone()),
                evidence: Evidence::Enumerated,
            },
            CertStep {
                pre: wp_multisig24(keys.clone()),
                segment: multisig24_script(keys),
                post: accept_formula(),
                evidence: Evidence::Symbolic,
            },
        ],
        final_post: accept_formula(),
    }
}

/// A script with its published weakest precondition for acceptance.
#[derive(Clone, Debug)]
pub struct FixtureEntry {
    pub name: String,
    pub script: Script,
    pub wp: WpFormula,
    pub notes: String,
}

fn entry(name: &str, script: Script, wp: WpFormula, notes: &str) -> FixtureEntry {
    FixtureEntry {
        name: name.into(),
        script,
        wp,
        notes: notes.into(),
    }
}

pub fn default_keys() -> [Nat; 4] {
    DEFAULT_KEYS.map(Nat::from)
}

pub fn fixture_corpus() -> Vec<FixtureEntry> {
    let h = Nat::from(DEFAULT_PBKH);
    let t = Nat::from(DEFAULT_LOCK_TIME);
    let drop3 = Script::new(vec![Instruction::Drop; 3]);
    let drop3_wp = WpFormula::single(Clause::new(
        ["a", "b", "c", "d"],
        Prop::atom(Atom::Positive(Term::var(3))),
    ));
    vec![
        entry(
            "p2pkh",
            script_p2pkh(h.clone()),
            wp_p2pkh(h.clone()),
            "pay to public key hash",
        ),
        entry(
            "p2pkh-faulty",
            script_p2pkh_faulty(h.clone()),
            wp_faulty(h),
            "hash check only; accepts a copied public key",
        ),
        entry(
            "drop3",
            drop3,
            drop3_wp,
            "three drops: fourth cell must be positive",
        ),
        entry(
            "p2ms-2-of-4",
            multisig24_script(default_keys()),
            wp_multisig24(default_keys()),
            "two signatures in key order",
        ),
        entry(
            "timelock",
            check_time_script(t.clone()),
            wp_time_lock(t.clone()),
            "lock time then accept",
        ),
        entry(
            "combined",
            combined_script(t.clone(), default_keys()),
            wp_combined(t, default_keys()),
            "time check followed by 2-of-4 multisig",
        ),
        entry(
            "empty",
            Script::empty(),
            accept_formula(),
            "acceptance itself",
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ToyOracle;
    use crate::parser::render_script;
    use crate::vm::{eval_script, ExecOutcome, StackState};

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn p2pkh_shape() {
        let s = script_p2pkh(n(42));
        assert_eq!(s.len(), 6);
        assert_eq!(s[2], Instruction::push(42u64));
        assert_eq!(
            render_script(&s),
            "OP_DUP OP_HASH 42 OP_EQUAL OP_VERIFY OP_CHECKSIG"
        );
        assert_ne!(script_p2pkh(n(0)), script_p2pkh(n(1)));
        let faulty = script_p2pkh_faulty(n(42));
        assert_eq!(faulty.len(), 4);
        assert!(!faulty.contains(&Instruction::CheckSig));
        assert_eq!(&s[..4], &faulty[..]);
    }

    #[test]
    fn push_lists() {
        assert!(op_push_list(Vec::<u64>::new()).is_empty());
        assert_eq!(
            op_push_list([1u64, 2]),
            Script::new(vec![Instruction::push(1u64), Instruction::push(2u64)])
        );
        let o = ToyOracle::default();
        let out = eval_script(&o, &op_push_list([1u64, 2]), StackState::default());
        assert_eq!(out.state().unwrap().stack, Stack::from_top([2u64, 1]));
    }

    #[test]
    fn multisig_construction() {
        let keys = [n(11), n(12), n(13), n(14)];
        let s = multisig_script(n(2), &keys).unwrap();
        let mut expect = vec![Instruction::push(2u64)];
        expect.extend(keys.iter().cloned().map(Instruction::Push));
        expect.extend([Instruction::push(4u64), Instruction::MultiSig]);
        assert_eq!(s, Script::new(expect));
        assert!(multisig_script(n(2), &keys[..2]).is_err());
        for m in 0..4u64 {
            assert_eq!(multisig_script(n(m), &keys).unwrap().len(), keys.len() + 3);
        }
    }

    #[test]
    fn time_scripts() {
        let o = ToyOracle::default();
        let s = check_time_script(n(5));
        assert_eq!(s.len(), 3);
        let ok = eval_script(&o, &s, StackState::new(9, 0, Stack::from_top([7u64])));
        assert_eq!(
            ok,
            ExecOutcome::Succeeded(StackState::new(9, 0, Stack::from_top([7u64])))
        );
        let bad = eval_script(&o, &s, StackState::new(3, 0, Stack::from_top([7u64])));
        assert_eq!(bad, ExecOutcome::Failed);
        assert_eq!(combined_script(n(5), default_keys()).len(), 10);
    }

    #[test]
    fn formula_shapes() {
        let o = ToyOracle::default();
        let short = StackState::new(0, 10, Stack::from_top([3u64]));
        assert!(!wp_p2pkh(n(7)).eval(&o, &short));
        assert!(!wp_p2pkh(n(7)).eval(&o, &StackState::default()));
        let Prop::Or(pairs) = &wp_multisig24(default_keys()).clauses[0].body else {
            panic!("multisig precondition is a disjunction");
        };
        assert_eq!(pairs.len(), 6);
        // accept2 without its positivity conjunct is accept1 one cell down
        let Prop::And(parts) = &accept2().clauses[0].body else {
            panic!()
        };
        let shifted = parts[1].map_atoms(&|a| a.map_vars(&|v| v - 1));
        assert_eq!(shifted, accept1().clauses[0].body);
    }

    #[test]
    fn decoded_examples() {
        let o = ToyOracle::default();
        assert_eq!(
            p2pkh_decoded(&o, &n(7), &Msg::from(10), &Stack::new()),
            None
        );
        assert_eq!(
            p2pkh_decoded(&o, &n(7), &Msg::from(10), &Stack::from_top([3u64, 13, 5])),
            Some(Stack::from_top([1u64, 5]))
        );
    }

    #[test]
    fn certificate_segments_concatenate() {
        let cert = step_by_step_p2pkh_certificate(n(7));
        assert_eq!(cert.steps.len(), 6);
        let whole = cert
            .steps
            .iter()
            .fold(Script::empty(), |acc, s| acc.concat(&s.segment));
        assert_eq!(whole, script_p2pkh(n(7)));
        let comb = combined_certificate(n(5), default_keys());
        let whole = comb.steps[0].segment.concat(&comb.steps[1].segment);
        assert_eq!(whole, combined_script(n(5), default_keys()));
    }
}
