//! Concrete operational semantics of the non-branching opcode subset.
//!
//! Every opcode is a partial function on stacks (`None` is failure). Scripts
//! compose these sequentially; the first failure aborts the whole script.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use crate::nat::{bool_to_nat, compare_naturals, Msg, Nat, Time};
use crate::oracle::CryptoOracle;

/// A stack of naturals. Index 0 is the top.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stack {
    // bottom first, so the top is the end of the vector
    items: Vec<Nat>,
}

impl Stack {
    pub fn new() -> Self {
        Stack::default()
    }

    /// Builds a stack from elements listed top first.
    pub fn from_top<I>(items: I) -> Self
    where
        I: IntoIterator,
        I::Item: Into<Nat>,
    {
        let mut items: Vec<Nat> = items.into_iter().map(Into::into).collect();
        items.reverse();
        Stack { items }
    }

    pub fn height(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn top(&self) -> Option<&Nat> {
        self.items.last()
    }

    /// The element `depth` positions below the top (0 = top).
    pub fn get(&self, depth: usize) -> Option<&Nat> {
        let len = self.items.len();
        if depth < len {
            Some(&self.items[len - 1 - depth])
        } else {
            None
        }
    }

    pub fn push(&mut self, n: Nat) {
        self.items.push(n);
    }

    pub fn pop(&mut self) -> Option<Nat> {
        self.items.pop()
    }

    /// Elements top first.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Nat> + ExactSizeIterator {
        self.items.iter().rev()
    }

    pub fn to_top_vec(&self) -> Vec<Nat> {
        self.iter().cloned().collect()
    }

    /// Appends `below` underneath the current bottom element.
    pub fn extend_below(&mut self, below: &Stack) {
        let mut items = below.items.clone();
        items.append(&mut self.items);
        self.items = items;
    }
}

impl fmt::Display for Stack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, n) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Stack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The machine state. Only `stack` changes during evaluation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct StackState {
    pub time: Time,
    pub msg: Msg,
    pub stack: Stack,
}

impl StackState {
    pub fn new(time: impl Into<Time>, msg: impl Into<Msg>, stack: Stack) -> Self {
        StackState {
            time: time.into(),
            msg: msg.into(),
            stack,
        }
    }

    pub fn with_stack(&self, stack: Stack) -> Self {
        StackState {
            time: self.time.clone(),
            msg: self.msg.clone(),
            stack,
        }
    }
}

impl fmt::Display for StackState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "time={} msg={} stack={}",
            self.time, self.msg, self.stack
        )
    }
}

/// Result of running an instruction or script.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExecOutcome {
    Failed,
    Succeeded(StackState),
}

impl ExecOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, ExecOutcome::Succeeded(_))
    }

    pub fn state(&self) -> Option<&StackState> {
        match self {
            ExecOutcome::Failed => None,
            ExecOutcome::Succeeded(s) => Some(s),
        }
    }

    pub fn into_state(self) -> Option<StackState> {
        match self {
            ExecOutcome::Failed => None,
            ExecOutcome::Succeeded(s) => Some(s),
        }
    }

    pub fn and_then(self, f: impl FnOnce(StackState) -> ExecOutcome) -> ExecOutcome {
        match self {
            ExecOutcome::Failed => ExecOutcome::Failed,
            ExecOutcome::Succeeded(s) => f(s),
        }
    }
}

impl From<Option<StackState>> for ExecOutcome {
    fn from(o: Option<StackState>) -> Self {
        match o {
            None => ExecOutcome::Failed,
            Some(s) => ExecOutcome::Succeeded(s),
        }
    }
}

impl fmt::Display for ExecOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecOutcome::Failed => f.write_str("Failed"),
            ExecOutcome::Succeeded(s) => write!(f, "Succeeded: {}", s.stack),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Instruction {
    Dup,
    Hash,
    Equal,
    Verify,
    CheckSig,
    CheckLockTimeVerify,
    Drop,
    MultiSig,
    Push(Nat),
}

impl Instruction {
    pub fn push(n: impl Into<Nat>) -> Self {
        Instruction::Push(n.into())
    }
}

impl fmt::Display for Instruction {
    /// Canonical token form; pushes render as bare decimals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Dup => f.write_str("OP_DUP"),
            Instruction::Hash => f.write_str("OP_HASH"),
            Instruction::Equal => f.write_str("OP_EQUAL"),
            Instruction::Verify => f.write_str("OP_VERIFY"),
            Instruction::CheckSig => f.write_str("OP_CHECKSIG"),
            Instruction::CheckLockTimeVerify => f.write_str("OP_CHECKLOCKTIMEVERIFY"),
            Instruction::Drop => f.write_str("OP_DROP"),
            Instruction::MultiSig => f.write_str("OP_MULTISIG"),
            Instruction::Push(n) => write!(f, "{n}"),
        }
    }
}

/// A finite instruction sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Script(Vec<Instruction>);

impl Script {
    pub fn new(instrs: Vec<Instruction>) -> Self {
        Script(instrs)
    }

    pub fn empty() -> Self {
        Script(Vec::new())
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.0
    }

    pub fn into_instructions(self) -> Vec<Instruction> {
        self.0
    }

    /// `self ++ other`.
    pub fn concat(&self, other: &Script) -> Script {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Script(v)
    }

    /// The literals this script pushes, in order.
    pub fn pushed_constants(&self) -> impl Iterator<Item = &Nat> {
        self.0.iter().filter_map(|i| match i {
            Instruction::Push(n) => Some(n),
            _ => None,
        })
    }
}

impl Deref for Script {
    type Target = [Instruction];
    fn deref(&self) -> &[Instruction] {
        &self.0
    }
}

impl FromIterator<Instruction> for Script {
    fn from_iter<T: IntoIterator<Item = Instruction>>(iter: T) -> Self {
        Script(iter.into_iter().collect())
    }
}

impl IntoIterator for Script {
    type Item = Instruction;
    type IntoIter = alloc::vec::IntoIter<Instruction>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a Script {
    type Item = &'a Instruction;
    type IntoIter = core::slice::Iter<'a, Instruction>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl From<Vec<Instruction>> for Script {
    fn from(v: Vec<Instruction>) -> Self {
        Script(v)
    }
}

// ---- per-opcode stack functions ----

pub fn execute_dup(mut stack: Stack) -> Option<Stack> {
    let top = stack.top()?.clone();
    stack.push(top);
    Some(stack)
}

pub fn execute_hash<O: CryptoOracle + ?Sized>(oracle: &O, mut stack: Stack) -> Option<Stack> {
    let top = stack.pop()?;
    stack.push(oracle.hash(&top));
    Some(stack)
}

pub fn execute_equal(mut stack: Stack) -> Option<Stack> {
    if stack.height() < 2 {
        return None;
    }
    let a = stack.pop()?;
    let b = stack.pop()?;
    stack.push(compare_naturals(&a, &b));
    Some(stack)
}

pub fn execute_verify(mut stack: Stack) -> Option<Stack> {
    let top = stack.pop()?;
    top.is_positive().then_some(stack)
}

pub fn execute_drop(mut stack: Stack) -> Option<Stack> {
    stack.pop()?;
    Some(stack)
}

pub fn execute_push(n: Nat, mut stack: Stack) -> Option<Stack> {
    stack.push(n);
    Some(stack)
}

/// Public key on top, signature beneath.
pub fn execute_check_sig<O: CryptoOracle + ?Sized>(
    oracle: &O,
    msg: &Msg,
    mut stack: Stack,
) -> Option<Stack> {
    if stack.height() < 2 {
        return None;
    }
    let pbk = stack.pop()?;
    let sig = stack.pop()?;
    stack.push(bool_to_nat(oracle.is_signed(msg, &sig, &pbk)));
    Some(stack)
}

/// Fails when the stack is empty or the lock on top lies in the future.
/// The inspected element stays on the stack.
pub fn execute_check_lock_time(time: &Time, stack: Stack) -> Option<Stack> {
    let lock = stack.top()?;
    (*lock <= time.0).then_some(stack)
}

/// Signatures must match public keys in order; a failed test skips the key
/// and retries the same signature against the next one.
pub fn cmp_multi_sigs<O: CryptoOracle + ?Sized>(
    oracle: &O,
    msg: &Msg,
    sigs: &[Nat],
    pbks: &[Nat],
) -> bool {
    let (mut sigs, mut pbks) = (sigs, pbks);
    loop {
        let Some((sig, rest_sigs)) = sigs.split_first() else {
            return true;
        };
        let Some((pbk, rest_pbks)) = pbks.split_first() else {
            return false;
        };
        if oracle.is_signed(msg, sig, pbk) {
            sigs = rest_sigs;
        }
        pbks = rest_pbks;
    }
}

fn pop_counted(stack: &mut Stack) -> Option<Vec<Nat>> {
    let count = stack.pop()?.to_usize()?;
    if count > stack.height() {
        return None;
    }
    let mut items: Vec<Nat> = (0..count).map(|_| stack.pop()).collect::<Option<_>>()?;
    // popped last-pushed first; restore push order
    items.reverse();
    Some(items)
}

/// Stack layout from the top: `n, pbk_n .. pbk_1, m, sig_m .. sig_1, dummy`.
pub fn execute_multisig<O: CryptoOracle + ?Sized>(
    oracle: &O,
    msg: &Msg,
    mut stack: Stack,
) -> Option<Stack> {
    let pbks = pop_counted(&mut stack)?;
    let sigs = pop_counted(&mut stack)?;
    stack.pop()?; // dummy
    stack.push(bool_to_nat(cmp_multi_sigs(oracle, msg, &sigs, &pbks)));
    Some(stack)
}

// ---- lifting to states and scripts ----

/// Runs the opcode's stack function with the state's time and message.
pub fn eval_instr<O: CryptoOracle + ?Sized>(
    oracle: &O,
    instr: &Instruction,
    state: StackState,
) -> ExecOutcome {
    let StackState { time, msg, stack } = state;
    let next = match instr {
        Instruction::Dup => execute_dup(stack),
        Instruction::Hash => execute_hash(oracle, stack),
        Instruction::Equal => execute_equal(stack),
        Instruction::Verify => execute_verify(stack),
        Instruction::CheckSig => execute_check_sig(oracle, &msg, stack),
        Instruction::CheckLockTimeVerify => execute_check_lock_time(&time, stack),
        Instruction::Drop => execute_drop(stack),
        Instruction::MultiSig => execute_multisig(oracle, &msg, stack),
        Instruction::Push(n) => execute_push(n.clone(), stack),
    };
    next.map(|stack| StackState { time, msg, stack }).into()
}

pub fn eval_script<O: CryptoOracle + ?Sized>(
    oracle: &O,
    script: &[Instruction],
    state: StackState,
) -> ExecOutcome {
    let mut state = state;
    for instr in script {
        match eval_instr(oracle, instr, state) {
            ExecOutcome::Failed => return ExecOutcome::Failed,
            ExecOutcome::Succeeded(next) => state = next,
        }
    }
    ExecOutcome::Succeeded(state)
}

/// Kleisli extension: a failed prior outcome stays failed.
pub fn eval_script_from_outcome<O: CryptoOracle + ?Sized>(
    oracle: &O,
    script: &[Instruction],
    prior: ExecOutcome,
) -> ExecOutcome {
    prior.and_then(|s| eval_script(oracle, script, s))
}

/// Runs `unlock` on the empty initial state, then `lock` on its result, and
/// reports whether the final state is accepting.
pub fn run_unlock_lock<O: CryptoOracle + ?Sized>(
    oracle: &O,
    unlock: &[Instruction],
    lock: &[Instruction],
    msg: Msg,
    time: Time,
) -> bool {
    let init = StackState {
        time,
        msg,
        stack: Stack::new(),
    };
    let after_unlock = eval_script(oracle, unlock, init);
    let after_lock = eval_script_from_outcome(oracle, lock, after_unlock);
    after_lock
        .state()
        .is_some_and(crate::predicate::accept_state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ToyOracle;
    use alloc::vec;

    fn st(items: &[u64]) -> Stack {
        Stack::from_top(items.iter().copied())
    }

    #[test]
    fn dup_examples() {
        assert_eq!(execute_dup(st(&[])), None);
        assert_eq!(execute_dup(st(&[5, 2])), Some(st(&[5, 5, 2])));
        assert_eq!(execute_dup(st(&[0])), Some(st(&[0, 0])));
    }

    #[test]
    fn hash_examples() {
        let o = ToyOracle::default();
        assert_eq!(execute_hash(&o, st(&[])), None);
        assert_eq!(execute_hash(&o, st(&[3])), Some(st(&[7])));
        assert_eq!(execute_hash(&o, st(&[3, 9])), Some(st(&[7, 9])));
    }

    #[test]
    fn equal_examples() {
        assert_eq!(execute_equal(st(&[5])), None);
        assert_eq!(execute_equal(st(&[3, 3, 9])), Some(st(&[1, 9])));
        assert_eq!(execute_equal(st(&[3, 4, 9])), Some(st(&[0, 9])));
    }

    #[test]
    fn verify_examples() {
        assert_eq!(execute_verify(st(&[])), None);
        assert_eq!(execute_verify(st(&[0, 7])), None);
        assert_eq!(execute_verify(st(&[7, 2])), Some(st(&[2])));
    }

    #[test]
    fn drop_examples() {
        assert_eq!(execute_drop(st(&[])), None);
        assert_eq!(execute_drop(st(&[0, 5])), Some(st(&[5])));
        assert_eq!(execute_drop(st(&[1, 2, 3])), Some(st(&[2, 3])));
    }

    #[test]
    fn push_examples() {
        assert_eq!(execute_push(4u64.into(), st(&[])), Some(st(&[4])));
        assert_eq!(execute_push(0u64.into(), st(&[9])), Some(st(&[0, 9])));
        assert_eq!(execute_push(7u64.into(), st(&[7])), Some(st(&[7, 7])));
    }

    #[test]
    fn check_sig_examples() {
        let o = ToyOracle::default();
        let msg = Msg::from(10);
        assert_eq!(execute_check_sig(&o, &msg, st(&[5])), None);
        assert_eq!(
            execute_check_sig(&o, &msg, st(&[3, 13, 9])),
            Some(st(&[1, 9]))
        );
        assert_eq!(
            execute_check_sig(&o, &msg, st(&[3, 12, 9])),
            Some(st(&[0, 9]))
        );
    }

    #[test]
    fn check_lock_time_examples() {
        let t = Time::from(5);
        assert_eq!(execute_check_lock_time(&t, st(&[])), None);
        assert_eq!(execute_check_lock_time(&t, st(&[9, 1])), None);
        assert_eq!(execute_check_lock_time(&t, st(&[5, 1])), Some(st(&[5, 1])));
    }

    #[test]
    fn cmp_multi_sigs_examples() {
        let o = ToyOracle::default();
        let n = |v: &[u64]| v.iter().map(|&x| Nat::from(x)).collect::<Vec<_>>();
        assert!(cmp_multi_sigs(&o, &Msg::from(0), &[], &n(&[4, 5])));
        assert!(!cmp_multi_sigs(&o, &Msg::from(0), &n(&[9]), &[]));
        assert!(cmp_multi_sigs(
            &o,
            &Msg::from(10),
            &n(&[13, 14]),
            &n(&[3, 99, 4])
        ));
        // order matters: signatures for keys 4 then 3 cannot match [3, 4]
        assert!(!cmp_multi_sigs(
            &o,
            &Msg::from(10),
            &n(&[14, 13]),
            &n(&[3, 4])
        ));
    }

    #[test]
    fn multisig_examples() {
        let o = ToyOracle::default();
        assert_eq!(
            execute_multisig(&o, &Msg::from(10), st(&[1, 3, 1, 13, 99, 8])),
            Some(st(&[1, 8]))
        );
        assert_eq!(execute_multisig(&o, &Msg::from(10), st(&[2, 7])), None);
        // n = 0, m = 0, dummy = 55 is consumed
        assert_eq!(
            execute_multisig(&o, &Msg::from(0), st(&[0, 0, 55])),
            Some(st(&[1]))
        );
        // missing dummy
        assert_eq!(execute_multisig(&o, &Msg::from(0), st(&[0, 0])), None);
    }

    #[test]
    fn eval_instr_examples() {
        let o = ToyOracle::default();
        let s = |t: u64, m: u64, items: &[u64]| StackState::new(t, m, st(items));
        assert_eq!(
            eval_instr(&o, &Instruction::Dup, s(0, 0, &[])),
            ExecOutcome::Failed
        );
        assert_eq!(
            eval_instr(&o, &Instruction::push(9u64), s(3, 7, &[])),
            ExecOutcome::Succeeded(s(3, 7, &[9]))
        );
        assert_eq!(
            eval_instr(&o, &Instruction::Equal, s(1, 1, &[2, 2])),
            ExecOutcome::Succeeded(s(1, 1, &[1]))
        );
    }

    #[test]
    fn eval_script_examples() {
        let o = ToyOracle::default();
        let drop3 = vec![Instruction::Drop; 3];
        let s = StackState::new(0, 0, st(&[1, 2, 3]));
        assert_eq!(
            eval_script(&o, &[], s.clone()),
            ExecOutcome::Succeeded(s.clone())
        );
        assert_eq!(
            eval_script(&o, &drop3, s.clone()),
            ExecOutcome::Succeeded(s.with_stack(st(&[])))
        );
        assert_eq!(
            eval_script(&o, &drop3, s.with_stack(st(&[1, 2]))),
            ExecOutcome::Failed
        );
    }

    #[test]
    fn eval_from_outcome_examples() {
        let o = ToyOracle::default();
        let s = StackState::new(2, 3, st(&[]));
        assert_eq!(
            eval_script_from_outcome(&o, &[Instruction::push(1u64)], ExecOutcome::Failed),
            ExecOutcome::Failed
        );
        assert_eq!(
            eval_script_from_outcome(&o, &[], ExecOutcome::Succeeded(s.clone())),
            ExecOutcome::Succeeded(s.clone())
        );
        assert_eq!(
            eval_script_from_outcome(
                &o,
                &[Instruction::push(1u64)],
                ExecOutcome::Succeeded(s.clone())
            ),
            ExecOutcome::Succeeded(s.with_stack(st(&[1])))
        );
    }

    #[test]
    fn unlock_lock_examples() {
        let o = ToyOracle::default();
        let p = |v: u64| Instruction::push(v);
        assert!(!run_unlock_lock(&o, &[], &[], Msg::from(0), Time::from(0)));
        assert!(run_unlock_lock(
            &o,
            &[p(1)],
            &[],
            Msg::from(0),
            Time::from(0)
        ));
        let lock = crate::fixtures::script_p2pkh(o.hash(&Nat::from(3u64)));
        assert!(run_unlock_lock(
            &o,
            &[p(13), p(3)],
            &lock,
            Msg::from(10),
            Time::from(0)
        ));
        assert!(!run_unlock_lock(
            &o,
            &[p(12), p(3)],
            &lock,
            Msg::from(10),
            Time::from(0)
        ));
    }

    #[test]
    fn stack_accessors() {
        let s = st(&[1, 2, 3]);
        assert_eq!(s.top(), Some(&Nat::from(1u64)));
        assert_eq!(s.get(2), Some(&Nat::from(3u64)));
        assert_eq!(s.get(3), None);
        assert_eq!(alloc::format!("{s}"), "[1, 2, 3]");
        let mut t = st(&[9]);
        t.extend_below(&s);
        assert_eq!(t, st(&[9, 1, 2, 3]));
    }
}
