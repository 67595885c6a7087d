use proptest::prelude::*;

use wpscript_core::symexec::compile_tree;
use wpscript_core::vm::eval_script_from_outcome;
use wpscript_core::{
    check_pred_equiv, derive_wp, eval_script, parse_script, render_script, semantic_wp, sym_eval,
    Domain, Instruction, Nat, Predicate, Script, Stack, StackState, SymError, ToyOracle,
};

fn instruction() -> impl Strategy<Value = Instruction> {
    prop_oneof![
        (0u64..10).prop_map(Instruction::push),
        Just(Instruction::Dup),
        Just(Instruction::Hash),
        Just(Instruction::Equal),
        Just(Instruction::Verify),
        Just(Instruction::CheckSig),
        Just(Instruction::CheckLockTimeVerify),
        Just(Instruction::Drop),
        Just(Instruction::MultiSig),
    ]
}

fn script(max: usize) -> impl Strategy<Value = Script> {
    prop::collection::vec(instruction(), 0..=max).prop_map(Script::new)
}

fn state() -> impl Strategy<Value = StackState> {
    (prop::collection::vec(0u64..10, 0..=5), 0u64..10, 0u64..10)
        .prop_map(|(items, msg, time)| StackState::new(time, msg, Stack::from_top(items)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn concatenation_law(p in script(8), q in script(8), s in state()) {
        let oracle = ToyOracle::default();
        let joined = eval_script(&oracle, &p.concat(&q), s.clone());
        let staged = eval_script_from_outcome(&oracle, &q, eval_script(&oracle, &p, s));
        prop_assert_eq!(joined, staged);
    }

    #[test]
    fn render_then_parse_is_identity(s in script(12)) {
        prop_assert_eq!(parse_script(&render_script(&s)).unwrap(), s);
    }

    #[test]
    fn compiled_tree_matches_interpreter(p in script(6), s in state()) {
        let oracle = ToyOracle::default();
        match sym_eval(&p) {
            Ok(run) => prop_assert_eq!(compile_tree(&oracle, &run).run(&s), eval_script(&oracle, &p, s)),
            Err(SymError::Unsupported(_)) => {}
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semantic_wp_composes(p in script(4), q in script(4)) {
        let oracle = ToyOracle::default();
        let whole = semantic_wp(p.concat(&q), Predicate::Accept);
        let nested = semantic_wp(p, semantic_wp(q, Predicate::Accept));
        let d = Domain::bounded(3, 4, &[0, 1], &[0, 3]);
        prop_assert!(check_pred_equiv(&oracle, &whole, &nested, &d).holds());
    }

    #[test]
    fn derived_wp_agrees_with_execution(p in script(5)) {
        let oracle = ToyOracle::default();
        let Ok(wp) = derive_wp(&p) else { return Ok(()) };
        let d = Domain::bounded(4, 4, &[0, 1], &[0, 2]);
        let verdict = check_pred_equiv(&oracle, &Predicate::from(wp), &semantic_wp(p, Predicate::Accept), &d);
        prop_assert!(verdict.holds(), "{}", verdict);
    }
}

#[test]
fn rendering_is_idempotent_on_aliases() {
    let text = "OP_DUP OP_HASH160 <42> OP_EQUAL OP_VERIFY OP_CHECKSIG";
    let once = render_script(&parse_script(text).unwrap());
    let twice = render_script(&parse_script(&once).unwrap());
    assert_eq!(once, "OP_DUP OP_HASH 42 OP_EQUAL OP_VERIFY OP_CHECKSIG");
    assert_eq!(once, twice);
}

#[test]
fn huge_pushes_round_trip() {
    let big: Nat = "123456789012345678901234567890".parse().unwrap();
    let s = Script::new(vec![Instruction::Push(big), Instruction::Drop]);
    assert_eq!(parse_script(&render_script(&s)).unwrap(), s);
}
