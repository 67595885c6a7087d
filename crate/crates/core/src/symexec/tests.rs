use alloc::collections::BTreeSet;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::fixtures::{
    accept_formula, check_time_script, combined_script, default_keys, multisig24_script,
    script_p2pkh, wp_multisig24, wp_p2pkh, wp_time_lock,
};
use crate::formula::{Atom, Clause, Literal, Prop, Term};
use crate::formula_text::render_formula;
use crate::hoare::Domain;
use crate::oracle::ToyOracle;
use crate::vm::{eval_script, Script};

fn nat(n: u64) -> Nat {
    Nat::from(n)
}

#[test]
fn p2pkh_tree_has_one_success_leaf() {
    let run = sym_eval(&script_p2pkh(nat(7))).unwrap();
    assert_eq!(run.tree.success_leaves(), 1);
    assert_eq!(run.initial.tail, TailId(0));
    let text = render_tree(&run.tree);
    assert_eq!(
        text,
        "stack t0\n  empty => fail\n  cons v0 :: t1 =>\n    nat eq(7, hash(v0))\n      zero => fail\n      succ v1 =>\n        stack t1\n          empty => fail\n          cons v2 :: t2 => ok [b2n(signed(v2, v0)) :: t2]\n"
    );
}

#[test]
fn p2pkh_accepting_paths() {
    let run = sym_eval(&script_p2pkh(nat(7))).unwrap();
    let paths = extract_accept_paths(&run).unwrap();
    assert_eq!(paths.len(), 1);
    let raw = paths_to_formula(&paths, run.initial.tail).unwrap();
    assert!(raw.same_structure(&wp_p2pkh(nat(7))));
}

#[test]
fn p2pkh_wp_matches_hand_written() {
    let wp = derive_wp(&script_p2pkh(nat(42))).unwrap();
    assert_eq!(wp, wp_p2pkh(nat(42)));
    assert_eq!(
        render_formula(&wp),
        "stack = pbk :: sig :: rest => hash(pbk) == 42 && signed(sig, pbk)"
    );
}

#[test]
fn drop3_wp() {
    let wp = derive_wp(&vec![Instruction::Drop; 3]).unwrap();
    assert_eq!(
        render_formula(&wp),
        "stack = a :: b :: c :: d :: rest => d > 0"
    );
}

#[test]
fn empty_script_wp_is_accept() {
    let wp = derive_wp(&[]).unwrap();
    assert_eq!(wp, accept_formula());
    assert_eq!(render_formula(&wp), "stack = x :: rest => x > 0");
}

#[test]
fn time_check_wp() {
    let wp = derive_wp(&check_time_script(nat(5))).unwrap();
    assert_eq!(
        render_formula(&wp),
        "stack = x :: rest => locktime 5 <= now && x > 0"
    );
    assert!(wp.same_structure(&wp_time_lock(nat(5))));
}

#[test]
fn multisig_raw_paths_and_simplified_pairs() {
    let keys = default_keys();
    let d = derive_with_stages(&multisig24_script(keys.clone()), &accept_formula()).unwrap();
    assert_eq!(d.paths.len(), 6);
    assert_eq!(d.simplified, wp_multisig24(keys));
    assert_eq!(d.simplified.clauses[0].names, vec!["sig2", "sig1", "dummy"]);
}

#[test]
fn multisig_raw_paths_use_in_order_matching() {
    let run = sym_eval(&multisig24_script(default_keys())).unwrap();
    let dnf = paths_to_dnf(&extract_accept_paths(&run).unwrap(), run.initial.tail).unwrap();
    // every raw path fixes exactly two signature checks positively
    for d in &dnf.disjuncts {
        assert_eq!(d.depth, 3);
        assert_eq!(d.literals.iter().filter(|l| l.positive).count(), 2);
    }
}

#[test]
fn combined_wp_is_equivalent_on_domain() {
    let keys = default_keys();
    let script = combined_script(nat(5), keys.clone());
    let wp = derive_wp(&script).unwrap();
    let oracle = ToyOracle::default();
    let dom = Domain::bounded(3, 9, &[0, 1], &[4, 5, 6]);
    for st in dom.states() {
        let expected = eval_script(&oracle, &script, st.clone())
            .state()
            .is_some_and(crate::predicate::accept_state);
        assert_eq!(wp.eval(&oracle, &st), expected, "{st}");
    }
}

#[test]
fn symbolic_count_is_unsupported() {
    let err = sym_eval(&[Instruction::MultiSig]).unwrap_err();
    assert_eq!(
        err,
        SymError::Unsupported("symbolic multisig count".to_string())
    );
    assert_eq!(err.to_string(), "unsupported: symbolic multisig count");
}

#[test]
fn oversized_count_is_unsupported() {
    let err = sym_eval(&[Instruction::push(21u64), Instruction::MultiSig]).unwrap_err();
    assert!(matches!(err, SymError::Unsupported(_)));
}

#[test]
fn absorption_removes_negated_literal() {
    let a = Atom::Positive(Term::var(0));
    let b = Atom::Positive(Term::var(1));
    let f = WpFormula::single(Clause::new(
        ["x", "y"],
        Prop::Or(vec![
            Prop::atom(a.clone()),
            Prop::And(vec![
                Prop::negate(Prop::atom(a.clone())),
                Prop::atom(b.clone()),
            ]),
        ]),
    ));
    let s = simplify_formula(&f);
    assert_eq!(
        s.clauses[0].body,
        Prop::Or(vec![Prop::atom(a), Prop::atom(b)])
    );
    assert_eq!(propositionally_equivalent(&f, &s), Some(true));
}

#[test]
fn absorption_respects_depth() {
    // a deeper clause cannot absorb a literal from a shallower one
    let a = Atom::Positive(Term::var(0));
    let b = Atom::Positive(Term::lit(1u64));
    let dnf = Dnf {
        disjuncts: vec![
            Disjunct {
                depth: 2,
                literals: BTreeSet::from([Literal::pos(a.clone())]),
            },
            Disjunct {
                depth: 1,
                literals: BTreeSet::from([Literal::neg(a), Literal::pos(b)]),
            },
        ],
    };
    assert_eq!(simplify_dnf(&dnf), dnf);
}

#[test]
fn subsumption_and_contradiction() {
    let a = Literal::pos(Atom::Positive(Term::var(0)));
    let b = Literal::pos(Atom::Positive(Term::var(1)));
    let dnf = Dnf {
        disjuncts: vec![
            Disjunct {
                depth: 2,
                literals: BTreeSet::from([a.clone(), b.clone()]),
            },
            Disjunct {
                depth: 1,
                literals: BTreeSet::from([a.clone()]),
            },
            Disjunct {
                depth: 2,
                literals: BTreeSet::from([b.clone(), b.negated()]),
            },
        ],
    };
    let s = simplify_dnf(&dnf);
    assert_eq!(s.disjuncts.len(), 1);
    assert_eq!(s.disjuncts[0].depth, 1);
}

#[test]
fn simplify_leaves_canonical_input_alone() {
    let f = wp_multisig24(default_keys());
    assert_eq!(simplify_formula(&f), f);
}

#[test]
fn compiled_tree_agrees_with_interpreter() {
    let oracle = ToyOracle::default();
    let scripts: Vec<Script> = vec![
        script_p2pkh(nat(7)),
        multisig24_script(default_keys()),
        combined_script(nat(2), default_keys()),
        Script::new(vec![
            Instruction::Dup,
            Instruction::Equal,
            Instruction::Verify,
        ]),
    ];
    let dom = Domain::bounded(4, 4, &[0, 1], &[1, 2, 3]);
    for script in &scripts {
        let run = sym_eval(script).unwrap();
        let compiled = compile_tree(&oracle, &run);
        for st in dom.states() {
            assert_eq!(
                compiled.run(&st),
                eval_script(&oracle, script, st.clone()),
                "{st}"
            );
        }
    }
}

#[test]
fn sym_step_dup() {
    let mut namer = Namer::default();
    let tail = namer.tail();
    let tree = sym_step(
        &Instruction::Dup,
        SymStack {
            known: vec![],
            tail,
        },
        &mut namer,
    )
    .unwrap();
    assert_eq!(
        render_tree(&tree),
        "stack t0\n  empty => fail\n  cons v0 :: t1 => ok [v0 :: v0 :: t1]\n"
    );
}

#[test]
fn derived_wp_is_equivalent_to_semantic_wp() {
    let oracle = ToyOracle::default();
    let script = script_p2pkh(nat(7));
    let wp = derive_wp(&script).unwrap();
    let dom = Domain::bounded(3, 8, &[0, 1], &[0]);
    for st in dom.states() {
        let direct = eval_script(&oracle, &script, st.clone())
            .state()
            .is_some_and(crate::predicate::accept_state);
        assert_eq!(wp.eval(&oracle, &st), direct, "{st}");
    }
}
