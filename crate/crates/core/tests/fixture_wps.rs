use wpscript_core::fixtures::{
    combined_certificate, default_keys, fixture_corpus, multisig24_script,
    step_by_step_p2pkh_certificate, wp_multisig24, DEFAULT_LOCK_TIME, DEFAULT_PBKH,
};
use wpscript_core::hoare::DEFAULT_MAX_HEIGHT;
use wpscript_core::symexec::{extract_accept_paths, propositionally_equivalent};
use wpscript_core::{
    check_iff_triple, check_pred_equiv, derive_wp, eval_script, sym_eval, verify_certificate,
    CryptoOracle, Domain, DomainSeeds, Msg, Nat, Predicate, Stack, StackState, ToyOracle,
};

fn height_for(name: &str) -> usize {
    if name.contains("p2ms") || name.contains("combined") {
        4
    } else {
        DEFAULT_MAX_HEIGHT
    }
}

#[test]
fn every_fixture_wp_is_exact() {
    let oracle = ToyOracle::default();
    for e in fixture_corpus() {
        let seeds = DomainSeeds::new().script(&e.script).formula(&e.wp);
        let d = Domain::adequate(&oracle, height_for(&e.name), &seeds);
        let v = check_iff_triple(
            &oracle,
            &Predicate::from(&e.wp),
            &e.script,
            &Predicate::Accept,
            &d,
        );
        assert!(v.holds(), "{}: {v}", e.name);
    }
}

#[test]
fn every_derivation_matches_semantics() {
    let oracle = ToyOracle::default();
    for e in fixture_corpus() {
        let derived = derive_wp(&e.script).unwrap();
        let seeds = DomainSeeds::new().script(&e.script).formula(&derived);
        let d = Domain::adequate(&oracle, height_for(&e.name), &seeds);
        let v = check_iff_triple(
            &oracle,
            &Predicate::from(&derived),
            &e.script,
            &Predicate::Accept,
            &d,
        );
        assert!(v.holds(), "{}: {v}", e.name);
        let same = check_pred_equiv(
            &oracle,
            &Predicate::from(&derived),
            &Predicate::from(&e.wp),
            &d,
        );
        assert!(same.holds(), "{}: {same}", e.name);
    }
}

#[test]
fn simplified_formula_agrees_with_raw_paths() {
    for e in fixture_corpus() {
        let d = wpscript_core::symexec::derive_with_stages(
            &e.script,
            &wpscript_core::fixtures::accept_formula(),
        )
        .unwrap();
        assert_eq!(
            propositionally_equivalent(&d.raw, &d.simplified),
            Some(true),
            "{}",
            e.name
        );
    }
}

/// Signature `s` is valid for key `k` exactly when `s == k`.
struct Identity;

impl CryptoOracle for Identity {
    fn hash(&self, value: &Nat) -> Nat {
        value.clone()
    }

    fn is_signed(&self, _msg: &Msg, sig: &Nat, pbk: &Nat) -> bool {
        sig == pbk
    }
}

#[test]
fn multisig_path_count_matches_brute_force() {
    let keys = default_keys();
    let script = multisig24_script(keys.clone());
    let mut accepted = 0;
    for sig1 in &keys {
        for sig2 in &keys {
            let st = StackState::new(
                0u64,
                0u64,
                Stack::from_top([sig2.clone(), sig1.clone(), Nat::zero()]),
            );
            if eval_script(&Identity, &script, st)
                .state()
                .is_some_and(wpscript_core::accept_state)
            {
                accepted += 1;
            }
        }
    }
    let run = sym_eval(&script).unwrap();
    assert_eq!(accepted, 6);
    assert_eq!(extract_accept_paths(&run).unwrap().len(), accepted);
    assert_eq!(derive_wp(&script).unwrap(), wp_multisig24(keys));
}

#[test]
fn shipped_certificates_verify() {
    let oracle = ToyOracle::default();
    let cert = step_by_step_p2pkh_certificate(Nat::from(DEFAULT_PBKH));
    let d = Domain::adequate(&oracle, DEFAULT_MAX_HEIGHT, &cert.seeds());
    let report = verify_certificate(&oracle, &cert, &d).unwrap();
    assert!(report.holds());
    assert_eq!(report.steps.len(), 6);

    let cert = combined_certificate(Nat::from(DEFAULT_LOCK_TIME), default_keys());
    let d = Domain::adequate(&oracle, 4, &cert.seeds());
    let report = verify_certificate(&oracle, &cert, &d).unwrap();
    assert!(report.holds());
    assert!(report.end_to_end.unwrap().holds());
}
