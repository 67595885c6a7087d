//! Executable semantics and weakest-precondition tooling for the
//! non-branching subset of Bitcoin Script.
//!
//! The crate is `no_std` with `alloc`. The `std` feature (default) only
//! forwards to dependencies; `parallel` spreads exhaustive checks over a
//! rayon pool.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod certificate;
pub mod fixtures;
pub mod formula;
pub mod formula_text;
pub mod hoare;
pub mod nat;
pub mod oracle;
pub mod parser;
pub mod predicate;
pub mod symexec;
pub mod vm;

pub use certificate::{verify_certificate, CertStep, Certificate, CertificateReport, Evidence};
pub use formula::{Atom, Clause, Literal, Prop, Term, WpFormula};
pub use formula_text::{parse_formula, render_formula, FormulaParseError};
pub use hoare::{
    check_iff_triple, check_pred_equiv, check_script_equiv, check_triple, Counterexample,
    Direction, Domain, DomainSeeds, EquivVerdict, Verdict,
};
pub use nat::{Msg, Nat, Time};
pub use oracle::{CryptoOracle, SignRule, ToyOracle};
pub use parser::{parse_script, render_script, ParseError};
pub use predicate::{accept_state, conj_sp, lift_predicate, semantic_wp, Predicate};
pub use symexec::{derive_wp, derive_wp_for, simplify_formula, sym_eval, DecisionTree, SymError};
pub use vm::{eval_instr, eval_script, ExecOutcome, Instruction, Script, Stack, StackState};
