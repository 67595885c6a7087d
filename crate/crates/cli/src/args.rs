use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use wpscript_core::{Nat, SignRule};

#[derive(Debug, Parser)]
#[command(
    name = "wpscript",
    version,
    about = "Run Bitcoin Script fragments and reason about their weakest preconditions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(flatten)]
    pub oracle: OracleArgs,

    #[command(flatten)]
    pub domain: DomainArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a script on one initial state.
    Run {
        /// Script file, `-` for stdin, or inline script text.
        script: String,
        /// Initial stack, comma separated, top first.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        stack: String,
        #[arg(long, default_value = "0")]
        msg: Nat,
        #[arg(long, default_value = "0")]
        time: Nat,
    },
    /// Derive the weakest precondition symbolically.
    Wp {
        script: String,
        /// Postcondition (file or inline formula text); acceptance by default.
        #[arg(long)]
        post: Option<String>,
        /// Also print the decision tree.
        #[arg(long)]
        tree: bool,
    },
    /// Check that a formula is exactly the weakest precondition of a script.
    CheckWp {
        script: String,
        /// Candidate precondition (file or inline formula text).
        #[arg(long)]
        formula: String,
        #[arg(long)]
        post: Option<String>,
    },
    /// Compare two scripts' outcomes on every state of the domain.
    Equiv { left: String, right: String },
    /// Verify a certificate chain.
    Certify {
        /// Certificate JSON file.
        certificate: PathBuf,
    },
    /// Regression over a fixture corpus directory.
    Corpus {
        #[arg(long, default_value = "corpus")]
        dir: PathBuf,
        /// Write the built-in fixtures to `dir` instead of checking it.
        #[arg(long)]
        write: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Toy hash multiplier `a` in `a * n + b`.
    #[arg(long, global = true, default_value = "2")]
    pub hash_a: Nat,
    /// Toy hash offset `b` in `a * n + b`.
    #[arg(long, global = true, default_value = "1")]
    pub hash_b: Nat,
    /// Signature rule: `sum`, `sum+K` or `product`.
    #[arg(long, global = true, default_value = "sum")]
    pub sign_rule: SignRule,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DomainArgs {
    /// Largest stack height enumerated.
    #[arg(long, global = true)]
    pub max_height: Option<usize>,
    /// Enumerate values `0..=N` instead of the derived value set.
    #[arg(long, global = true)]
    pub max_value: Option<u64>,
    /// Messages to enumerate, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub msgs: Option<Vec<Nat>>,
    /// Times to enumerate, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub times: Option<Vec<Nat>>,
}
