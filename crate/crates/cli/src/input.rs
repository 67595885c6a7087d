use std::io::Read;
use std::path::Path;

use wpscript_core::{
    parse_formula, parse_script, CryptoOracle, Domain, DomainSeeds, Msg, Nat, Script, Stack, Time,
    ToyOracle, WpFormula,
};

use crate::args::{DomainArgs, OracleArgs};
use crate::error::CliError;

/// Text named by a command-line argument: a file path, `-` for stdin, or
/// the argument itself.
pub struct Source {
    pub origin: String,
    pub text: String,
}

pub fn load(arg: &str) -> Result<Source, CliError> {
    if arg == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|source| CliError::Io {
                path: "<stdin>".into(),
                source,
            })?;
        return Ok(Source {
            origin: "<stdin>".into(),
            text,
        });
    }
    let path = Path::new(arg);
    if !arg.is_empty() && path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.into(),
            source,
        })?;
        return Ok(Source {
            origin: arg.into(),
            text,
        });
    }
    Ok(Source {
        origin: "<inline>".into(),
        text: arg.into(),
    })
}

pub fn script(arg: &str) -> Result<Script, CliError> {
    let src = load(arg)?;
    parse_script(&src.text).map_err(|source| CliError::Script {
        origin: src.origin,
        source,
    })
}

pub fn formula(arg: &str) -> Result<WpFormula, CliError> {
    let src = load(arg)?;
    parse_formula(&src.text).map_err(|source| CliError::Formula {
        origin: src.origin,
        source,
    })
}

/// Comma-separated decimals, top first. Blank means the empty stack.
pub fn stack(text: &str) -> Result<Stack, CliError> {
    if text.trim().is_empty() {
        return Ok(Stack::new());
    }
    let items = text
        .split(',')
        .map(|t| t.trim().parse::<Nat>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Stack(text.into()))?;
    Ok(Stack::from_top(items))
}

pub fn oracle(args: &OracleArgs) -> ToyOracle {
    ToyOracle::new(
        args.hash_a.clone(),
        args.hash_b.clone(),
        args.sign_rule.clone(),
    )
}

pub const DEFAULT_MAX_HEIGHT: usize = wpscript_core::hoare::DEFAULT_MAX_HEIGHT;

/// The derived domain for `seeds`, with any flag overriding its part.
pub fn domain<O: CryptoOracle + ?Sized>(
    oracle: &O,
    args: &DomainArgs,
    seeds: &DomainSeeds,
    fallback_height: usize,
) -> Domain {
    let height = args.max_height.unwrap_or(fallback_height);
    let mut seeds = seeds.clone();
    if let Some(msgs) = &args.msgs {
        seeds.msgs = msgs.iter().cloned().map(Msg).collect();
    }
    let derived = Domain::adequate(oracle, height, &seeds);
    if args.max_value.is_none() && args.times.is_none() {
        return derived;
    }
    let values: Vec<Nat> = match args.max_value {
        Some(m) => (0..=m).map(Nat::from).collect(),
        None => derived.values().to_vec(),
    };
    let times: Vec<Time> = match &args.times {
        Some(ts) => ts.iter().cloned().map(Time).collect(),
        None => derived.times().to_vec(),
    };
    Domain::new(height, values, derived.msgs().to_vec(), times)
}
