//! Whitespace-token text form of scripts.
//!
//! Tokens are separated by any whitespace and `#` starts a comment that runs
//! to the end of the line. Opcode names are case-insensitive. Data is pushed
//! with a bare decimal, `<n>`, or `OP_PUSH n`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::nat::Nat;
use crate::vm::{Instruction, Script};

/// Pushing more keys than this before `OP_MULTISIG` draws a warning.
pub const MULTISIG_KEY_WARNING_THRESHOLD: u64 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownOpcode,
    MalformedNumber,
    MissingPushArgument,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::UnknownOpcode => "unknown opcode",
            ParseErrorKind::MalformedNumber => "malformed number",
            ParseErrorKind::MissingPushArgument => "missing push argument",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at token {position}: {token:?}")]
pub struct ParseError {
    /// Index into the whitespace-token sequence (comments excluded).
    pub position: usize,
    pub token: String,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseWarning {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning at token {}: {}", self.position, self.message)
    }
}

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
}

fn looks_numeric(token: &str) -> bool {
    token.starts_with(|c: char| c.is_ascii_digit()) || token.starts_with('<')
}

fn parse_data(token: &str) -> Option<Nat> {
    let inner = match token.strip_prefix('<') {
        Some(rest) => rest.strip_suffix('>')?,
        None => token,
    };
    inner.parse().ok()
}

fn opcode(token: &str) -> Option<Instruction> {
    let upper = token.to_ascii_uppercase();
    Some(match upper.as_str() {
        "OP_DUP" => Instruction::Dup,
        "OP_HASH" | "OP_HASH160" => Instruction::Hash,
        "OP_EQUAL" => Instruction::Equal,
        "OP_VERIFY" => Instruction::Verify,
        "OP_CHECKSIG" => Instruction::CheckSig,
        "OP_CHECKLOCKTIMEVERIFY" => Instruction::CheckLockTimeVerify,
        "OP_DROP" => Instruction::Drop,
        "OP_MULTISIG" | "OP_CHECKMULTISIG" => Instruction::MultiSig,
        _ => return None,
    })
}

/// Parses a script and collects non-fatal warnings.
pub fn parse_script_with_warnings(text: &str) -> Result<(Script, Vec<ParseWarning>), ParseError> {
    let toks: Vec<&str> = tokens(text).collect();
    let mut instrs = Vec::with_capacity(toks.len());
    let mut warnings = Vec::new();
    let err = |position: usize, kind| ParseError {
        position,
        token: toks[position].to_string(),
        kind,
    };

    let mut i = 0;
    while i < toks.len() {
        let tok = toks[i];
        let instr = if tok.eq_ignore_ascii_case("OP_PUSH") {
            let Some(arg) = toks.get(i + 1) else {
                return Err(err(i, ParseErrorKind::MissingPushArgument));
            };
            if !looks_numeric(arg) {
                return Err(err(i, ParseErrorKind::MissingPushArgument));
            }
            i += 1;
            Instruction::Push(
                parse_data(arg).ok_or_else(|| err(i, ParseErrorKind::MalformedNumber))?,
            )
        } else if let Some(op) = opcode(tok) {
            op
        } else if looks_numeric(tok) {
            Instruction::Push(
                parse_data(tok).ok_or_else(|| err(i, ParseErrorKind::MalformedNumber))?,
            )
        } else {
            return Err(err(i, ParseErrorKind::UnknownOpcode));
        };

        if instr == Instruction::MultiSig {
            if let Some(Instruction::Push(n)) = instrs.last() {
                if n.to_u64()
                    .is_none_or(|n| n > MULTISIG_KEY_WARNING_THRESHOLD)
                {
                    warnings.push(ParseWarning {
                        position: i,
                        message: alloc::format!(
                            "OP_MULTISIG with {n} public keys exceeds the usual limit of {MULTISIG_KEY_WARNING_THRESHOLD}"
                        ),
                    });
                }
            }
        }
        instrs.push(instr);
        i += 1;
    }
    Ok((Script::new(instrs), warnings))
}

pub fn parse_script(text: &str) -> Result<Script, ParseError> {
    parse_script_with_warnings(text).map(|(s, _)| s)
}

/// Canonical single-space form.
pub fn render_script(script: &[Instruction]) -> String {
    let mut out = String::new();
    for (i, instr) in script.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&instr.to_string());
    }
    out
}
