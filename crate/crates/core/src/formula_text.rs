//! Canonical text form of [`WpFormula`].
//!
//! One clause per line:
//!
//! ```text
//! stack = pbk :: sig :: rest => hash(pbk) == 7 && signed(sig, pbk)
//! ```
//!
//! Atoms are `a == b`, `signed(s, p)`, `t > 0` and `locktime t <= now`;
//! terms are slot names, decimals, `hash(t)`, `now` and `locktime(n)`.
//! Connectives are `&& || !` with parentheses. The formula with no clauses
//! is written `false`. Blank lines and `#` comments are ignored.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::formula::{Atom, Clause, Prop, Term, WpFormula};
use crate::nat::Nat;

const RESERVED: &[&str] = &[
    "stack", "rest", "now", "hash", "signed", "locktime", "true", "false",
];

pub fn render_formula(f: &WpFormula) -> String {
    if f.clauses.is_empty() {
        return "false".into();
    }
    let mut out = String::new();
    for (i, c) in f.clauses.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&render_clause(c));
    }
    out
}

pub fn render_clause(c: &Clause) -> String {
    let mut out = String::from("stack = ");
    for n in &c.names {
        out.push_str(n);
        out.push_str(" :: ");
    }
    out.push_str("rest => ");
    render_prop(&c.body, &c.names, &mut out);
    out
}

fn render_term(t: &Term, names: &[String], out: &mut String) {
    match t {
        Term::Var(i) => match names.get(*i) {
            Some(n) => out.push_str(n),
            None => {
                let _ = write!(out, "_{i}");
            }
        },
        Term::Lit(n) => {
            let _ = write!(out, "{n}");
        }
        Term::Hash(inner) => {
            out.push_str("hash(");
            render_term(inner, names, out);
            out.push(')');
        }
        Term::Now => out.push_str("now"),
        Term::LockTime(n) => {
            let _ = write!(out, "locktime({n})");
        }
    }
}

pub fn render_atom(a: &Atom, names: &[String]) -> String {
    let mut out = String::new();
    match a {
        Atom::Eq(x, y) => {
            render_term(x, names, &mut out);
            out.push_str(" == ");
            render_term(y, names, &mut out);
        }
        Atom::Signed { sig, pbk } => {
            out.push_str("signed(");
            render_term(sig, names, &mut out);
            out.push_str(", ");
            render_term(pbk, names, &mut out);
            out.push(')');
        }
        Atom::Positive(t) => {
            render_term(t, names, &mut out);
            out.push_str(" > 0");
        }
        Atom::TimeLe(t) => {
            out.push_str("locktime ");
            render_term(t, names, &mut out);
            out.push_str(" <= now");
        }
    }
    out
}

fn render_prop(p: &Prop, names: &[String], out: &mut String) {
    match p {
        Prop::True => out.push_str("true"),
        Prop::False => out.push_str("false"),
        Prop::Atom(a) => out.push_str(&render_atom(a, names)),
        Prop::Not(inner) => {
            out.push('!');
            if matches!(**inner, Prop::Atom(_) | Prop::True | Prop::False) {
                render_prop(inner, names, out);
            } else {
                out.push('(');
                render_prop(inner, names, out);
                out.push(')');
            }
        }
        Prop::And(parts) => {
            let mut parts: Vec<&Prop> = parts.iter().collect();
            if parts.iter().all(|p| p.as_literal().is_some()) {
                parts.sort_by_cached_key(|p| p.as_literal());
            }
            for (i, part) in parts.into_iter().enumerate() {
                if i > 0 {
                    out.push_str(" && ");
                }
                let wrap = matches!(part, Prop::Or(_) | Prop::And(_));
                if wrap {
                    out.push('(');
                }
                render_prop(part, names, out);
                if wrap {
                    out.push(')');
                }
            }
        }
        Prop::Or(parts) => {
            for (i, part) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" || ");
                }
                let wrap = matches!(part, Prop::Or(_) | Prop::And(_));
                if wrap {
                    out.push('(');
                }
                render_prop(part, names, out);
                if wrap {
                    out.push(')');
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("formula line {line}: {message}")]
pub struct FormulaParseError {
    /// 1-based line number in the input.
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(Nat),
    Sym(&'static str),
}

fn lex(line: &str) -> Result<Vec<Tok>, String> {
    const SYMS: &[&str] = &[
        "::", "=>", "==", "<=", "&&", "||", "!", "(", ")", ",", ">", "=",
    ];
    let mut toks = Vec::new();
    let mut rest = line;
    'outer: loop {
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        for s in SYMS {
            if let Some(r) = rest.strip_prefix(s) {
                toks.push(Tok::Sym(s));
                rest = r;
                continue 'outer;
            }
        }
        let c = rest.chars().next().unwrap();
        if c.is_ascii_digit() {
            let end = rest
                .find(|c: char| !c.is_ascii_digit())
                .unwrap_or(rest.len());
            let n = rest[..end]
                .parse()
                .map_err(|_| alloc::format!("bad number {:?}", &rest[..end]))?;
            toks.push(Tok::Num(n));
            rest = &rest[end..];
        } else if c.is_ascii_alphabetic() || c == '_' {
            let end = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(rest.len());
            toks.push(Tok::Ident(rest[..end].to_string()));
            rest = &rest[end..];
        } else {
            return Err(alloc::format!("unexpected character {c:?}"));
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), String> {
        match self.next() {
            Some(Tok::Sym(x)) if x == s => Ok(()),
            other => Err(alloc::format!(
                "expected `{s}`, found {}",
                describe(other.as_ref())
            )),
        }
    }

    fn expect_ident(&mut self, s: &str) -> Result<(), String> {
        match self.next() {
            Some(Tok::Ident(x)) if x == s => Ok(()),
            other => Err(alloc::format!(
                "expected `{s}`, found {}",
                describe(other.as_ref())
            )),
        }
    }

    fn or(&mut self) -> Result<Prop, String> {
        let mut parts = alloc::vec![self.and()?];
        while self.is_sym("||") {
            self.pos += 1;
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Prop::Or(parts)
        })
    }

    fn and(&mut self) -> Result<Prop, String> {
        let mut parts = alloc::vec![self.unary()?];
        while self.is_sym("&&") {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Prop::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Prop, String> {
        if self.is_sym("!") {
            self.pos += 1;
            return Ok(Prop::Not(Box::new(self.unary()?)));
        }
        if self.is_sym("(") {
            self.pos += 1;
            let p = self.or()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Prop, String> {
        match self.peek() {
            Some(Tok::Ident(id)) if id == "true" => {
                self.pos += 1;
                return Ok(Prop::True);
            }
            Some(Tok::Ident(id)) if id == "false" => {
                self.pos += 1;
                return Ok(Prop::False);
            }
            Some(Tok::Ident(id)) if id == "signed" => {
                self.pos += 1;
                self.expect_sym("(")?;
                let sig = self.term()?;
                self.expect_sym(",")?;
                let pbk = self.term()?;
                self.expect_sym(")")?;
                return Ok(Prop::Atom(Atom::Signed { sig, pbk }));
            }
            Some(Tok::Ident(id))
                if id == "locktime" && !matches!(self.peek_at(1), Some(Tok::Sym("("))) =>
            {
                self.pos += 1;
                let lock = self.term()?;
                self.expect_sym("<=")?;
                self.expect_ident("now")?;
                return Ok(Prop::Atom(Atom::TimeLe(lock)));
            }
            _ => {}
        }
        let lhs = self.term()?;
        match self.next() {
            Some(Tok::Sym("==")) => {
                let rhs = self.term()?;
                Ok(Prop::Atom(Atom::Eq(lhs, rhs)))
            }
            Some(Tok::Sym(">")) => match self.next() {
                Some(Tok::Num(n)) if n.is_zero() => Ok(Prop::Atom(Atom::Positive(lhs))),
                other => Err(alloc::format!(
                    "expected `0` after `>`, found {}",
                    describe(other.as_ref())
                )),
            },
            other => Err(alloc::format!(
                "expected `==` or `> 0`, found {}",
                describe(other.as_ref())
            )),
        }
    }

    fn term(&mut self) -> Result<Term, String> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(Term::Lit(n)),
            Some(Tok::Ident(id)) => match id.as_str() {
                "now" => Ok(Term::Now),
                "hash" => {
                    self.expect_sym("(")?;
                    let inner = self.term()?;
                    self.expect_sym(")")?;
                    Ok(Term::Hash(Box::new(inner)))
                }
                "locktime" => {
                    self.expect_sym("(")?;
                    let n = match self.next() {
                        Some(Tok::Num(n)) => n,
                        other => {
                            return Err(alloc::format!(
                                "expected a number, found {}",
                                describe(other.as_ref())
                            ))
                        }
                    };
                    self.expect_sym(")")?;
                    Ok(Term::LockTime(n))
                }
                _ => match self.names.iter().position(|n| *n == id) {
                    Some(i) => Ok(Term::Var(i)),
                    None => Err(alloc::format!("unbound variable `{id}`")),
                },
            },
            other => Err(alloc::format!(
                "expected a term, found {}",
                describe(other.as_ref())
            )),
        }
    }
}

fn describe(t: Option<&Tok>) -> String {
    match t {
        None => "end of line".into(),
        Some(Tok::Ident(s)) => alloc::format!("`{s}`"),
        Some(Tok::Num(n)) => alloc::format!("`{n}`"),
        Some(Tok::Sym(s)) => alloc::format!("`{s}`"),
    }
}

fn parse_clause(line: &str) -> Result<Clause, String> {
    let toks = lex(line)?;
    let mut p = Parser {
        toks,
        pos: 0,
        names: &[],
    };
    p.expect_ident("stack")?;
    p.expect_sym("=")?;
    let mut names: Vec<String> = Vec::new();
    loop {
        match p.next() {
            Some(Tok::Ident(id)) if id == "rest" => break,
            Some(Tok::Ident(id)) => {
                if RESERVED.contains(&id.as_str()) {
                    return Err(alloc::format!("`{id}` cannot name a stack slot"));
                }
                if names.contains(&id) {
                    return Err(alloc::format!("slot name `{id}` bound twice"));
                }
                names.push(id);
                p.expect_sym("::")?;
            }
            other => {
                return Err(alloc::format!(
                    "expected a slot name or `rest`, found {}",
                    describe(other.as_ref())
                ))
            }
        }
    }
    p.expect_sym("=>")?;
    let toks = core::mem::take(&mut p.toks);
    let pos = p.pos;
    let mut body_parser = Parser {
        toks,
        pos,
        names: &names,
    };
    let body = body_parser.or()?;
    if let Some(t) = body_parser.peek() {
        return Err(alloc::format!("trailing input at {}", describe(Some(t))));
    }
    Ok(Clause { names, body })
}

pub fn parse_formula(text: &str) -> Result<WpFormula, FormulaParseError> {
    let mut clauses = Vec::new();
    let mut saw_false = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "false" {
            saw_false = true;
            continue;
        }
        let clause = parse_clause(line).map_err(|message| FormulaParseError {
            line: i + 1,
            message,
        })?;
        clauses.push(clause);
    }
    if clauses.is_empty() && !saw_false {
        return Err(FormulaParseError {
            line: 0,
            message: "empty formula (write `false` for the unsatisfiable formula)".into(),
        });
    }
    Ok(WpFormula { clauses })
}
