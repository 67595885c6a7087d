//! Pluggable hash and signature functions.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::nat::{Msg, Nat};

/// The cryptographic primitives the semantics is parameterised over.
///
/// Implementations must be pure: equal inputs give equal outputs. Weakest
/// preconditions only depend on the values these functions return, so any
/// deterministic instantiation exercises the same machinery.
pub trait CryptoOracle: Send + Sync {
    fn hash(&self, value: &Nat) -> Nat;

    fn is_signed(&self, msg: &Msg, sig: &Nat, pbk: &Nat) -> bool;

    /// Values `v` with `hash(v) == digest`, as far as the oracle can invert
    /// itself. Used only to build adequate finite checking domains.
    fn preimages(&self, _digest: &Nat) -> Vec<Nat> {
        Vec::new()
    }

    /// Signatures that `is_signed` accepts for `(msg, pbk)`. Same purpose as
    /// [`CryptoOracle::preimages`].
    fn signatures_for(&self, _msg: &Msg, _pbk: &Nat) -> Vec<Nat> {
        Vec::new()
    }
}

impl<O: CryptoOracle + ?Sized> CryptoOracle for &O {
    fn hash(&self, value: &Nat) -> Nat {
        (**self).hash(value)
    }
    fn is_signed(&self, msg: &Msg, sig: &Nat, pbk: &Nat) -> bool {
        (**self).is_signed(msg, sig, pbk)
    }
    fn preimages(&self, digest: &Nat) -> Vec<Nat> {
        (**self).preimages(digest)
    }
    fn signatures_for(&self, msg: &Msg, pbk: &Nat) -> Vec<Nat> {
        (**self).signatures_for(msg, pbk)
    }
}

/// How the toy oracle decides `is_signed(msg, sig, pbk)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignRule {
    /// `sig == msg + pbk + offset`
    Sum { offset: Nat },
    /// `sig == msg * pbk`
    Product,
}

impl fmt::Display for SignRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignRule::Sum { offset } if offset.is_zero() => f.write_str("sum"),
            SignRule::Sum { offset } => write!(f, "sum+{offset}"),
            SignRule::Product => f.write_str("product"),
        }
    }
}

impl core::str::FromStr for SignRule {
    type Err = crate::nat::ParseNatError;

    /// Accepts `sum`, `sum+K` and `product`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(SignRule::Sum {
                offset: Nat::zero(),
            }),
            "product" => Ok(SignRule::Product),
            _ => match s.strip_prefix("sum+") {
                Some(k) => Ok(SignRule::Sum { offset: k.parse()? }),
                None => Err(crate::nat::ParseNatError(s.into())),
            },
        }
    }
}

/// Affine hash `a * n + b` with an arithmetic signing rule. The default
/// (`2n + 1`, `sig == msg + pbk`) makes hand-derived examples easy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToyOracle {
    pub hash_mul: Nat,
    pub hash_add: Nat,
    pub sign_rule: SignRule,
}

impl Default for ToyOracle {
    fn default() -> Self {
        ToyOracle {
            hash_mul: Nat::from(2u64),
            hash_add: Nat::one(),
            sign_rule: SignRule::Sum {
                offset: Nat::zero(),
            },
        }
    }
}

impl ToyOracle {
    pub fn new(hash_mul: Nat, hash_add: Nat, sign_rule: SignRule) -> Self {
        ToyOracle {
            hash_mul,
            hash_add,
            sign_rule,
        }
    }

    fn expected_sig(&self, msg: &Msg, pbk: &Nat) -> Nat {
        match &self.sign_rule {
            SignRule::Sum { offset } => &(&msg.0 + pbk) + offset,
            SignRule::Product => &msg.0 * pbk,
        }
    }
}

impl CryptoOracle for ToyOracle {
    fn hash(&self, value: &Nat) -> Nat {
        &(&self.hash_mul * value) + &self.hash_add
    }

    fn is_signed(&self, msg: &Msg, sig: &Nat, pbk: &Nat) -> bool {
        *sig == self.expected_sig(msg, pbk)
    }

    fn preimages(&self, digest: &Nat) -> Vec<Nat> {
        let Some(diff) = digest.checked_sub(&self.hash_add) else {
            return Vec::new();
        };
        if self.hash_mul.is_zero() {
            // constant hash: every value maps to `hash_add`
            return if diff.is_zero() {
                vec![Nat::zero()]
            } else {
                Vec::new()
            };
        }
        diff.exact_div(&self.hash_mul).into_iter().collect()
    }

    fn signatures_for(&self, msg: &Msg, pbk: &Nat) -> Vec<Nat> {
        vec![self.expected_sig(msg, pbk)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn default_toy_oracle() {
        let o = ToyOracle::default();
        assert_eq!(o.hash(&n(3)), n(7));
        assert!(o.is_signed(&Msg::from(10), &n(13), &n(3)));
        assert!(!o.is_signed(&Msg::from(10), &n(12), &n(3)));
    }

    #[test]
    fn inverses_are_exact() {
        let o = ToyOracle::default();
        assert_eq!(o.preimages(&n(7)), vec![n(3)]);
        assert!(o.preimages(&n(8)).is_empty());
        assert!(o.preimages(&n(0)).is_empty());
        for v in 0..20 {
            for p in o.preimages(&n(v)) {
                assert_eq!(o.hash(&p), n(v));
            }
            for s in o.signatures_for(&Msg::from(4), &n(v)) {
                assert!(o.is_signed(&Msg::from(4), &s, &n(v)));
            }
        }
    }

    #[test]
    fn sign_rule_text() {
        for text in ["sum", "sum+3", "product"] {
            let rule: SignRule = text.parse().unwrap();
            assert_eq!(alloc::format!("{rule}"), text);
        }
        assert!("xor".parse::<SignRule>().is_err());
        let o = ToyOracle::new(n(1), n(0), "product".parse().unwrap());
        assert!(o.is_signed(&Msg::from(3), &n(12), &n(4)));
    }
}
