//! Unbounded naturals and the two immutable state components built on them.

use alloc::string::String;
use core::fmt;
use core::ops::{Add, Mul};
use core::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// A stack element. Byte vectors are modelled as unbounded non-negative
/// integers; there is no script-number encoding.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Nat(BigUint);

impl Nat {
    pub fn zero() -> Self {
        Nat(BigUint::zero())
    }

    pub fn one() -> Self {
        Nat(BigUint::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Script truthiness: any value above zero counts as true.
    pub fn is_positive(&self) -> bool {
        !self.0.is_zero()
    }

    /// `n - 1`, or `None` for zero.
    pub fn checked_pred(&self) -> Option<Nat> {
        if self.is_zero() {
            None
        } else {
            Some(Nat(&self.0 - 1u32))
        }
    }

    pub fn succ(&self) -> Nat {
        Nat(&self.0 + 1u32)
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.0.to_usize()
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    /// Exact quotient `self / divisor` if `divisor` divides `self`.
    pub fn exact_div(&self, divisor: &Nat) -> Option<Nat> {
        if divisor.is_zero() {
            return None;
        }
        let q = &self.0 / &divisor.0;
        if &q * &divisor.0 == self.0 {
            Some(Nat(q))
        } else {
            None
        }
    }

    /// `self - other`, or `None` when it would go below zero.
    pub fn checked_sub(&self, other: &Nat) -> Option<Nat> {
        if self.0 >= other.0 {
            Some(Nat(&self.0 - &other.0))
        } else {
            None
        }
    }
}

/// `boolToNat`: true is 1, false is 0.
pub fn bool_to_nat(b: bool) -> Nat {
    if b {
        Nat::one()
    } else {
        Nat::zero()
    }
}

/// `compareNaturals`: 1 if the arguments are equal, otherwise 0.
pub fn compare_naturals(n: &Nat, m: &Nat) -> Nat {
    bool_to_nat(n == m)
}

impl From<u64> for Nat {
    fn from(v: u64) -> Self {
        Nat(BigUint::from(v))
    }
}

impl From<u32> for Nat {
    fn from(v: u32) -> Self {
        Nat(BigUint::from(v))
    }
}

impl From<usize> for Nat {
    fn from(v: usize) -> Self {
        Nat(BigUint::from(v))
    }
}

impl From<BigUint> for Nat {
    fn from(v: BigUint) -> Self {
        Nat(v)
    }
}

impl Add for &Nat {
    type Output = Nat;
    fn add(self, rhs: &Nat) -> Nat {
        Nat(&self.0 + &rhs.0)
    }
}

impl Mul for &Nat {
    type Output = Nat;
    fn mul(self, rhs: &Nat) -> Nat {
        Nat(&self.0 * &rhs.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a decimal natural: {0:?}")]
pub struct ParseNatError(pub String);

impl FromStr for Nat {
    type Err = ParseNatError;

    /// Plain ASCII decimal digits only; no sign, no separators.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseNatError(s.into()));
        }
        s.parse::<BigUint>()
            .map(Nat)
            .map_err(|_| ParseNatError(s.into()))
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// The message being signed. Opaque; only compared for equality by oracles.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Msg(pub Nat);

/// The current time of the transaction being validated.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Time(pub Nat);

macro_rules! nat_newtype {
    ($name:ident) => {
        impl From<u64> for $name {
            fn from(v: u64) -> Self {
                $name(Nat::from(v))
            }
        }

        impl From<Nat> for $name {
            fn from(v: Nat) -> Self {
                $name(v)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(&self.0, f)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(&self.0, f)
            }
        }
    };
}

nat_newtype!(Msg);
nat_newtype!(Time);
