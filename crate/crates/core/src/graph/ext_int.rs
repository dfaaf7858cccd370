//! Integers extended with `-inf` and `+inf`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::EvalError;

/// An integer, or one of the two infinities.
///
/// The derived order follows variant order, so `NegInf < Fin(_) < PosInf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtInt {
    NegInf,
    Fin(i64),
    PosInf,
}

pub use ExtInt::{Fin, NegInf, PosInf};

impl ExtInt {
    pub const ZERO: ExtInt = Fin(0);
    pub const ONE: ExtInt = Fin(1);

    pub fn from_bool(b: bool) -> Self {
        if b {
            Self::ONE
        } else {
            Self::ZERO
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Fin(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Fin(v) => Some(v),
            _ => None,
        }
    }

    pub fn checked_add(self, rhs: ExtInt) -> Result<ExtInt, EvalError> {
        match (self, rhs) {
            (Fin(a), Fin(b)) => a.checked_add(b).map(Fin).ok_or(EvalError::Overflow),
            (PosInf, NegInf) | (NegInf, PosInf) => Err(EvalError::IndeterminateSum),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
        }
    }


    pub fn checked_sub(self, rhs: ExtInt) -> Result<ExtInt, EvalError> {
        self.checked_add(-rhs)
    }

    /// Product with `0 * inf = 0`.
    pub fn checked_mul(self, rhs: ExtInt) -> Result<ExtInt, EvalError> {
        match (self, rhs) {
            (Fin(a), Fin(b)) => a.checked_mul(b).map(Fin).ok_or(EvalError::Overflow),
            (Fin(0), _) | (_, Fin(0)) => Ok(Fin(0)),
            (a, b) => {
                let positive = (a > Fin(0)) == (b > Fin(0));
                Ok(if positive { PosInf } else { NegInf })
            }
        }
    }

    pub fn scale(self, coef: i64) -> Result<ExtInt, EvalError> {
        Fin(coef).checked_mul(self)
    }

    /// Sum of a sequence; opposite infinities anywhere in the input are an error
    /// even if they would not be adjacent.
    pub fn sum<I: IntoIterator<Item = ExtInt>>(items: I) -> Result<ExtInt, EvalError> {
        let mut finite: i64 = 0;
        let mut pos = false;
        let mut neg = false;
        for it in items {
            match it {
                Fin(v) => finite = finite.checked_add(v).ok_or(EvalError::Overflow)?,
                PosInf => pos = true,
                NegInf => neg = true,
            }
        }
        match (pos, neg) {
            (true, true) => Err(EvalError::IndeterminateSum),
            (true, false) => Ok(PosInf),
            (false, true) => Ok(NegInf),
            (false, false) => Ok(Fin(finite)),
        }
    }
}

impl std::ops::Neg for ExtInt {
    type Output = ExtInt;

    fn neg(self) -> ExtInt {
        match self {
            NegInf => PosInf,
            PosInf => NegInf,
            // i64::MIN has no negation; saturate to the closest finite value
            Fin(v) => Fin(v.checked_neg().unwrap_or(i64::MAX)),
        }
    }
}

impl Default for ExtInt {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<i64> for ExtInt {
    fn from(v: i64) -> Self {
        Fin(v)
    }
}

impl PartialEq<i64> for ExtInt {
    fn eq(&self, other: &i64) -> bool {
        *self == Fin(*other)
    }
}

impl PartialOrd<i64> for ExtInt {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&Fin(*other)))
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => f.write_str("-inf"),
            PosInf => f.write_str("+inf"),
            Fin(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for ExtInt {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+inf" | "inf" => Ok(PosInf),
            "-inf" => Ok(NegInf),
            t => t
                .parse::<i64>()
                .map(Fin)
                .map_err(|e| format!("invalid extended integer {t:?}: {e}")),
        }
    }
}

impl ExtInt {
    /// JSON form: a number when finite, `"+inf"` / `"-inf"` otherwise.
    pub fn to_json(self) -> serde_json::Value {
        match self {
            Fin(v) => serde_json::Value::from(v),
            other => serde_json::Value::from(other.to_string()),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Option<ExtInt> {
        match v {
            serde_json::Value::Number(n) => n.as_i64().map(Fin),
            serde_json::Value::String(s) => match s.as_str() {
                "+inf" => Some(PosInf),
                "-inf" => Some(NegInf),
                _ => None,
            },
            _ => None,
        }
    }
}
