//! Exact weight arithmetic.
//!
//! Two semirings ship: [`Boolean`] (or/and, the powerset reading) and
//! [`ExtRational`], the nonnegative rationals extended with `inf`. Both are
//! exact; floating point only appears in [`Semiring::approx`], which exists
//! for human-facing reports.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// A commutative semiring with a natural order.
///
/// `Ord` is used both for canonical storage and as the pointwise order of
/// formal sums, so implementations must make it agree with the natural
/// order of the semiring (`0` is the least element).
pub trait Semiring:
    Clone + Eq + Ord + Hash + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Short name used in reports (`boolean`, `rational`).
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    /// Embeds a literal weight from a rule file.
    fn from_literal(w: &ExtRational) -> Self;

    /// The weight as an extended rational (boolean `1` maps to `1`).
    fn to_literal(&self) -> ExtRational;

    fn approx(&self) -> f64;
}

/// The boolean semiring `{0, 1}` with `or` as addition and `and` as
/// multiplication.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Boolean(pub bool);

impl Semiring for Boolean {
    const NAME: &'static str = "boolean";

    fn zero() -> Self {
        Boolean(false)
    }

    fn one() -> Self {
        Boolean(true)
    }

    fn add(&self, other: &Self) -> Self {
        Boolean(self.0 || other.0)
    }

    fn mul(&self, other: &Self) -> Self {
        Boolean(self.0 && other.0)
    }

    fn from_literal(w: &ExtRational) -> Self {
        Boolean(!w.is_zero())
    }

    fn to_literal(&self) -> ExtRational {
        if self.0 {
            ExtRational::one()
        } else {
            ExtRational::zero()
        }
    }

    fn approx(&self) -> f64 {
        if self.0 {
            1.0
        } else {
            0.0
        }
    }
}

impl fmt::Display for Boolean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0 { "1" } else { "0" })
    }
}

/// An element of `[0, inf]` with exact rational finite part.
///
/// `inf · 0 = 0`; otherwise `inf` absorbs under both operations.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ExtRational {
    Finite(BigRational),
    Infinity,
}

impl ExtRational {
    /// Builds `num/den`. Panics if `den` is zero or the value is negative.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        assert!(!r.is_negative(), "negative weight");
        ExtRational::Finite(r)
    }

    pub fn integer(n: u64) -> Self {
        ExtRational::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRational::Infinity)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinity => None,
        }
    }

    /// `self - other`, or `None` when the result would be negative or
    /// involve `inf`.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) if a >= b => {
                Some(ExtRational::Finite(a - b))
            }
            _ => None,
        }
    }

    /// `self / other` for finite operands with nonzero divisor.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) if !b.is_zero() => {
                Some(ExtRational::Finite(a / b))
            }
            _ => None,
        }
    }
}

impl Semiring for ExtRational {
    const NAME: &'static str = "rational";

    fn zero() -> Self {
        ExtRational::Finite(BigRational::zero())
    }

    fn one() -> Self {
        ExtRational::Finite(BigRational::one())
    }

    fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a + b),
            _ => ExtRational::Infinity,
        }
    }

    fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a * b),
            (ExtRational::Finite(a), ExtRational::Infinity)
            | (ExtRational::Infinity, ExtRational::Finite(a))
                if a.is_zero() =>
            {
                Self::zero()
            }
            _ => ExtRational::Infinity,
        }
    }

    fn from_literal(w: &ExtRational) -> Self {
        w.clone()
    }

    fn to_literal(&self) -> ExtRational {
        self.clone()
    }

    fn approx(&self) -> f64 {
        match self {
            ExtRational::Finite(r) => {
                // Scale down big operands before converting so huge
                // denominators do not collapse to NaN.
                let (n, d) = (r.numer(), r.denom());
                let shift = d.bits().max(n.bits()).saturating_sub(1000);
                let n = n >> shift;
                let d = d >> shift;
                match (bigint_to_f64(&n), bigint_to_f64(&d)) {
                    (Some(a), Some(b)) if b != 0.0 => a / b,
                    _ => f64::NAN,
                }
            }
            ExtRational::Infinity => f64::INFINITY,
        }
    }
}

fn bigint_to_f64(n: &BigInt) -> Option<f64> {
    num_traits::ToPrimitive::to_f64(n)
}

impl std::ops::Add for ExtRational {
    type Output = ExtRational;

    fn add(self, rhs: Self) -> Self {
        Semiring::add(&self, &rhs)
    }
}

impl std::ops::Mul for ExtRational {
    type Output = ExtRational;

    fn mul(self, rhs: Self) -> Self {
        Semiring::mul(&self, &rhs)
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(r) => write!(f, "{r}"),
            ExtRational::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtRational {
    type Err = Error;

    /// Accepts `n`, `p/q` and `inf`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |why: &str| Error::Weight {
            text: s.to_string(),
            reason: why.to_string(),
        };
        let s_trim = s.trim();
        if s_trim == "inf" {
            return Ok(ExtRational::Infinity);
        }
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        let (num, den) = match s_trim.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s_trim, "1"),
        };
        if !digits(num) || !digits(den) {
            return Err(bad("expected `n`, `p/q` or `inf`"));
        }
        let num: BigInt = num.parse().map_err(|_| bad("bad numerator"))?;
        let den: BigInt = den.parse().map_err(|_| bad("bad denominator"))?;
        if den.is_zero() {
            return Err(bad("zero denominator"));
        }
        Ok(ExtRational::Finite(BigRational::new(num, den)))
    }
}
