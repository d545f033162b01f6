//! Extended-precision real arithmetic.
//!
//! Every quantity in the solver is a [`Real`], an MPFR float whose precision
//! is fixed by a [`PrecisionContext`]. Binary operations take the larger of
//! the two operand precisions, so values built from one context stay at that
//! context's precision throughout a computation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Smallest number of significant decimal digits a context may carry.
pub const MIN_DIGITS: u32 = 30;

/// Default working precision in significant decimal digits.
pub const DEFAULT_DIGITS: u32 = 50;

/// Working precision shared by every computation of a run.
///
/// Immutable once built; cheap to clone and safe to share between threads.
#[derive(Clone, Debug)]
pub struct PrecisionContext {
    digits: u32,
    bits: u32,
    epsilon: Real,
}

impl PrecisionContext {
    /// Builds a context carrying `digits` significant decimal digits.
    pub fn new(digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::Config(format!("precision of {digits} digits is below the minimum of {MIN_DIGITS}")));
        }
        // ceil(digits * log2(10)) plus a few guard bits
        let bits = ((f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32) + 8;
        let exponent = -i32::try_from(digits - 5).expect("digit count fits in i32");
        let epsilon = Real(Float::with_val(bits, 10).pow(exponent));
        Ok(Self { digits, bits, epsilon })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary precision of every value created through this context.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Threshold below which a quantity is treated as numerically zero,
    /// `10^-(digits - 5)`.
    pub fn epsilon(&self) -> &Real {
        &self.epsilon
    }

    pub fn zero(&self) -> Real {
        Real(Float::new(self.bits))
    }

    pub fn one(&self) -> Real {
        self.int(1)
    }

    pub fn int(&self, value: i64) -> Real {
        Real(Float::with_val(self.bits, value))
    }

    /// Exactly rounded `num / den`.
    pub fn ratio(&self, num: i64, den: i64) -> Real {
        Real(Float::with_val(self.bits, num) / Float::with_val(self.bits, den))
    }

    /// Converts an `f64`. Only exact for dyadic values; prefer [`Self::parse`]
    /// for decimal inputs such as `0.01`.
    pub fn from_f64(&self, value: f64) -> Real {
        Real(Float::with_val(self.bits, value))
    }

    pub fn pi(&self) -> Real {
        Real(Float::with_val(self.bits, Constant::Pi))
    }

    /// `10^exp` at context precision.
    pub fn pow10(&self, exp: i32) -> Real {
        Real(Float::with_val(self.bits, 10).pow(exp))
    }

    /// Parses a decimal literal (`0.01`, `-3.16e6`) or a ratio (`-1/3`) at
    /// full context precision.
    pub fn parse(&self, text: &str) -> Result<Real> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num = self.parse(num)?;
            let den = self.parse(den)?;
            if den.is_zero() {
                return Err(Error::Config(format!("zero denominator in `{text}`")));
            }
            return Ok(num / &den);
        }
        let parsed = Float::parse(text).map_err(|e| Error::Config(format!("cannot parse `{text}` as a number: {e}")))?;
        let value = Float::with_val(self.bits, parsed);
        if !value.is_finite() {
            return Err(Error::Config(format!("`{text}` is not a finite number")));
        }
        Ok(Real(value))
    }

    /// Lifts a value of possibly different precision into this context.
    pub fn lift(&self, value: &Real) -> Real {
        Real(Float::with_val(self.bits, &value.0))
    }
}

/// Builds a context; fails with a configuration error below 30 digits.
pub fn make_context(digits: u32) -> Result<PrecisionContext> {
    PrecisionContext::new(digits)
}

/// Extended-precision real number.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Real {
        Real(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> Real {
        Real(self.0.clone().sqrt())
    }

    pub fn square(&self) -> Real {
        Real(self.0.clone().square())
    }

    pub fn exp(&self) -> Real {
        Real(self.0.clone().exp())
    }

    pub fn log10(&self) -> Real {
        Real(self.0.clone().log10())
    }

    pub fn powi(&self, exp: i32) -> Real {
        Real(self.0.clone().pow(exp))
    }

    pub fn recip(&self) -> Real {
        Real(self.0.clone().recip())
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Fused `self += a * b`.
    pub fn add_mul(&mut self, a: &Real, b: &Real) {
        let prec = self.prec().max(a.prec()).max(b.prec());
        self.0.set_prec(prec);
        self.0 += &a.0 * &b.0;
    }

    pub fn total_cmp(&self, other: &Real) -> Ordering {
        self.0.total_cmp(&other.0)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn from_float(value: Float) -> Real {
        Real(value)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((f64::from(self.prec()) - 8.0) / std::f64::consts::LOG2_10).floor() as usize;
        f.write_str(&format_scalar(self, digits.max(1)))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let prec = self.prec().max(rhs.prec());
                Real(Float::with_val(prec, (&self.0).$method(&rhs.0)))
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
        impl $assign_trait<&Real> for Real {
            fn $assign(&mut self, rhs: &Real) {
                let prec = self.prec().max(rhs.prec());
                self.0.set_prec(prec);
                self.0.$assign(&rhs.0);
            }
        }
        impl $assign_trait<Real> for Real {
            fn $assign(&mut self, rhs: Real) {
                self.$assign(&rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);

impl Div<&Real> for &Real {
    type Output = Real;
    fn div(self, rhs: &Real) -> Real {
        let prec = self.prec().max(rhs.prec());
        Real(Float::with_val(prec, &self.0 / &rhs.0))
    }
}

impl Div<&Real> for Real {
    type Output = Real;
    fn div(self, rhs: &Real) -> Real {
        &self / rhs
    }
}

impl Div<Real> for Real {
    type Output = Real;
    fn div(self, rhs: Real) -> Real {
        &self / &rhs
    }
}

impl Mul<i64> for &Real {
    type Output = Real;
    fn mul(self, rhs: i64) -> Real {
        Real(Float::with_val(self.prec(), &self.0 * rhs))
    }
}

impl Div<i64> for &Real {
    type Output = Real;
    fn div(self, rhs: i64) -> Real {
        Real(Float::with_val(self.prec(), &self.0 / rhs))
    }
}

impl Mul<i64> for Real {
    type Output = Real;
    fn mul(self, rhs: i64) -> Real {
        &self * rhs
    }
}

impl Div<i64> for Real {
    type Output = Real;
    fn div(self, rhs: i64) -> Real {
        &self / rhs
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(Float::with_val(self.prec(), -&self.0))
    }
}

/// Formats `x` with `sig_digits` significant decimal digits, rounding to
/// nearest with ties to even.
///
/// Fixed-point notation is used while the decimal exponent stays within
/// `[-6, sig_digits]`; outside that window the output switches to
/// `d.ddde±N` so that tiny residuals stay compact.
pub fn format_scalar(x: &Real, sig_digits: usize) -> String {
    let sig_digits = sig_digits.max(1);
    if x.0.is_nan() {
        return "NaN".into();
    }
    if x.0.is_infinite() {
        return if x.0.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    if x.0.is_zero() {
        return if sig_digits > 1 { format!("0.{}", "0".repeat(sig_digits - 1)) } else { "0".into() };
    }
    let (negative, digits, exp) = x.0.to_sign_string_exp_round(10, Some(sig_digits), Round::Nearest);
    // value = 0.d1d2d3... * 10^exp
    let exp = exp.expect("finite nonzero value has an exponent");
    let sign = if negative { "-" } else { "" };
    let body = if exp <= 0 && exp > -6 {
        format!("0.{}{}", "0".repeat((-exp) as usize), digits)
    } else if exp > 0 && (exp as usize) <= sig_digits {
        let (int_part, frac_part) = digits.split_at(exp as usize);
        if frac_part.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac_part}")
        }
    } else {
        let (lead, rest) = digits.split_at(1);
        if rest.is_empty() {
            format!("{lead}e{}", exp - 1)
        } else {
            format!("{lead}.{rest}e{}", exp - 1)
        }
    };
    format!("{sign}{body}")
}

/// Number of leading decimal digits on which `a` and `b` agree, measured as
/// `-log10(|a - b| / |b|)`; saturates at `cap`.
pub fn agreeing_digits(a: &Real, b: &Real, cap: f64) -> f64 {
    let diff = (a - b).abs();
    if diff.is_zero() {
        return cap;
    }
    let scale = b.abs();
    let rel = if scale.is_zero() { diff } else { diff / &scale };
    (-rel.log10().to_f64()).min(cap)
}
