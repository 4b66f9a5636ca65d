//! Exact rationals and decimal-precision reals.
//!
//! [`PrecReal`] is an MPFR float sized for a requested number of decimal
//! digits `D`. Every elementary function here is correctly rounded by MPFR,
//! so results carry relative error at most `2^-bits < 10^-D`. Callers that
//! chain many operations work at `D + guard_digits(..)` and round once at the
//! end with [`PrecReal::with_digits`].

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Exact arbitrary-size rational, always in lowest terms with positive denominator.
pub type BigRational = Rational;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Exact powers above this many bits go through MPFR `pow` instead of an
/// integer intermediate.
const EXACT_POW_BIT_LIMIT: f64 = (1u64 << 22) as f64;

/// Binary precision that holds `digits` decimal digits with a small margin.
pub fn bits_for_digits(digits: u32) -> u32 {
    (f64::from(digits.max(1)) * LOG2_10).ceil() as u32 + 4
}

/// Guard digits carried internally when `terms` quantities are accumulated.
pub fn guard_digits(terms: usize) -> u32 {
    10 + (terms.max(1) as f64).log2().ceil() as u32
}

#[derive(Clone)]
pub struct PrecReal {
    value: Float,
    digits: u32,
}

impl PrecReal {
    /// Rounds `value` to the binary precision of `digits` decimal digits.
    pub fn from_float(value: Float, digits: u32) -> Self {
        let digits = digits.max(1);
        let mut value = value;
        value.set_prec(bits_for_digits(digits));
        PrecReal { value, digits }
    }

    pub fn from_i64(v: i64, digits: u32) -> Self {
        Self::from_float(Float::with_val(bits_for_digits(digits), v), digits)
    }

    pub fn from_rational(r: &Rational, digits: u32) -> Self {
        Self::from_float(Float::with_val(bits_for_digits(digits), r), digits)
    }

    /// Parses a decimal literal such as `2`, `-1.5` or `3.14159e0`.
    pub fn parse(text: &str, digits: u32) -> Result<Self> {
        let parsed = Float::parse(text.trim())
            .map_err(|e| Error::domain(format!("cannot parse {text:?} as a number: {e}")))?;
        let value = Float::with_val(bits_for_digits(digits), parsed);
        if !value.is_finite() {
            return Err(Error::domain(format!("{text:?} is not finite")));
        }
        Ok(Self::from_float(value, digits))
    }

    pub fn zero(digits: u32) -> Self {
        Self::from_i64(0, digits)
    }

    pub fn one(digits: u32) -> Self {
        Self::from_i64(1, digits)
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn value(&self) -> &Float {
        &self.value
    }

    pub fn into_float(self) -> Float {
        self.value
    }

    /// Same value re-rounded (or widened) to `digits`.
    pub fn with_digits(&self, digits: u32) -> Self {
        Self::from_float(self.value.clone(), digits)
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.value.is_sign_negative() && !self.value.is_zero()
    }

    pub fn abs(&self) -> Self {
        PrecReal {
            value: self.value.clone().abs(),
            digits: self.digits,
        }
    }

    /// `floor(log10 |x|)`, or `None` for zero.
    pub fn log10_floor(&self) -> Option<i64> {
        if self.value.is_zero() {
            return None;
        }
        // Read the decimal exponent off a correctly rounded 3-digit rendering;
        // a value like 9.9996e-5 rounds up to 1.00e-4, so step back in that case.
        let (_, mantissa, exp) = self.value.to_sign_string_exp(10, Some(3));
        let exp = i64::from(exp.expect("nonzero finite value")) - 1;
        if mantissa == "100" {
            let probe = Float::with_val(self.value.prec(), 10).pow(exp as i32);
            if Float::with_val(self.value.prec(), self.value.abs_ref()) < probe {
                return Some(exp - 1);
            }
        }
        Some(exp)
    }

    /// Scientific notation with `D` significant digits.
    pub fn to_sci_string(&self) -> String {
        self.value.to_string_radix(10, Some(self.digits as usize))
    }

    /// Plain positional notation (no exponent) with `sig` significant digits.
    pub fn to_plain_string(&self, sig: usize) -> String {
        plain_decimal(&self.value, sig)
    }
}

/// Renders `x` in positional notation with `sig` significant digits.
pub fn plain_decimal(x: &Float, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let (neg, digits, exp) = x.to_sign_string_exp(10, Some(sig.max(1)));
    let exp = i64::from(exp.expect("finite nonzero value"));
    let digits = digits.trim_end_matches('0');
    let mut out = String::with_capacity(digits.len() + exp.unsigned_abs() as usize + 3);
    if neg {
        out.push('-');
    }
    if exp <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp) as usize));
        out.push_str(digits);
    } else {
        let exp = exp as usize;
        if digits.len() <= exp {
            out.push_str(digits);
            out.extend(std::iter::repeat_n('0', exp - digits.len()));
        } else {
            out.push_str(&digits[..exp]);
            out.push('.');
            out.push_str(&digits[exp..]);
        }
    }
    out
}

impl fmt::Debug for PrecReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrecReal({}, D={})", self.to_sci_string(), self.digits)
    }
}

impl fmt::Display for PrecReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci_string())
    }
}

impl PartialEq for PrecReal {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for PrecReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl FromStr for PrecReal {
    type Err = Error;

    /// Parses at 50 digits; use [`PrecReal::parse`] to choose the precision.
    fn from_str(s: &str) -> Result<Self> {
        PrecReal::parse(s, 50)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&PrecReal> for &PrecReal {
            type Output = PrecReal;
            fn $method(self, rhs: &PrecReal) -> PrecReal {
                let digits = self.digits.min(rhs.digits);
                let value = Float::with_val(bits_for_digits(digits), &self.value $op &rhs.value);
                PrecReal { value, digits }
            }
        }
        impl $trait<PrecReal> for PrecReal {
            type Output = PrecReal;
            fn $method(self, rhs: PrecReal) -> PrecReal {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&PrecReal> for PrecReal {
            type Output = PrecReal;
            fn $method(self, rhs: &PrecReal) -> PrecReal {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for PrecReal {
    type Output = PrecReal;
    fn neg(self) -> PrecReal {
        PrecReal {
            value: -self.value,
            digits: self.digits,
        }
    }
}

impl Neg for &PrecReal {
    type Output = PrecReal;
    fn neg(self) -> PrecReal {
        -self.clone()
    }
}

type ConstMemo = Mutex<HashMap<u32, Float>>;

fn memo_constant(memo: &'static OnceLock<ConstMemo>, bits: u32, c: Constant) -> Float {
    let memo = memo.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = memo.lock().expect("constant memo poisoned").get(&bits) {
        return v.clone();
    }
    // Computed outside the lock; the first value stored for a precision wins.
    let value = match c {
        Constant::Pi => Float::with_val(bits, Constant::Pi),
        _ => Float::with_val(bits, 1).exp(),
    };
    memo.lock()
        .expect("constant memo poisoned")
        .entry(bits)
        .or_insert(value)
        .clone()
}

static PI_MEMO: OnceLock<ConstMemo> = OnceLock::new();
static E_MEMO: OnceLock<ConstMemo> = OnceLock::new();

/// π at `bits` binary digits, memoized per precision.
pub fn pi_float(bits: u32) -> Float {
    memo_constant(&PI_MEMO, bits, Constant::Pi)
}

pub fn pi(digits: u32) -> PrecReal {
    PrecReal::from_float(pi_float(bits_for_digits(digits)), digits)
}

/// Euler's number e.
pub fn e(digits: u32) -> PrecReal {
    let bits = bits_for_digits(digits);
    PrecReal::from_float(memo_constant(&E_MEMO, bits, Constant::Euler), digits)
}

pub fn rexp(x: &PrecReal) -> Result<PrecReal> {
    if !x.value.is_finite() {
        return Err(Error::domain("exp of a non-finite value"));
    }
    let v = Float::with_val(x.value.prec(), x.value.exp_ref());
    if v.is_infinite() {
        return Err(Error::Overflow(format!(
            "exp({}) is not representable",
            x.to_f64()
        )));
    }
    Ok(PrecReal {
        value: v,
        digits: x.digits,
    })
}

pub fn rlog(x: &PrecReal) -> Result<PrecReal> {
    if x.value <= 0 {
        return Err(Error::domain(format!(
            "log of nonpositive value {}",
            x.to_sci_string()
        )));
    }
    Ok(PrecReal {
        value: Float::with_val(x.value.prec(), x.value.ln_ref()),
        digits: x.digits,
    })
}

pub fn rsqrt(x: &PrecReal) -> Result<PrecReal> {
    if x.value < 0 {
        return Err(Error::domain(format!(
            "sqrt of negative value {}",
            x.to_sci_string()
        )));
    }
    Ok(PrecReal {
        value: Float::with_val(x.value.prec(), x.value.sqrt_ref()),
        digits: x.digits,
    })
}

/// `b^x` for a positive integer base. Integer exponents go through an exact
/// rational power before the single final rounding.
pub fn rpow(b: u64, x: &PrecReal) -> Result<PrecReal> {
    if b == 0 {
        return Err(Error::domain("rpow base must be at least 1"));
    }
    let bits = x.value.prec();
    let value = pow_u64_float(b, &x.value, bits);
    if value.is_infinite() {
        return Err(Error::Overflow(format!("{b}^{} overflows", x.to_f64())));
    }
    Ok(PrecReal {
        value,
        digits: x.digits,
    })
}

pub(crate) fn pow_u64_float(b: u64, x: &Float, bits: u32) -> Float {
    if b == 1 || x.is_zero() {
        return Float::with_val(bits, 1);
    }
    if x.is_integer() {
        let m = x.to_f64();
        if m.abs() * (b as f64).log2() <= EXACT_POW_BIT_LIMIT {
            let m = m as i64;
            let base = Integer::from(b);
            let pow = base.pow(m.unsigned_abs() as u32);
            return if m >= 0 {
                Float::with_val(bits, pow)
            } else {
                Float::with_val(bits, Rational::from((Integer::from(1), pow)))
            };
        }
    }
    let base = Float::with_val(bits, b);
    Float::with_val(bits, base.pow(x))
}

/// `(sin x, cos x)`.
pub fn rsin_cos(x: &PrecReal) -> (PrecReal, PrecReal) {
    let bits = x.value.prec();
    let (s, c) = x.value.clone().sin_cos(Float::new(bits));
    (
        PrecReal {
            value: s,
            digits: x.digits,
        },
        PrecReal {
            value: c,
            digits: x.digits,
        },
    )
}

/// `10^-k` at the given precision.
pub(crate) fn ten_pow_neg(k: i64, bits: u32) -> Float {
    Float::with_val(bits, 10).pow(-k)
}
