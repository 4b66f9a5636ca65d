//! `q₁`, `q₂` in three representations and the dyadic series
//! `log pᵢ(σ) = -Σ_{n≥0} 2^{-n-1} log qᵢ(2ⁿσ)`.
//!
//! Every series value carries a bound on `|log(true pᵢ) - partial sum|`: the
//! explicit majorant `Σ_{k≥N} 2^{-k-1}·16/(2^{2^k σ} - 2)` plus the error of
//! each summed term.

use std::fmt;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::bernoulli::{bernoulli_number, gen_bernoulli};
use crate::error::{Error, Result};
use crate::euler::{sieve, Half};
use crate::lfunc::{dirichlet_l_float, zeta_float, ExactSpecialValue};
use crate::numkernel::{bits_for_digits, guard_digits, ten_pow_neg, PrecReal};
use crate::quadchar::QuadraticCharacter;

/// Smallest argument routed to the prime sum.
pub const PRIME_SUM_MIN_ARG: f64 = 16.0;
/// Largest prime bound the prime sum may request.
pub const PRIME_SUM_MAX_LIMIT: u64 = 2_000_000;
/// Largest even argument evaluated through Bernoulli numbers.
pub const EXACT_MAX_ARG: u64 = 512;
/// `2^N σ` must stay below this so every power stays in the exponent range.
const MAX_ARGUMENT: f64 = (1u64 << 28) as f64;

/// Selects `q₁` (split primes) or `q₂` (inert primes) for a character.
#[derive(Clone, Debug)]
pub struct QRepresentation {
    pub which: Half,
    pub character: QuadraticCharacter,
}

impl QRepresentation {
    pub fn new(which: Half, character: QuadraticCharacter) -> Self {
        QRepresentation { which, character }
    }
}

/// Evaluator used for one term `log qᵢ(2ⁿσ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermPath {
    Exact,
    Analytic,
    PrimeSum { prime_limit: u64 },
}

impl fmt::Display for TermPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPath::Exact => write!(f, "exact"),
            TermPath::Analytic => write!(f, "analytic"),
            TermPath::PrimeSum { prime_limit } => write!(f, "prime-sum(P={prime_limit})"),
        }
    }
}

/// Sign applied to the Bernoulli closed form of `q₁(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignConvention {
    /// Includes the factor `(-1)^{1+n}`; the result is positive.
    Corrected,
    /// The closed form without that factor; negative for every even `n`.
    Uncorrected,
}

#[derive(Clone, Debug)]
pub struct TruncationResult {
    /// `exp(-Σ_{k<N} x_k)`.
    pub value: PrecReal,
    /// `-Σ_{k<N} x_k` at working precision.
    pub log_value: PrecReal,
    pub terms: usize,
    /// `x_k = 2^{-k-1} log qᵢ(2^k σ)` at working precision.
    pub partial_terms: Vec<PrecReal>,
    pub paths: Vec<TermPath>,
    /// Bound on the evaluation error of each `x_k`.
    pub term_errors: Vec<PrecReal>,
    /// Bound on `|log(true pᵢ) - log_value|`.
    pub tail_bound: PrecReal,
}

#[derive(Clone, Debug)]
pub struct FeResidual {
    pub residual: PrecReal,
    /// `3·(tail bounds) + 10^{5-D}`.
    pub bound: PrecReal,
}

#[derive(Clone, Debug)]
pub struct FactorizationResiduals {
    /// `|ζ(σ) - Π_{p|d}(1-p^{-σ})^{-1} p₁(σ) p₂(σ)|`.
    pub r_zeta: PrecReal,
    /// `|L(σ,χ) - p₁(σ) p₂(2σ) / p₂(σ)|`.
    pub r_l: PrecReal,
    pub bound_zeta: PrecReal,
    pub bound_l: PrecReal,
}

#[derive(Clone, Debug)]
pub struct ErrorRow {
    pub n: usize,
    /// `|p_ref - partial_N|`.
    pub error: PrecReal,
    /// `floor(log10(error))`; `None` when the error is exactly zero.
    pub exponent: Option<i64>,
    /// Certified bound on `|log(true pᵢ) - log partial_N|`.
    pub tail_bound: PrecReal,
    pub tail_exponent: Option<i64>,
    /// False when the error is within 100× of the reference's own uncertainty.
    pub resolved: bool,
}

#[derive(Clone, Debug)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
    pub reference: TruncationResult,
    /// Absolute uncertainty of the reference value.
    pub resolution: PrecReal,
    pub digits: u32,
}

fn sigma_float(sigma: &PrecReal, bits: u32) -> Float {
    Float::with_val(bits, sigma.value())
}

fn check_gt_one(sigma: &PrecReal, what: &str) -> Result<()> {
    if *sigma.value() <= 1 {
        return Err(Error::domain(format!(
            "{what} needs σ > 1; got {}",
            sigma.to_sci_string()
        )));
    }
    Ok(())
}

fn check_ge_two(sigma: &PrecReal, what: &str) -> Result<()> {
    if *sigma.value() < 2 {
        return Err(Error::domain(format!(
            "{what} needs σ >= 2; got {}",
            sigma.to_sci_string()
        )));
    }
    Ok(())
}

/// Replaces a bound that underflowed to zero by `2^{-floor}`, which lies above
/// every value below the exponent range.
fn floor_bound(x: Float, floor: u32) -> Float {
    if x.is_zero() {
        Float::with_val(x.prec(), 1) >> floor
    } else {
        x
    }
}

/// `Π_{p|d}(1 + ε p^{-s})` with `ε = ±1`.
fn ramified_product(c: &QuadraticCharacter, s: &Float, sign: i32, bits: u32) -> Float {
    let neg_s = Float::with_val(bits, -s);
    let mut v = Float::with_val(bits, 1);
    for p in c.discriminant().ramified_primes() {
        let x = Float::with_val(bits, p).pow(&neg_s);
        v *= if sign > 0 { x + 1u32 } else { 1u32 - x };
    }
    v
}

fn q_analytic_float(rep: &QRepresentation, s: &Float, bits: u32) -> Result<Float> {
    let wb = bits + 16;
    let s = Float::with_val(wb, s);
    let c = &rep.character;
    let z = zeta_float(&s, wb)?;
    let l = dirichlet_l_float(c, &s, wb)?;
    let q = match rep.which {
        Half::Split => {
            let z2 = zeta_float(&Float::with_val(wb, &s * 2u32), wb)?;
            z2 / (z * l) * ramified_product(c, &s, 1, wb)
        }
        Half::Inert => l / z / ramified_product(c, &s, -1, wb),
    };
    Ok(Float::with_val(bits, q))
}

/// `q₁(σ) = ζ(2σ)/(ζ(σ)L(σ,χ))·Π_{p|d}(1+p^{-σ})` or
/// `q₂(σ) = L(σ,χ)/ζ(σ)·Π_{p|d}(1-p^{-σ})^{-1}`.
pub fn q_analytic(rep: &QRepresentation, sigma: &PrecReal, digits: u32) -> Result<PrecReal> {
    check_gt_one(sigma, "q_analytic")?;
    let bits = bits_for_digits(digits + 5);
    let q = q_analytic_float(rep, &sigma_float(sigma, bits), bits)?;
    let slack = Float::with_val(bits, 1) + (Float::with_val(bits, 1) >> (bits - 12));
    if q <= 0 || q > slack {
        return Err(Error::Internal(format!(
            "q{}({}) = {} lies outside (0, 1]",
            rep.which.index(),
            sigma.to_sci_string(),
            q.to_string_radix(10, Some(20))
        )));
    }
    Ok(PrecReal::from_float(q, digits))
}

/// Closed form of `qᵢ(n)` at even `n` for a real quadratic field, with the
/// corrective sign on `q₁`.
pub fn q_exact_even(rep: &QRepresentation, n: u32) -> Result<ExactSpecialValue> {
    q_exact_even_with(rep, n, SignConvention::Corrected)
}

/// `q₁(n) = ± 2dⁿ/(C(2n,n)√d) · B_{2n}/(B_{n,χ}B_n) · Π_{p|d}(1+p^{-n})`,
/// `q₂(n) = √d/dⁿ · B_{n,χ}/B_n · Π_{p|d}(1-p^{-n})^{-1}`.
pub fn q_exact_even_with(
    rep: &QRepresentation,
    n: u32,
    convention: SignConvention,
) -> Result<ExactSpecialValue> {
    let c = &rep.character;
    if c.parity() != 0 {
        return Err(Error::Parity(format!(
            "Δ={} gives an odd character; closed form needs Δ > 0",
            c.discriminant().delta()
        )));
    }
    if n < 2 || n % 2 == 1 {
        return Err(Error::Parity(format!(
            "closed form needs even n >= 2; got {n}"
        )));
    }
    let nn = n as usize;
    let d = Integer::from(c.modulus());
    let bn = bernoulli_number(nn)?;
    let table = gen_bernoulli(c, nn)?;
    let bchi = table.get(nn).expect("table covers n").clone();
    if bchi == 0 {
        return Err(Error::InternalInconsistency(format!(
            "B_{{{n},χ}} vanished"
        )));
    }
    let coeff = match rep.which {
        Half::Split => {
            let b2n = bernoulli_number(2 * nn)?;
            let binom = Integer::from(Integer::binomial_u(2 * n, n));
            let mut coeff = Rational::from(Integer::from(&d).pow(n - 1) * 2u32) / binom;
            coeff *= b2n / (bchi * bn);
            for p in c.discriminant().ramified_primes() {
                coeff *= Rational::from(1) + Rational::from((1, Integer::from(p).pow(n)));
            }
            if convention == SignConvention::Corrected {
                coeff = -coeff;
            }
            coeff
        }
        Half::Inert => {
            let mut coeff = bchi / bn / Integer::from(&d).pow(n);
            for p in c.discriminant().ramified_primes() {
                coeff /= Rational::from(1) - Rational::from((1, Integer::from(p).pow(n)));
            }
            coeff
        }
    };
    if convention == SignConvention::Corrected && coeff <= 0 {
        return Err(Error::Internal(format!(
            "q{}({n}) coefficient {coeff} is not positive",
            rep.which.index()
        )));
    }
    Ok(ExactSpecialValue {
        coeff,
        pi_power: 0,
        sqrt_disc: true,
        disc: Some(c.discriminant()),
    })
}

/// `4·P^{1-σ}/(σ-1)`, bounding the omitted part of the prime sum. Computed
/// at 64 bits; an underflow is replaced by `2^{-(bits+64)}`.
fn prime_sum_tail(prime_limit: u64, s: &Float, bits: u32) -> Float {
    let s1 = Float::with_val(64, s - 1u32);
    let p = Float::with_val(64, prime_limit.max(1));
    let tail = p.pow(Float::with_val(64, -&s1)) * 4u32 / s1 * (1.0 + 1e-12);
    floor_bound(tail, bits + 64)
}

/// `Σ -2 atanh(p^{-s})` over `primes`, each term at the precision its size
/// relative to the first term warrants. Returns the sum and a bound on the
/// rounding error relative to that first term.
fn prime_sum_float(primes: &[u64], s: &Float, bits: u32) -> (Float, Float) {
    let a = s.to_f64();
    let neg_s = Float::with_val(s.prec(), -s);
    let mut acc = Float::new(bits + 8);
    let lead = primes.first().map_or(0.0, |&p| a * (p as f64).log2());
    for &p in primes {
        let drop = a * (p as f64).log2() - lead;
        let local = if drop >= f64::from(bits) {
            64
        } else {
            (bits - drop as u32).max(64) + 16
        };
        let x = Float::with_val(local, p).pow(&neg_s);
        acc -= x.atanh() * 2u32;
    }
    let scale = Float::with_val(64, acc.abs_ref()) * 2u32 + (Float::with_val(64, 1) >> (bits + 64));
    let err = (Float::with_val(64, primes.len() + 2) * scale) >> (bits - 4);
    (Float::with_val(bits, acc), err)
}

/// `(Σ_{p ≤ P in class} log((1-p^{-σ})/(1+p^{-σ})), 4·P^{1-σ}/(σ-1))`.
pub fn log_q_prime_sum(
    rep: &QRepresentation,
    sigma: &PrecReal,
    digits: u32,
    prime_limit: u64,
) -> Result<(PrecReal, PrecReal)> {
    check_ge_two(sigma, "log_q_prime_sum")?;
    let primes = class_primes(&rep.character, rep.which, prime_limit)?;
    let bits = bits_for_digits(digits + guard_digits(primes.len()));
    let s = sigma_float(sigma, bits);
    let (sum, _) = prime_sum_float(&primes, &s, bits);
    let tail = prime_sum_tail(prime_limit, &s, bits);
    Ok((
        PrecReal::from_float(sum, digits),
        PrecReal::from_float(tail, digits),
    ))
}

fn class_primes(c: &QuadraticCharacter, half: Half, limit: u64) -> Result<Vec<u64>> {
    if limit < 2 {
        return Ok(Vec::new());
    }
    let want = if half == Half::Split { 1 } else { -1 };
    Ok(sieve(limit)?
        .into_iter()
        .filter(|&p| c.chi(p as i64) == want)
        .collect())
}

/// `16/(2^σ - 2)`, which bounds `|log qᵢ(σ)|` for `σ ≥ 2`.
pub fn log_q_bound(sigma: &PrecReal) -> Result<PrecReal> {
    check_ge_two(sigma, "log_q_bound")?;
    let digits = sigma.digits();
    let bits = bits_for_digits(digits + 5);
    let t = Float::with_val(bits, 2).pow(sigma.value());
    Ok(PrecReal::from_float(
        Float::with_val(bits, 16) / (t - 2u32),
        digits,
    ))
}

/// `Σ_{k≥from} 2^{-k-1}·16/(2^{2^k σ} - 2)` rounded upward.
fn majorant_tail(s: &Float, from: usize, bits: u32) -> Float {
    let prec = 64;
    let term = |k: usize| {
        let a = Float::with_val(prec, s) << k as u32;
        let den = Float::with_val(prec, 2).pow(&a) - 2u32;
        (Float::with_val(prec, 16) / den) >> (k as u32 + 1)
    };
    // Ratios between consecutive terms are below 1/2, so the last term
    // computed also bounds everything after it.
    let first = term(from);
    let second = term(from + 1);
    let sum = Float::with_val(prec, &first + &second) + &second;
    let sum = Float::with_val(prec, &sum * (1.0 + 1e-12));
    floor_bound(sum, bits + 64)
}

/// Smallest prime bound making the prime-sum tail at argument `a` fall below
/// `2^-bits`, if it is at most [`PRIME_SUM_MAX_LIMIT`].
fn prime_sum_limit(a: f64, bits: u32) -> Option<u64> {
    if a < PRIME_SUM_MIN_ARG {
        return None;
    }
    let target = f64::from(bits) * std::f64::consts::LN_2 + 4f64.ln() - (a - 1.0).ln();
    let log_p = target.max(0.0) / (a - 1.0);
    if log_p > (PRIME_SUM_MAX_LIMIT as f64).ln() {
        return None;
    }
    Some(((log_p.exp().ceil() as u64) + 1).max(2))
}

fn choose_path(c: &QuadraticCharacter, arg: &Float, bits: u32) -> TermPath {
    let a = arg.to_f64();
    if let Some(prime_limit) = prime_sum_limit(a, bits) {
        return TermPath::PrimeSum { prime_limit };
    }
    if c.parity() == 0
        && arg.is_integer()
        && a <= EXACT_MAX_ARG as f64
        && (a as u64).is_multiple_of(2)
    {
        return TermPath::Exact;
    }
    TermPath::Analytic
}

struct LogTerm {
    value: Float,
    error: Float,
}

fn log_q_term(
    rep: &QRepresentation,
    arg: &Float,
    path: TermPath,
    primes: &[u64],
    bits: u32,
) -> Result<LogTerm> {
    let to_log = |q: Float| -> Result<Float> {
        if q <= 0 {
            return Err(Error::Internal(format!(
                "q{}({}) evaluated to a nonpositive value",
                rep.which.index(),
                arg.to_f64()
            )));
        }
        Ok(q.ln())
    };
    match path {
        TermPath::Exact => {
            let n = arg
                .to_integer()
                .expect("integer argument")
                .to_u32()
                .expect("small argument");
            let q = q_exact_even(rep, n)?.render_float(bits + 16);
            Ok(LogTerm {
                value: Float::with_val(bits, to_log(q)?),
                error: Float::with_val(64, 1) >> (bits - 4),
            })
        }
        TermPath::Analytic => {
            let q = q_analytic_float(rep, arg, bits + 8)?;
            Ok(LogTerm {
                value: Float::with_val(bits, to_log(q)?),
                error: Float::with_val(64, 1) >> (bits - 10),
            })
        }
        TermPath::PrimeSum { prime_limit } => {
            let upto = primes.partition_point(|&p| p <= prime_limit);
            let (value, rounding) = prime_sum_float(&primes[..upto], arg, bits);
            let tail = prime_sum_tail(prime_limit, arg, bits);
            Ok(LogTerm {
                value,
                error: rounding + tail,
            })
        }
    }
}

/// `pᵢ(σ) ≈ exp(-Σ_{n<N} 2^{-n-1} log qᵢ(2ⁿσ))` with a certified bound on the
/// log error.
pub fn p_series(
    half: Half,
    c: &QuadraticCharacter,
    sigma: &PrecReal,
    terms: usize,
    digits: u32,
) -> Result<TruncationResult> {
    check_gt_one(sigma, "p_series")?;
    if terms == 0 && *sigma.value() < 2 {
        return Err(Error::domain("p_series with no terms needs σ >= 2"));
    }
    if sigma.to_f64() * 2f64.powi(terms as i32 + 1) > MAX_ARGUMENT {
        return Err(Error::domain(format!(
            "2^N·σ exceeds 2^28 (N={terms}, σ={})",
            sigma.to_sci_string()
        )));
    }
    let rep = QRepresentation::new(half, c.clone());
    let work = digits + guard_digits(terms.max(1));
    let bits = bits_for_digits(work);
    let s = sigma_float(sigma, bits);
    let args: Vec<Float> = (0..terms)
        .map(|n| Float::with_val(bits, &s << n as u32))
        .collect();
    let paths: Vec<TermPath> = args.iter().map(|a| choose_path(c, a, bits)).collect();
    let max_limit = paths
        .iter()
        .filter_map(|p| match p {
            TermPath::PrimeSum { prime_limit } => Some(*prime_limit),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let primes = class_primes(c, half, max_limit)?;
    let evaluated: Vec<LogTerm> = args
        .par_iter()
        .zip(paths.par_iter())
        .map(|(a, &path)| log_q_term(&rep, a, path, &primes, bits))
        .collect::<Result<_>>()?;

    let mut sum = Float::new(bits);
    let mut err = Float::new(64);
    let mut partial_terms = Vec::with_capacity(terms);
    let mut term_errors = Vec::with_capacity(terms);
    for (k, t) in evaluated.into_iter().enumerate() {
        let x = Float::with_val(bits, t.value >> (k as u32 + 1));
        let e = Float::with_val(64, t.error >> (k as u32 + 1));
        sum += &x;
        err += &e;
        partial_terms.push(PrecReal::from_float(x, work));
        term_errors.push(PrecReal::from_float(e, 20));
    }
    err += Float::with_val(64, terms + 1) >> (bits - 4);
    let tail = Float::with_val(64, majorant_tail(&s, terms, bits) + err);
    let log_value = Float::with_val(bits, -sum);
    let value = Float::with_val(bits, log_value.exp_ref());
    Ok(TruncationResult {
        value: PrecReal::from_float(value, digits),
        log_value: PrecReal::from_float(log_value, work),
        terms,
        partial_terms,
        paths,
        term_errors,
        tail_bound: PrecReal::from_float(tail, 20),
    })
}

/// `|pᵢ(2σ)/pᵢ(σ)² - qᵢ(σ)|` from independent evaluations of both sides.
pub fn fe_residual(
    half: Half,
    c: &QuadraticCharacter,
    sigma: &PrecReal,
    terms: usize,
    digits: u32,
) -> Result<FeResidual> {
    check_gt_one(sigma, "fe_residual")?;
    let work = digits + 10;
    let sigma = sigma.with_digits(sigma.digits().max(work));
    let double = &sigma + &sigma;
    let pa = p_series(half, c, &sigma, terms, work)?;
    let pb = p_series(half, c, &double, terms, work)?;
    let q = q_analytic(&QRepresentation::new(half, c.clone()), &sigma, work)?;
    let lhs = &pb.value / &(&pa.value * &pa.value);
    let residual = (&lhs - &q).abs().with_digits(digits);
    let bits = bits_for_digits(20);
    let tails = Float::with_val(bits, pa.tail_bound.value() + pb.tail_bound.value()) * 3u32;
    let bound = tails + ten_pow_neg(i64::from(digits) - 5, bits);
    Ok(FeResidual {
        residual,
        bound: PrecReal::from_float(bound, 20),
    })
}

/// Residuals of `ζ = Π_{p|d}(1-p^{-σ})^{-1} p₁ p₂` and `L = p₁ p₂(2σ)/p₂`.
pub fn factorization_residuals(
    c: &QuadraticCharacter,
    sigma: &PrecReal,
    terms: usize,
    digits: u32,
) -> Result<FactorizationResiduals> {
    check_gt_one(sigma, "factorization_residuals")?;
    let work = digits + 10;
    let sigma = sigma.with_digits(sigma.digits().max(work));
    let double = &sigma + &sigma;
    let p1 = p_series(Half::Split, c, &sigma, terms, work)?;
    let p2 = p_series(Half::Inert, c, &sigma, terms, work)?;
    let p2b = p_series(Half::Inert, c, &double, terms, work)?;
    let bits = bits_for_digits(work + 5);
    let s = sigma_float(&sigma, bits);
    let zeta = zeta_float(&s, bits)?;
    let l = dirichlet_l_float(c, &s, bits)?;

    let f = |x: &PrecReal| Float::with_val(bits, x.value());
    let zeta_series = f(&p1.value) * f(&p2.value) / ramified_product(c, &s, -1, bits);
    let l_series = f(&p1.value) * f(&p2b.value) / f(&p2.value);
    let r_zeta = Float::with_val(bits, &zeta - &zeta_series).abs();
    let r_l = Float::with_val(bits, &l - &l_series).abs();

    let floor = ten_pow_neg(i64::from(digits) - 5, 64);
    let t = |r: &TruncationResult| Float::with_val(64, r.tail_bound.value());
    let bound_zeta = Float::with_val(64, &zeta) * (t(&p1) + t(&p2)) * 1.01f64 + &floor;
    let bound_l = Float::with_val(64, &l) * (t(&p1) + t(&p2) + t(&p2b)) * 1.01f64 + &floor;
    Ok(FactorizationResiduals {
        r_zeta: PrecReal::from_float(r_zeta, digits),
        r_l: PrecReal::from_float(r_l, digits),
        bound_zeta: PrecReal::from_float(bound_zeta, 20),
        bound_l: PrecReal::from_float(bound_l, 20),
    })
}

fn exponent_of(x: &Float) -> Option<i64> {
    PrecReal::from_float(x.clone(), 20).log10_floor()
}

/// Rows `|p_ref - partial_N|` for `N = 1..=n_max` against the `(n_max+3)`-term
/// reference, with each row marked resolved or not. No precondition check.
pub fn error_rows(
    c: &QuadraticCharacter,
    half: Half,
    sigma: &PrecReal,
    n_max: usize,
    digits: u32,
) -> Result<ErrorTable> {
    if n_max == 0 {
        return Err(Error::domain("error table needs at least one row"));
    }
    let reference = p_series(half, c, sigma, n_max + 3, digits)?;
    let work = reference.partial_terms[0].digits();
    let bits = bits_for_digits(work);
    let s = sigma_float(sigma, bits);
    let p_ref = Float::with_val(bits, reference.log_value.value()).exp();

    let ref_tail = Float::with_val(64, reference.tail_bound.value());
    let resolution =
        Float::with_val(64, &p_ref) * (ref_tail * 1.01f64 + ten_pow_neg(i64::from(digits) - 1, 64));

    let xs: Vec<Float> = reference
        .partial_terms
        .iter()
        .map(|x| Float::with_val(bits, x.value()))
        .collect();
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        // p_ref - p_N = p_N · expm1(-Σ_{k≥N} x_k), free of cancellation.
        let head: Float = xs[..n].iter().fold(Float::new(bits), |acc, x| acc + x);
        let rest: Float = xs[n..].iter().fold(Float::new(bits), |acc, x| acc + x);
        let p_n = Float::with_val(bits, -head).exp();
        let error = (p_n * Float::with_val(bits, -rest).exp_m1()).abs();
        let term_err: Float = reference.term_errors[..n]
            .iter()
            .fold(Float::new(64), |acc, e| acc + e.value());
        let tail = Float::with_val(64, majorant_tail(&s, n, bits) + term_err);
        let resolved = error > Float::with_val(64, &resolution * 100u32);
        rows.push(ErrorRow {
            n,
            exponent: exponent_of(&error),
            error: PrecReal::from_float(error, 20),
            tail_exponent: exponent_of(&tail),
            tail_bound: PrecReal::from_float(tail, 20),
            resolved,
        });
    }
    let resolved: Vec<&ErrorRow> = rows.iter().filter(|r| r.resolved).collect();
    for w in resolved.windows(2) {
        if w[1].error >= w[0].error {
            return Err(Error::Internal(format!(
                "error table not strictly decreasing at N={}",
                w[1].n
            )));
        }
    }
    Ok(ErrorTable {
        rows,
        reference,
        resolution: PrecReal::from_float(resolution, 20),
        digits,
    })
}

/// [`error_rows`] with the precondition enforced: every row must be resolved.
pub fn error_table(
    c: &QuadraticCharacter,
    half: Half,
    sigma: &PrecReal,
    n_max: usize,
    digits: u32,
) -> Result<ErrorTable> {
    let table = error_rows(c, half, sigma, n_max, digits)?;
    if let Some(row) = table.rows.iter().find(|r| !r.resolved) {
        return Err(Error::PrecisionInsufficient(format!(
            "row N={} lies within 100× of the reference uncertainty {} at {} digits",
            row.n,
            table.resolution.to_sci_string(),
            digits
        )));
    }
    Ok(table)
}

/// [`error_table`], doubling the digits until the precondition holds or
/// `max_digits` is reached.
pub fn error_table_auto(
    c: &QuadraticCharacter,
    half: Half,
    sigma: &PrecReal,
    n_max: usize,
    digits: u32,
    max_digits: u32,
) -> Result<ErrorTable> {
    let mut d = digits;
    loop {
        match error_table(c, half, sigma, n_max, d) {
            Err(Error::PrecisionInsufficient(_)) if d < max_digits => {
                d = (d * 2).min(max_digits);
            }
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::p_product;

    fn ch(delta: i64) -> QuadraticCharacter {
        QuadraticCharacter::from_delta(delta).unwrap()
    }

    fn rep(which: Half, delta: i64) -> QRepresentation {
        QRepresentation::new(which, ch(delta))
    }

    fn r(text: &str) -> PrecReal {
        PrecReal::parse(text, 60).unwrap()
    }

    fn close(a: &PrecReal, b: &PrecReal, tol_exp: i64) -> bool {
        let diff = (a - b).abs();
        diff.is_zero() || diff.log10_floor().unwrap() < tol_exp
    }

    fn sqrt5_over(k: u32, digits: u32) -> PrecReal {
        let bits = bits_for_digits(digits + 5);
        PrecReal::from_float(Float::with_val(bits, 5).sqrt() / k, digits)
    }

    #[test]
    fn q2_analytic_at_two() {
        let q = q_analytic(&rep(Half::Inert, 5), &r("2"), 20).unwrap();
        assert_eq!(q.to_plain_string(20), "0.44721359549995793928");
    }

    #[test]
    fn q1_analytic_at_two() {
        let q = q_analytic(&rep(Half::Split, 5), &r("2"), 30).unwrap();
        let expected = &sqrt5_over(30, 30) * &PrecReal::from_i64(13, 30);
        assert!(close(&q, &expected, -28));
    }

    #[test]
    fn q1_analytic_at_sixty_four() {
        let q = q_analytic(&rep(Half::Split, 5), &r("64"), 80).unwrap();
        let deficit = &PrecReal::one(80) - &q;
        // The leading deviation is 2·11^{-64}, about 4.5e-67.
        assert_eq!(deficit.log10_floor(), Some(-67));
    }

    #[test]
    fn q_analytic_rejects_sigma_at_most_one() {
        assert!(matches!(
            q_analytic(&rep(Half::Split, 5), &r("1"), 20),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn q2_exact_delta_five() {
        let v = q_exact_even(&rep(Half::Inert, 5), 2).unwrap();
        assert_eq!(v.coeff, Rational::from((1, 5)));
        assert!(v.sqrt_disc);
        assert_eq!(v.pi_power, 0);
    }

    #[test]
    fn q1_exact_delta_five_with_and_without_sign_fix() {
        let fixed = q_exact_even(&rep(Half::Split, 5), 2).unwrap();
        assert_eq!(fixed.coeff, Rational::from((13, 30)));
        let printed =
            q_exact_even_with(&rep(Half::Split, 5), 2, SignConvention::Uncorrected).unwrap();
        assert_eq!(printed.coeff, Rational::from((-13, 30)));
    }

    #[test]
    fn q_exact_matches_quotient_of_exact_values() {
        use crate::lfunc::{l_even_exact, zeta_even_exact};
        for delta in [5, 8, 12, 13] {
            let c = ch(delta);
            for n in [2u32, 4, 6] {
                let z = zeta_even_exact(n).unwrap();
                let z2 = zeta_even_exact(2 * n).unwrap();
                let l = l_even_exact(&c, n).unwrap();
                let mut q1 = &z2 / &(&z * &l);
                let mut q2 = &l / &z;
                for p in c.discriminant().ramified_primes() {
                    let pn = Rational::from((1, Integer::from(p).pow(n)));
                    q1.coeff *= Rational::from(1) + &pn;
                    q2.coeff /= Rational::from(1) - pn;
                }
                assert_eq!(
                    q1,
                    q_exact_even(&QRepresentation::new(Half::Split, c.clone()), n).unwrap()
                );
                assert_eq!(
                    q2,
                    q_exact_even(&QRepresentation::new(Half::Inert, c.clone()), n).unwrap()
                );
            }
        }
    }

    #[test]
    fn q_exact_parity_errors() {
        assert!(matches!(
            q_exact_even(&rep(Half::Split, -4), 2),
            Err(Error::Parity(_))
        ));
        assert!(matches!(
            q_exact_even(&rep(Half::Split, 5), 3),
            Err(Error::Parity(_))
        ));
    }

    #[test]
    fn q1_exact_delta_eight_matches_analytic() {
        let v = q_exact_even(&rep(Half::Split, 8), 2).unwrap().render(40);
        let a = q_analytic(&rep(Half::Split, 8), &r("2"), 40).unwrap();
        assert!(close(&v, &a, -37));
    }

    #[test]
    fn prime_sum_examples() {
        let (v, t) = log_q_prime_sum(&rep(Half::Split, 5), &r("2"), 30, 10).unwrap();
        assert!(v.is_zero());
        assert_eq!(t.to_plain_string(5), "0.4");

        let (v, _) = log_q_prime_sum(&rep(Half::Inert, 5), &r("2"), 30, 3).unwrap();
        let bits = bits_for_digits(35);
        let expected =
            PrecReal::from_float(Float::with_val(bits, Rational::from((12, 25))).ln(), 30);
        assert!(close(&v, &expected, -28));

        let (v, t) = log_q_prime_sum(&rep(Half::Split, 5), &r("8192"), 30, 13).unwrap();
        let bits = bits_for_digits(40);
        let lead = PrecReal::from_float(-(Float::with_val(bits, 11).pow(-8192i32) * 2u32), 30);
        let ratio = &v / &lead;
        assert!(close(&ratio, &PrecReal::one(30), -25));
        assert!(t < (&v.abs() * &PrecReal::parse("1e-100", 30).unwrap()));
    }

    #[test]
    fn prime_sum_rejects_small_sigma() {
        assert!(matches!(
            log_q_prime_sum(&rep(Half::Split, 5), &r("1.5"), 30, 100),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn log_q_bound_examples() {
        assert_eq!(log_q_bound(&r("2")).unwrap().to_plain_string(5), "8");
        let third = log_q_bound(&r("3")).unwrap();
        assert!(close(
            &third,
            &(&PrecReal::from_i64(8, 60) / &PrecReal::from_i64(3, 60)),
            -50
        ));
        let ten = log_q_bound(&r("10")).unwrap();
        assert!(close(
            &ten,
            &(&PrecReal::from_i64(16, 60) / &PrecReal::from_i64(1022, 60)),
            -50
        ));
        assert!(matches!(log_q_bound(&r("1.9")), Err(Error::Domain(_))));
    }

    #[test]
    fn triple_agreement_at_small_even_arguments() {
        for which in [Half::Split, Half::Inert] {
            for delta in [5, 8, 13] {
                let rp = rep(which, delta);
                for n in [2u32, 4, 8] {
                    let sigma = PrecReal::from_i64(i64::from(n), 60);
                    let exact = q_exact_even(&rp, n).unwrap().render(40);
                    let analytic = q_analytic(&rp, &sigma, 40).unwrap();
                    assert!(close(&exact, &analytic, -37), "Δ={delta} n={n}");
                    let (log_sum, tail) = log_q_prime_sum(&rp, &sigma, 40, 100_000).unwrap();
                    let lo = crate::numkernel::rexp(&(&log_sum - &tail)).unwrap();
                    let hi = crate::numkernel::rexp(&(&log_sum + &tail)).unwrap();
                    assert!(lo <= analytic && analytic <= hi, "Δ={delta} n={n}");
                }
            }
        }
    }

    #[test]
    fn p1_one_term_is_inverse_square_root_of_q1() {
        let res = p_series(Half::Split, &ch(5), &r("2"), 1, 30).unwrap();
        let q = q_exact_even(&rep(Half::Split, 5), 2).unwrap().render(40);
        let expected = crate::numkernel::rsqrt(&(&PrecReal::one(40) / &q)).unwrap();
        assert!(close(&res.value, &expected, -28));
        assert_eq!(res.paths, vec![TermPath::Exact]);
    }

    #[test]
    fn p_series_matches_euler_product() {
        for which in [Half::Split, Half::Inert] {
            let series = p_series(which, &ch(5), &r("2"), 6, 60).unwrap();
            let product = p_product(&ch(5), which, &r("2"), 1_000_000, 30).unwrap();
            let diff = (&series.value.with_digits(30) - &product.value).abs();
            assert!(diff <= product.tail_bound);
        }
    }

    #[test]
    fn p_series_paths_follow_argument_size() {
        let res = p_series(Half::Inert, &ch(-4), &r("3"), 5, 40).unwrap();
        assert_eq!(res.paths[0], TermPath::Analytic);
        assert_eq!(res.paths[2], TermPath::Analytic);
        assert!(matches!(res.paths[3], TermPath::PrimeSum { .. }));
    }

    #[test]
    fn p_series_domain() {
        assert!(matches!(
            p_series(Half::Split, &ch(5), &r("1"), 3, 20),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            p_series(Half::Split, &ch(5), &r("1.5"), 0, 20),
            Err(Error::Domain(_))
        ));
        assert!(p_series(Half::Split, &ch(5), &r("2"), 0, 20).unwrap().value == PrecReal::one(20));
    }

    #[test]
    fn tail_bound_covers_later_partial_sums() {
        let full = p_series(Half::Inert, &ch(8), &r("2"), 8, 60).unwrap();
        for n in 1..6 {
            let part = p_series(Half::Inert, &ch(8), &r("2"), n, 60).unwrap();
            let diff = (&full.log_value - &part.log_value).abs();
            assert!(diff <= part.tail_bound, "N={n}");
        }
    }

    #[test]
    fn majorant_is_dominated_by_first_term() {
        let bits = 200;
        let s = Float::with_val(bits, 2);
        for k in 0..5 {
            let tail = majorant_tail(&s, k, bits);
            let a = Float::with_val(64, 2) << k as u32;
            let first = (Float::with_val(64, 16) / (Float::with_val(64, 2).pow(&a) - 2u32))
                >> (k as u32 + 1);
            assert!(tail >= first && tail <= Float::with_val(64, &first * 2u32));
        }
    }

    #[test]
    fn fe_residual_small() {
        let res = fe_residual(Half::Split, &ch(5), &r("2"), 20, 50).unwrap();
        assert!(res.residual.log10_floor().is_none_or(|e| e < -40));
        assert!(res.residual <= res.bound);
    }

    #[test]
    fn factorization_residuals_small() {
        let res = factorization_residuals(&ch(12), &r("3"), 20, 50).unwrap();
        assert!(res.r_zeta <= res.bound_zeta);
        assert!(res.r_l <= res.bound_l);
        assert!(res.r_zeta.log10_floor().is_none_or(|e| e < -40));
        assert!(res.r_l.log10_floor().is_none_or(|e| e < -40));
    }

    #[test]
    fn error_table_p2_first_rows() {
        let table = error_table(&ch(5), Half::Inert, &r("2"), 5, 60).unwrap();
        let exps: Vec<i64> = table.rows.iter().map(|r| r.exponent.unwrap()).collect();
        assert_eq!(exps, vec![-2, -3, -6, -11, -21]);
        for row in &table.rows {
            assert!(row.error <= row.tail_bound);
        }
    }

    #[test]
    fn error_table_detects_insufficient_precision() {
        let err = error_table(&ch(5), Half::Split, &r("2"), 6, 20).unwrap_err();
        assert!(matches!(err, Error::PrecisionInsufficient(_)));
        let auto = error_table_auto(&ch(5), Half::Split, &r("2"), 6, 20, 400).unwrap();
        assert!(auto.digits > 20);
    }

    #[test]
    fn error_table_decays_doubly_exponentially() {
        let table = error_table(&ch(8), Half::Inert, &r("2"), 7, 300).unwrap();
        for w in table.rows.windows(2).skip(2) {
            let sq = &w[0].error * &w[0].error;
            assert!(w[1].error < &sq * &PrecReal::from_i64(1000, 20));
        }
    }
}
