//! `ζ(σ)`, `ζ(σ, a)` and `L(σ, χ)` on the real half-line `σ > 1`, together
//! with exact values at even integers.

use std::fmt;
use std::ops::{Div, Mul};

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::bernoulli::{bernoulli_number, gen_bernoulli};
use crate::error::{Error, Result};
use crate::numkernel::{bits_for_digits, guard_digits, pi_float, PrecReal};
use crate::quadchar::{Discriminant, QuadraticCharacter};

/// `ζ` rejects arguments closer to the pole than this.
const ZETA_POLE_MARGIN: f64 = 1e-6;
/// Direct summation is used whenever this many terms meet the tolerance.
const DIRECT_TERMS_LIMIT: u64 = 64;
const MAX_CUTOFF: u64 = 1 << 24;

/// How an Euler–Maclaurin evaluation was carried out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SumMethod {
    /// Plain partial sum of this many terms plus an integral tail bound.
    Direct { terms: u64 },
    /// Head of `cutoff` terms plus `order` Bernoulli corrections.
    EulerMaclaurin { cutoff: u64, order: usize },
}

#[derive(Clone, Debug)]
pub struct ZetaEvaluation {
    pub value: PrecReal,
    pub method: SumMethod,
    /// Bound on the truncation error, before final rounding.
    pub remainder: Float,
}

fn check_sigma(sigma: &PrecReal, margin: f64, what: &str) -> Result<()> {
    let one_plus = Float::with_val(sigma.value().prec(), 1) + margin;
    if *sigma.value() <= one_plus {
        return Err(Error::domain(format!(
            "{what} needs σ > 1{}; got {}",
            if margin > 0.0 { " + 1e-6" } else { "" },
            sigma.to_sci_string()
        )));
    }
    Ok(())
}

/// Working digits for a sum targeting `digits` with roughly `terms` summands.
fn work_digits(digits: u32, terms: u64) -> u32 {
    digits + guard_digits(terms as usize)
}

pub(crate) fn initial_cutoff(digits: u32, sigma: f64) -> u64 {
    let m = (f64::from(digits) * std::f64::consts::LN_10 / sigma).ceil() + 10.0;
    (m as u64).max(20)
}

/// `log(Σ_{m≥K} (m+a)^{-σ})` upper estimate: first term plus integral.
fn log_tail_estimate(k: f64, a: f64, sigma: f64) -> f64 {
    let x = k + a;
    let first = -sigma * x.ln();
    let integral = (1.0 - sigma) * x.ln() - (sigma - 1.0).ln();
    first.max(integral) + std::f64::consts::LN_2
}

/// `ζ(s, a) = Σ_{m≥0} (m+a)^{-s}` to a relative tolerance of `2^-bits` of the
/// leading term `a^{-s}`. Returns the value, the method used, and the bound on
/// the omitted remainder.
pub(crate) fn hurwitz_float(
    s: &Float,
    a: &Rational,
    bits: u32,
) -> Result<(Float, SumMethod, Float)> {
    let sigma = s.to_f64();
    let a_f64 = a.to_f64();
    let a_fl = Float::with_val(bits, a);
    let neg_s = Float::with_val(bits, -s);
    let leading = Float::with_val(bits, (&a_fl).pow(&neg_s));
    let tol = Float::with_val(bits, &leading >> (bits + 4));
    let log_tol = -(f64::from(bits) + 4.0) * std::f64::consts::LN_2 - sigma * a_f64.ln();

    // Direct path: few terms already reach the tolerance.
    if let Some(k) =
        (1..=DIRECT_TERMS_LIMIT).find(|&k| log_tail_estimate(k as f64, a_f64, sigma) < log_tol)
    {
        let mut sum = Float::new(bits);
        for m in 0..k {
            let base = Float::with_val(bits, &a_fl + m);
            sum += base.pow(&neg_s);
        }
        let x = Float::with_val(bits, &a_fl + k);
        let xs = Float::with_val(bits, (&x).pow(&neg_s));
        let remainder = Float::with_val(bits, &xs * &x) / Float::with_val(bits, s - 1u32) + &xs;
        return Ok((sum, SumMethod::Direct { terms: k }, remainder));
    }

    let digits_hint = (f64::from(bits) / std::f64::consts::LOG2_10) as u32;
    let mut cutoff = initial_cutoff(digits_hint, sigma);
    let s_minus_1 = Float::with_val(bits, s - 1u32);
    'restart: loop {
        if cutoff > MAX_CUTOFF {
            return Err(Error::Internal(format!(
                "Euler–Maclaurin did not converge for σ={sigma}"
            )));
        }
        let mut sum = Float::new(bits);
        for m in 0..cutoff {
            let base = Float::with_val(bits, &a_fl + m);
            sum += base.pow(&neg_s);
        }
        let x = Float::with_val(bits, &a_fl + cutoff);
        let xs = Float::with_val(bits, (&x).pow(&neg_s));
        sum += Float::with_val(bits, &xs * &x) / &s_minus_1;
        sum += Float::with_val(bits, &xs >> 1);

        let x2 = Float::with_val(bits, x.square_ref());
        // rising = s (s+1) ... (s+2j-2) · x^{-s-2j+1}
        let mut rising = Float::with_val(bits, s * &xs) / &x;
        let mut factorial = Integer::from(2);
        let mut previous: Option<Float> = None;
        let mut j = 1usize;
        loop {
            let b = bernoulli_number(2 * j)?;
            let coeff = Float::with_val(bits, &b) / Float::with_val(bits, &factorial);
            let term = Float::with_val(bits, &coeff * &rising);
            let size = Float::with_val(bits, term.abs_ref());
            if size < tol {
                return Ok((
                    sum,
                    SumMethod::EulerMaclaurin {
                        cutoff,
                        order: j - 1,
                    },
                    size,
                ));
            }
            if let Some(prev) = &previous {
                if size >= *prev {
                    cutoff *= 2;
                    continue 'restart;
                }
            }
            sum += &term;
            previous = Some(size);
            let k1 = Float::with_val(bits, s + (2 * j - 1) as u32);
            let k2 = Float::with_val(bits, s + (2 * j) as u32);
            rising *= k1;
            rising *= k2;
            rising /= &x2;
            factorial *= ((2 * j + 1) * (2 * j + 2)) as u64;
            j += 1;
        }
    }
}

pub fn hurwitz_zeta(sigma: &PrecReal, a: &Rational, digits: u32) -> Result<PrecReal> {
    check_sigma(sigma, 0.0, "hurwitz_zeta")?;
    if *a <= 0 || *a > 1 {
        return Err(Error::domain(format!(
            "hurwitz_zeta needs 0 < a <= 1; got {a}"
        )));
    }
    let est = initial_cutoff(digits, sigma.to_f64());
    let bits = bits_for_digits(work_digits(digits, est));
    let s = Float::with_val(bits, sigma.value());
    let (v, _, _) = hurwitz_float(&s, a, bits)?;
    Ok(PrecReal::from_float(v, digits))
}

pub fn zeta_real_detailed(sigma: &PrecReal, digits: u32) -> Result<ZetaEvaluation> {
    check_sigma(sigma, ZETA_POLE_MARGIN, "zeta_real")?;
    let est = initial_cutoff(digits, sigma.to_f64());
    let bits = bits_for_digits(work_digits(digits, est));
    let s = Float::with_val(bits, sigma.value());
    let (v, method, remainder) = hurwitz_float(&s, &Rational::from(1), bits)?;
    Ok(ZetaEvaluation {
        value: PrecReal::from_float(v, digits),
        method,
        remainder,
    })
}

pub fn zeta_real(sigma: &PrecReal, digits: u32) -> Result<PrecReal> {
    Ok(zeta_real_detailed(sigma, digits)?.value)
}

/// `ζ(s)` at a caller-chosen binary precision; used by the dyadic evaluators.
pub(crate) fn zeta_float(s: &Float, bits: u32) -> Result<Float> {
    Ok(hurwitz_float(s, &Rational::from(1), bits)?.0)
}

/// `L(s, χ)` at a caller-chosen binary precision.
pub(crate) fn dirichlet_l_float(c: &QuadraticCharacter, s: &Float, bits: u32) -> Result<Float> {
    let sigma = s.to_f64();
    let d = c.modulus();
    let log_tol = -(f64::from(bits) + 4.0) * std::f64::consts::LN_2;
    if let Some(k) =
        (1..=DIRECT_TERMS_LIMIT).find(|&k| log_tail_estimate(k as f64 + 1.0, 0.0, sigma) < log_tol)
    {
        let neg_s = Float::with_val(bits, -s);
        let mut sum = Float::new(bits);
        for n in 1..=k {
            let chi = c.chi(n as i64);
            if chi != 0 {
                let t = Float::with_val(bits, n).pow(&neg_s);
                if chi > 0 {
                    sum += t;
                } else {
                    sum -= t;
                }
            }
        }
        return Ok(sum);
    }
    // Cancellation among the d Hurwitz values grows like d / (σ - 1).
    let cancel = ((d as f64).log2() + (1.0 / (sigma - 1.0)).log2().max(0.0)).ceil() as u32 + 8;
    let wbits = bits + cancel;
    let sw = Float::with_val(wbits, s);
    let mut sum = Float::new(wbits);
    for a in 1..=d {
        let chi = c.chi(a as i64);
        if chi == 0 {
            continue;
        }
        let (h, _, _) = hurwitz_float(&sw, &Rational::from((a, d)), wbits)?;
        if chi > 0 {
            sum += h;
        } else {
            sum -= h;
        }
    }
    let scale = Float::with_val(wbits, d).pow(Float::with_val(wbits, -&sw));
    Ok(Float::with_val(bits, sum * scale))
}

/// `L(σ, χ) = d^{-σ} Σ_a χ(a) ζ(σ, a/d)`.
pub fn dirichlet_l(c: &QuadraticCharacter, sigma: &PrecReal, digits: u32) -> Result<PrecReal> {
    check_sigma(sigma, 0.0, "dirichlet_l")?;
    let est = initial_cutoff(digits, sigma.to_f64());
    let bits = bits_for_digits(work_digits(digits, est));
    let s = Float::with_val(bits, sigma.value());
    Ok(PrecReal::from_float(
        dirichlet_l_float(c, &s, bits)?,
        digits,
    ))
}

/// `c · π^k · (√d)^ε` with `c` rational.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSpecialValue {
    pub coeff: Rational,
    pub pi_power: u32,
    pub sqrt_disc: bool,
    /// Source of `d` for the `√d` factor; `None` when no such factor can occur.
    pub disc: Option<Discriminant>,
}

impl ExactSpecialValue {
    pub fn rational(coeff: Rational) -> Self {
        ExactSpecialValue {
            coeff,
            pi_power: 0,
            sqrt_disc: false,
            disc: None,
        }
    }

    fn radicand(&self) -> u64 {
        self.disc.map(|d| d.modulus()).unwrap_or(1)
    }

    /// Numeric value at `digits` decimal digits.
    pub fn render(&self, digits: u32) -> PrecReal {
        PrecReal::from_float(self.render_float(bits_for_digits(digits + 5)), digits)
    }

    pub(crate) fn render_float(&self, bits: u32) -> Float {
        let mut v = Float::with_val(bits, &self.coeff);
        if self.pi_power > 0 {
            v *= pi_float(bits).pow(self.pi_power);
        }
        if self.sqrt_disc {
            v *= Float::with_val(bits, self.radicand()).sqrt();
        }
        v
    }

    pub fn is_positive(&self) -> bool {
        self.coeff > 0
    }
}

impl fmt::Display for ExactSpecialValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeff)?;
        match self.pi_power {
            0 => {}
            1 => write!(f, "·π")?,
            k => write!(f, "·π^{k}")?,
        }
        if self.sqrt_disc {
            write!(f, "·√{}", self.radicand())?;
        }
        Ok(())
    }
}

fn combine_disc(a: Option<Discriminant>, b: Option<Discriminant>) -> Option<Discriminant> {
    a.or(b)
}

impl Mul for &ExactSpecialValue {
    type Output = ExactSpecialValue;
    fn mul(self, rhs: &ExactSpecialValue) -> ExactSpecialValue {
        let disc = combine_disc(self.disc, rhs.disc);
        let mut coeff = Rational::from(&self.coeff * &rhs.coeff);
        let both = self.sqrt_disc && rhs.sqrt_disc;
        if both {
            coeff *= disc.map(|d| d.modulus()).unwrap_or(1);
        }
        ExactSpecialValue {
            coeff,
            pi_power: self.pi_power + rhs.pi_power,
            sqrt_disc: self.sqrt_disc ^ rhs.sqrt_disc,
            disc,
        }
    }
}

impl Div for &ExactSpecialValue {
    type Output = ExactSpecialValue;
    /// Panics if the π power would go negative.
    fn div(self, rhs: &ExactSpecialValue) -> ExactSpecialValue {
        let disc = combine_disc(self.disc, rhs.disc);
        let d = disc.map(|d| d.modulus()).unwrap_or(1);
        let mut coeff = Rational::from(&self.coeff / &rhs.coeff);
        // x / √d = x √d / d
        if rhs.sqrt_disc && !self.sqrt_disc {
            coeff /= d;
        }
        ExactSpecialValue {
            coeff,
            pi_power: self
                .pi_power
                .checked_sub(rhs.pi_power)
                .expect("negative power of π"),
            sqrt_disc: self.sqrt_disc ^ rhs.sqrt_disc,
            disc,
        }
    }
}

fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// `ζ(n) = (-1)^{1+n/2} (2π)^n B_n / (2·n!)` for even `n ≥ 2`.
pub fn zeta_even_exact(n: u32) -> Result<ExactSpecialValue> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::domain(format!(
            "zeta_even_exact needs even n >= 2; got {n}"
        )));
    }
    let b = bernoulli_number(n as usize)?;
    let mut coeff = b * (Integer::from(1) << (n - 1)) / factorial(n);
    if (n / 2).is_multiple_of(2) {
        coeff = -coeff;
    }
    if coeff <= 0 {
        return Err(Error::Internal(format!(
            "ζ({n}) coefficient {coeff} is not positive"
        )));
    }
    Ok(ExactSpecialValue {
        coeff,
        pi_power: n,
        sqrt_disc: false,
        disc: None,
    })
}

/// `L(n,χ) = (-1)^{1+n/2} (√d/2) (2π/d)^n B_{n,χ} / n!` for an even
/// character and even `n ≥ 2`.
pub fn l_even_exact(c: &QuadraticCharacter, n: u32) -> Result<ExactSpecialValue> {
    if c.parity() != 0 {
        return Err(Error::Parity(format!(
            "Δ={} gives an odd character; even-integer closed form needs Δ > 0",
            c.discriminant().delta()
        )));
    }
    if n < 2 || n % 2 == 1 {
        return Err(Error::Parity(format!(
            "l_even_exact needs even n >= 2; got {n}"
        )));
    }
    let table = gen_bernoulli(c, n as usize)?;
    let b = table.get(n as usize).expect("table covers n").clone();
    let d = Integer::from(c.modulus());
    let mut coeff = b * (Integer::from(1) << (n - 1)) / factorial(n) / d.pow(n);
    if (n / 2).is_multiple_of(2) {
        coeff = -coeff;
    }
    if coeff <= 0 {
        return Err(Error::Internal(format!(
            "L({n},χ) coefficient {coeff} is not positive"
        )));
    }
    Ok(ExactSpecialValue {
        coeff,
        pi_power: n,
        sqrt_disc: true,
        disc: Some(c.discriminant()),
    })
}

/// `((2^σ - 1)/(2^σ - 2), 2^σ/(2^σ - 2))`, which bracket `ζ(σ)` strictly.
pub fn zeta_dyadic_bounds(sigma: &PrecReal) -> Result<(PrecReal, PrecReal)> {
    check_sigma(sigma, 0.0, "zeta_dyadic_bounds")?;
    let digits = sigma.digits();
    let bits = bits_for_digits(digits + 5);
    let t = Float::with_val(bits, 2).pow(sigma.value());
    let den = Float::with_val(bits, &t - 2u32);
    let lower = Float::with_val(bits, &t - 1u32) / &den;
    let upper = t / den;
    Ok((
        PrecReal::from_float(lower, digits),
        PrecReal::from_float(upper, digits),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::pi;

    fn close(a: &PrecReal, b: &PrecReal, tol: f64) -> bool {
        let diff = (a - b).abs();
        let scale = b.abs();
        let rel = Float::with_val(200, diff.value() / scale.value());
        rel.to_f64() <= tol
    }

    fn real(text: &str, digits: u32) -> PrecReal {
        PrecReal::parse(text, digits).unwrap()
    }

    #[test]
    fn zeta_examples() {
        let z2 = zeta_real(&real("2", 12), 12).unwrap();
        assert_eq!(z2.to_sci_string(), "1.64493406685");
        let z4 = zeta_real(&real("4", 12), 12).unwrap();
        assert_eq!(z4.to_sci_string(), "1.08232323371");
        let z3 = zeta_real(&real("3", 12), 12).unwrap();
        assert_eq!(z3.to_sci_string(), "1.20205690316");
    }

    #[test]
    fn zeta_rejects_pole_neighbourhood() {
        assert!(matches!(
            zeta_real(&real("1", 20), 20),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            zeta_real(&real("0.5", 20), 20),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            zeta_real(&real("1.0000001", 20), 20),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn zeta_large_sigma_uses_direct_sum() {
        let ev = zeta_real_detailed(&real("400", 30), 30).unwrap();
        assert!(matches!(ev.method, SumMethod::Direct { terms } if terms <= 3));
        let ev = zeta_real_detailed(&real("2", 30), 30).unwrap();
        assert!(matches!(ev.method, SumMethod::EulerMaclaurin { .. }));
    }

    #[test]
    fn hurwitz_identities() {
        let d = 40;
        let s = real("2", d);
        let z2 = zeta_real(&s, d).unwrap();
        assert!(close(
            &hurwitz_zeta(&s, &Rational::from(1), d).unwrap(),
            &z2,
            1e-39
        ));
        let half = hurwitz_zeta(&s, &Rational::from((1, 2)), d).unwrap();
        let three = PrecReal::from_i64(3, d);
        assert!(close(&half, &(&three * &z2), 1e-39));
    }

    #[test]
    fn hurwitz_quarter_against_direct_summation() {
        // ζ(3, 1/4) = Σ (m + 1/4)^{-3}; brute force with an integral tail bound.
        let d = 25;
        let v = hurwitz_zeta(&real("3", d), &Rational::from((1, 4)), d).unwrap();
        let n_terms = 200_000u64;
        let mut brute = Float::new(128);
        for m in (0..n_terms).rev() {
            let x: Float = Float::with_val(128, m) + 0.25;
            brute += Float::with_val(128, x.pow(-3));
        }
        // Tail Σ_{m≥N} (m+1/4)^{-3} lies between ∫_N^∞ and that plus the first term.
        let x: Float = Float::with_val(128, n_terms) + 0.25;
        let tail_lo = Float::with_val(128, x.clone().pow(-2)) / 2u32;
        let tail_hi = Float::with_val(128, &tail_lo + x.pow(-3));
        let lo = Float::with_val(128, &brute + &tail_lo);
        let hi = Float::with_val(128, &brute + &tail_hi);
        assert!(
            *v.value() > Float::with_val(128, &lo - 1e-20)
                && *v.value() < Float::with_val(128, &hi + 1e-20)
        );
        assert!(v.to_f64() > 64.0);
    }

    #[test]
    fn hurwitz_domain() {
        let s = real("2", 20);
        assert!(hurwitz_zeta(&s, &Rational::from(0), 20).is_err());
        assert!(hurwitz_zeta(&s, &Rational::from((3, 2)), 20).is_err());
        assert!(hurwitz_zeta(&real("1", 20), &Rational::from((1, 2)), 20).is_err());
    }

    #[test]
    fn l_examples() {
        let c5 = QuadraticCharacter::from_delta(5).unwrap();
        let l = dirichlet_l(&c5, &real("2", 30), 30).unwrap();
        let p = pi(40);
        let closed = &(&(&p * &p) * &PrecReal::from_i64(4, 40))
            * &crate::numkernel::rsqrt(&PrecReal::from_i64(5, 40)).unwrap();
        let closed = &closed / &PrecReal::from_i64(125, 40);
        assert!(close(&l, &closed, 1e-29));
        assert!(l.to_sci_string().starts_with("7.0621140325974"));

        let c4 = QuadraticCharacter::from_delta(-4).unwrap();
        let catalan = dirichlet_l(&c4, &real("2", 12), 12).unwrap();
        assert_eq!(catalan.to_sci_string(), "9.15965594177e-1");

        let big = dirichlet_l(&c5, &real("64", 30), 30).unwrap();
        assert!((&big - &PrecReal::one(30)).abs().to_f64() < 1e-19);
    }

    #[test]
    fn exact_zeta_values() {
        assert_eq!(zeta_even_exact(2).unwrap().coeff, Rational::from((1, 6)));
        assert_eq!(zeta_even_exact(4).unwrap().coeff, Rational::from((1, 90)));
        assert_eq!(
            zeta_even_exact(12).unwrap().coeff,
            Rational::from((691, 638512875))
        );
        assert!(zeta_even_exact(3).is_err());
        assert!(zeta_even_exact(0).is_err());
        assert_eq!(zeta_even_exact(4).unwrap().to_string(), "1/90·π^4");
    }

    #[test]
    fn exact_l_values() {
        let c5 = QuadraticCharacter::from_delta(5).unwrap();
        let l2 = l_even_exact(&c5, 2).unwrap();
        assert_eq!(l2.coeff, Rational::from((4, 125)));
        assert_eq!(l2.pi_power, 2);
        assert!(l2.sqrt_disc);
        assert_eq!(l2.to_string(), "4/125·π^2·√5");
        let numeric = dirichlet_l(&c5, &real("2", 30), 30).unwrap();
        assert!(close(&l2.render(30), &numeric, 1e-28));

        let c4 = QuadraticCharacter::from_delta(-4).unwrap();
        assert!(matches!(l_even_exact(&c4, 2), Err(Error::Parity(_))));
    }

    #[test]
    fn exact_arithmetic() {
        let c5 = QuadraticCharacter::from_delta(5).unwrap();
        let l2 = l_even_exact(&c5, 2).unwrap();
        let z2 = zeta_even_exact(2).unwrap();
        // L(2)/ζ(2) = (4/125)√5 · 6 = 24√5/125
        let q = &l2 / &z2;
        assert_eq!(q.coeff, Rational::from((24, 125)));
        assert!(q.sqrt_disc && q.pi_power == 0);
        // (√5 · √5) = 5
        let sq = &l2 * &l2;
        assert_eq!(sq.coeff, Rational::from((16 * 5, 125 * 125)));
        assert!(!sq.sqrt_disc);
        // z / √5 = z √5 / 5
        let inv = &z2 / &l2;
        assert_eq!(inv.coeff, Rational::from((125, 6 * 4 * 5)));
        assert!(inv.sqrt_disc);
    }

    #[test]
    fn dyadic_bounds_examples() {
        let (lo, hi) = zeta_dyadic_bounds(&real("2", 20)).unwrap();
        assert_eq!(lo, PrecReal::from_rational(&Rational::from((3, 2)), 20));
        assert_eq!(hi, PrecReal::from_i64(2, 20));
        let (lo, hi) = zeta_dyadic_bounds(&real("3", 20)).unwrap();
        assert!(close(
            &lo,
            &PrecReal::from_rational(&Rational::from((7, 6)), 20),
            1e-19
        ));
        assert!(close(
            &hi,
            &PrecReal::from_rational(&Rational::from((4, 3)), 20),
            1e-19
        ));
        let z10 = zeta_real(&real("10", 20), 20).unwrap();
        let (lo, hi) = zeta_dyadic_bounds(&real("10", 20)).unwrap();
        assert!(lo < z10 && z10 < hi);
        assert!(zeta_dyadic_bounds(&real("1", 20)).is_err());
    }
}
