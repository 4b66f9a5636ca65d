//! Exact Bernoulli numbers, Bernoulli polynomials and the generalized
//! Bernoulli numbers `B_{k,χ}` of a quadratic character.
//!
//! `B_{k,χ}` is computed twice, once by dividing the power series of
//! `Σ_a χ(a) t e^{at} / (e^{dt} - 1)` and once from the conductor formula
//! `d^{k-1} Σ_a χ(a) B_k(a/d)`. The table is only returned when both agree.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::quadchar::QuadraticCharacter;

pub const DEFAULT_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliTable {
    values: Vec<Rational>,
}

impl BernoulliTable {
    pub fn get(&self, k: usize) -> Option<&Rational> {
        self.values.get(k)
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct GenBernoulliTable {
    character: QuadraticCharacter,
    values: Vec<Rational>,
}

impl GenBernoulliTable {
    pub fn character(&self) -> &QuadraticCharacter {
        &self.character
    }

    pub fn get(&self, k: usize) -> Option<&Rational> {
        self.values.get(k)
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }
}

fn check_cap(n_max: usize) -> Result<()> {
    if n_max > DEFAULT_CAP {
        return Err(Error::Resource(format!(
            "Bernoulli index {n_max} exceeds the cap of {DEFAULT_CAP}"
        )));
    }
    Ok(())
}

static CLASSICAL: OnceLock<Mutex<Arc<Vec<Rational>>>> = OnceLock::new();

/// `B_0..=B_{n_max}` via the integer tangent-number recurrence.
fn classical_uncached(n_max: usize) -> Vec<Rational> {
    let mut out = vec![Rational::new(); n_max + 1];
    out[0] = Rational::from(1);
    if n_max >= 1 {
        out[1] = Rational::from((-1, 2));
    }
    let half = n_max / 2;
    if half == 0 {
        return out;
    }
    let mut t = vec![Integer::new(); half + 1];
    t[1] = Integer::from(1);
    for k in 2..=half {
        t[k] = Integer::from(&t[k - 1] * (k as u64 - 1));
    }
    for k in 2..=half {
        for j in k..=half {
            let lhs = Integer::from(&t[j - 1] * (j - k) as u64);
            t[j] *= (j - k + 2) as u64;
            t[j] += lhs;
        }
    }
    for (k, tk) in t.iter().enumerate().skip(1) {
        // B_{2k} = (-1)^{k-1} 2k T_k / (4^k (4^k - 1))
        let four_k = Integer::from(1) << (2 * k as u32);
        let den = Integer::from(&four_k - 1u32) * &four_k;
        let mut num = Integer::from(tk * (2 * k as u64));
        if k % 2 == 0 {
            num = -num;
        }
        out[2 * k] = Rational::from((num, den));
    }
    out
}

fn classical(n_max: usize) -> Arc<Vec<Rational>> {
    let cache = CLASSICAL.get_or_init(|| Mutex::new(Arc::new(Vec::new())));
    let mut guard = cache.lock().expect("Bernoulli cache poisoned");
    if guard.len() <= n_max {
        // Grow geometrically so repeated small extensions stay cheap overall.
        let target = n_max.max(2 * guard.len()).min(DEFAULT_CAP);
        *guard = Arc::new(classical_uncached(target.max(n_max)));
    }
    Arc::clone(&guard)
}

pub fn bernoulli_numbers(n_max: usize) -> Result<BernoulliTable> {
    check_cap(n_max)?;
    let all = classical(n_max);
    Ok(BernoulliTable {
        values: all[..=n_max].to_vec(),
    })
}

/// A single classical Bernoulli number, from the shared cache.
pub fn bernoulli_number(k: usize) -> Result<Rational> {
    check_cap(k)?;
    Ok(classical(k)[k].clone())
}

fn binomial_row(n: usize) -> Vec<Integer> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = Integer::from(1);
    row.push(c.clone());
    for k in 1..=n {
        c *= (n - k + 1) as u64;
        c /= k as u64;
        row.push(c.clone());
    }
    row
}

/// `B_n(x) = Σ_k C(n,k) B_k x^{n-k}`.
pub fn bernoulli_poly(n: usize, x: &Rational) -> Result<Rational> {
    check_cap(n)?;
    let b = classical(n);
    let binom = binomial_row(n);
    // Horner in x over descending powers.
    let mut acc = Rational::new();
    for k in 0..=n {
        acc *= x;
        acc += Rational::from(&binom[k] * b[k].numer()) / b[k].denom();
    }
    Ok(acc)
}

/// Power sums `S_k = Σ_{a=1}^{d} χ(a) a^k` for `k = 0..=n_max`.
fn character_power_sums(c: &QuadraticCharacter, n_max: usize) -> Vec<Integer> {
    let d = c.modulus();
    let mut sums = vec![Integer::new(); n_max + 1];
    for a in 1..=d {
        let chi = c.chi(a as i64);
        if chi == 0 {
            continue;
        }
        let mut pow = Integer::from(1);
        for s in sums.iter_mut() {
            if chi > 0 {
                *s += &pow;
            } else {
                *s -= &pow;
            }
            pow *= a;
        }
    }
    sums
}

/// `B_{k,χ}` by formal power-series division of the generating function.
///
/// With `N(t)/t = Σ S_k t^k/k!` and `(e^{dt}-1)/t = Σ d^{k+1}/(k+1) · t^k/k!`,
/// the exponential coefficients `Q_n` of the quotient satisfy
/// `S_n = Σ_j C(n,j) E_j Q_{n-j}`.
pub fn gen_bernoulli_series(c: &QuadraticCharacter, n_max: usize) -> Result<Vec<Rational>> {
    check_cap(n_max)?;
    let d = c.modulus();
    let sums = character_power_sums(c, n_max);
    let mut d_pow = Integer::from(d);
    let mut e = Vec::with_capacity(n_max + 1);
    for j in 0..=n_max {
        e.push(Rational::from((d_pow.clone(), Integer::from(j + 1))));
        d_pow *= d;
    }
    let mut q: Vec<Rational> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let binom = binomial_row(n);
        let mut rhs = Rational::from(&sums[n]);
        for j in 1..=n {
            if q[n - j] == 0 {
                continue;
            }
            let term = Rational::from(&e[j] * &q[n - j]) * &binom[j];
            rhs -= term;
        }
        q.push(rhs / d);
    }
    Ok(q)
}

/// `B_{k,χ} = d^{k-1} Σ_a χ(a) B_k(a/d)`, with `B_k(a/d)` expanded so the
/// sum over `a` collapses onto the power sums:
/// `Σ_j C(k,j) B_j d^{j-1} S_{k-j}`.
pub fn gen_bernoulli_conductor(c: &QuadraticCharacter, n_max: usize) -> Result<Vec<Rational>> {
    check_cap(n_max)?;
    let d = c.modulus();
    let b = classical(n_max);
    let sums = character_power_sums(c, n_max);
    let mut d_pows = Vec::with_capacity(n_max + 1);
    let mut p = Integer::from(1);
    for _ in 0..=n_max {
        d_pows.push(p.clone());
        p *= d;
    }
    let mut out = Vec::with_capacity(n_max + 1);
    for k in 0..=n_max {
        let binom = binomial_row(k);
        let mut acc = Rational::new();
        for j in 0..=k {
            if b[j] == 0 || sums[k - j] == 0 {
                continue;
            }
            // d^{j-1}: j = 0 contributes 1/d.
            let weight = Integer::from(&binom[j] * &sums[k - j]);
            let term = if j == 0 {
                Rational::from((weight, Integer::from(d))) * &b[0]
            } else {
                Rational::from(&b[j] * Integer::from(&weight * &d_pows[j - 1]))
            };
            acc += term;
        }
        out.push(acc);
    }
    Ok(out)
}

type GenCache = Mutex<HashMap<i64, Arc<Vec<Rational>>>>;
static GENERALIZED: OnceLock<GenCache> = OnceLock::new();

/// `B_{0,χ}..=B_{n_max,χ}`, cross-checked between the two algorithms.
pub fn gen_bernoulli(c: &QuadraticCharacter, n_max: usize) -> Result<GenBernoulliTable> {
    check_cap(n_max)?;
    let key = c.discriminant().delta();
    let cache = GENERALIZED.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("cache poisoned").get(&key) {
        if hit.len() > n_max {
            return Ok(GenBernoulliTable {
                character: c.clone(),
                values: hit[..=n_max].to_vec(),
            });
        }
    }
    let series = gen_bernoulli_series(c, n_max)?;
    let conductor = gen_bernoulli_conductor(c, n_max)?;
    if let Some(k) = (0..=n_max).find(|&k| series[k] != conductor[k]) {
        return Err(Error::InternalInconsistency(format!(
            "B_{{{k},χ}} for Δ={key}: series {} vs conductor {}",
            series[k], conductor[k]
        )));
    }
    let values = Arc::new(series);
    let mut guard = cache.lock().expect("cache poisoned");
    let entry = guard.entry(key).or_insert_with(|| Arc::clone(&values));
    if entry.len() < values.len() {
        *entry = Arc::clone(&values);
    }
    Ok(GenBernoulliTable {
        character: c.clone(),
        values: values[..=n_max].to_vec(),
    })
}

/// `L(1-n, χ) = -B_{n,χ} / n`.
pub fn l_nonpositive(c: &QuadraticCharacter, n: usize) -> Result<Rational> {
    if n == 0 {
        return Err(Error::domain("l_nonpositive needs n >= 1"));
    }
    let table = gen_bernoulli(c, n)?;
    Ok(-Rational::from(&table.values[n] / n as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn classical_small_values() {
        let t = bernoulli_numbers(0).unwrap();
        assert_eq!(t.values(), &[Rational::from(1)]);
        let t = bernoulli_numbers(12).unwrap();
        assert_eq!(t.get(1).unwrap(), &q(-1, 2));
        assert_eq!(t.get(2).unwrap(), &q(1, 6));
        assert_eq!(t.get(4).unwrap(), &q(-1, 30));
        assert_eq!(t.get(12).unwrap(), &q(-691, 2730));
        assert!(t.get(3).unwrap() == &0);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            bernoulli_numbers(DEFAULT_CAP + 1),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn polynomial_values() {
        assert_eq!(bernoulli_poly(0, &q(7, 3)).unwrap(), Rational::from(1));
        assert_eq!(bernoulli_poly(2, &Rational::new()).unwrap(), q(1, 6));
        assert_eq!(bernoulli_poly(2, &q(1, 5)).unwrap(), q(1, 150));
        // B_1(x) = x - 1/2
        assert_eq!(bernoulli_poly(1, &q(1, 4)).unwrap(), q(-1, 4));
    }

    #[test]
    fn generalized_examples() {
        let c5 = QuadraticCharacter::from_delta(5).unwrap();
        let t = gen_bernoulli(&c5, 3).unwrap();
        assert!(t.get(0).unwrap() == &0);
        assert_eq!(t.get(2).unwrap(), &q(4, 5));
        assert!(t.get(3).unwrap() == &0);
    }

    #[test]
    fn conductor_formula_by_direct_polynomials() {
        // The literal form d^{k-1} Σ χ(a) B_k(a/d), evaluated term by term.
        for delta in [5i64, -4, 8, -3] {
            let c = QuadraticCharacter::from_delta(delta).unwrap();
            let d = c.modulus() as i64;
            let fast = gen_bernoulli_conductor(&c, 12).unwrap();
            for (k, fast_k) in fast.iter().enumerate() {
                let mut acc = Rational::new();
                for a in 1..=d {
                    let chi = c.chi(a);
                    if chi != 0 {
                        acc += bernoulli_poly(k, &q(a, d)).unwrap() * i64::from(chi);
                    }
                }
                let scale = if k == 0 {
                    q(1, d)
                } else {
                    Rational::from(Integer::from(d).pow(k as u32 - 1))
                };
                assert_eq!(&(acc * scale), fast_k, "Δ={delta}, k={k}");
            }
        }
    }

    #[test]
    fn l_at_nonpositive_integers() {
        let c5 = QuadraticCharacter::from_delta(5).unwrap();
        assert_eq!(l_nonpositive(&c5, 2).unwrap(), q(-2, 5));
        assert!(l_nonpositive(&c5, 3).unwrap() == 0);
        // L(0, χ_{-4}) = -B_{1,χ} = 1/2 (class number formula: 2h/w = 1/2).
        let c4 = QuadraticCharacter::from_delta(-4).unwrap();
        assert_eq!(gen_bernoulli(&c4, 1).unwrap().get(1).unwrap(), &q(-1, 2));
        assert_eq!(l_nonpositive(&c4, 1).unwrap(), q(1, 2));
        assert!(l_nonpositive(&c4, 0).is_err());
    }

    #[test]
    fn class_numbers_of_imaginary_fields() {
        // h(Δ) = -(w/2) B_{1,χ} for Δ < 0, with w = 6, 4, 2.
        for (delta, h) in [
            (-3i64, 1i64),
            (-4, 1),
            (-7, 1),
            (-15, 2),
            (-23, 3),
            (-47, 5),
            (-20, 2),
        ] {
            let c = QuadraticCharacter::from_delta(delta).unwrap();
            let w = match delta {
                -3 => 6,
                -4 => 4,
                _ => 2,
            };
            let b1 = gen_bernoulli(&c, 1).unwrap().get(1).unwrap().clone();
            assert_eq!(-b1 * w / 2i64, Rational::from(h), "Δ={delta}");
        }
    }
}
