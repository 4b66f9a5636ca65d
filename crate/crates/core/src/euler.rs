//! Truncated Euler products over split and inert primes.
//!
//! These are the slow reference values for `p₁`, `p₂`, `L₁`, `L₂` and `ζ_K`:
//! each product comes with a rigorous bound on `|log(true / truncated)|`.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::lfunc::{dirichlet_l, zeta_real};
use crate::numkernel::{bits_for_digits, guard_digits, PrecReal};
use crate::quadchar::QuadraticCharacter;

pub const SIEVE_CAP: u64 = 100_000_000;
const SEGMENT: u64 = 1 << 20;

/// Which partial Euler product: `p₁` runs over split primes, `p₂` over inert ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Half {
    Split,
    Inert,
}

impl Half {
    /// 1 for `p₁`/`q₁`, 2 for `p₂`/`q₂`.
    pub fn index(self) -> u8 {
        match self {
            Half::Split => 1,
            Half::Inert => 2,
        }
    }

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Half::Split),
            2 => Ok(Half::Inert),
            _ => Err(Error::domain(format!("index must be 1 or 2; got {i}"))),
        }
    }

    fn chi_value(self) -> i8 {
        match self {
            Half::Split => 1,
            Half::Inert => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeClass {
    pub prime: u64,
    pub class: Splitting,
}

#[derive(Clone, Debug)]
pub struct ProductTruncation {
    pub value: PrecReal,
    pub prime_limit: u64,
    /// Bound on `|log(true product / truncated product)|`.
    pub tail_bound: PrecReal,
}

fn small_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// All primes `≤ limit`, ascending, via a segmented sieve.
pub fn sieve(limit: u64) -> Result<Vec<u64>> {
    if limit < 2 {
        return Err(Error::domain(format!(
            "sieve limit must be at least 2; got {limit}"
        )));
    }
    if limit > SIEVE_CAP {
        return Err(Error::Resource(format!(
            "sieve limit {limit} exceeds the cap of {SIEVE_CAP}"
        )));
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    let base = small_sieve(root);
    let segments: Vec<u64> = (0..=limit / SEGMENT).map(|k| k * SEGMENT).collect();
    let chunks: Vec<Vec<u64>> = segments
        .par_iter()
        .map(|&lo| {
            let hi = (lo + SEGMENT).min(limit + 1);
            let mut composite = vec![false; (hi - lo) as usize];
            for &p in &base {
                if p * p >= hi {
                    break;
                }
                let start = (p * p).max(lo.div_ceil(p) * p);
                let mut m = start;
                while m < hi {
                    composite[(m - lo) as usize] = true;
                    m += p;
                }
            }
            (lo.max(2)..hi)
                .filter(|&n| !composite[(n - lo) as usize])
                .collect()
        })
        .collect();
    Ok(chunks.concat())
}

pub fn classify(c: &QuadraticCharacter, p: u64) -> PrimeClass {
    let class = match c.chi(p as i64) {
        1 => Splitting::Split,
        -1 => Splitting::Inert,
        _ => Splitting::Ramified,
    };
    PrimeClass { prime: p, class }
}

/// `2 · P^{1-σ} / (σ - 1)`, bounding `Σ_{n>P} -log(1 - n^{-σ})`.
pub fn product_tail_bound(prime_limit: u64, sigma: &Float, bits: u32) -> Float {
    let s1 = Float::with_val(bits, sigma - 1u32);
    let p = Float::with_val(bits, prime_limit);
    let pow = p.pow(Float::with_val(bits, -&s1));
    pow * 2u32 / s1
}

/// `Σ_{p ≤ P, χ(p) = ε} -log(1 - p^{-s})` with a deterministic reduction order.
fn log_product_sum(primes: &[u64], s: &Float, bits: u32) -> Float {
    let neg_s = Float::with_val(bits, -s);
    let partials: Vec<Float> = primes
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = Float::new(bits);
            for &p in chunk {
                let x = Float::with_val(bits, p).pow(&neg_s);
                acc -= (-x).ln_1p();
            }
            acc
        })
        .collect();
    partials
        .into_iter()
        .fold(Float::new(bits), |acc, v| acc + v)
}

fn primes_in_class(c: &QuadraticCharacter, half: Half, limit: u64) -> Result<Vec<u64>> {
    let want = half.chi_value();
    Ok(sieve(limit)?
        .into_iter()
        .filter(|&p| c.chi(p as i64) == want)
        .collect())
}

fn check_sigma(sigma: &PrecReal) -> Result<()> {
    if *sigma.value() <= 1 {
        return Err(Error::domain(format!(
            "Euler products need σ > 1; got {}",
            sigma.to_sci_string()
        )));
    }
    Ok(())
}

/// `Π_{p ≤ P, p in class} (1 - p^{-σ})^{-1}`.
pub fn p_product(
    c: &QuadraticCharacter,
    half: Half,
    sigma: &PrecReal,
    prime_limit: u64,
    digits: u32,
) -> Result<ProductTruncation> {
    check_sigma(sigma)?;
    let primes = primes_in_class(c, half, prime_limit)?;
    let bits = bits_for_digits(digits + guard_digits(primes.len()));
    let s = Float::with_val(bits, sigma.value());
    let log_sum = log_product_sum(&primes, &s, bits);
    Ok(ProductTruncation {
        value: PrecReal::from_float(log_sum.exp(), digits),
        prime_limit,
        tail_bound: PrecReal::from_float(product_tail_bound(prime_limit, &s, bits), digits),
    })
}

/// `L₁(σ) = Π_{χ(p)=1} (1 - p^{-σ})^{-2}`.
pub fn l1_product(
    c: &QuadraticCharacter,
    sigma: &PrecReal,
    prime_limit: u64,
    digits: u32,
) -> Result<ProductTruncation> {
    check_sigma(sigma)?;
    let primes = primes_in_class(c, Half::Split, prime_limit)?;
    let bits = bits_for_digits(digits + guard_digits(primes.len()));
    let s = Float::with_val(bits, sigma.value());
    let log_sum = log_product_sum(&primes, &s, bits) * 2u32;
    Ok(ProductTruncation {
        value: PrecReal::from_float(log_sum.exp(), digits),
        prime_limit,
        tail_bound: PrecReal::from_float(product_tail_bound(prime_limit, &s, bits) * 2u32, digits),
    })
}

/// `L₂(σ) = Π_{χ(p)=-1} (1 - p^{-2σ})^{-1}`.
pub fn l2_product(
    c: &QuadraticCharacter,
    sigma: &PrecReal,
    prime_limit: u64,
    digits: u32,
) -> Result<ProductTruncation> {
    check_sigma(sigma)?;
    let primes = primes_in_class(c, Half::Inert, prime_limit)?;
    let bits = bits_for_digits(digits + guard_digits(primes.len()));
    let s2 = Float::with_val(bits, sigma.value() * 2u32);
    let log_sum = log_product_sum(&primes, &s2, bits);
    Ok(ProductTruncation {
        value: PrecReal::from_float(log_sum.exp(), digits),
        prime_limit,
        tail_bound: PrecReal::from_float(product_tail_bound(prime_limit, &s2, bits), digits),
    })
}

/// `Π_{p | d} (1 - p^{-σ})^{-1}`.
pub fn ramified_factor(c: &QuadraticCharacter, sigma: &PrecReal, digits: u32) -> PrecReal {
    let bits = bits_for_digits(digits + 5);
    let s = Float::with_val(bits, sigma.value());
    let mut v = Float::with_val(bits, 1);
    for p in c.discriminant().ramified_primes() {
        let x = Float::with_val(bits, p).pow(Float::with_val(bits, -&s));
        v /= Float::with_val(bits, 1 - x);
    }
    PrecReal::from_float(v, digits)
}

/// `ζ_K(σ) = ζ(σ) L(σ, χ)`.
pub fn dedekind_zeta(c: &QuadraticCharacter, sigma: &PrecReal, digits: u32) -> Result<PrecReal> {
    check_sigma(sigma)?;
    let work = digits + 5;
    let z = zeta_real(sigma, work)?;
    let l = dirichlet_l(c, sigma, work)?;
    Ok((&z * &l).with_digits(digits))
}
