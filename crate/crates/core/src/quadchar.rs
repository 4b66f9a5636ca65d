//! Fundamental discriminants and the quadratic character of `Q(sqrt(Δ))`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rug::Float;

use crate::error::{Error, Result};
use crate::numkernel::{bits_for_digits, guard_digits, pi_float, PrecReal};

/// Characters with modulus up to this size keep a lazily built value table.
const TABLE_MODULUS_LIMIT: u64 = 1_000_000;

/// A validated fundamental discriminant `Δ` of a quadratic field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Discriminant {
    delta: i64,
    modulus: u64,
}

impl Discriminant {
    pub fn new(delta: i64) -> Result<Self> {
        make_discriminant(delta)
    }

    pub fn delta(&self) -> i64 {
        self.delta
    }

    /// `d = |Δ|`, the conductor of the attached character.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_real_field(&self) -> bool {
        self.delta > 0
    }

    /// Distinct primes dividing `d`, ascending.
    pub fn ramified_primes(&self) -> Vec<u64> {
        let mut n = self.modulus;
        let mut primes = Vec::new();
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                primes.push(p);
                while n.is_multiple_of(p) {
                    n /= p;
                }
            }
            p += 1;
        }
        if n > 1 {
            primes.push(n);
        }
        primes
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.delta)
    }
}

fn is_squarefree(n: u64) -> bool {
    let mut n = n;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

pub fn make_discriminant(delta: i64) -> Result<Discriminant> {
    if delta == 0 || delta == 1 || delta == i64::MIN {
        return Err(Error::NotFundamental(delta));
    }
    let valid = match delta.rem_euclid(4) {
        1 => is_squarefree(delta.unsigned_abs()),
        0 => {
            let m = delta / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    };
    if valid {
        Ok(Discriminant {
            delta,
            modulus: delta.unsigned_abs(),
        })
    } else {
        Err(Error::NotFundamental(delta))
    }
}

/// Kronecker symbol `(a / n)` for arbitrary integers.
pub fn kronecker(a: i64, n: i64) -> i8 {
    if n == 0 {
        return i8::from(a == 1 || a == -1);
    }
    let mut result: i8 = 1;
    let mut n = n as i128;
    let a = a as i128;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        n >>= twos;
        if twos % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            result = -result;
        }
    }
    // n is now odd and positive: Jacobi symbol.
    let mut a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// The real primitive character `χ(n) = (Δ / n)` attached to `Q(sqrt(Δ))`.
#[derive(Clone)]
pub struct QuadraticCharacter {
    disc: Discriminant,
    table: Arc<OnceLock<Vec<i8>>>,
}

impl fmt::Debug for QuadraticCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadraticCharacter")
            .field("delta", &self.disc.delta)
            .field("parity", &self.parity())
            .finish()
    }
}

impl PartialEq for QuadraticCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.disc == other.disc
    }
}

impl Eq for QuadraticCharacter {}

impl QuadraticCharacter {
    pub fn new(disc: Discriminant) -> Self {
        QuadraticCharacter {
            disc,
            table: Arc::new(OnceLock::new()),
        }
    }

    pub fn from_delta(delta: i64) -> Result<Self> {
        Ok(Self::new(make_discriminant(delta)?))
    }

    pub fn discriminant(&self) -> Discriminant {
        self.disc
    }

    pub fn modulus(&self) -> u64 {
        self.disc.modulus
    }

    /// `a = 0` for an even character (`Δ > 0`), `a = 1` for an odd one.
    pub fn parity(&self) -> u8 {
        u8::from(self.disc.delta < 0)
    }

    pub fn chi(&self, n: i64) -> i8 {
        let d = self.disc.modulus;
        if d <= TABLE_MODULUS_LIMIT {
            let table = self.table.get_or_init(|| {
                (0..d as i64)
                    .map(|r| kronecker(self.disc.delta, r))
                    .collect()
            });
            table[n.rem_euclid(d as i64) as usize]
        } else {
            kronecker(self.disc.delta, n)
        }
    }

    /// `χ(1), χ(2), ..., χ(count)`.
    pub fn values(&self, count: usize) -> Vec<i8> {
        (1..=count as i64).map(|n| self.chi(n)).collect()
    }

    /// `g(χ) = Σ_{a=1}^{d} χ(a) e^(2πia/d)` as `(re, im)`.
    pub fn gauss_sum(&self, digits: u32) -> (PrecReal, PrecReal) {
        let d = self.disc.modulus;
        let work = digits + guard_digits(d as usize);
        let bits = bits_for_digits(work);
        let two_pi_over_d = Float::with_val(bits, pi_float(bits) * 2u32) / d;
        let mut re = Float::new(bits);
        let mut im = Float::new(bits);
        for a in 1..=d {
            let c = self.chi(a as i64);
            if c == 0 {
                continue;
            }
            let angle = Float::with_val(bits, &two_pi_over_d * a);
            let (s, co) = angle.sin_cos(Float::new(bits));
            if c > 0 {
                re += co;
                im += s;
            } else {
                re -= co;
                im -= s;
            }
        }
        (
            PrecReal::from_float(re, digits),
            PrecReal::from_float(im, digits),
        )
    }
}

pub fn chi(c: &QuadraticCharacter, n: i64) -> i8 {
    c.chi(n)
}

pub fn parity(c: &QuadraticCharacter) -> u8 {
    c.parity()
}

pub fn gauss_sum(c: &QuadraticCharacter, digits: u32) -> (PrecReal, PrecReal) {
    c.gauss_sum(digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_square_mod(a: i64, p: i64) -> bool {
        (0..p).any(|x| (x * x - a).rem_euclid(p) == 0)
    }

    #[test]
    fn discriminant_validation() {
        assert_eq!(make_discriminant(5).unwrap().modulus(), 5);
        assert_eq!(make_discriminant(8).unwrap().modulus(), 8);
        assert_eq!(make_discriminant(12).unwrap().modulus(), 12);
        assert_eq!(make_discriminant(-4).unwrap().modulus(), 4);
        assert_eq!(make_discriminant(-3).unwrap().modulus(), 3);
        for bad in [0, 1, 9, 4, 16, 2, 3, -1, 25, 20, -16, 45] {
            assert_eq!(
                make_discriminant(bad),
                Err(Error::NotFundamental(bad)),
                "{bad}"
            );
        }
    }

    #[test]
    fn fundamental_discriminants_below_50() {
        let found: Vec<i64> = (-50..=50)
            .filter(|&d| make_discriminant(d).is_ok())
            .collect();
        assert_eq!(
            found,
            vec![
                -47, -43, -40, -39, -35, -31, -24, -23, -20, -19, -15, -11, -8, -7, -4, -3, 5, 8,
                12, 13, 17, 21, 24, 28, 29, 33, 37, 40, 41, 44
            ]
        );
    }

    #[test]
    fn chi_examples() {
        let c5 = QuadraticCharacter::from_delta(5).unwrap();
        assert_eq!(c5.chi(2), -1);
        assert_eq!(c5.chi(10), 0);
        assert_eq!(c5.values(4), vec![1, -1, -1, 1]);
        assert_eq!(QuadraticCharacter::from_delta(8).unwrap().chi(7), 1);
        assert_eq!(QuadraticCharacter::from_delta(-4).unwrap().chi(3), -1);
    }

    #[test]
    fn chi_at_odd_primes_matches_residue_enumeration() {
        for delta in [5i64, 8, 12, 13, -4, -8, -3, -7, 21, 44] {
            let c = QuadraticCharacter::from_delta(delta).unwrap();
            for p in [3i64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
                let expected = if delta % p == 0 {
                    0
                } else if is_square_mod(delta, p) {
                    1
                } else {
                    -1
                };
                assert_eq!(c.chi(p), expected, "Δ={delta}, p={p}");
            }
        }
    }

    #[test]
    fn chi_at_two() {
        // 2 splits iff Δ ≡ 1 (mod 8), is inert iff Δ ≡ 5 (mod 8).
        for delta in [5i64, 13, 17, 21, -3, -7, -11, 8, -4] {
            let c = QuadraticCharacter::from_delta(delta).unwrap();
            let expected = match delta.rem_euclid(8) {
                1 => 1,
                5 => -1,
                _ => 0,
            };
            assert_eq!(c.chi(2), expected, "Δ={delta}");
        }
    }

    #[test]
    fn parity_examples() {
        let c5 = QuadraticCharacter::from_delta(5).unwrap();
        assert_eq!(c5.parity(), 0);
        assert_eq!(c5.chi(-1), 1);
        let c4 = QuadraticCharacter::from_delta(-4).unwrap();
        assert_eq!(c4.parity(), 1);
        assert_eq!(c4.chi(-1), -1);
        assert_eq!(QuadraticCharacter::from_delta(13).unwrap().parity(), 0);
    }

    #[test]
    fn large_modulus_uses_direct_symbol() {
        // 1_000_003 is prime and ≡ 3 (mod 4), so -1_000_003 ≡ 1 (mod 4) is fundamental.
        let c = QuadraticCharacter::from_delta(-1_000_003).unwrap();
        assert_eq!(c.chi(1_000_003), 0);
        assert_eq!(c.chi(4), 1);
        assert_eq!(c.chi(7), c.chi(7 + 1_000_003));
    }

    #[test]
    fn kronecker_edge_cases() {
        assert_eq!(kronecker(5, 0), 0);
        assert_eq!(kronecker(1, 0), 1);
        assert_eq!(kronecker(-4, -1), -1);
        assert_eq!(kronecker(5, -1), 1);
        assert_eq!(kronecker(8, 2), 0);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(17, 2), 1);
    }

    #[test]
    fn gauss_sum_examples() {
        let (re, im) = QuadraticCharacter::from_delta(5).unwrap().gauss_sum(30);
        assert!((re.to_f64() - 5f64.sqrt()).abs() < 1e-14);
        assert!(im.to_f64().abs() < 1e-28);

        let (re, im) = QuadraticCharacter::from_delta(-4).unwrap().gauss_sum(30);
        assert!(re.to_f64().abs() < 1e-28);
        assert!((im.to_f64() - 2.0).abs() < 1e-28);

        let (re, im) = QuadraticCharacter::from_delta(8).unwrap().gauss_sum(30);
        assert!((re.to_f64() - 8f64.sqrt()).abs() < 1e-14);
        assert!(im.to_f64().abs() < 1e-28);
    }

    #[test]
    fn ramified_primes_divide_modulus() {
        let d = make_discriminant(-20).unwrap();
        assert_eq!(d.ramified_primes(), vec![2, 5]);
        assert_eq!(make_discriminant(5).unwrap().ramified_primes(), vec![5]);
        assert_eq!(make_discriminant(12).unwrap().ramified_primes(), vec![2, 3]);
    }
}
