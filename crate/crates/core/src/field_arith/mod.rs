//! Exact ideal arithmetic in `Q` and in real quadratic fields of narrow class number one.
//!
//! The ring of integers of `Q(sqrt d)` is written `Z[w]` with `w = sqrt d` when
//! `d = 2, 3 (mod 4)` and `w = (1 + sqrt d)/2` when `d = 1 (mod 4)`. Prime ideals
//! of degree one are identified by the residue of `w` modulo the prime; this root
//! also provides the canonical label separating the two primes above a split `p`.

mod element;
mod ideal;
pub(crate) mod modarith;
mod prime;

pub use element::QuadInt;
pub use ideal::{squarefree_decompose, Ideal, SquarefreeDecomposition};
pub use prime::{PrimeIdeal, Splitting};

use num_integer::Roots;
use thiserror::Error;

/// Values of `d` for which `Q(sqrt d)` has narrow class number one (`d = 1` is `Q`).
pub const SUPPORTED_D: &[u64] = &[1, 2, 5, 13, 17, 29, 37, 41, 53, 61, 73, 89, 97];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not squarefree")]
    NotSquarefree(u64),
    #[error("Q(sqrt {0}) is not on the narrow class number one allowlist")]
    UnsupportedField(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("element is not integral: {0}")]
    NotIntegral(String),
    #[error("element is not totally positive: {0}")]
    NotTotallyPositive(String),
    #[error("residue characteristic 2 is not supported by the Euler criterion")]
    EvenCharacteristic,
    #[error("norm {0} is too large to factor")]
    NormTooLarge(String),
    #[error("no prime of norm {norm} with root label {label} above {p}")]
    UnknownPrime { p: u64, norm: u64, label: u8 },
}

/// `Q` (encoded as `d = 1`) or a real quadratic field `Q(sqrt d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadField {
    d: u64,
    disc: u64,
}

fn is_squarefree(n: u64) -> bool {
    let mut k = 2u64;
    let mut n = n;
    while k * k <= n {
        if n.is_multiple_of(k * k) {
            return false;
        }
        if n.is_multiple_of(k) {
            n /= k;
        }
        k += 1;
    }
    true
}

impl QuadField {
    /// `make_field`: validates `d` and computes the discriminant.
    pub fn new(d: u64) -> Result<Self, FieldError> {
        if d == 0 || !is_squarefree(d) {
            return Err(FieldError::NotSquarefree(d));
        }
        if !SUPPORTED_D.contains(&d) {
            return Err(FieldError::UnsupportedField(d));
        }
        let disc = match d {
            1 => 1,
            _ if d % 4 == 1 => d,
            _ => 4 * d,
        };
        Ok(QuadField { d, disc })
    }

    pub fn rationals() -> Self {
        QuadField { d: 1, disc: 1 }
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn disc(&self) -> u64 {
        self.disc
    }

    pub fn degree(&self) -> u32 {
        if self.d == 1 {
            1
        } else {
            2
        }
    }

    pub fn is_rational(&self) -> bool {
        self.d == 1
    }

    /// Whether `d = 1 (mod 4)`, i.e. the integral basis is `{1, (1 + sqrt d)/2}`.
    pub(crate) fn half_integral_basis(&self) -> bool {
        self.d != 1 && self.d % 4 == 1
    }

    /// `(trace, constant)` with `w^2 = trace * w + constant`.
    pub fn generator_relation(&self) -> (i64, i64) {
        if self.half_integral_basis() {
            (1, ((self.d - 1) / 4) as i64)
        } else {
            (0, self.d as i64)
        }
    }

    /// All prime ideals above the rational prime `p`.
    pub fn split_rational_prime(&self, p: u64) -> Result<Vec<PrimeIdeal>, FieldError> {
        if !num_prime::nt_funcs::is_prime64(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(prime::split(self, p))
    }

    /// Every prime ideal of norm at most `bound`, sorted canonically.
    pub fn prime_ideals_up_to(&self, bound: u64) -> Vec<PrimeIdeal> {
        if bound < 2 {
            return Vec::new();
        }
        let sieve = primal::Sieve::new(bound as usize);
        let inert_limit = bound.sqrt();
        let mut out = Vec::new();
        for p in sieve.primes_from(0).map(|p| p as u64).take_while(|&p| p <= bound) {
            if self.is_rational() {
                out.push(PrimeIdeal::rational(p));
                continue;
            }
            // Degree-two primes only matter while p^2 <= bound.
            if p > inert_limit && p % 2 == 1 && !self.disc.is_multiple_of(p) {
                if modarith::legendre(self.disc % p, p) == 1 {
                    out.extend(prime::split(self, p));
                }
                continue;
            }
            out.extend(prime::split(self, p).into_iter().filter(|q| q.norm() <= bound));
        }
        out.sort();
        out
    }

    /// Every integral ideal of norm at most `bound`, sorted canonically.
    pub fn ideals_up_to(&self, bound: u64) -> Vec<Ideal> {
        let primes = self.prime_ideals_up_to(bound);
        let mut out = Vec::new();
        let mut stack: Vec<(PrimeIdeal, u32)> = Vec::new();
        collect_ideals(&primes, 0, 1, bound, &mut stack, &mut out);
        out.sort();
        out
    }

    /// Builds the integral element `a + b sqrt d` from rational coordinates.
    pub fn element(
        &self,
        a: &num_rational::BigRational,
        b: &num_rational::BigRational,
    ) -> Result<QuadInt, FieldError> {
        QuadInt::from_rational_coords(self, a, b)
    }

    /// `factor_principal_ideal`: the prime factorization of `tau O_F`.
    pub fn factor(&self, tau: &QuadInt) -> Result<Ideal, FieldError> {
        element::factor_principal(self, tau)
    }

    /// The prime ideal with the given norm and root label above `p`.
    pub fn prime_ideal(&self, p: u64, norm: u64, label: u8) -> Result<PrimeIdeal, FieldError> {
        self.split_rational_prime(p)?
            .into_iter()
            .find(|q| q.norm() == norm && q.root_label() == label)
            .ok_or(FieldError::UnknownPrime { p, norm, label })
    }
}

fn collect_ideals(
    primes: &[PrimeIdeal],
    start: usize,
    norm: u64,
    bound: u64,
    stack: &mut Vec<(PrimeIdeal, u32)>,
    out: &mut Vec<Ideal>,
) {
    out.push(Ideal::from_sorted_factors(stack.clone()));
    for (i, q) in primes.iter().enumerate().skip(start) {
        let qn = q.norm();
        if norm.saturating_mul(qn) > bound {
            break;
        }
        let mut e = 0u32;
        let mut acc = norm;
        while acc.saturating_mul(qn) <= bound {
            acc *= qn;
            e += 1;
            stack.push((*q, e));
            collect_ideals(primes, i + 1, acc, bound, stack, out);
            stack.pop();
        }
    }
}

/// `quadratic_residue_symbol`: Euler's criterion for `a` in the residue field of `prime`.
pub fn quadratic_residue_symbol(a: &QuadInt, prime: &PrimeIdeal) -> Result<i8, FieldError> {
    prime.residue_symbol(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_field_discriminants() {
        assert_eq!(QuadField::new(5).unwrap().disc(), 5);
        assert_eq!(QuadField::new(2).unwrap().disc(), 8);
        let q = QuadField::new(1).unwrap();
        assert_eq!((q.disc(), q.degree()), (1, 1));
        assert_eq!(QuadField::new(13).unwrap().disc(), 13);
    }

    #[test]
    fn make_field_errors() {
        assert_eq!(QuadField::new(12), Err(FieldError::NotSquarefree(12)));
        assert_eq!(QuadField::new(0), Err(FieldError::NotSquarefree(0)));
        assert_eq!(QuadField::new(3), Err(FieldError::UnsupportedField(3)));
        assert_eq!(QuadField::new(10), Err(FieldError::UnsupportedField(10)));
    }

    #[test]
    fn enumerate_examples() {
        let q = QuadField::rationals();
        let norms: Vec<u64> = q.prime_ideals_up_to(10).iter().map(|p| p.norm()).collect();
        assert_eq!(norms, vec![2, 3, 5, 7]);

        let k = QuadField::new(5).unwrap();
        let norms: Vec<u64> = k.prime_ideals_up_to(11).iter().map(|p| p.norm()).collect();
        assert_eq!(norms, vec![4, 5, 9, 11, 11]);
        assert!(k.prime_ideals_up_to(3).is_empty());
    }

    #[test]
    fn ideal_counts_match_dirichlet_coefficients() {
        // Over Q the ideals of norm <= n are the positive integers.
        assert_eq!(QuadField::rationals().ideals_up_to(100).len(), 100);
        // Q(sqrt 5): number of ideals of norm n is sum_{m | n} (5/m).
        let k = QuadField::new(5).unwrap();
        let chi5 = |m: u64| -> i64 {
            match m % 5 {
                0 => 0,
                1 | 4 => 1,
                _ => -1,
            }
        };
        let expected: i64 = (1..=200u64)
            .map(|n| (1..=n).filter(|m| n % m == 0).map(chi5).sum::<i64>())
            .sum();
        assert_eq!(k.ideals_up_to(200).len() as i64, expected);
    }

    #[test]
    fn prime_ideal_lookup() {
        let k = QuadField::new(5).unwrap();
        let p = k.prime_ideal(11, 11, 1).unwrap();
        assert_eq!(p.splitting(), Splitting::SplitSecond);
        assert!(k.prime_ideal(11, 121, 0).is_err());
        assert_eq!(k.split_rational_prime(9), Err(FieldError::NotPrime(9)));
    }
}
