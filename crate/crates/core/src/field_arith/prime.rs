use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::element::QuadInt;
use super::modarith::{self, QuadraticExtension};
use super::{FieldError, QuadField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Splitting {
    /// A rational prime, when the base field is `Q`.
    Rational,
    /// The split prime labelled by the smaller root of the minimal polynomial of `w` mod `p`.
    SplitFirst,
    SplitSecond,
    Inert,
    Ramified,
}

/// A nonzero prime ideal of `Q` or of a real quadratic field.
///
/// Degree-one primes store the residue of the integral generator `w`, which
/// determines the reduction map `Z[w] -> F_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeIdeal {
    d: u64,
    p: u64,
    splitting: Splitting,
    root: u64,
}

impl PrimeIdeal {
    pub(crate) fn rational(p: u64) -> Self {
        PrimeIdeal { d: 1, p, splitting: Splitting::Rational, root: 0 }
    }

    pub fn rational_prime(&self) -> u64 {
        self.p
    }

    pub fn splitting(&self) -> Splitting {
        self.splitting
    }

    pub fn residue_degree(&self) -> u32 {
        if self.splitting == Splitting::Inert {
            2
        } else {
            1
        }
    }

    pub fn norm(&self) -> u64 {
        if self.splitting == Splitting::Inert {
            self.p * self.p
        } else {
            self.p
        }
    }

    /// 0 for every prime except the second of a split pair.
    pub fn root_label(&self) -> u8 {
        u8::from(self.splitting == Splitting::SplitSecond)
    }

    /// Residue of `w` modulo this prime (degree-one primes only; 0 otherwise).
    pub fn generator_residue(&self) -> u64 {
        self.root
    }

    pub fn field(&self) -> QuadField {
        // Every PrimeIdeal is created from a validated field.
        QuadField::new(self.d).expect("prime ideal carries a validated field")
    }

    /// Reduction of `x + y w` into the residue field, as a pair in `F_p[w]`
    /// (second coordinate is always 0 for degree-one primes).
    pub(crate) fn reduce(&self, a: &QuadInt) -> (u64, u64) {
        let p = BigInt::from(self.p);
        let x = residue(a.x(), &p);
        let y = residue(a.y(), &p);
        match self.splitting {
            Splitting::Inert => (x, y),
            _ => (modarith::add_mod(x, modarith::mul_mod(y, self.root, self.p), self.p), 0),
        }
    }

    /// Whether `a` lies in this prime ideal.
    pub fn contains(&self, a: &QuadInt) -> bool {
        self.reduce(a) == (0, 0)
    }

    pub(crate) fn residue_symbol(&self, a: &QuadInt) -> Result<i8, FieldError> {
        if self.p == 2 {
            return Err(FieldError::EvenCharacteristic);
        }
        let r = self.reduce(a);
        if r == (0, 0) {
            return Ok(0);
        }
        if self.splitting != Splitting::Inert {
            return Ok(modarith::legendre(r.0, self.p));
        }
        let (trace, constant) = self.field().generator_relation();
        let ext = QuadraticExtension {
            p: self.p,
            trace: trace as u64 % self.p,
            constant: constant as u64 % self.p,
        };
        let n = self.p as u128 * self.p as u128;
        let e = ext.pow(r, (n - 1) / 2);
        if e == (1, 0) {
            Ok(1)
        } else {
            debug_assert_eq!(e, (self.p - 1, 0));
            Ok(-1)
        }
    }
}

fn residue(v: &BigInt, p: &BigInt) -> u64 {
    let r = ((v % p) + p) % p;
    r.to_u64().expect("residue fits in u64")
}

impl Ord for PrimeIdeal {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.norm(), self.p, self.root_label(), self.d)
            .cmp(&(other.norm(), other.p, other.root_label(), other.d))
    }
}

impl PartialOrd for PrimeIdeal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.splitting {
            Splitting::Rational | Splitting::Inert => write!(f, "({})", self.p),
            Splitting::Ramified => write!(f, "P{}", self.p),
            _ => write!(f, "P{}_{}", self.p, self.root_label()),
        }
    }
}

/// Roots in `[0, p)` of `x^2 - trace*x - constant` modulo `p`, ascending.
fn roots_mod(trace: i64, constant: i64, p: u64) -> Vec<u64> {
    let t = trace.rem_euclid(p as i64) as u64;
    let c = constant.rem_euclid(p as i64) as u64;
    if p == 2 {
        return (0..2u64)
            .filter(|&x| (x * x + 2 * p - (t * x) % p - c).is_multiple_of(p))
            .collect();
    }
    // Discriminant t^2 + 4c.
    let disc = modarith::add_mod(modarith::mul_mod(t, t, p), modarith::mul_mod(4, c, p), p);
    let Some(s) = modarith::sqrt_mod(disc, p) else {
        return Vec::new();
    };
    let half = modarith::inverse_mod(2, p);
    let r1 = modarith::mul_mod(modarith::add_mod(t, s, p), half, p);
    let r2 = modarith::mul_mod(modarith::add_mod(t, p - s, p), half, p);
    let mut roots = vec![r1, r2];
    roots.sort_unstable();
    roots.dedup();
    roots
}

pub(super) fn split(field: &QuadField, p: u64) -> Vec<PrimeIdeal> {
    if field.is_rational() {
        return vec![PrimeIdeal::rational(p)];
    }
    let d = field.d();
    let (trace, constant) = field.generator_relation();
    let roots = roots_mod(trace, constant, p);
    let make = |splitting, root| PrimeIdeal { d, p, splitting, root };
    if field.disc().is_multiple_of(p) {
        debug_assert_eq!(roots.len(), 1);
        return vec![make(Splitting::Ramified, roots[0])];
    }
    match roots.as_slice() {
        [] => vec![make(Splitting::Inert, 0)],
        [r1, r2] => vec![make(Splitting::SplitFirst, *r1), make(Splitting::SplitSecond, *r2)],
        _ => unreachable!("unramified prime with a repeated root"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(d: u64) -> QuadField {
        QuadField::new(d).unwrap()
    }

    #[test]
    fn splitting_examples_sqrt5() {
        let k = field(5);
        let five = k.split_rational_prime(5).unwrap();
        assert_eq!(five.len(), 1);
        assert_eq!((five[0].splitting(), five[0].norm()), (Splitting::Ramified, 5));

        let eleven = k.split_rational_prime(11).unwrap();
        assert_eq!(eleven.len(), 2);
        assert!(eleven.iter().all(|q| q.norm() == 11));
        assert_ne!(eleven[0].root_label(), eleven[1].root_label());
        assert!(eleven[0].generator_residue() < eleven[1].generator_residue());

        let two = k.split_rational_prime(2).unwrap();
        assert_eq!((two.len(), two[0].splitting(), two[0].norm()), (1, Splitting::Inert, 4));
    }

    #[test]
    fn split_roots_are_roots() {
        for d in [2u64, 5, 13, 17, 29] {
            let k = field(d);
            let (t, c) = k.generator_relation();
            for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43] {
                for q in k.split_rational_prime(p).unwrap() {
                    if q.residue_degree() == 1 {
                        let r = q.generator_residue() as i64;
                        let val = (r * r - t * r - c).rem_euclid(p as i64);
                        assert_eq!(val, 0, "d={d} p={p}");
                    }
                }
            }
        }
    }

    #[test]
    fn degree_sum_is_field_degree() {
        for d in [1u64, 2, 5, 13, 17] {
            let k = field(d);
            for p in [3u64, 7, 11, 19, 23, 101] {
                if k.disc().is_multiple_of(p) {
                    continue;
                }
                let s: u32 = k.split_rational_prime(p).unwrap().iter().map(|q| q.residue_degree()).sum();
                assert_eq!(s, k.degree());
            }
        }
    }

    #[test]
    fn sqrt2_ramifies_at_two() {
        let k = field(2);
        let two = k.split_rational_prime(2).unwrap();
        assert_eq!(two[0].splitting(), Splitting::Ramified);
        // 17 = 1 mod 8 splits at 2 in Q(sqrt 17)
        let k = field(17);
        assert_eq!(k.split_rational_prime(2).unwrap().len(), 2);
    }

    #[test]
    fn residue_symbol_examples() {
        let q11 = PrimeIdeal::rational(11);
        let q5 = PrimeIdeal::rational(5);
        assert_eq!(q11.residue_symbol(&QuadInt::integer(5)), Ok(1));
        assert_eq!(q5.residue_symbol(&QuadInt::integer(10)), Ok(0));
        assert_eq!(q5.residue_symbol(&QuadInt::integer(2)), Ok(-1));
        assert_eq!(
            PrimeIdeal::rational(2).residue_symbol(&QuadInt::integer(3)),
            Err(FieldError::EvenCharacteristic)
        );
    }

    #[test]
    fn inert_residue_symbol_brute_force() {
        // Inert (3) in Q(sqrt 5): residue field F_9 = F_3[w]/(w^2 - w - 1).
        let k = field(5);
        let three = k.split_rational_prime(3).unwrap()[0];
        assert_eq!(three.splitting(), Splitting::Inert);
        let ext = QuadraticExtension { p: 3, trace: 1, constant: 1 };
        let mut squares = std::collections::HashSet::new();
        for a in 0..3 {
            for b in 0..3 {
                squares.insert(ext.mul((a, b), (a, b)));
            }
        }
        for x in 0..3i64 {
            for y in 0..3i64 {
                let v = QuadInt::new(x.into(), y.into());
                let expected = if (x, y) == (0, 0) {
                    0
                } else if squares.contains(&(x as u64, y as u64)) {
                    1
                } else {
                    -1
                };
                assert_eq!(three.residue_symbol(&v).unwrap(), expected, "x={x} y={y}");
            }
        }
    }
}
