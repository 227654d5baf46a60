use std::cmp::Ordering;
use std::fmt;

use super::prime::PrimeIdeal;

/// An integral ideal stored as its prime factorization.
///
/// Factors are kept in canonical prime order, so equal ideals have equal
/// representations. Ideals order by norm first, then by factor list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Ideal {
    factors: Vec<(PrimeIdeal, u32)>,
    norm: u128,
}

impl Ideal {
    /// The unit ideal `O_F`.
    pub fn unit() -> Self {
        Ideal { factors: Vec::new(), norm: 1 }
    }

    pub fn prime(p: PrimeIdeal) -> Self {
        Self::prime_power(p, 1)
    }

    pub fn prime_power(p: PrimeIdeal, e: u32) -> Self {
        if e == 0 {
            return Self::unit();
        }
        Self::from_sorted_factors(vec![(p, e)])
    }

    /// Builds an ideal from arbitrary `(prime, exponent)` pairs, merging repeats.
    pub fn from_factors(mut factors: Vec<(PrimeIdeal, u32)>) -> Self {
        factors.retain(|(_, e)| *e > 0);
        factors.sort_by_key(|a| a.0);
        let mut merged: Vec<(PrimeIdeal, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        Self::from_sorted_factors(merged)
    }

    pub(crate) fn from_sorted_factors(factors: Vec<(PrimeIdeal, u32)>) -> Self {
        let norm = factors
            .iter()
            .fold(1u128, |acc, (p, e)| acc.saturating_mul((p.norm() as u128).saturating_pow(*e)));
        Ideal { factors, norm }
    }

    pub fn factors(&self) -> &[(PrimeIdeal, u32)] {
        &self.factors
    }

    /// Absolute norm (saturating at `u128::MAX`).
    pub fn norm(&self) -> u128 {
        self.norm
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|(_, e)| *e == 1)
    }

    pub fn exponent(&self, p: &PrimeIdeal) -> u32 {
        self.factors
            .binary_search_by(|(q, _)| q.cmp(p))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    /// The prime ideal itself, if this ideal is prime.
    pub fn as_prime(&self) -> Option<PrimeIdeal> {
        match self.factors.as_slice() {
            [(p, 1)] => Some(*p),
            _ => None,
        }
    }

    pub fn mul(&self, other: &Ideal) -> Ideal {
        let (a, b) = (&self.factors, &other.factors);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Ideal { factors: out, norm: self.norm.saturating_mul(other.norm) }
    }

    pub fn pow(&self, e: u32) -> Ideal {
        Ideal::from_sorted_factors(self.factors.iter().map(|(p, f)| (*p, f * e)).collect())
    }

    pub fn divides(&self, other: &Ideal) -> bool {
        self.factors.iter().all(|(p, e)| other.exponent(p) >= *e)
    }

    /// All integral divisors, unsorted.
    pub fn divisors(&self) -> Vec<Ideal> {
        let mut out = vec![Ideal::unit()];
        for (p, e) in &self.factors {
            let mut next = Vec::with_capacity(out.len() * (*e as usize + 1));
            for d in &out {
                for k in 0..=*e {
                    next.push(d.mul(&Ideal::prime_power(*p, k)));
                }
            }
            out = next;
        }
        out
    }
}

impl Ord for Ideal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.norm.cmp(&other.norm).then_with(|| self.factors.cmp(&other.factors))
    }
}

impl PartialOrd for Ideal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "O");
        }
        for (i, (p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// `tau O_F = a^2 r` with `r` squarefree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquarefreeDecomposition {
    /// The ideal whose square divides the input.
    pub square_factor: Ideal,
    /// The squarefree remainder.
    pub squarefree: Ideal,
}

impl SquarefreeDecomposition {
    pub fn recombine(&self) -> Ideal {
        self.square_factor.pow(2).mul(&self.squarefree)
    }
}

pub fn squarefree_decompose(ideal: &Ideal) -> SquarefreeDecomposition {
    let halves = ideal.factors.iter().map(|(p, e)| (*p, e / 2)).filter(|(_, e)| *e > 0).collect();
    let odd = ideal.factors.iter().filter(|(_, e)| e % 2 == 1).map(|(p, _)| (*p, 1)).collect();
    SquarefreeDecomposition {
        square_factor: Ideal::from_sorted_factors(halves),
        squarefree: Ideal::from_sorted_factors(odd),
    }
}
