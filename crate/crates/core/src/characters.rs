//! The quadratic character of `F(sqrt tau)/F`, an optional finite-table quadratic
//! character `psi`, and their product as a completely multiplicative ideal character.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field_arith::{FieldError, Ideal, PrimeIdeal, QuadField, QuadInt};

#[derive(Debug, Error)]
pub enum CharacterError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("psi value at {prime} must be +1 or -1, got {value}")]
    InvalidPsiValue { prime: String, value: i64 },
    #[error("psi table parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

/// `epsilon_tau(P)`: +1 if `tau` is a nonzero square mod `P`, -1 if not, 0 if `P | tau`.
pub fn epsilon_tau(tau: &QuadInt, prime: &PrimeIdeal) -> Result<i8, FieldError> {
    prime.residue_symbol(tau)
}

/// One row of a psi table document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiEntry {
    pub prime_norm: u64,
    pub rational_prime: u64,
    pub root_label: u8,
    pub value: i64,
}

/// `(psi * epsilon_tau)^*` restricted to ideals prime to a finite bad set.
///
/// The bad set always contains every prime above 2 and above the field
/// discriminant, and every prime dividing `tau`. Level primes can be added.
#[derive(Clone, Debug)]
pub struct IdealCharacter {
    field: QuadField,
    tau: Option<QuadInt>,
    psi: BTreeMap<PrimeIdeal, i8>,
    bad_rational: BTreeSet<u64>,
    bad_primes: BTreeSet<PrimeIdeal>,
}

impl IdealCharacter {
    /// The character `psi * epsilon_tau` with trivial `psi`; `None` means `epsilon` is trivial too.
    pub fn new(field: QuadField, tau: Option<QuadInt>) -> Result<Self, FieldError> {
        let mut bad_rational = BTreeSet::from([2u64]);
        let mut disc = field.disc();
        let mut p = 2;
        while disc > 1 {
            if disc.is_multiple_of(p) {
                bad_rational.insert(p);
                disc /= p;
            } else {
                p += 1;
            }
        }
        let bad_primes = match &tau {
            Some(t) => field.factor(t)?.factors().iter().map(|(q, _)| *q).collect(),
            None => BTreeSet::new(),
        };
        Ok(IdealCharacter { field, tau, psi: BTreeMap::new(), bad_rational, bad_primes })
    }

    pub fn trivial(field: QuadField) -> Self {
        Self::new(field, None).expect("no element to factor")
    }

    /// Sets `psi(P)` for each listed prime; unlisted primes take `psi = +1`.
    pub fn with_psi(mut self, table: impl IntoIterator<Item = (PrimeIdeal, i8)>) -> Self {
        for (p, v) in table {
            self.psi.insert(p, v.signum());
        }
        self
    }

    /// Adds every prime above the given rational primes (e.g. the level) to the bad set.
    pub fn with_bad_rational_primes(mut self, primes: impl IntoIterator<Item = u64>) -> Self {
        self.bad_rational.extend(primes);
        self
    }

    pub fn with_bad_primes(mut self, primes: impl IntoIterator<Item = PrimeIdeal>) -> Self {
        self.bad_primes.extend(primes);
        self
    }

    /// Reads a psi table (a JSON list of [`PsiEntry`]) and resolves it against `field`.
    pub fn psi_table_from_json(
        field: &QuadField,
        json: &str,
    ) -> Result<Vec<(PrimeIdeal, i8)>, CharacterError> {
        let entries: Vec<PsiEntry> = serde_json::from_str(json)?;
        entries
            .into_iter()
            .map(|e| {
                let p = field.prime_ideal(e.rational_prime, e.prime_norm, e.root_label)?;
                match e.value {
                    1 | -1 => Ok((p, e.value as i8)),
                    v => Err(CharacterError::InvalidPsiValue { prime: p.to_string(), value: v }),
                }
            })
            .collect()
    }

    pub fn psi_table_to_json(table: &[(PrimeIdeal, i8)]) -> String {
        let entries: Vec<PsiEntry> = table
            .iter()
            .map(|(p, v)| PsiEntry {
                prime_norm: p.norm(),
                rational_prime: p.rational_prime(),
                root_label: p.root_label(),
                value: *v as i64,
            })
            .collect();
        serde_json::to_string_pretty(&entries).expect("plain data serializes")
    }

    pub fn field(&self) -> &QuadField {
        &self.field
    }

    pub fn tau(&self) -> Option<&QuadInt> {
        self.tau.as_ref()
    }

    pub fn is_bad(&self, p: &PrimeIdeal) -> bool {
        self.bad_rational.contains(&p.rational_prime()) || self.bad_primes.contains(p)
    }

    /// Rational primes below the bad set that are listed explicitly.
    pub fn bad_rational_primes(&self) -> &BTreeSet<u64> {
        &self.bad_rational
    }

    /// Value at a prime: 0 on the bad set, otherwise `psi(P) * epsilon_tau(P)`.
    pub fn value(&self, p: &PrimeIdeal) -> i8 {
        if self.is_bad(p) {
            return 0;
        }
        let psi = self.psi.get(p).copied().unwrap_or(1);
        let eps = match &self.tau {
            // Off the bad set P is odd and prime to tau, so this is never an error or 0.
            Some(t) => epsilon_tau(t, p).expect("bad set excludes even characteristic"),
            None => 1,
        };
        psi * eps
    }

    /// `induced_value`: the completely multiplicative extension to integral ideals.
    pub fn induced_value(&self, m: &Ideal) -> i8 {
        m.factors().iter().fold(1i8, |acc, (p, e)| {
            let v = self.value(p);
            if v == 0 {
                0
            } else if v == -1 && e % 2 == 1 {
                -acc
            } else {
                acc
            }
        })
    }
}
