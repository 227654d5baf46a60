//! From integral weight eigenvalue data to exact signs of the half-integral weight
//! coefficients `lambda(tau, a^-1 P) = c(P) - chi(P)/N(P)`, and the prime counts
//! `pi(x)`, `pi_{>0}(x)` behind their densities.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::json;
use thiserror::Error;

use crate::characters::IdealCharacter;
use crate::field_arith::{squarefree_decompose, FieldError, Ideal, PrimeIdeal, QuadField, QuadInt};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("weights must be even, at least 2, one per real place; got {0:?}")]
    InvalidWeight(Vec<u32>),
    #[error("Hasse-type bound violated at {prime}: c = {value}")]
    HasseBoundViolated { prime: String, value: String },
    #[error("no eigenvalue for required prime {0}")]
    MissingPrime(String),
    #[error("eigenvalue data over Q(sqrt {0}) but character over Q(sqrt {1})")]
    FieldMismatch(u64, u64),
    #[error("epsilon must be a positive finite number, got {0}")]
    InvalidEpsilon(f64),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Normalized eigenvalues `c(P, f)` of a primitive form, indexed by prime ideals.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenvalueSeries {
    field: QuadField,
    weight: Vec<u32>,
    label: String,
    entries: BTreeMap<PrimeIdeal, BigRational>,
    bad_primes: BTreeSet<PrimeIdeal>,
}

impl EigenvalueSeries {
    pub fn new(field: QuadField, weight: Vec<u32>, label: impl Into<String>) -> Result<Self, PipelineError> {
        if weight.len() != field.degree() as usize || weight.iter().any(|k| *k < 2 || k % 2 == 1) {
            return Err(PipelineError::InvalidWeight(weight));
        }
        Ok(EigenvalueSeries {
            field,
            weight,
            label: label.into(),
            entries: BTreeMap::new(),
            bad_primes: BTreeSet::new(),
        })
    }

    pub fn field(&self) -> &QuadField {
        &self.field
    }

    pub fn weight(&self) -> &[u32] {
        &self.weight
    }

    pub fn k0(&self) -> u32 {
        *self.weight.iter().max().expect("weight is nonempty")
    }

    /// Always 0 for the forms handled here.
    pub fn omega(&self) -> BigRational {
        BigRational::zero()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Adds `c(P)`, rejecting values with `|B(P)| > 1`, i.e. `c^2 N(P) > 4`.
    pub fn insert(&mut self, p: PrimeIdeal, c: BigRational) -> Result<(), PipelineError> {
        let bound = &c * &c * BigInt::from(p.norm());
        if bound > BigRational::from_integer(4.into()) {
            return Err(PipelineError::HasseBoundViolated { prime: p.to_string(), value: c.to_string() });
        }
        self.entries.insert(p, c);
        Ok(())
    }

    /// Marks a prime of the level (bad reduction); it is excluded from sign counts.
    pub fn mark_bad(&mut self, p: PrimeIdeal) {
        self.bad_primes.insert(p);
    }

    pub fn get(&self, p: &PrimeIdeal) -> Option<&BigRational> {
        self.entries.get(p)
    }

    pub fn entries(&self) -> &BTreeMap<PrimeIdeal, BigRational> {
        &self.entries
    }

    pub fn bad_primes(&self) -> &BTreeSet<PrimeIdeal> {
        &self.bad_primes
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `B(P)` for every good prime with `N(P) <= bound`, in canonical prime order.
    pub fn sato_tate_samples(&self, bound: u64) -> Vec<f64> {
        let k0 = self.k0();
        self.entries
            .iter()
            .filter(|(p, _)| p.norm() <= bound && !self.bad_primes.contains(p))
            .map(|(p, c)| {
                sato_tate_coordinate(&renormalize_c(c, p.norm(), k0), p.norm(), k0)
                    .expect("entries are bound-checked on insert")
            })
            .collect()
    }
}

/// `lambda_P = c(P) N(P)`.
pub fn hecke_eigenvalue(c: &BigRational, norm: u64) -> BigRational {
    c * BigInt::from(norm)
}

/// `C(P) = c(P) N(P)^{k0/2}`.
pub fn renormalize_c(c: &BigRational, norm: u64, k0: u32) -> BigRational {
    c * BigInt::from(norm).pow(k0 / 2)
}

/// `B(P) = C(P) / (2 N(P)^{(k0-1)/2})`, checked exactly to lie in `[-1, 1]`.
pub fn sato_tate_coordinate(big_c: &BigRational, norm: u64, k0: u32) -> Result<f64, PipelineError> {
    let n = BigInt::from(norm);
    // |C| <= 2 N^{(k0-1)/2}  <=>  C^2 <= 4 N^{k0-1}
    if big_c * big_c > BigRational::from_integer(n.pow(k0 - 1) * 4) {
        return Err(PipelineError::HasseBoundViolated {
            prime: format!("norm {norm}"),
            value: big_c.to_string(),
        });
    }
    // B = [C / (2 N^{k0/2 - 1})] / sqrt(N)
    let scaled: BigRational = big_c / (n.pow(k0 / 2 - 1) * 2);
    let b = scaled.to_f64().expect("bounded rational converts") / (norm as f64).sqrt();
    Ok(b.clamp(-1.0, 1.0))
}

/// `lambda(tau, a^-1 P) = c(P) - chi(P)/N(P)`.
pub fn lambda_value(c: &BigRational, chi: i8, norm: u64) -> BigRational {
    c - BigRational::new(BigInt::from(chi), BigInt::from(norm))
}

/// Exact sign of `c - chi/N`.
pub fn lambda_sign(c: &BigRational, chi: i8, norm: u64) -> i8 {
    // sign(c - chi/N) = sign(c.numer * N - chi * c.denom), denominators positive
    let lhs = c.numer() * BigInt::from(norm);
    let rhs = c.denom() * BigInt::from(chi);
    match lhs.cmp(&rhs) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
    }
}

/// Sign counts of `lambda(tau, a^-1 P)` over primes of norm `<= x`.
///
/// `total` counts primes off the bad set (`pos + neg + zero = total`); `excluded`
/// counts bad primes. Densities divide by all primes, `total + excluded`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignTally {
    pub x: u64,
    pub total: u64,
    pub pos: u64,
    pub neg: u64,
    pub zero: u64,
    pub excluded: u64,
    pub tau: Option<QuadInt>,
    pub a_ideal: Ideal,
}

pub const TALLY_CSV_HEADER: &str = "x,total,pos,neg,zero,pos_density,excluded";

impl SignTally {
    /// `pi(x)`: every prime ideal of norm `<= x`.
    pub fn prime_count(&self) -> u64 {
        self.total + self.excluded
    }

    fn density(&self, count: u64) -> BigRational {
        if self.prime_count() == 0 {
            return BigRational::zero();
        }
        BigRational::new(count.into(), self.prime_count().into())
    }

    pub fn pos_density(&self) -> BigRational {
        self.density(self.pos)
    }

    pub fn neg_density(&self) -> BigRational {
        self.density(self.neg)
    }

    pub fn zero_density(&self) -> BigRational {
        self.density(self.zero)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.x,
            self.total,
            self.pos,
            self.neg,
            self.zero,
            format_decimal(&self.pos_density(), 12),
            self.excluded
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "x": self.x,
            "total": self.total,
            "pos": self.pos,
            "neg": self.neg,
            "zero": self.zero,
            "excluded": self.excluded,
            "pos_density": format_decimal(&self.pos_density(), 12),
            "neg_density": format_decimal(&self.neg_density(), 12),
            "zero_density": format_decimal(&self.zero_density(), 12),
            "tau": self.tau.as_ref().map(|t| t.to_string()),
            "a_ideal": self.a_ideal.to_string(),
        })
    }
}

/// Decimal string of `r` rounded half away from zero to `digits` places.
pub fn format_decimal(r: &BigRational, digits: u32) -> String {
    let scale = BigInt::from(10).pow(digits);
    let scaled = r.abs() * BigRational::from_integer(scale.clone());
    let rounded = (scaled + BigRational::new(1.into(), 2.into())).floor().to_integer();
    let (int_part, frac) = rounded.div_rem(&scale);
    let sign = if r.is_negative() && !rounded.is_zero() { "-" } else { "" };
    format!("{sign}{int_part}.{:0>width$}", frac.to_string(), width = digits as usize)
}

#[derive(Clone, Debug)]
enum PrimeStatus {
    Excluded,
    Counted {
        sign: i8,
        c_positive: bool,
        /// `c^2 N(P) = 4 B(P)^2`.
        c_sq_norm: BigRational,
    },
}

/// Per-prime exact sign data, built once and queried for any cutoff `<= x`.
#[derive(Clone, Debug)]
pub struct SignProfile {
    x: u64,
    tau: Option<QuadInt>,
    a_ideal: Ideal,
    records: Vec<(u64, PrimeStatus)>,
}

/// Result of comparing both sides of the epsilon cutoff inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutoffCheck {
    pub x: u64,
    pub epsilon: String,
    /// `pi_{>0}(x) + pi(min(1/(4 eps^2), x))`.
    pub lhs: u64,
    /// `#{P good : N(P) <= x, B(P) > eps}`.
    pub rhs: u64,
    pub holds: bool,
}

impl SignProfile {
    pub fn build(series: &EigenvalueSeries, chi: &IdealCharacter, x: u64) -> Result<Self, PipelineError> {
        if series.field() != chi.field() {
            return Err(PipelineError::FieldMismatch(series.field().d(), chi.field().d()));
        }
        let a_ideal = match chi.tau() {
            Some(t) => squarefree_decompose(&chi.field().factor(t)?).square_factor,
            None => Ideal::unit(),
        };
        let mut records = Vec::new();
        for p in series.field().prime_ideals_up_to(x) {
            if chi.is_bad(&p) || series.bad_primes().contains(&p) {
                records.push((p.norm(), PrimeStatus::Excluded));
                continue;
            }
            let c = series.get(&p).ok_or_else(|| PipelineError::MissingPrime(p.to_string()))?;
            let n = BigInt::from(p.norm());
            records.push((
                p.norm(),
                PrimeStatus::Counted {
                    sign: lambda_sign(c, chi.value(&p), p.norm()),
                    c_positive: c.is_positive(),
                    c_sq_norm: c * c * n,
                },
            ));
        }
        Ok(SignProfile { x, tau: chi.tau().cloned(), a_ideal, records })
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    /// Counts restricted to `N(P) <= x` (capped at the build cutoff).
    pub fn tally(&self, x: u64) -> SignTally {
        let x = x.min(self.x);
        let mut t = SignTally {
            x,
            total: 0,
            pos: 0,
            neg: 0,
            zero: 0,
            excluded: 0,
            tau: self.tau.clone(),
            a_ideal: self.a_ideal.clone(),
        };
        for (_, status) in self.records.iter().take_while(|(n, _)| *n <= x) {
            match status {
                PrimeStatus::Excluded => t.excluded += 1,
                PrimeStatus::Counted { sign, .. } => {
                    t.total += 1;
                    match sign {
                        1 => t.pos += 1,
                        -1 => t.neg += 1,
                        _ => t.zero += 1,
                    }
                }
            }
        }
        t
    }

    /// Both sides of `pi_{>0}(x) + pi(1/(4 eps^2)) >= #{P : N(P) <= x, B(P) > eps}`.
    ///
    /// Only primes of norm `<= x` can enter the right side, so `pi` is evaluated at
    /// `min(1/(4 eps^2), x)`; this is the sharper form and implies the uncapped one.
    pub fn epsilon_cutoff_check(&self, x: u64, epsilon: f64) -> Result<CutoffCheck, PipelineError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(PipelineError::InvalidEpsilon(epsilon));
        }
        let x = x.min(self.x);
        let eps = BigRational::from_float(epsilon).expect("finite float");
        let four_eps_sq = &eps * &eps * BigInt::from(4);
        let small = (four_eps_sq.recip()).floor().to_integer();
        let small = small.to_u64().unwrap_or(u64::MAX).min(x);
        let within = || self.records.iter().take_while(|(n, _)| *n <= x);
        let pi_small = within().filter(|(n, _)| *n <= small).count() as u64;
        let mut pos = 0u64;
        let mut rhs = 0u64;
        for (_, status) in within() {
            if let PrimeStatus::Counted { sign, c_positive, c_sq_norm } = status {
                if *sign == 1 {
                    pos += 1;
                }
                if *c_positive && *c_sq_norm > four_eps_sq {
                    rhs += 1;
                }
            }
        }
        let lhs = pos + pi_small;
        Ok(CutoffCheck { x, epsilon: epsilon.to_string(), lhs, rhs, holds: lhs >= rhs })
    }
}

/// `tally_signs` over all primes of norm `<= x`.
pub fn tally_signs(series: &EigenvalueSeries, chi: &IdealCharacter, x: u64) -> Result<SignTally, PipelineError> {
    Ok(SignProfile::build(series, chi, x)?.tally(x))
}

pub fn epsilon_cutoff_check(
    series: &EigenvalueSeries,
    chi: &IdealCharacter,
    x: u64,
    epsilon: f64,
) -> Result<CutoffCheck, PipelineError> {
    SignProfile::build(series, chi, x)?.epsilon_cutoff_check(x, epsilon)
}
