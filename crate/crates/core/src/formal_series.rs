//! Truncated formal series `sum a_m M(m)` over integral ideals with `N(m) <= X`.
//!
//! The symbols satisfy `M(O_F) = 1` and `M(ab) = M(a) M(b)`, so multiplication is the
//! Dirichlet convolution on ideals. Products with norm above the cutoff are dropped;
//! with a fixed cutoff this truncation is compatible with associativity.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characters::IdealCharacter;
use crate::field_arith::{FieldError, Ideal, PrimeIdeal, QuadField};

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(u64, u64),
    #[error("field mismatch: Q(sqrt {0}) vs Q(sqrt {1})")]
    FieldMismatch(u64, u64),
    #[error("series is not normalized: coefficient of M(O_F) is {0}")]
    NotNormalized(String),
    #[error("ideal of norm {norm} exceeds cutoff {cutoff}")]
    BeyondCutoff { norm: u128, cutoff: u64 },
    #[error("bad series document: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries {
    field: QuadField,
    cutoff: u64,
    coeffs: BTreeMap<Ideal, BigRational>,
}

impl FormalSeries {
    pub fn zero(field: QuadField, cutoff: u64) -> Self {
        FormalSeries { field, cutoff, coeffs: BTreeMap::new() }
    }

    /// The series `M(O_F)`.
    pub fn identity(field: QuadField, cutoff: u64) -> Self {
        Self::monomial(field, cutoff, Ideal::unit(), BigRational::one())
    }

    /// `coeff * M(ideal)`, or zero when the ideal lies beyond the cutoff.
    pub fn monomial(field: QuadField, cutoff: u64, ideal: Ideal, coeff: BigRational) -> Self {
        let mut s = Self::zero(field, cutoff);
        if ideal.norm() <= cutoff as u128 && !coeff.is_zero() {
            s.coeffs.insert(ideal, coeff);
        }
        s
    }

    pub fn field(&self) -> &QuadField {
        &self.field
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero terms in canonical ideal order.
    pub fn terms(&self) -> impl Iterator<Item = (&Ideal, &BigRational)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, m: &Ideal) -> BigRational {
        self.coeffs.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn set(&mut self, m: Ideal, value: BigRational) -> Result<(), SeriesError> {
        if m.norm() > self.cutoff as u128 {
            return Err(SeriesError::BeyondCutoff { norm: m.norm(), cutoff: self.cutoff });
        }
        if value.is_zero() {
            self.coeffs.remove(&m);
        } else {
            self.coeffs.insert(m, value);
        }
        Ok(())
    }

    fn check_compatible(&self, other: &FormalSeries) -> Result<(), SeriesError> {
        if self.field != other.field {
            return Err(SeriesError::FieldMismatch(self.field.d(), other.field.d()));
        }
        if self.cutoff != other.cutoff {
            return Err(SeriesError::CutoffMismatch(self.cutoff, other.cutoff));
        }
        Ok(())
    }

    /// `series_mul`: the truncated Cauchy product on ideal indices.
    pub fn mul(&self, other: &FormalSeries) -> Result<FormalSeries, SeriesError> {
        self.check_compatible(other)?;
        let cutoff = self.cutoff as u128;
        let right: Vec<(&Ideal, &BigRational)> = other.coeffs.iter().collect();
        let left: Vec<(&Ideal, &BigRational)> = self.coeffs.iter().collect();
        // Exact arithmetic: the merge order cannot change the result.
        let acc = left
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<Ideal, BigRational>, (ia, ca)| {
                let bound = cutoff / ia.norm();
                // `right` is sorted by norm, so the admissible partners form a prefix.
                for (ib, cb) in right.iter().take_while(|(ib, _)| ib.norm() <= bound) {
                    let prod = *ca * *cb;
                    match acc.get_mut(&ia.mul(ib)) {
                        Some(v) => *v += prod,
                        None => {
                            acc.insert(ia.mul(ib), prod);
                        }
                    }
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    match a.get_mut(&k) {
                        Some(x) => *x += v,
                        None => {
                            a.insert(k, v);
                        }
                    }
                }
                a
            });
        let coeffs = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Ok(FormalSeries { field: self.field, cutoff: self.cutoff, coeffs })
    }

    /// Pairs `(a, b)` of support ideals with `ab = m`, i.e. the terms feeding the
    /// coefficient of `M(m)` in `self * other`.
    pub fn contributions(&self, other: &FormalSeries, m: &Ideal) -> Vec<(Ideal, Ideal)> {
        let mut out: Vec<(Ideal, Ideal)> = m
            .divisors()
            .into_iter()
            .filter_map(|a| {
                let b = cofactor(m, &a);
                (self.coeffs.contains_key(&a) && other.coeffs.contains_key(&b)).then_some((a, b))
            })
            .collect();
        out.sort();
        out
    }

    /// JSON list of `{ideal: [[norm, p, root_label, exp], ...], value: "num/den"}`.
    pub fn to_json(&self) -> String {
        let terms: Vec<SeriesTerm> = self
            .coeffs
            .iter()
            .map(|(m, v)| SeriesTerm {
                ideal: m
                    .factors()
                    .iter()
                    .map(|(p, e)| [p.norm(), p.rational_prime(), p.root_label() as u64, *e as u64])
                    .collect(),
                value: format!("{}/{}", v.numer(), v.denom()),
            })
            .collect();
        serde_json::to_string(&terms).expect("plain data serializes")
    }

    pub fn from_json(field: QuadField, cutoff: u64, json: &str) -> Result<Self, SeriesError> {
        let terms: Vec<SeriesTerm> =
            serde_json::from_str(json).map_err(|e| SeriesError::Parse(e.to_string()))?;
        let mut s = Self::zero(field, cutoff);
        for t in terms {
            let mut factors = Vec::with_capacity(t.ideal.len());
            for [norm, p, label, e] in t.ideal {
                let label = u8::try_from(label).map_err(|_| SeriesError::Parse(format!("root label {label}")))?;
                let e = u32::try_from(e).map_err(|_| SeriesError::Parse(format!("exponent {e}")))?;
                factors.push((field.prime_ideal(p, norm, label)?, e));
            }
            let value = BigRational::from_str(&t.value)
                .map_err(|e| SeriesError::Parse(format!("value {:?}: {e}", t.value)))?;
            s.set(Ideal::from_factors(factors), value)?;
        }
        Ok(s)
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesTerm {
    ideal: Vec<[u64; 4]>,
    value: String,
}

fn cofactor(m: &Ideal, a: &Ideal) -> Ideal {
    Ideal::from_factors(m.factors().iter().map(|(p, e)| (*p, e - a.exponent(p))).collect())
}

/// `series_mul` as a free function.
pub fn series_mul(a: &FormalSeries, b: &FormalSeries) -> Result<FormalSeries, SeriesError> {
    a.mul(b)
}

fn prime_term(field: QuadField, cutoff: u64, p: PrimeIdeal, k: u32, u: &BigRational) -> FormalSeries {
    FormalSeries::monomial(field, cutoff, Ideal::prime_power(p, k), u.pow(k as i32))
}

/// `(1 - u M(P))^-1` truncated: `sum_{N(P)^k <= X} u^k M(P^k)`.
pub fn euler_factor_inverse(
    field: QuadField,
    p: PrimeIdeal,
    u: &BigRational,
    cutoff: u64,
) -> FormalSeries {
    let mut s = FormalSeries::identity(field, cutoff);
    if u.is_zero() {
        return s;
    }
    let mut k = 1u32;
    let mut norm = p.norm() as u128;
    while norm <= cutoff as u128 {
        let t = prime_term(field, cutoff, p, k, u);
        s.coeffs.extend(t.coeffs);
        k += 1;
        norm *= p.norm() as u128;
    }
    s
}

/// The binomial `1 - u M(P)`.
pub fn euler_factor(field: QuadField, p: PrimeIdeal, u: &BigRational, cutoff: u64) -> FormalSeries {
    let mut s = FormalSeries::identity(field, cutoff);
    let t = prime_term(field, cutoff, p, 1, &-u.clone());
    s.coeffs.extend(t.coeffs);
    s
}

/// `chi(P)/N(P)`, the Euler-factor parameter at `P`.
pub fn euler_parameter(chi: &IdealCharacter, p: &PrimeIdeal) -> BigRational {
    BigRational::new(BigInt::from(chi.value(p)), BigInt::from(p.norm()))
}

/// `prod_P (1 - chi(P)/N(P) M(P))^-1` up to the cutoff.
///
/// Expanded directly: the coefficient of `M(m)` is `chi(m)/N(m)`, the product being
/// completely multiplicative.
pub fn euler_product(chi: &IdealCharacter, cutoff: u64) -> FormalSeries {
    let field = *chi.field();
    let mut s = FormalSeries::zero(field, cutoff);
    for m in field.ideals_up_to(cutoff) {
        let v = chi.induced_value(&m);
        if v != 0 {
            s.coeffs.insert(m.clone(), BigRational::new(v.into(), BigInt::from(m.norm())));
        }
    }
    s
}

/// `prod_P (1 - chi(P)/N(P) M(P))` up to the cutoff: supported on squarefree ideals,
/// with coefficient `(-1)^omega(m) chi(m)/N(m)`.
pub fn euler_product_inverse(chi: &IdealCharacter, cutoff: u64) -> FormalSeries {
    let field = *chi.field();
    let mut s = FormalSeries::zero(field, cutoff);
    for m in field.ideals_up_to(cutoff).into_iter().filter(Ideal::is_squarefree) {
        let v = chi.induced_value(&m) as i64;
        if v != 0 {
            let sign = if m.factors().len() % 2 == 0 { v } else { -v };
            s.coeffs.insert(m.clone(), BigRational::new(sign.into(), BigInt::from(m.norm())));
        }
    }
    s
}

/// The coefficients `c(m, f_tau)` of the lift: `lambda * prod_P (1 - chi(P)/N(P) M(P))^-1`.
pub fn c_series_from_lambda(
    lambda: &FormalSeries,
    chi: &IdealCharacter,
) -> Result<FormalSeries, SeriesError> {
    if lambda.field() != chi.field() {
        return Err(SeriesError::FieldMismatch(lambda.field().d(), chi.field().d()));
    }
    lambda.mul(&euler_product(chi, lambda.cutoff()))
}

/// `c(P) - chi(P)/N(P) - lambda(P)`; zero exactly when the prime relation holds at `P`.
pub fn extract_prime_relation(
    c: &FormalSeries,
    lambda: &FormalSeries,
    chi: &IdealCharacter,
    p: &PrimeIdeal,
) -> Result<BigRational, SeriesError> {
    c.check_compatible(lambda)?;
    let lead = c.coeff(&Ideal::unit());
    if !lead.is_one() {
        return Err(SeriesError::NotNormalized(lead.to_string()));
    }
    if p.norm() > c.cutoff() {
        return Err(SeriesError::BeyondCutoff { norm: p.norm() as u128, cutoff: c.cutoff() });
    }
    let m = Ideal::prime(*p);
    Ok(c.coeff(&m) - euler_parameter(chi, p) - lambda.coeff(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_arith::QuadInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn qprime(p: u64) -> PrimeIdeal {
        QuadField::rationals().split_rational_prime(p).unwrap()[0]
    }

    #[test]
    fn monomials_multiply() {
        let k = QuadField::new(5).unwrap();
        let ps = k.prime_ideals_up_to(20);
        let a = Ideal::prime(ps[0]);
        let b = Ideal::prime(ps[3]);
        let sa = FormalSeries::monomial(k, 100, a.clone(), BigRational::one());
        let sb = FormalSeries::monomial(k, 100, b.clone(), BigRational::one());
        let prod = sa.mul(&sb).unwrap();
        assert_eq!(prod.len(), 1);
        assert_eq!(prod.coeff(&a.mul(&b)), BigRational::one());
        assert_eq!(FormalSeries::identity(k, 100).mul(&sa).unwrap(), sa);
    }

    #[test]
    fn truncation_drops_large_products() {
        let q = QuadField::rationals();
        let s = FormalSeries::monomial(q, 10, Ideal::prime(qprime(7)), BigRational::one());
        assert!(s.mul(&s).unwrap().is_empty());
        assert!(FormalSeries::monomial(q, 10, Ideal::prime(qprime(11)), BigRational::one()).is_empty());
    }

    #[test]
    fn geometric_factor_examples() {
        let q = QuadField::rationals();
        let p3 = qprime(3);
        let s = euler_factor_inverse(q, p3, &rat(1, 3), 10);
        let terms: Vec<(u128, BigRational)> = s.terms().map(|(m, v)| (m.norm(), v.clone())).collect();
        assert_eq!(terms, vec![(1, rat(1, 1)), (3, rat(1, 3)), (9, rat(1, 9))]);
        assert_eq!(euler_factor_inverse(q, p3, &rat(0, 1), 10), FormalSeries::identity(q, 10));
        let back = s.mul(&euler_factor(q, p3, &rat(1, 3), 10)).unwrap();
        assert_eq!(back, FormalSeries::identity(q, 10));
    }

    #[test]
    fn telescoping_in_quadratic_field() {
        let k = QuadField::new(5).unwrap();
        for p in k.prime_ideals_up_to(30) {
            let u = rat(-3, 7);
            let inv = euler_factor_inverse(k, p, &u, 1000);
            let back = euler_factor(k, p, &u, 1000).mul(&inv).unwrap();
            assert_eq!(back, FormalSeries::identity(k, 1000), "{p}");
        }
    }

    #[test]
    fn errors_on_mismatch() {
        let q = QuadField::rationals();
        let k = QuadField::new(5).unwrap();
        let a = FormalSeries::identity(q, 10);
        assert_eq!(a.mul(&FormalSeries::identity(q, 11)), Err(SeriesError::CutoffMismatch(10, 11)));
        assert_eq!(a.mul(&FormalSeries::identity(k, 10)), Err(SeriesError::FieldMismatch(1, 5)));
        let mut z = FormalSeries::zero(q, 10);
        assert!(matches!(z.set(Ideal::prime(qprime(11)), rat(1, 1)), Err(SeriesError::BeyondCutoff { .. })));
    }

    #[test]
    fn lambda_identity_gives_character_over_norm() {
        let q = QuadField::rationals();
        let chi = IdealCharacter::new(q, Some(QuadInt::integer(5))).unwrap();
        let lambda = FormalSeries::identity(q, 50);
        let c = c_series_from_lambda(&lambda, &chi).unwrap();
        for p in q.prime_ideals_up_to(50) {
            assert_eq!(c.coeff(&Ideal::prime(p)), euler_parameter(&chi, &p));
        }
    }

    #[test]
    fn all_bad_character_is_identity_product() {
        let q = QuadField::rationals();
        let chi = IdealCharacter::trivial(q).with_bad_rational_primes(q.prime_ideals_up_to(30).iter().map(|p| p.rational_prime()));
        let mut lambda = FormalSeries::identity(q, 30);
        lambda.set(Ideal::prime(qprime(3)), rat(2, 5)).unwrap();
        lambda.set(Ideal::prime(qprime(2)).pow(2), rat(-1, 5)).unwrap();
        assert_eq!(c_series_from_lambda(&lambda, &chi).unwrap(), lambda);
    }

    #[test]
    fn prime_relation_examples() {
        let q = QuadField::rationals();
        let chi = IdealCharacter::new(q, Some(QuadInt::integer(5))).unwrap();
        let p11 = qprime(11);
        assert_eq!(chi.value(&p11), 1);
        let mut c = FormalSeries::identity(q, 20);
        c.set(Ideal::prime(p11), rat(3, 11)).unwrap();
        let mut lambda = FormalSeries::identity(q, 20);
        lambda.set(Ideal::prime(p11), rat(2, 11)).unwrap();
        assert_eq!(extract_prime_relation(&c, &lambda, &chi, &p11).unwrap(), rat(0, 1));

        let mut unnormalized = c.clone();
        unnormalized.set(Ideal::unit(), rat(2, 1)).unwrap();
        assert!(matches!(
            extract_prime_relation(&unnormalized, &lambda, &chi, &p11),
            Err(SeriesError::NotNormalized(_))
        ));
        assert!(matches!(
            extract_prime_relation(&c, &lambda, &chi, &qprime(23)),
            Err(SeriesError::BeyondCutoff { .. })
        ));
    }

    #[test]
    fn prime_square_relation() {
        let k = QuadField::new(5).unwrap();
        let chi = IdealCharacter::new(k, Some(QuadInt::integer(2))).unwrap();
        let mut lambda = FormalSeries::identity(k, 500);
        for (i, p) in k.prime_ideals_up_to(22).into_iter().enumerate() {
            lambda.set(Ideal::prime(p), rat(i as i64 - 3, 7)).unwrap();
            lambda.set(Ideal::prime_power(p, 2), rat(5 - i as i64, 3)).unwrap();
        }
        let c = c_series_from_lambda(&lambda, &chi).unwrap();
        for p in k.prime_ideals_up_to(22) {
            let u = euler_parameter(&chi, &p);
            let p1 = Ideal::prime(p);
            let p2 = Ideal::prime_power(p, 2);
            assert_eq!(c.coeff(&p2) - &u * c.coeff(&p1), lambda.coeff(&p2), "{p}");
        }
    }

    #[test]
    fn json_round_trip() {
        let k = QuadField::new(5).unwrap();
        let chi = IdealCharacter::new(k, Some(QuadInt::integer(2))).unwrap();
        let s = euler_product(&chi, 60);
        let json = s.to_json();
        assert!(json.contains("\"value\":\"1/1\""));
        assert_eq!(FormalSeries::from_json(k, 60, &json).unwrap(), s);
        assert!(FormalSeries::from_json(k, 60, "[{\"ideal\":[],\"value\":\"x\"}]").is_err());
    }
}
