//! Elliptic curves over `Q` as a source of genuine non-CM eigenvalue data.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::IoError;
use crate::field_arith::{QuadField, Splitting};
use crate::sign_pipeline::EigenvalueSeries;

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub a1: i64,
    pub a2: i64,
    pub a3: i64,
    pub a4: i64,
    pub a6: i64,
    pub label: String,
    /// Metadata only; nothing here depends on it.
    pub cm: bool,
}

const NAMED: &[(&str, [i64; 5], bool)] = &[
    ("11a", [0, -1, 1, -10, -20], false),
    ("37a", [0, 0, 1, -1, 0], false),
    ("43a", [0, 1, 1, 0, 0], false),
    ("53a", [1, -1, 1, 0, 0], false),
    ("389a", [0, 1, 1, -2, 0], false),
    ("5077a", [0, 0, 1, -7, 6], false),
    ("x3+x", [0, 0, 0, 1, 0], true),
];

impl CurveSpec {
    pub fn new(coeffs: [i64; 5], label: impl Into<String>, cm: bool) -> Result<Self, IoError> {
        let [a1, a2, a3, a4, a6] = coeffs;
        let curve = CurveSpec { a1, a2, a3, a4, a6, label: label.into(), cm };
        if curve.discriminant() == BigInt::from(0) {
            return Err(IoError::Validation(format!("curve {} is singular", curve.label)));
        }
        Ok(curve)
    }

    /// One of the built-in curves (`11a`, `37a`, `43a`, `53a`, `389a`, `5077a`, `x3+x`).
    pub fn named(label: &str) -> Option<Self> {
        NAMED
            .iter()
            .find(|(l, _, _)| *l == label)
            .map(|(l, c, cm)| CurveSpec::new(*c, *l, *cm).expect("built-in curves are smooth"))
    }

    pub fn named_labels() -> impl Iterator<Item = &'static str> {
        NAMED.iter().map(|(l, _, _)| *l)
    }

    pub fn coefficients(&self) -> [i64; 5] {
        [self.a1, self.a2, self.a3, self.a4, self.a6]
    }

    /// `(b2, b4, b6, b8)`.
    pub fn b_invariants(&self) -> (BigInt, BigInt, BigInt, BigInt) {
        let [a1, a2, a3, a4, a6] = self.coefficients().map(BigInt::from);
        let b2 = &a1 * &a1 + &a2 * 4;
        let b4 = &a4 * 2 + &a1 * &a3;
        let b6 = &a3 * &a3 + &a6 * 4;
        let b8 = &a1 * &a1 * &a6 + &a2 * &a6 * 4 - &a1 * &a3 * &a4 + &a2 * &a3 * &a3 - &a4 * &a4;
        (b2, b4, b6, b8)
    }

    pub fn discriminant(&self) -> BigInt {
        let (b2, b4, b6, b8) = self.b_invariants();
        -(&b2 * &b2 * &b8) - &b4 * &b4 * &b4 * 8 - &b6 * &b6 * 27 + &b2 * &b4 * &b6 * 9
    }

    /// Good reduction of this model at `p`.
    pub fn is_good(&self, p: u64) -> bool {
        self.discriminant() % BigInt::from(p) != BigInt::from(0)
    }

    fn reduced(&self, p: u64) -> [u64; 5] {
        self.coefficients().map(|a| a.rem_euclid(p as i64) as u64)
    }

    /// `#E(F_p)` by testing every pair `(x, y)`, plus the point at infinity.
    pub fn naive_point_count(&self, p: u64) -> u64 {
        let [a1, a2, a3, a4, a6] = self.reduced(p);
        let mut count = 1;
        for x in 0..p {
            let rhs = (((x * x % p) * x % p) + a2 * (x * x % p) + a4 * x + a6) % p;
            for y in 0..p {
                let lhs = (y * y + a1 * x % p * y + a3 * y) % p;
                if lhs == rhs {
                    count += 1;
                }
            }
        }
        count
    }

    /// `#E(F_p)` for odd `p` from `(2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6`:
    /// each `x` contributes `1 + (f(x)/p)` points.
    pub fn residue_point_count(&self, p: u64) -> u64 {
        assert!(p % 2 == 1, "residue count needs odd p");
        let (p_i, sum) = (p as i64, self.residue_sum(p));
        (p_i + 1 + sum) as u64
    }

    /// `sum_x (f(x)/p)` via a table of squares mod `p`.
    fn residue_sum(&self, p: u64) -> i64 {
        let (b2, b4, b6, _) = self.b_invariants();
        let red = |b: BigInt| {
            let r = b % BigInt::from(p);
            let r: i64 = r.try_into().expect("reduced mod p");
            r.rem_euclid(p as i64) as u64
        };
        let (c2, c1, c0) = (red(b2), red(b4 * 2), red(b6));
        let mut square = vec![false; p as usize];
        for y in 0..p {
            square[(y * y % p) as usize] = true;
        }
        let mut sum = 0i64;
        for x in 0..p {
            let f = (((4 * x + c2) % p * x + c1) % p * x + c0) % p;
            if f != 0 {
                sum += if square[f as usize] { 1 } else { -1 };
            }
        }
        sum
    }

    pub fn point_count(&self, p: u64) -> u64 {
        if p == 2 {
            self.naive_point_count(p)
        } else {
            self.residue_point_count(p)
        }
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{},{},{},{},{}]", self.label, self.a1, self.a2, self.a3, self.a4, self.a6)
    }
}

impl FromStr for CurveSpec {
    type Err = IoError;

    /// A built-in label or `a1,a2,a3,a4,a6`.
    fn from_str(s: &str) -> Result<Self, IoError> {
        if let Some(c) = CurveSpec::named(s) {
            return Ok(c);
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(IoError::Usage(format!(
                "unknown curve {s:?}: use one of {} or a1,a2,a3,a4,a6",
                CurveSpec::named_labels().collect::<Vec<_>>().join(", ")
            )));
        }
        let mut coeffs = [0i64; 5];
        for (c, part) in coeffs.iter_mut().zip(&parts) {
            *c = part.parse().map_err(|_| IoError::Usage(format!("bad coefficient {part:?} in {s:?}")))?;
        }
        CurveSpec::new(coeffs, format!("[{s}]"), false)
    }
}

/// `a_p = p + 1 - #E(F_p)` at a prime `p` of good reduction.
pub fn ap_oracle(curve: &CurveSpec, p: u64) -> Result<i64, IoError> {
    if !curve.is_good(p) {
        return Err(IoError::BadReduction { label: curve.label.clone(), p });
    }
    Ok(p as i64 + 1 - curve.point_count(p) as i64)
}

/// `a_p` for every rational prime `p <= bound`; `None` marks bad reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct ApTable {
    curve: CurveSpec,
    bound: u64,
    values: Vec<(u64, Option<i64>)>,
}

impl ApTable {
    pub fn compute(curve: &CurveSpec, bound: u64) -> Self {
        let primes: Vec<u64> = QuadField::rationals()
            .prime_ideals_up_to(bound)
            .iter()
            .map(|p| p.rational_prime())
            .collect();
        let values = primes
            .into_par_iter()
            .map(|p| (p, ap_oracle(curve, p).ok()))
            .collect();
        ApTable { curve: curve.clone(), bound, values }
    }

    pub fn curve(&self) -> &CurveSpec {
        &self.curve
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn values(&self) -> &[(u64, Option<i64>)] {
        &self.values
    }

    pub fn get(&self, p: u64) -> Option<i64> {
        self.values
            .binary_search_by_key(&p, |(q, _)| *q)
            .ok()
            .and_then(|i| self.values[i].1)
    }

    /// The base change of the curve to `field`, as weight-2 eigenvalues
    /// `c(P) = a_P / N(P)` over primes of norm `<= bound`.
    ///
    /// `a_P = a_p` for degree-one `P` and `a_P = a_p^2 - 2p` for inert `P`.
    pub fn series_over(&self, field: QuadField, bound: u64) -> Result<EigenvalueSeries, IoError> {
        let label = if field.is_rational() {
            self.curve.label.clone()
        } else {
            format!("{}/Q(sqrt {})", self.curve.label, field.d())
        };
        let mut series = EigenvalueSeries::new(field, vec![2; field.degree() as usize], label)?;
        for prime in field.prime_ideals_up_to(bound) {
            let p = prime.rational_prime();
            if p > self.bound {
                return Err(IoError::Usage(format!("a_p table stops at {}, need {p}", self.bound)));
            }
            let Some(ap) = self.get(p) else {
                series.mark_bad(prime);
                continue;
            };
            let a = match prime.splitting() {
                Splitting::Inert => ap * ap - 2 * p as i64,
                _ => ap,
            };
            let c = BigRational::new(a.into(), prime.norm().into());
            series.insert(prime, c)?;
        }
        Ok(series)
    }

    pub fn series(&self) -> Result<EigenvalueSeries, IoError> {
        self.series_over(QuadField::rationals(), self.bound)
    }
}

/// Weight-2 eigenvalues `c(p) = a_p / p` of the curve for `p <= bound`.
pub fn series_from_curve(curve: &CurveSpec, bound: u64) -> Result<EigenvalueSeries, IoError> {
    ApTable::compute(curve, bound).series()
}

/// Like [`series_from_curve`], for the base change to `field`.
pub fn series_from_curve_over(
    curve: &CurveSpec,
    field: QuadField,
    bound: u64,
) -> Result<EigenvalueSeries, IoError> {
    ApTable::compute(curve, bound).series_over(field, bound)
}
