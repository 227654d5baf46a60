use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ideal::Ideal;
use super::{FieldError, QuadField};

/// An algebraic integer `x + y w` in the integral basis `{1, w}`.
///
/// The field is implied by context; over `Q` the second coordinate is zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadInt {
    x: BigInt,
    y: BigInt,
}

impl QuadInt {
    pub fn new(x: BigInt, y: BigInt) -> Self {
        QuadInt { x, y }
    }

    pub fn integer(n: i64) -> Self {
        QuadInt { x: n.into(), y: BigInt::zero() }
    }

    pub fn x(&self) -> &BigInt {
        &self.x
    }

    pub fn y(&self) -> &BigInt {
        &self.y
    }

    pub(crate) fn from_rational_coords(
        field: &QuadField,
        a: &BigRational,
        b: &BigRational,
    ) -> Result<Self, FieldError> {
        let describe = || format!("{a} + {b}*sqrt({})", field.d());
        if field.is_rational() {
            if !b.is_zero() || !a.is_integer() {
                return Err(FieldError::NotIntegral(describe()));
            }
            return Ok(QuadInt { x: a.to_integer(), y: BigInt::zero() });
        }
        if field.half_integral_basis() {
            // a + b sqrt d = (a - b) + 2b w
            let y = b * BigInt::from(2);
            let x = a - b;
            if !x.is_integer() || !y.is_integer() {
                return Err(FieldError::NotIntegral(describe()));
            }
            Ok(QuadInt { x: x.to_integer(), y: y.to_integer() })
        } else {
            if !a.is_integer() || !b.is_integer() {
                return Err(FieldError::NotIntegral(describe()));
            }
            Ok(QuadInt { x: a.to_integer(), y: b.to_integer() })
        }
    }

    /// `N_{F/Q}` of the element.
    pub fn norm(&self, field: &QuadField) -> BigInt {
        if field.is_rational() {
            return self.x.clone();
        }
        let (trace, constant) = field.generator_relation();
        // (x + y w)(x + y w') with w + w' = trace, w w' = -constant
        &self.x * &self.x + &self.x * &self.y * trace - &self.y * &self.y * constant
    }

    pub fn is_totally_positive(&self, field: &QuadField) -> bool {
        if field.is_rational() {
            return self.x.is_positive();
        }
        // Rational part a = x + y*trace/2; both embeddings are positive iff a > 0 and N > 0.
        let (trace, _) = field.generator_relation();
        let twice_rational_part: BigInt = &self.x * 2 + &self.y * trace;
        twice_rational_part.is_positive() && self.norm(field).is_positive()
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y.is_zero() {
            write!(f, "{}", self.x)
        } else {
            write!(f, "{} + {}w", self.x, self.y)
        }
    }
}

fn valuation(n: &BigInt, p: u64) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

pub(super) fn factor_principal(field: &QuadField, tau: &QuadInt) -> Result<Ideal, FieldError> {
    if !tau.is_totally_positive(field) {
        return Err(FieldError::NotTotallyPositive(tau.to_string()));
    }
    let norm = tau.norm(field).abs();
    let norm_u64 = norm
        .to_u64()
        .ok_or_else(|| FieldError::NormTooLarge(norm.to_string()))?;
    let mut factors = Vec::new();
    for (p, e) in num_prime::nt_funcs::factorize64(norm_u64) {
        let e = e as u32;
        let above = field.split_rational_prime(p)?;
        match above.as_slice() {
            [q] if q.residue_degree() == 2 => factors.push((*q, e / 2)),
            [q] => factors.push((*q, e)),
            [q1, q2] => {
                // Content p^k is shared by both primes; the cofactor lies in at most one of them.
                let k = valuation(&tau.x, p).min(valuation(&tau.y, p));
                let pk = BigInt::from(p).pow(k);
                let rest = QuadInt { x: &tau.x / &pk, y: &tau.y / &pk };
                let extra = e - 2 * k;
                let (e1, e2) = if extra == 0 {
                    (k, k)
                } else if q1.contains(&rest) {
                    (k + extra, k)
                } else {
                    debug_assert!(q2.contains(&rest));
                    (k, k + extra)
                };
                if e1 > 0 {
                    factors.push((*q1, e1));
                }
                if e2 > 0 {
                    factors.push((*q2, e2));
                }
            }
            _ => unreachable!(),
        }
    }
    let ideal = Ideal::from_factors(factors);
    debug_assert_eq!(BigInt::from(ideal.norm()), norm);
    Ok(ideal)
}

impl QuadInt {
    pub fn one() -> Self {
        QuadInt { x: BigInt::one(), y: BigInt::zero() }
    }

    pub fn mul(&self, other: &QuadInt, field: &QuadField) -> QuadInt {
        let (trace, constant) = field.generator_relation();
        let yy = &self.y * &other.y;
        QuadInt {
            x: &self.x * &other.x + &yy * constant,
            y: &self.x * &other.y + &self.y * &other.x + &yy * trace,
        }
    }
}
