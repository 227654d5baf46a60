//! Ring structure of truncated ideal series and the Euler product relation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use shimura_signs::formal_series::{
    c_series_from_lambda, euler_factor_inverse, euler_parameter, euler_product, euler_product_inverse,
    extract_prime_relation, series_mul,
};
use shimura_signs::{FormalSeries, Ideal, IdealCharacter, QuadField, QuadInt};

const X: u64 = 100;

fn field() -> QuadField {
    QuadField::new(5).unwrap()
}

/// One optional small rational per ideal of norm `<= X`, in canonical order.
fn coeffs() -> impl Strategy<Value = Vec<Option<(i64, i64)>>> {
    let n = field().ideals_up_to(X).len();
    prop::collection::vec(prop::option::weighted(0.6, (-6i64..=6, 1i64..=5)), n)
}

fn build(values: &[Option<(i64, i64)>]) -> FormalSeries {
    let k = field();
    let mut s = FormalSeries::zero(k, X);
    for (m, v) in k.ideals_up_to(X).into_iter().zip(values) {
        if let Some((n, d)) = v {
            s.set(m, BigRational::new(BigInt::from(*n), BigInt::from(*d))).unwrap();
        }
    }
    s
}

fn tau() -> impl Strategy<Value = QuadInt> {
    (1i64..60, -20i64..20)
        .prop_map(|(x, y)| QuadInt::new(x.into(), y.into()))
        .prop_filter("totally positive", |t| t.is_totally_positive(&field()))
}

/// Convolution written out over divisor pairs, independent of the library's product.
fn naive_mul(a: &FormalSeries, b: &FormalSeries) -> FormalSeries {
    let mut out = FormalSeries::zero(*a.field(), a.cutoff());
    for m in a.field().ideals_up_to(a.cutoff()) {
        let mut acc = BigRational::zero();
        for d in m.divisors() {
            let cofactor = Ideal::from_factors(m.factors().iter().map(|(p, e)| (*p, e - d.exponent(p))).collect());
            acc += a.coeff(&d) * b.coeff(&cofactor);
        }
        out.set(m, acc).unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn commutative_with_identity(a in coeffs(), b in coeffs()) {
        let (a, b) = (build(&a), build(&b));
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&FormalSeries::identity(field(), X)).unwrap(), a.clone());
        prop_assert_eq!(series_mul(&a, &b).unwrap(), naive_mul(&a, &b));
    }

    #[test]
    fn associative(a in coeffs(), b in coeffs(), c in coeffs()) {
        let (a, b, c) = (build(&a), build(&b), build(&c));
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn prime_coefficients_compare_exactly(values in coeffs(), t in tau()) {
        let k = field();
        let mut lambda = build(&values);
        lambda.set(Ideal::unit(), BigRational::one()).unwrap();
        let chi = IdealCharacter::new(k, Some(t)).unwrap();
        let c = c_series_from_lambda(&lambda, &chi).unwrap();
        prop_assert_eq!(c.mul(&euler_product_inverse(&chi, X)).unwrap(), lambda.clone());
        for p in k.prime_ideals_up_to(X) {
            prop_assert!(extract_prime_relation(&c, &lambda, &chi, &p).unwrap().is_zero());
            let m = Ideal::prime(p);
            let pairs = lambda.contributions(&euler_product(&chi, X), &m);
            prop_assert!(pairs.len() <= 2);
            for (a, b) in pairs {
                prop_assert!((a.is_unit() && b == m) || (a == m && b.is_unit()));
            }
        }
    }
}

#[test]
fn euler_product_matches_factorwise_product() {
    let k = field();
    let chi = IdealCharacter::new(k, Some(QuadInt::new(2.into(), 1.into()))).unwrap();
    let cutoff = 400;
    let mut product = FormalSeries::identity(k, cutoff);
    for p in k.prime_ideals_up_to(cutoff) {
        product = product.mul(&euler_factor_inverse(k, p, &euler_parameter(&chi, &p), cutoff)).unwrap();
    }
    assert_eq!(product, euler_product(&chi, cutoff));
    let identity = product.mul(&euler_product_inverse(&chi, cutoff)).unwrap();
    assert_eq!(identity, FormalSeries::identity(k, cutoff));
}

#[test]
fn series_json_round_trip_is_stable() {
    let k = field();
    let chi = IdealCharacter::new(k, Some(QuadInt::integer(3))).unwrap();
    let s = euler_product_inverse(&chi, 300);
    let text = s.to_json();
    let back = FormalSeries::from_json(k, 300, &text).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.to_json(), text);
}
