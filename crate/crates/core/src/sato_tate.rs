//! The Sato–Tate (semicircle) measure `(2/pi) sqrt(1 - t^2) dt` on `[-1, 1]`:
//! closed-form masses, Kolmogorov–Smirnov testing, and seeded synthetic data.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::field_arith::QuadField;
use crate::sign_pipeline::{EigenvalueSeries, PipelineError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("Kolmogorov-Smirnov statistic needs at least one sample")]
    EmptySample,
}

/// `sqrt(-ln(alpha/2)/2)` rounded to the conventional 1.63 at `alpha = 0.01`.
pub const KS_DEFAULT_COEFFICIENT: f64 = 1.63;

/// Samples quantized onto this grid when converted to exact rationals.
pub const QUANTIZATION_DENOMINATOR: i64 = 1_000_000_000_000;

pub fn semicircle_density(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        2.0 / PI * (1.0 - t * t).sqrt()
    }
}

/// `(1/pi)(arcsin t + t sqrt(1 - t^2))`, odd, equal to `F(t) - 1/2`.
fn centered_antiderivative(t: f64) -> f64 {
    let t = t.clamp(-1.0, 1.0);
    (t.asin() + t * (1.0 - t * t).sqrt()) / PI
}

/// `mu([a, b])`, with both endpoints clamped to `[-1, 1]`; reversed endpoints give
/// the negated mass.
pub fn semicircle_mass(a: f64, b: f64) -> f64 {
    centered_antiderivative(b) - centered_antiderivative(a)
}

pub fn semicircle_cdf(t: f64) -> f64 {
    0.5 + centered_antiderivative(t)
}

/// Solves `F(t) = u` by Newton steps safeguarded with bisection.
pub fn semicircle_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return -1.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    // sin(pi (u - 1/2)) is exact at u = 0, 1/2, 1 and a fair start elsewhere.
    let mut t = (PI * (u - 0.5)).sin();
    for _ in 0..200 {
        let f = semicircle_cdf(t) - u;
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let slope = semicircle_density(t);
        let mut next = if slope > 0.0 { t - f / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-16 || hi - lo <= 1e-15 {
            t = next;
            break;
        }
        t = next;
    }
    t
}

/// Uniform `[0, 1)` draw for `index`, from its own ChaCha20 stream under `seed`.
pub fn uniform_draw(seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.random::<f64>()
}

/// `n` semicircle samples by inverse CDF; sample `i` uses stream `i`, so the
/// output is identical however the work is split.
pub fn sample_semicircle(n: usize, seed: u64) -> Vec<f64> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| semicircle_quantile(uniform_draw(seed, i)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsReport {
    pub n: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Critical-value coefficient `sqrt(-ln(alpha/2)/2)` of the asymptotic KS test.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// One-sample KS statistic of sorted samples against the semicircle CDF, tested
/// at `1.63/sqrt(n)`.
pub fn ks_statistic(sorted: &[f64]) -> Result<KsReport, StatsError> {
    ks_statistic_with(sorted, KS_DEFAULT_COEFFICIENT)
}

pub fn ks_statistic_with(sorted: &[f64], coefficient: f64) -> Result<KsReport, StatsError> {
    if sorted.is_empty() {
        return Err(StatsError::EmptySample);
    }
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]), "samples must be sorted");
    let n = sorted.len() as f64;
    let statistic = sorted.iter().enumerate().fold(0.0f64, |acc, (i, &s)| {
        let f = semicircle_cdf(s);
        let upper = ((i + 1) as f64 / n - f).abs();
        let lower = (i as f64 / n - f).abs();
        acc.max(upper).max(lower)
    });
    let threshold = coefficient / n.sqrt();
    Ok(KsReport { n: sorted.len(), statistic, threshold, pass: statistic <= threshold })
}

/// Sorts a copy of `samples` and runs [`ks_statistic_with`].
pub fn ks_test(samples: &[f64], coefficient: f64) -> Result<KsReport, StatsError> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    ks_statistic_with(&sorted, coefficient)
}

/// Synthetic eigenvalue data whose coordinates `B(P)` are independent semicircle draws.
///
/// `C(P) = 2 B(P) N(P)^{(k0-1)/2}` is rounded to a multiple of `10^-12` (towards zero
/// if rounding would leave `[-1, 1]`), and `c(P) = C(P) / N(P)^{k0/2}` is stored exactly.
/// Prime `i` in canonical order draws from stream `i`.
pub fn synth_eigen_series(
    field: QuadField,
    bound: u64,
    k0: u32,
    seed: u64,
) -> Result<EigenvalueSeries, PipelineError> {
    let mut series = EigenvalueSeries::new(
        field,
        vec![k0; field.degree() as usize],
        format!("synthetic:d={},x={bound},k0={k0},seed={seed}", field.d()),
    )?;
    let primes = field.prime_ideals_up_to(bound);
    let values: Vec<BigRational> = primes
        .par_iter()
        .enumerate()
        .map(|(i, p)| quantized_coefficient(semicircle_quantile(uniform_draw(seed, i as u64)), p.norm(), k0))
        .collect();
    for (p, c) in primes.into_iter().zip(values) {
        series.insert(p, c)?;
    }
    Ok(series)
}

fn quantized_coefficient(b: f64, norm: u64, k0: u32) -> BigRational {
    let n = BigInt::from(norm);
    let big_c = 2.0 * b * (norm as f64).powf((k0 as f64 - 1.0) / 2.0);
    let grid = BigInt::from(QUANTIZATION_DENOMINATOR);
    let mut ticks = BigInt::from_f64((big_c * QUANTIZATION_DENOMINATOR as f64).round()).expect("finite");
    // |C| <= 2 N^{(k0-1)/2}  <=>  ticks^2 <= 4 N^{k0-1} grid^2
    let limit = n.pow(k0 - 1) * &grid * &grid * 4;
    while &ticks * &ticks > limit {
        ticks -= ticks.signum();
    }
    BigRational::new(ticks, grid * n.pow(k0 / 2))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub observed: f64,
    pub predicted: f64,
}

/// Equal-width bins over `[-1, 1]` with observed frequencies and semicircle masses.
pub fn histogram(samples: &[f64], bins: usize) -> Vec<HistogramBin> {
    let mut counts = vec![0u64; bins];
    for &s in samples {
        let idx = (((s.clamp(-1.0, 1.0) + 1.0) / 2.0) * bins as f64).floor() as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let n = samples.len().max(1) as f64;
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let lo = -1.0 + 2.0 * i as f64 / bins as f64;
            let hi = -1.0 + 2.0 * (i + 1) as f64 / bins as f64;
            HistogramBin { lo, hi, count, observed: count as f64 / n, predicted: semicircle_mass(lo, hi) }
        })
        .collect()
}

pub const HISTOGRAM_CSV_HEADER: &str = "bin_lo,bin_hi,count,observed_freq,predicted_mass";

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from(HISTOGRAM_CSV_HEADER);
    out.push('\n');
    for b in bins {
        writeln!(out, "{:.6},{:.6},{},{:.12},{:.12}", b.lo, b.hi, b.count, b.observed, b.predicted).unwrap();
    }
    out
}

/// Bar chart of observed bin frequencies scaled to densities, with the semicircle curve on top.
pub fn histogram_svg(bins: &[HistogramBin]) -> String {
    let (w, h, pad) = (640.0, 360.0, 20.0);
    let bin_width = 2.0 / bins.len().max(1) as f64;
    let peak = bins
        .iter()
        .map(|b| b.observed / bin_width)
        .fold(2.0 / PI, f64::max)
        * 1.1;
    let sx = |t: f64| pad + (t + 1.0) / 2.0 * (w - 2.0 * pad);
    let sy = |v: f64| h - pad - v / peak * (h - 2.0 * pad);
    let mut out = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    out.push('\n');
    for b in bins {
        let density = b.observed / bin_width;
        writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#9ab" stroke="#567"/>"##,
            sx(b.lo),
            sy(density),
            sx(b.hi) - sx(b.lo),
            sy(0.0) - sy(density)
        )
        .unwrap();
    }
    let points: Vec<String> = (0..=200)
        .map(|i| {
            let t = -1.0 + 2.0 * i as f64 / 200.0;
            format!("{:.2},{:.2}", sx(t), sy(semicircle_density(t)))
        })
        .collect();
    writeln!(out, r##"<polyline fill="none" stroke="#c33" stroke-width="2" points="{}"/>"##, points.join(" ")).unwrap();
    out.push_str("</svg>\n");
    out
}

/// Mean and second moment, for quick distribution sanity checks.
pub fn moments(samples: &[f64]) -> (f64, f64) {
    let n = samples.len().max(1) as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let second = samples.iter().map(|x| x * x).sum::<f64>() / n;
    (mean, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sign_pipeline::{renormalize_c, sato_tate_coordinate};

    #[test]
    fn mass_examples() {
        assert!((semicircle_mass(-1.0, 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(semicircle_mass(0.0, 1.0), 0.5);
        let expected = 1.0 / 3.0 + 3f64.sqrt() / (2.0 * PI);
        assert!((semicircle_mass(-0.5, 0.5) - expected).abs() < 1e-15);
        assert!((semicircle_mass(-0.5, 0.5) - 0.608998).abs() < 1e-6);
        // clamping
        assert_eq!(semicircle_mass(-3.0, 7.0), semicircle_mass(-1.0, 1.0));
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(semicircle_cdf(0.0), 0.5);
        assert_eq!(semicircle_cdf(1.0), 1.0);
        assert_eq!(semicircle_cdf(-1.0), 0.0);
        assert!((semicircle_cdf(0.5) - 0.804499).abs() < 1e-6);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 0..=1000 {
            let u = i as f64 / 1000.0;
            let t = semicircle_quantile(u);
            assert!((-1.0..=1.0).contains(&t));
            assert!((semicircle_cdf(t) - u).abs() < 1e-12, "u={u}");
        }
    }

    #[test]
    fn ks_examples() {
        let r = ks_statistic(&[0.0]).unwrap();
        assert_eq!(r.statistic, 0.5);
        assert_eq!(ks_statistic(&[]), Err(StatsError::EmptySample));
        let n = 500;
        let quantiles: Vec<f64> = (1..=n).map(|i| semicircle_quantile((i as f64 - 0.5) / n as f64)).collect();
        let r = ks_statistic(&quantiles).unwrap();
        assert!((r.statistic - 1.0 / (2.0 * n as f64)).abs() < 1e-12);
        assert!(r.pass);
        assert!((ks_coefficient(0.01) - 1.6276).abs() < 1e-4);
    }

    #[test]
    fn sampler_contract() {
        assert!(sample_semicircle(0, 1).is_empty());
        let a = sample_semicircle(1000, 9);
        assert_eq!(a, sample_semicircle(1000, 9));
        assert_ne!(a, sample_semicircle(1000, 10));
        assert!(a.iter().all(|t| (-1.0..=1.0).contains(t)));
        assert_eq!(a[17], semicircle_quantile(uniform_draw(9, 17)));
    }

    #[test]
    fn quantization_round_trip() {
        assert_eq!(quantized_coefficient(0.0, 11, 2), BigRational::from_integer(0.into()));
        for (b, norm, k0) in [(0.3, 11u64, 2u32), (-0.999999, 1_000_003, 2), (1.0, 7, 4), (-1.0, 1_000_000, 2), (0.25, 121, 6)] {
            let c = quantized_coefficient(b, norm, k0);
            let back = sato_tate_coordinate(&renormalize_c(&c, norm, k0), norm, k0).unwrap();
            assert!((back - b).abs() <= 1e-12, "b={b} back={back}");
        }
    }

    #[test]
    fn synthetic_series_covers_primes() {
        let k = QuadField::new(5).unwrap();
        let s = synth_eigen_series(k, 500, 2, 3).unwrap();
        assert_eq!(s.len(), k.prime_ideals_up_to(500).len());
        assert_eq!(s, synth_eigen_series(k, 500, 2, 3).unwrap());
    }

    #[test]
    fn histogram_totals() {
        let samples = sample_semicircle(10_000, 5);
        let bins = histogram(&samples, 64);
        assert_eq!(bins.len(), 64);
        assert_eq!(bins.iter().map(|b| b.count).sum::<u64>(), 10_000);
        assert!((bins.iter().map(|b| b.predicted).sum::<f64>() - 1.0).abs() < 1e-12);
        let csv = histogram_csv(&bins);
        assert_eq!(csv.lines().count(), 65);
        assert!(histogram_svg(&bins).starts_with("<svg"));
    }
}
