//! Oracles shared by several test targets.

use std::f64::consts::PI;

/// Adaptive Simpson quadrature.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// CDF on an `n`-interval grid by quadrature. With `t = sin(theta)` the integrand
/// becomes the smooth `(2/pi) cos^2(theta)`.
pub fn quadrature_cdf(n: usize) -> Vec<(f64, f64)> {
    let f = |theta: f64| 2.0 / PI * theta.cos().powi(2);
    let mut acc = 0.0;
    let mut prev = -PI / 2.0;
    let mut out = vec![(-1.0, 0.0)];
    for i in 1..=n {
        let t = -1.0 + 2.0 * i as f64 / n as f64;
        let theta = t.clamp(-1.0, 1.0).asin();
        acc += simpson(&f, prev, theta, 1e-16);
        prev = theta;
        out.push((t, acc));
    }
    out
}
