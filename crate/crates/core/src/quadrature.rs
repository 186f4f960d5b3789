//! Filon-type cosine transforms on `[0, 1/2]`.
//!
//! The integrand is interpolated on each panel by a Legendre series
//! (Gauss–Legendre nodes); the oscillatory factor is then integrated
//! exactly using
//!
//! ```text
//! ∫_{-1}^{1} P_k(t) e^{iat} dt = 2 i^k j_k(a)
//! ```
//!
//! with `j_k` the spherical Bessel functions, so accuracy does not degrade
//! as the lag grows. Panels are graded geometrically toward `x = 0`, where
//! the integrands of interest have algebraic singularities.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::Tolerance;
use crate::summation::CompensatedSum;

/// Nodes per panel.
pub const PANEL_ORDER: usize = 16;

/// Panels below this width are not graded any further.
const SMALLEST_PANEL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub(crate) struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule on `[-1, 1]`.
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, t);
                dp = d;
                let step = p / d;
                t -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, t);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - t * t) * dp * dp);
            nodes[i] = -t;
            nodes[n - 1 - i] = t;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// `P_0(t), ..., P_{K-1}(t)`.
fn legendre_all(t: f64, out: &mut [f64]) {
    let k = out.len();
    if k == 0 {
        return;
    }
    out[0] = 1.0;
    if k > 1 {
        out[1] = t;
    }
    for n in 2..k {
        let nf = n as f64;
        out[n] = ((2.0 * nf - 1.0) * t * out[n - 1] - (nf - 1.0) * out[n - 2]) / nf;
    }
}

/// Spherical Bessel functions `j_0(a), ..., j_{K-1}(a)` for `a >= 0`.
pub(crate) fn spherical_bessel_all(a: f64, out: &mut [f64]) {
    let kmax = out.len();
    if kmax == 0 {
        return;
    }
    if a == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    if a < 1.0 {
        // Power series; a^k / (2k+1)!! times a rapidly converging sum.
        let a2 = a * a;
        let mut lead = 1.0;
        for (k, slot) in out.iter_mut().enumerate() {
            if k > 0 {
                lead *= a / (2 * k + 1) as f64;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            let mut m = 1usize;
            loop {
                term *= -a2 / (2.0 * m as f64 * (2 * k + 2 * m + 1) as f64);
                sum += term;
                if term.abs() < 1e-17 * sum.abs() || m > 40 {
                    break;
                }
                m += 1;
            }
            *slot = lead * sum;
        }
        return;
    }
    let (s, c) = a.sin_cos();
    let j0 = s / a;
    let j1 = s / (a * a) - c / a;
    if a >= kmax as f64 {
        // Upward recurrence is stable while k < a.
        out[0] = j0;
        if kmax > 1 {
            out[1] = j1;
        }
        for k in 1..kmax - 1 {
            out[k + 1] = (2 * k + 1) as f64 / a * out[k] - out[k - 1];
        }
        return;
    }
    // Miller's backward recurrence, normalised on j_0 or j_1.
    let start = kmax + 30 + a as usize;
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut vals = vec![0.0; kmax];
    for k in (1..=start).rev() {
        let prev = (2 * k + 1) as f64 / a * cur - next;
        next = cur;
        cur = prev;
        if k - 1 < kmax {
            vals[k - 1] = cur;
        }
        if cur.abs() > 1e200 {
            next *= 1e-200;
            cur *= 1e-200;
            vals.iter_mut().for_each(|v| *v *= 1e-200);
        }
    }
    let scale = if j0.abs() >= j1.abs() { j0 / vals[0] } else { j1 / vals[1] };
    for (o, v) in out.iter_mut().zip(vals) {
        *o = v * scale;
    }
}

#[derive(Debug, Clone)]
struct Panel {
    center: f64,
    half_width: f64,
    coeffs: [f64; PANEL_ORDER],
}

/// Panel breakpoints: `uniform` equal panels on `[0, 1/2]`, the first of
/// which is split geometrically toward zero.
fn breakpoints(uniform: usize) -> Vec<f64> {
    let w = 0.5 / uniform as f64;
    let mut pts = vec![0.0];
    let mut graded = Vec::new();
    let mut left = w;
    while left > SMALLEST_PANEL {
        left *= 0.5;
        graded.push(left);
    }
    graded.reverse();
    pts.extend(graded);
    for i in 1..=uniform {
        pts.push(w * i as f64);
    }
    *pts.last_mut().unwrap() = 0.5;
    pts
}

/// Piecewise Legendre interpolant of a function on `[0, 1/2]`, ready for
/// exact cosine moments.
#[derive(Debug, Clone)]
pub struct CosineTransform {
    panels: Vec<Panel>,
}

impl CosineTransform {
    /// Interpolates `f` on `uniform` panels (plus grading near zero).
    pub fn build<F>(f: &F, uniform: usize) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let rule = GaussLegendre::new(PANEL_ORDER);
        let pts = breakpoints(uniform.max(1));
        let panels: Result<Vec<Panel>> = pts
            .par_windows(2)
            .map(|w| {
                let (lo, hi) = (w[0], w[1]);
                let center = 0.5 * (lo + hi);
                let half_width = 0.5 * (hi - lo);
                let mut coeffs = [0.0; PANEL_ORDER];
                let mut poly = [0.0; PANEL_ORDER];
                for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
                    let value = f(center + half_width * t)?;
                    if !value.is_finite() {
                        return Err(Error::domain(format!(
                            "integrand not finite at x = {}",
                            center + half_width * t
                        )));
                    }
                    legendre_all(*t, &mut poly);
                    for (c, p) in coeffs.iter_mut().zip(&poly) {
                        *c += wt * value * p;
                    }
                }
                for (k, c) in coeffs.iter_mut().enumerate() {
                    *c *= (2 * k + 1) as f64 / 2.0;
                }
                Ok(Panel { center, half_width, coeffs })
            })
            .collect();
        Ok(CosineTransform { panels: panels? })
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    /// `2 ∫_0^{1/2} f(x) cos(2πnx) dx`.
    pub fn eval(&self, n: usize) -> f64 {
        let omega = 2.0 * PI * n as f64;
        let mut bessel = [0.0; PANEL_ORDER];
        let mut acc = CompensatedSum::new();
        for p in &self.panels {
            spherical_bessel_all(omega * p.half_width, &mut bessel);
            let (s, c) = (omega * p.center).sin_cos();
            // Re[e^{iωc} 2 i^k j_k(a)]
            let mut even = 0.0;
            let mut odd = 0.0;
            for k in 0..PANEL_ORDER {
                let term = p.coeffs[k] * bessel[k];
                match k % 4 {
                    0 => even += term,
                    1 => odd += term,
                    2 => even -= term,
                    _ => odd -= term,
                }
            }
            acc.add(2.0 * p.half_width * (even * c - odd * s));
        }
        2.0 * acc.value()
    }

    /// `eval(n)` for every lag `0..=n_max`.
    pub fn eval_all(&self, n_max: usize) -> Vec<f64> {
        (0..=n_max).into_par_iter().map(|n| self.eval(n)).collect()
    }
}

/// Cosine coefficients `2 ∫_0^{1/2} f(x) cos(2πnx) dx` for `n = 0..=n_max`,
/// doubling the panel count until successive refinements differ by less
/// than `tol.abs_tol` at every lag.
pub fn cosine_coefficients<F>(f: &F, n_max: usize, tol: &Tolerance) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let mut uniform = 8usize;
    let mut coarse = CosineTransform::build(f, uniform)?.eval_all(n_max);
    loop {
        let next = uniform * 2;
        let fine_t = CosineTransform::build(f, next)?;
        let fine = fine_t.eval_all(n_max);
        let change = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change < tol.abs_tol {
            return Ok(fine);
        }
        if fine_t.panel_count() * 2 * PANEL_ORDER > tol.max_terms || next >= 1 << 16 {
            return Err(Error::Convergence {
                routine: "cosine_coefficients",
                detail: format!(
                    "change {change:e} still above {:e} with {} panels",
                    tol.abs_tol,
                    fine_t.panel_count()
                ),
            });
        }
        uniform = next;
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = GaussLegendre::new(PANEL_ORDER);
        let s: f64 = rule.weights.iter().sum();
        assert_relative_eq!(s, 2.0, max_relative = 1e-15);
        // ∫ t^30 = 2/31, degree 2n-1 = 31 is exact.
        let m: f64 = rule.nodes.iter().zip(&rule.weights).map(|(t, w)| w * t.powi(30)).sum();
        assert_relative_eq!(m, 2.0 / 31.0, max_relative = 1e-14);
    }

    #[test]
    fn spherical_bessel_closed_forms() {
        // j_2(a) = (3/a^2 - 1) sin a / a - 3 cos a / a^2
        for &a in &[0.3, 0.99, 1.0, 2.5, 7.0, 15.9, 16.0, 40.0, 1234.5] {
            let mut out = [0.0; PANEL_ORDER];
            spherical_bessel_all(a, &mut out);
            let (s, c) = f64::sin_cos(a);
            let j0 = s / a;
            let j1 = s / (a * a) - c / a;
            let j2 = (3.0 / (a * a) - 1.0) * s / a - 3.0 * c / (a * a);
            assert!((out[0] - j0).abs() <= 1e-15, "a={a}");
            assert!((out[1] - j1).abs() <= 1e-13, "a={a}: {} vs {j1}", out[1]);
            assert!((out[2] - j2).abs() <= 1e-12 * (1.0 + 1.0 / a), "a={a}");
        }
    }

    #[test]
    fn spherical_bessel_small_argument_leading_term() {
        // j_k(a) ≈ a^k / (2k+1)!!
        let a: f64 = 1e-3;
        let mut out = [0.0; PANEL_ORDER];
        spherical_bessel_all(a, &mut out);
        let mut dfact = 1.0;
        for (k, v) in out.iter().enumerate().take(8) {
            if k > 0 {
                dfact *= (2 * k + 1) as f64;
            }
            assert_relative_eq!(*v, a.powi(k as i32) / dfact, max_relative = 1e-6);
        }
    }

    #[test]
    fn bessel_paths_agree_at_the_switch() {
        // Miller and upward recurrences on either side of a = K.
        let mut lo = [0.0; PANEL_ORDER];
        let mut hi = [0.0; PANEL_ORDER];
        spherical_bessel_all(15.999_999, &mut lo);
        spherical_bessel_all(16.0, &mut hi);
        for k in 0..PANEL_ORDER {
            assert!((lo[k] - hi[k]).abs() < 1e-6, "k={k}");
        }
        spherical_bessel_all(0.999_999_99, &mut lo);
        spherical_bessel_all(1.0, &mut hi);
        for k in 0..PANEL_ORDER {
            assert!((lo[k] - hi[k]).abs() < 1e-7, "k={k}");
        }
    }

    #[test]
    fn cosine_transform_of_constant() {
        // 2∫_0^{1/2} cos(2πnx) dx = δ_{n0}
        let t = CosineTransform::build(&|_x: f64| Ok(1.0), 8).unwrap();
        assert_relative_eq!(t.eval(0), 1.0, max_relative = 1e-14);
        for n in 1..2000 {
            assert!(t.eval(n).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn cosine_transform_of_cosine_and_power() {
        // f = cos(2π·3x): coefficient 1/2 at n = 3
        let t = CosineTransform::build(&|x: f64| Ok((6.0 * PI * x).cos()), 8).unwrap();
        assert!((t.eval(3) - 0.5).abs() < 1e-14);
        assert!(t.eval(4).abs() < 1e-14);
        // f = x^{0.4}: the n = 0 value is 2 ∫ x^0.4 = 2 (1/2)^{1.4} / 1.4
        let t = CosineTransform::build(&|x: f64| Ok(x.powf(0.4)), 8).unwrap();
        assert_relative_eq!(t.eval(0), 2.0 * 0.5f64.powf(1.4) / 1.4, max_relative = 1e-13);
    }

    #[test]
    fn large_lag_against_closed_form() {
        // f = x^2: 2∫_0^{1/2} x² cos(2πnx) dx = (-1)^n / (2π²n²)
        let t = CosineTransform::build(&|x: f64| Ok(x * x), 8).unwrap();
        for &n in &[1usize, 7, 100, 5000, 20_000] {
            let want = if n % 2 == 0 { 1.0 } else { -1.0 } / (2.0 * PI * PI * (n * n) as f64);
            assert!((t.eval(n) - want).abs() < 1e-16 + 1e-11 * want.abs(), "n={n}");
        }
    }

    #[test]
    fn adaptive_refinement_converges() {
        let tol = Tolerance::default().with_abs(1e-13).unwrap();
        let v = cosine_coefficients(&|x: f64| Ok((-(x * 10.0)).exp()), 50, &tol).unwrap();
        // 2∫_0^{1/2} e^{-10x} dx
        assert_relative_eq!(v[0], 2.0 * (1.0 - (-5.0f64).exp()) / 10.0, max_relative = 1e-13);
    }
}
