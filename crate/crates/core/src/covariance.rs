//! Autocovariance tables.
//!
//! Routes, chosen per spec:
//! - closed forms for fGn, FARIMA(0, d, 0) and white noise;
//! - spectral subtraction for everything else: the matched fGn carries the
//!   singular part exactly and only the bounded remainder `f - f*` is
//!   integrated numerically;
//! - componentwise summation for sums.
//!
//! A third route, convolving `γ*` with the Fourier coefficients of
//! `g = f / f*`, is available through [`acvf_by_convolution`] as a cross-check.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::process::{matched_fgn, spectral_ratio, spectrum, ProcessSpec, ShortMemorySpec};
use crate::quadrature::cosine_coefficients;
use crate::special::{gamma, HurstParam, Tolerance};
use crate::summation::compensated_sum;

/// Lags from which the fGn covariance is evaluated by its large-lag series.
const FGN_SERIES_FROM: usize = 8;

/// How a table was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AcvfRoute {
    ClosedForm,
    SpectralSubtraction,
    Convolution,
    SumOfComponents,
}

impl std::fmt::Display for AcvfRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AcvfRoute::ClosedForm => "closed_form",
            AcvfRoute::SpectralSubtraction => "spectral_subtraction",
            AcvfRoute::Convolution => "convolution",
            AcvfRoute::SumOfComponents => "sum_of_components",
        };
        f.write_str(s)
    }
}

/// `γ(0), ..., γ(n_max)` for one spec.
#[derive(Debug, Clone)]
pub struct AcvfTable {
    spec: Arc<ProcessSpec>,
    values: Vec<f64>,
    route: AcvfRoute,
    tol: Tolerance,
}

impl AcvfTable {
    fn new(spec: &ProcessSpec, values: Vec<f64>, route: AcvfRoute, tol: &Tolerance) -> Self {
        AcvfTable { spec: Arc::new(spec.clone()), values, route, tol: *tol }
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn route(&self) -> AcvfRoute {
        self.route
    }

    pub fn tol(&self) -> &Tolerance {
        &self.tol
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn variance(&self) -> f64 {
        self.values[0]
    }

    /// `γ(n)`, also for negative lags.
    pub fn get(&self, n: i64) -> Result<f64> {
        let k = n.unsigned_abs() as usize;
        self.values
            .get(k)
            .copied()
            .ok_or(Error::Coverage { required: k, available: self.n_max() })
    }

    /// Autocorrelations `γ(n) / γ(0)`.
    pub fn acf(&self) -> Vec<f64> {
        let v = self.values[0];
        self.values.iter().map(|g| g / v).collect()
    }
}

/// fGn autocovariance `V/2 (|n+1|^{2H} - 2|n|^{2H} + |n-1|^{2H})`.
///
/// Past a few lags the second difference is summed as a series in
/// `1/n²`, which avoids the cancellation of three nearly equal powers.
pub fn fgn_acvf(hurst: HurstParam, variance: f64, n: usize) -> f64 {
    let a = 2.0 * hurst.value();
    if n == 0 {
        return variance;
    }
    if n < FGN_SERIES_FROM {
        let nf = n as f64;
        return 0.5 * variance * ((nf + 1.0).powf(a) - 2.0 * nf.powf(a) + (nf - 1.0).powf(a));
    }
    let nf = n as f64;
    let inv2 = 1.0 / (nf * nf);
    // Σ_{j≥1} 2 C(a, 2j) n^{-2j}
    let mut binom = 1.0;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for j in 1..60 {
        let k = 2 * j;
        binom *= (a - (k - 2) as f64) * (a - (k - 1) as f64) / ((k - 1) as f64 * k as f64);
        pow *= inv2;
        let term = 2.0 * binom * pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    0.5 * variance * nf.powf(a) * sum
}

pub fn fgn_acvf_table(hurst: HurstParam, variance: f64, n_max: usize) -> Vec<f64> {
    (0..=n_max).map(|n| fgn_acvf(hurst, variance, n)).collect()
}

/// FARIMA(0, d, 0) autocovariances for `d ∈ (0, 1/2)`:
/// `γ(0) = σ² Γ(1-2d) / Γ(1-d)²`, `γ(n) = γ(n-1) (n-1+d) / (n-d)`.
pub fn farima00_acvf(d: f64, sigma2: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(d > 0.0 && d < 0.5) {
        return Err(Error::domain(format!("FARIMA(0,d,0) closed form needs d in (0, 1/2), got {d}")));
    }
    frac_white_acvf(d, sigma2, n_max)
}

/// Same recursion, valid on the whole stationary range `d ∈ (-1/2, 1/2)`.
fn frac_white_acvf(d: f64, sigma2: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(d > -0.5 && d < 0.5) {
        return Err(Error::domain(format!("stationarity needs d in (-1/2, 1/2), got {d}")));
    }
    let g1 = gamma(1.0 - d)?;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(sigma2 * gamma(1.0 - 2.0 * d)? / (g1 * g1));
    for n in 1..=n_max {
        let nf = n as f64;
        let prev = out[n - 1];
        out.push(prev * (nf - 1.0 + d) / (nf - d));
    }
    Ok(out)
}

/// Autocovariances `γ(0..=n_max)` of `spec`, by the most accurate route.
pub fn acvf(spec: &ProcessSpec, n_max: usize, tol: &Tolerance) -> Result<AcvfTable> {
    spec.validate()?;
    match spec {
        ProcessSpec::Fgn { hurst, variance } => Ok(AcvfTable::new(
            spec,
            fgn_acvf_table(*hurst, *variance, n_max),
            AcvfRoute::ClosedForm,
            tol,
        )),
        ProcessSpec::FracDiff { hurst, driver: ShortMemorySpec::WhiteNoise { variance } } => {
            let v = frac_white_acvf(hurst.d(), *variance, n_max)?;
            Ok(AcvfTable::new(spec, v, AcvfRoute::ClosedForm, tol))
        }
        ProcessSpec::ShortMemory(ShortMemorySpec::WhiteNoise { variance }) => {
            let mut v = vec![0.0; n_max + 1];
            v[0] = *variance;
            Ok(AcvfTable::new(spec, v, AcvfRoute::ClosedForm, tol))
        }
        ProcessSpec::Sum(cs) => {
            let parts: Result<Vec<(AcvfTable, f64)>> =
                cs.iter().map(|c| Ok((acvf(&c.spec, n_max, tol)?, c.weight))).collect();
            let parts = parts?;
            let values = (0..=n_max)
                .map(|n| compensated_sum(parts.iter().map(|(t, w)| w * t.values[n])))
                .collect();
            Ok(AcvfTable::new(spec, values, AcvfRoute::SumOfComponents, tol))
        }
        _ => acvf_spectral_subtraction(spec, n_max, tol),
    }
}

/// `γ = γ* + ∫ (f - f*) cos`, with `γ*` the matched fGn; for short-memory
/// specs nothing is subtracted and `f` is integrated directly.
pub fn acvf_spectral_subtraction(spec: &ProcessSpec, n_max: usize, tol: &Tolerance) -> Result<AcvfTable> {
    spec.validate()?;
    let (fixed, base) = if spec.is_lrd() {
        let fixed = matched_fgn(spec)?;
        let ProcessSpec::Fgn { hurst, variance } = fixed else { unreachable!() };
        (Some(fixed), fgn_acvf_table(hurst, variance, n_max))
    } else {
        (None, vec![0.0; n_max + 1])
    };
    let remainder = |x: f64| -> Result<f64> {
        let f = spectrum(spec, x, tol)?;
        match &fixed {
            Some(fx) => Ok(f - spectrum(fx, x, tol)?),
            None => Ok(f),
        }
    };
    let corr = cosine_coefficients(&remainder, n_max, tol)?;
    let values = base.iter().zip(&corr).map(|(b, c)| b + c).collect();
    Ok(AcvfTable::new(spec, values, AcvfRoute::SpectralSubtraction, tol))
}

/// Fourier coefficients `G_j = ∫ g(x) e^{2πijx} dx` of `g = f / f*`.
#[derive(Debug, Clone)]
pub struct GCoeffs {
    coeffs: Vec<f64>,
    grid: usize,
    tail_bound: f64,
}

impl GCoeffs {
    /// `G_0, ..., G_J`; `G_{-j} = G_j`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn j_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// FFT grid size the coefficients were read from.
    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Bound on `Σ_{|j|>J} |G_j|` from a `j^{-3}` envelope fitted to the
    /// top half of the table.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `Σ_{|j|≤J} G_j`, which approximates `g(0) = 1`.
    pub fn sum(&self) -> f64 {
        self.coeffs[0] + 2.0 * compensated_sum(self.coeffs[1..].iter().copied())
    }
}

fn g_on_grid(spec: &ProcessSpec, fixed: &ProcessSpec, n: usize, tol: &Tolerance) -> Result<Vec<f64>> {
    // g is even; evaluate on [0, 1/2] and mirror.
    let half: Result<Vec<f64>> = (0..=n / 2)
        .into_par_iter()
        .map(|k| spectral_ratio(spec, fixed, k as f64 / n as f64, tol))
        .collect();
    let half = half?;
    Ok((0..n).map(|k| half[k.min(n - k)]).collect())
}

fn fft_cosine(values: &[f64], j_max: usize) -> Vec<f64> {
    let n = values.len();
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().take(j_max + 1).map(|c| c.re / n as f64).collect()
}

/// `G_0..=G_{j_max}` for an LRD spec, refining the FFT grid until the
/// requested coefficients move by less than `tol.abs_tol`.
pub fn g_fourier_coeffs(spec: &ProcessSpec, j_max: usize, tol: &Tolerance) -> Result<GCoeffs> {
    let fixed = matched_fgn(spec)?;
    let mut n = (8 * j_max.max(1)).next_power_of_two().max(4096);
    if n > tol.max_terms {
        return Err(Error::Convergence {
            routine: "g_fourier_coeffs",
            detail: format!("grid {n} exceeds max_terms {}", tol.max_terms),
        });
    }
    let mut coarse = fft_cosine(&g_on_grid(spec, &fixed, n, tol)?, j_max);
    loop {
        let next = 2 * n;
        if next > tol.max_terms {
            return Err(Error::Convergence {
                routine: "g_fourier_coeffs",
                detail: format!("grid {next} exceeds max_terms {}", tol.max_terms),
            });
        }
        let fine = fft_cosine(&g_on_grid(spec, &fixed, next, tol)?, j_max);
        let change = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if change < tol.abs_tol {
            let envelope = (j_max / 2..=j_max)
                .filter(|&j| j > 0)
                .map(|j| (j as f64).powi(3) * fine[j].abs())
                .fold(0.0, f64::max);
            let jf = j_max.max(1) as f64;
            return Ok(GCoeffs { coeffs: fine, grid: next, tail_bound: envelope / (jf * jf) });
        }
        n = next;
        coarse = fine;
    }
}

/// `γ(n) = Σ_{|j|≤J} G_j γ*(n - j)`, with `J` doubled until the neglected
/// tail is below `tol.abs_tol` in absolute terms.
pub fn acvf_by_convolution(spec: &ProcessSpec, n_max: usize, tol: &Tolerance) -> Result<AcvfTable> {
    spec.validate()?;
    let fixed = matched_fgn(spec)?;
    let ProcessSpec::Fgn { hurst, variance } = fixed else { unreachable!() };
    let mut j = 256usize;
    let g = loop {
        let g = g_fourier_coeffs(spec, j, tol)?;
        if g.tail_bound() * variance < tol.abs_tol {
            break g;
        }
        if j >= 1 << 15 {
            return Err(Error::Convergence {
                routine: "acvf_by_convolution",
                detail: format!("tail bound {:e} at J = {j}", g.tail_bound() * variance),
            });
        }
        j *= 2;
    };
    let jm = g.j_max();
    let star = fgn_acvf_table(hurst, variance, n_max + jm);
    let c = g.coeffs();
    let values = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let terms = (1..=jm).map(|k| c[k] * (star[n + k] + star[(n as i64 - k as i64).unsigned_abs() as usize]));
            compensated_sum(std::iter::once(c[0] * star[n]).chain(terms))
        })
        .collect();
    Ok(AcvfTable::new(spec, values, AcvfRoute::Convolution, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hp(h: f64) -> HurstParam {
        HurstParam::new(h).unwrap()
    }

    #[test]
    fn fgn_reference_values() {
        // 50-digit evaluations of the second difference.
        assert_relative_eq!(fgn_acvf(hp(0.8), 1.0, 1), 0.515716566510398082, max_relative = 1e-15);
        assert_relative_eq!(fgn_acvf(hp(0.8), 1.0, 10_000), 0.0120570548768726102, max_relative = 1e-14);
        assert_relative_eq!(fgn_acvf(hp(0.8), 1.0, 1_000_000), 0.00191091441865687598, max_relative = 1e-14);
    }

    #[test]
    fn fgn_series_agrees_with_difference_where_both_are_accurate() {
        for &h in &[0.3, 0.55, 0.8, 0.95] {
            for n in FGN_SERIES_FROM..40 {
                let nf = n as f64;
                let a = 2.0 * h;
                let direct = 0.5 * ((nf + 1.0).powf(a) - 2.0 * nf.powf(a) + (nf - 1.0).powf(a));
                assert_relative_eq!(fgn_acvf(hp(h), 1.0, n), direct, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn fgn_half_and_one() {
        for n in 1..20 {
            assert_eq!(fgn_acvf(hp(0.5), 2.0, n), 0.0);
            assert_relative_eq!(fgn_acvf(hp(1.0), 2.0, n), 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn farima_variance_reference() {
        // Γ(0.4)/Γ(0.7)² at 20 digits.
        let v = farima00_acvf(0.3, 1.0, 3).unwrap();
        assert_relative_eq!(v[0], 1.31645606213000472, max_relative = 1e-14);
        assert_relative_eq!(v[1], v[0] * 0.3 / 0.7, max_relative = 1e-15);
        assert!(farima00_acvf(0.5, 1.0, 3).is_err());
        assert!(farima00_acvf(0.0, 1.0, 3).is_err());
    }

    #[test]
    fn spectral_subtraction_matches_closed_form() {
        let tol = Tolerance::default();
        let spec = ProcessSpec::farima_0d0(0.3, 1.0).unwrap();
        let exact = acvf(&spec, 200, &tol).unwrap();
        assert_eq!(exact.route(), AcvfRoute::ClosedForm);
        let ss = acvf_spectral_subtraction(&spec, 200, &tol).unwrap();
        for n in 0..=200 {
            assert!((exact.values()[n] - ss.values()[n]).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn direct_quadrature_for_arma_matches_ar1() {
        // AR(1): γ(n) = σ² φ^n / (1 - φ²)
        let tol = Tolerance::default();
        let spec = ProcessSpec::short_memory(ShortMemorySpec::arma(vec![0.6], vec![], 1.5).unwrap()).unwrap();
        let t = acvf(&spec, 60, &tol).unwrap();
        assert_eq!(t.route(), AcvfRoute::SpectralSubtraction);
        for n in 0..=60 {
            let want = 1.5 * 0.6f64.powi(n as i32) / (1.0 - 0.36);
            assert!((t.values()[n] - want).abs() < 1e-11, "n={n}");
        }
    }

    #[test]
    fn antipersistent_white_driver_is_closed_form() {
        let tol = Tolerance::default();
        let spec = ProcessSpec::farima_0d0(-0.2, 1.0).unwrap();
        let t = acvf(&spec, 30, &tol).unwrap();
        let ss = acvf_spectral_subtraction(&spec, 30, &tol).unwrap();
        for n in 0..=30 {
            assert!((t.values()[n] - ss.values()[n]).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn g_coefficients_sum_to_one() {
        let tol = Tolerance::default().with_abs(1e-10).unwrap();
        let spec = ProcessSpec::farima_0d0(0.3, 1.0).unwrap();
        let g = g_fourier_coeffs(&spec, 512, &tol).unwrap();
        assert!((g.sum() - 1.0).abs() < 1e-8, "sum {}", g.sum());
        assert!(g.tail_bound() < 1e-8);
    }

    #[test]
    fn convolution_agrees_with_closed_form() {
        let tol = Tolerance::default().with_abs(1e-10).unwrap();
        let spec = ProcessSpec::farima_0d0(0.3, 1.0).unwrap();
        let conv = acvf_by_convolution(&spec, 100, &tol).unwrap();
        let exact = acvf(&spec, 100, &tol).unwrap();
        for n in 0..=100 {
            assert!((conv.values()[n] - exact.values()[n]).abs() < 1e-8, "n={n}");
        }
    }

    #[test]
    fn coverage_error_past_the_table() {
        let t = acvf(&ProcessSpec::fgn(0.7, 1.0).unwrap(), 5, &Tolerance::default()).unwrap();
        assert_eq!(t.get(-3).unwrap(), t.get(3).unwrap());
        assert!(matches!(t.get(6), Err(Error::Coverage { required: 6, available: 5 })));
    }
}
