//! Closeness of a process to its fGn fixed point: the VTF offset, the
//! CTF convergence rate under aggregation, the spectral and covariance
//! gaps, and the additive-noise (brittleness) experiments.
//!
//! Everything here works on exact tables. Differences from the fixed point
//! are formed at the covariance level (`d = γ - γ*`) and then double
//! integrated, never by subtracting two large VTF values.

use serde::{Deserialize, Serialize};

use crate::covariance::{acvf, fgn_acvf_table, g_fourier_coeffs};
use crate::error::{Error, Result};
use crate::process::{matched_fgn, spectrum, ProcessSpec, ShortMemorySpec};
use crate::special::{power_tail, HurstParam, Tolerance};
use crate::summation::CompensatedSum;
use crate::vtf::{double_integrate, FixedPoint};

/// Relative agreement required between the measured offset and a
/// closed-form candidate.
pub const CANDIDATE_REL_TOL: f64 = 1e-4;
/// Offsets at the last two probes must agree to this fraction of `D`.
pub const OFFSET_CAUCHY_TOL: f64 = 1e-3;
/// Window of `x` over which the spectral-gap slope is fitted.
pub const GAP_SLOPE_WINDOW: (f64, f64) = (1e-4, 1e-2);
/// Lag window for the covariance-gap envelope.
pub const ENVELOPE_WINDOW: (usize, usize) = (1_000, 10_000);
/// Largest `j` used in the closed-form offset sums before the fitted tail.
const OFFSET_SUM_TERMS: usize = 2000;
/// Lower end of the range the `G_j` power-law tail is fitted on.
const TAIL_FIT_FROM: usize = 200;

/// Checks that `fixed` is the fGn `spec` converges to.
pub fn check_fixed_point(spec: &ProcessSpec, fixed: &FixedPoint) -> Result<()> {
    let own = FixedPoint::of_fgn(&matched_fgn(spec)?)?;
    let dh = (own.hurst() - fixed.hurst()).abs();
    let dv = (own.variance() - fixed.variance()).abs();
    if dh > 1e-10 || dv > 1e-10 * own.variance() {
        return Err(Error::config(format!(
            "fixed point (H={}, V={}) does not match the spec's (H={}, V={})",
            fixed.hurst(),
            fixed.variance(),
            own.hurst(),
            own.variance()
        )));
    }
    Ok(())
}

/// `d_n = γ(n) - γ*(n)` for `n = 0..=n_max`.
pub fn acvf_gap(spec: &ProcessSpec, fixed: &FixedPoint, n_max: usize, tol: &Tolerance) -> Result<Vec<f64>> {
    check_fixed_point(spec, fixed)?;
    if matches!(spec, ProcessSpec::Fgn { .. }) {
        return Ok(vec![0.0; n_max + 1]);
    }
    let table = acvf(spec, n_max, tol)?;
    let hurst = HurstParam::new(fixed.hurst())?;
    let star = fgn_acvf_table(hurst, fixed.variance(), n_max);
    Ok(table.values().iter().zip(&star).map(|(a, b)| a - b).collect())
}

/// `ω_d(n) = ω(n) - ω*(n)` for `n = 0..=n_max`.
pub fn vtf_gap(spec: &ProcessSpec, fixed: &FixedPoint, n_max: usize, tol: &Tolerance) -> Result<Vec<f64>> {
    let d = acvf_gap(spec, fixed, n_max.saturating_sub(1), tol)?;
    Ok(double_integrate(&d, n_max))
}

/// Ordinary least-squares slope and intercept.
pub fn ls_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Least squares for `y ≈ Σ_k c_k basis_k(x)` by normal equations.
fn ls_basis(rows: &[Vec<f64>], ys: &[f64]) -> Option<Vec<f64>> {
    let k = rows.first()?.len();
    if rows.len() < k {
        return None;
    }
    let a = nalgebra::DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]);
    let b = nalgebra::DVector::from_column_slice(ys);
    let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
    Some(sol.iter().copied().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetCandidate {
    /// `-2V Σ_{j≥1} j^{2H} G_j`
    Signed,
    /// `-2V Σ_{j≥1} j^{2H} |G_j|`
    Absolute,
}

/// Measured VTF offset and its closed-form candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetEstimate {
    /// `(n, ω(n) - ω*(n))` at each probe.
    pub probes: Vec<(usize, f64)>,
    /// Limit of the offset, extrapolated from the probes.
    pub d_hat: f64,
    /// Offset at the largest probe, without extrapolation.
    pub d_raw: f64,
    pub d_formula_signed: f64,
    pub d_formula_abs: f64,
    /// The unique candidate within `CANDIDATE_REL_TOL` of `d_hat`, if any.
    pub matching_candidate: Option<OffsetCandidate>,
    /// Set when the last two probes differ by more than
    /// `OFFSET_CAUCHY_TOL · |d_hat|`.
    pub inconclusive: bool,
}

/// `Σ_{j≥1} j^{2H} G_j` (signed) and `Σ_{j≥1} j^{2H} |G_j|`, with the part
/// past `OFFSET_SUM_TERMS` taken from a power law fitted to `|G_j|`.
fn offset_sums(spec: &ProcessSpec, h: f64, tol: &Tolerance) -> Result<(f64, f64)> {
    let g = g_fourier_coeffs(spec, OFFSET_SUM_TERMS, tol)?;
    let c = g.coeffs();
    let a = 2.0 * h;
    let mut signed = CompensatedSum::new();
    let mut abs = CompensatedSum::new();
    for (j, gj) in c.iter().enumerate().skip(1) {
        let w = (j as f64).powf(a);
        signed.add(w * gj);
        abs.add(w * gj.abs());
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = (TAIL_FIT_FROM..=OFFSET_SUM_TERMS)
        .filter(|&j| c[j] != 0.0)
        .map(|j| ((j as f64).ln(), c[j].abs().ln()))
        .unzip();
    if let Some((slope, icpt)) = ls_fit(&xs, &ys) {
        let q = -slope;
        if q - a > 1.0 {
            let (t, _) = power_tail(q - a, 0.0, (OFFSET_SUM_TERMS + 1) as f64);
            let tail = icpt.exp() * t;
            signed.add(c[OFFSET_SUM_TERMS].signum() * tail);
            abs.add(tail);
        }
    }
    Ok((signed.value(), abs.value()))
}

/// Extrapolates `o(n) ≈ D + c₁ n^{2H-2} + c₂ n^{2H-3}` from the probes.
fn extrapolate_offset(probes: &[(usize, f64)], h: f64) -> f64 {
    let last = probes.last().map(|p| p.1).unwrap_or(0.0);
    let terms = probes.len().min(3);
    if terms < 2 {
        return last;
    }
    let rows: Vec<Vec<f64>> = probes
        .iter()
        .map(|&(n, _)| {
            let nf = n as f64;
            [1.0, nf.powf(2.0 * h - 2.0), nf.powf(2.0 * h - 3.0)][..terms].to_vec()
        })
        .collect();
    let ys: Vec<f64> = probes.iter().map(|p| p.1).collect();
    ls_basis(&rows, &ys).map(|c| c[0]).unwrap_or(last)
}

/// The limiting VTF offset `D = lim ω(n) - ω*(n)`, measured at the probe
/// lags and compared with the two closed-form candidates.
pub fn vtf_offset(spec: &ProcessSpec, fixed: &FixedPoint, n_probe: &[usize], tol: &Tolerance) -> Result<OffsetEstimate> {
    let mut probes_n: Vec<usize> = n_probe.to_vec();
    probes_n.sort_unstable();
    probes_n.dedup();
    let n_max = *probes_n.last().ok_or_else(|| Error::domain("vtf_offset needs at least one probe"))?;
    if probes_n[0] == 0 {
        return Err(Error::domain("probe lags must be positive"));
    }
    let gap = vtf_gap(spec, fixed, n_max, tol)?;
    let probes: Vec<(usize, f64)> = probes_n.iter().map(|&n| (n, gap[n])).collect();
    let d_raw = gap[n_max];
    let h = fixed.hurst();
    if matches!(spec, ProcessSpec::Fgn { .. }) {
        return Ok(OffsetEstimate {
            probes,
            d_hat: 0.0,
            d_raw,
            d_formula_signed: 0.0,
            d_formula_abs: 0.0,
            matching_candidate: None,
            inconclusive: false,
        });
    }
    let d_hat = extrapolate_offset(&probes, h);
    let (signed, abs) = offset_sums(spec, h, tol)?;
    let v = fixed.variance();
    let d_formula_signed = -2.0 * v * signed;
    let d_formula_abs = -2.0 * v * abs;
    let near = |c: f64| (c - d_hat).abs() <= CANDIDATE_REL_TOL * d_hat.abs();
    let matching_candidate = match (near(d_formula_signed), near(d_formula_abs)) {
        (true, false) => Some(OffsetCandidate::Signed),
        (false, true) => Some(OffsetCandidate::Absolute),
        _ => None,
    };
    let inconclusive = probes.len() < 2 || {
        let k = probes.len();
        (probes[k - 1].1 - probes[k - 2].1).abs() >= OFFSET_CAUCHY_TOL * d_hat.abs()
    };
    Ok(OffsetEstimate { probes, d_hat, d_raw, d_formula_signed, d_formula_abs, matching_candidate, inconclusive })
}

/// Convergence of `ρ^(m)(n)` to `n^{2H}` as the aggregation level grows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub n: usize,
    /// `(m, ρ^(m)(n) - n^{2H})` for every requested level.
    pub points: Vec<(usize, f64)>,
    /// Least-squares slope of `log|diff|` on `log m` over the kept levels.
    pub slope_hat: Option<f64>,
    /// Slope between the two largest kept levels.
    pub local_slope: Option<f64>,
    /// No two levels had a difference above the noise floor.
    pub saturated: bool,
    /// `diff · m^{2H}` at the largest kept level.
    pub leading_coefficient_observed: Option<f64>,
}

/// Regression of `log|ρ^(m)(n) - n^{2H}|` on `log m`.
pub fn ctf_convergence_slope(
    spec: &ProcessSpec,
    fixed: &FixedPoint,
    n: usize,
    levels: &[usize],
    tol: &Tolerance,
) -> Result<SlopeReport> {
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let (lo, hi) = match (levels.first(), levels.last()) {
        (Some(&lo), Some(&hi)) if lo >= 1 => (lo, hi),
        _ => return Err(Error::domain("levels must be positive and non-empty")),
    };
    if (hi as f64) < 100.0 * lo as f64 {
        return Err(Error::domain("levels must span at least two decades"));
    }
    if n < 1 {
        return Err(Error::domain("lag n must be positive"));
    }
    let gap = vtf_gap(spec, fixed, hi * n, tol)?;
    let h2 = 2.0 * fixed.hurst();
    let target = (n as f64).powf(h2);
    let v = fixed.variance();
    let points: Vec<(usize, f64)> = levels
        .iter()
        .map(|&m| {
            let mf = m as f64;
            // ρ - n^{2H} = (ω_d(mn) - n^{2H} ω_d(m)) / ω(m)
            let num = gap[m * n] - target * gap[m];
            (m, num / (v * mf.powf(h2) + gap[m]))
        })
        .collect();
    let floor = 10.0 * f64::EPSILON * target;
    let kept: Vec<&(usize, f64)> = points.iter().filter(|p| p.1.abs() > floor).collect();
    if kept.len() < 2 {
        return Ok(SlopeReport {
            n,
            points,
            slope_hat: None,
            local_slope: None,
            saturated: true,
            leading_coefficient_observed: None,
        });
    }
    let xs: Vec<f64> = kept.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = kept.iter().map(|p| p.1.abs().ln()).collect();
    let slope_hat = ls_fit(&xs, &ys).map(|f| f.0);
    let k = kept.len();
    let local_slope = Some((ys[k - 1] - ys[k - 2]) / (xs[k - 1] - xs[k - 2]));
    let (m_top, d_top) = *kept[k - 1];
    Ok(SlopeReport {
        n,
        points,
        slope_hat,
        local_slope,
        saturated: false,
        leading_coefficient_observed: Some(d_top * (m_top as f64).powf(h2)),
    })
}

/// Growth index of `ω_d` over the decade `[n_top/10, n_top]`; zero when the
/// offset is constant to `OFFSET_CAUCHY_TOL` across the decade.
pub fn beta_hat(spec: &ProcessSpec, fixed: &FixedPoint, n_top: usize, tol: &Tolerance) -> Result<f64> {
    if n_top < 10 {
        return Err(Error::domain("beta_hat needs n_top >= 10"));
    }
    let gap = vtf_gap(spec, fixed, n_top, tol)?;
    let lo = n_top / 10;
    let (a, b) = (gap[lo], gap[n_top]);
    if b == 0.0 || (b - a).abs() < OFFSET_CAUCHY_TOL * b.abs() {
        return Ok(0.0);
    }
    let grid: Vec<usize> = (0..=20)
        .map(|i| (lo as f64 * 10f64.powf(i as f64 / 20.0)).round() as usize)
        .map(|n| n.clamp(lo, n_top))
        .filter(|&n| gap[n] != 0.0)
        .collect();
    let xs: Vec<f64> = grid.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = grid.iter().map(|&n| gap[n].abs().ln()).collect();
    let slope = ls_fit(&xs, &ys).map(|f| f.0).unwrap_or(0.0);
    Ok(slope.clamp(0.0, 2.0 * fixed.hurst()))
}

/// `φ = f - f*` sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGapProfile {
    pub points: Vec<(f64, f64)>,
    /// Log-log slope of `|φ|` over the grid points inside `GAP_SLOPE_WINDOW`.
    pub slope: Option<f64>,
    /// Whether `φ ≥ 0` at every grid point.
    pub nonnegative: bool,
}

pub fn spectral_gap_profile(
    spec: &ProcessSpec,
    fixed: &FixedPoint,
    x_grid: &[f64],
    tol: &Tolerance,
) -> Result<SpectralGapProfile> {
    check_fixed_point(spec, fixed)?;
    let fx = fixed.spec();
    let mut points = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        if !(x > 0.0 && x <= 0.5) {
            return Err(Error::domain(format!("gap grid point {x} outside (0, 1/2]")));
        }
        points.push((x, spectrum(spec, x, tol)? - spectrum(&fx, x, tol)?));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.0 >= GAP_SLOPE_WINDOW.0 && p.0 <= GAP_SLOPE_WINDOW.1 && p.1 != 0.0)
        .map(|p| (p.0.ln(), p.1.abs().ln()))
        .unzip();
    let slope = ls_fit(&xs, &ys).map(|f| f.0);
    let nonnegative = points.iter().all(|p| p.1 >= 0.0);
    Ok(SpectralGapProfile { points, slope, nonnegative })
}

/// `d_n = γ(n) - γ*(n)` and its envelope `n^{4-2H} |d_n|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcvfGapProfile {
    /// `(n, d_n, n^{4-2H} |d_n|)`
    pub points: Vec<(usize, f64, f64)>,
    /// `max/min - 1` of the envelope over grid points in `ENVELOPE_WINDOW`.
    pub envelope_variation: Option<f64>,
    /// `max_{n ≤ n_max} |ω(n) - ω*(n)|`.
    pub max_abs_vtf_gap: f64,
}

pub fn acvf_gap_profile(
    spec: &ProcessSpec,
    fixed: &FixedPoint,
    n_grid: &[usize],
    tol: &Tolerance,
) -> Result<AcvfGapProfile> {
    let n_max = n_grid.iter().copied().max().unwrap_or(0);
    let d = acvf_gap(spec, fixed, n_max, tol)?;
    let e = 4.0 - 2.0 * fixed.hurst();
    let points: Vec<(usize, f64, f64)> =
        n_grid.iter().map(|&n| (n, d[n], (n as f64).powf(e) * d[n].abs())).collect();
    let window: Vec<f64> = points
        .iter()
        .filter(|p| p.0 >= ENVELOPE_WINDOW.0 && p.0 <= ENVELOPE_WINDOW.1)
        .map(|p| p.2)
        .collect();
    let envelope_variation = if window.len() >= 2 {
        let max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = window.iter().copied().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            Some(max / min - 1.0)
        } else {
            None
        }
    } else {
        None
    };
    let max_abs_vtf_gap = double_integrate(&d, n_max + 1).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(AcvfGapProfile { points, envelope_variation, max_abs_vtf_gap })
}

/// A labelled `(abscissa, value)` series for export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Grids used by [`closeness_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClosenessOptions {
    pub probes: Vec<usize>,
    pub slope_lag: usize,
    pub levels: Vec<usize>,
    pub x_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
}

impl Default for ClosenessOptions {
    fn default() -> Self {
        ClosenessOptions {
            probes: vec![1_000, 2_000, 5_000, 10_000],
            slope_lag: 2,
            levels: (0..=10).map(|k| 1usize << k).collect(),
            x_grid: log_grid(1e-6, 0.5, 61),
            n_grid: (0..=40)
                .map(|i| 10f64.powf(i as f64 / 10.0).round() as usize)
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect(),
        }
    }
}

/// `points` values spaced evenly in `log x` from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Everything measured about how close `spec` is to its fGn fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosenessReport {
    pub spec: ProcessSpec,
    pub fixed_point: FixedPoint,
    pub offset: OffsetEstimate,
    pub beta_hat: f64,
    pub slope: SlopeReport,
    /// `(D/V)(1 - n^{2H})`, the predicted coefficient of `m^{-2H}`.
    pub leading_coefficient_predicted: f64,
    pub spectral_gap_slope: Option<f64>,
    pub spectral_gap_nonnegative: bool,
    pub acvf_envelope_variation: Option<f64>,
    pub max_abs_vtf_gap: f64,
    pub curves: Vec<Curve>,
}

pub fn closeness_report(spec: &ProcessSpec, opts: &ClosenessOptions, tol: &Tolerance) -> Result<ClosenessReport> {
    let fixed = FixedPoint::of_fgn(&matched_fgn(spec)?)?;
    let offset = vtf_offset(spec, &fixed, &opts.probes, tol)?;
    let top = *opts.probes.iter().max().unwrap_or(&10);
    let beta = beta_hat(spec, &fixed, top.max(10), tol)?;
    let slope = ctf_convergence_slope(spec, &fixed, opts.slope_lag, &opts.levels, tol)?;
    let h2 = 2.0 * fixed.hurst();
    let leading_coefficient_predicted =
        offset.d_hat / fixed.variance() * (1.0 - (opts.slope_lag as f64).powf(h2));
    let sgap = spectral_gap_profile(spec, &fixed, &opts.x_grid, tol)?;
    let agap = acvf_gap_profile(spec, &fixed, &opts.n_grid, tol)?;
    let curves = vec![
        Curve {
            label: "vtf_offset".into(),
            points: offset.probes.iter().map(|&(n, o)| (n as f64, o)).collect(),
        },
        Curve {
            label: "ctf_difference".into(),
            points: slope.points.iter().map(|&(m, d)| (m as f64, d)).collect(),
        },
        Curve { label: "spectral_gap".into(), points: sgap.points.clone() },
        Curve {
            label: "acvf_gap".into(),
            points: agap.points.iter().map(|&(n, d, _)| (n as f64, d)).collect(),
        },
        Curve {
            label: "acvf_gap_envelope".into(),
            points: agap.points.iter().map(|&(n, _, e)| (n as f64, e)).collect(),
        },
    ];
    Ok(ClosenessReport {
        spec: spec.clone(),
        fixed_point: fixed,
        offset,
        beta_hat: beta,
        slope,
        leading_coefficient_predicted,
        spectral_gap_slope: sgap.slope,
        spectral_gap_nonnegative: sgap.nonnegative,
        acvf_envelope_variation: agap.envelope_variation,
        max_abs_vtf_gap: agap.max_abs_vtf_gap,
        curves,
    })
}

/// A base process, an additive noise and the grid on which the two are
/// compared with their shared fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrittlenessExperiment {
    pub base: ProcessSpec,
    pub noise: ProcessSpec,
    pub weight: f64,
    pub levels: Vec<usize>,
    pub lags: Vec<usize>,
}

/// `spec` rescaled to unit variance.
pub fn unit_variance(spec: &ProcessSpec, tol: &Tolerance) -> Result<ProcessSpec> {
    let v = acvf(spec, 0, tol)?.variance();
    spec.scaled(1.0 / v)
}

impl BrittlenessExperiment {
    /// The three built-in set-ups: unit-variance FARIMA(0,0.3,0) plus white
    /// noise; FARIMA(1,0.3,1) plus ARMA(1,1) (φ = 0.3, θ = 0.7); and
    /// FARIMA(0,0.3,0) plus FARIMA(0,0.2,0). Noise weight 0.1, levels
    /// {1, 10, 100}, lags 1..=10.
    pub fn builtin(id: u8) -> Result<Self> {
        let tol = Tolerance::default();
        let (base, noise) = match id {
            1 => (
                ProcessSpec::farima_0d0(0.3, 1.0)?,
                ProcessSpec::short_memory(ShortMemorySpec::white_noise(1.0)?)?,
            ),
            2 => (
                ProcessSpec::frac_diff(0.8, ShortMemorySpec::arma(vec![0.3], vec![0.7], 1.0)?)?,
                ProcessSpec::short_memory(ShortMemorySpec::arma(vec![0.3], vec![0.7], 1.0)?)?,
            ),
            3 => (ProcessSpec::farima_0d0(0.3, 1.0)?, ProcessSpec::farima_0d0(0.2, 1.0)?),
            _ => return Err(Error::config(format!("unknown experiment {id}; expected 1, 2 or 3"))),
        };
        Ok(BrittlenessExperiment {
            base: unit_variance(&base, &tol)?,
            noise: unit_variance(&noise, &tol)?,
            weight: 0.1,
            levels: vec![1, 10, 100],
            lags: (1..=10).collect(),
        })
    }

    /// `base + weight · noise`.
    pub fn perturbed(&self) -> Result<ProcessSpec> {
        ProcessSpec::sum(vec![(self.base.clone(), 1.0), (self.noise.clone(), self.weight)])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.weight.is_finite() && self.weight > 0.0) {
            return Err(Error::config(format!("noise weight must be positive, got {}", self.weight)));
        }
        if self.levels.is_empty() || self.levels.contains(&0) {
            return Err(Error::config("levels must be non-empty and positive"));
        }
        if self.lags.is_empty() || self.lags.contains(&0) {
            return Err(Error::config("lags must be non-empty and positive"));
        }
        self.base.validate()?;
        self.noise.validate()?;
        Ok(())
    }
}

/// One cell of a brittleness table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrittlenessRow {
    pub series_label: String,
    pub m: usize,
    pub n: usize,
    pub value: f64,
}

/// `ω^(m)(n) / ω*^(m)(n)` for the base and the perturbed process at every
/// `(m, n)`; labels are `base` and `perturbed`.
pub fn run_brittleness(exp: &BrittlenessExperiment, tol: &Tolerance) -> Result<Vec<BrittlenessRow>> {
    exp.validate()?;
    let perturbed = exp.perturbed()?;
    let fixed_base = FixedPoint::of_fgn(&matched_fgn(&exp.base)?)?;
    let fixed_pert = FixedPoint::of_fgn(&matched_fgn(&perturbed)?)?;
    if (fixed_base.hurst() - fixed_pert.hurst()).abs() > 1e-10
        || (fixed_base.variance() - fixed_pert.variance()).abs() > 1e-10 * fixed_base.variance()
    {
        return Err(Error::config("base and perturbed processes do not share a fixed point"));
    }
    let top = exp.levels.iter().max().unwrap() * exp.lags.iter().max().unwrap();
    let mut rows = Vec::new();
    for (label, spec, fixed) in [("base", &exp.base, &fixed_base), ("perturbed", &perturbed, &fixed_pert)] {
        let gap = vtf_gap(spec, fixed, top, tol)?;
        for &m in &exp.levels {
            for &n in &exp.lags {
                let k = m * n;
                let value = 1.0 + gap[k] / fixed.omega(k as f64);
                rows.push(BrittlenessRow { series_label: label.into(), m, n, value });
            }
        }
    }
    Ok(rows)
}
