//! Special functions and accelerated series: gamma functions, the fGn
//! constant `C(H)`, fractional-differencing weights and the lattice sum
//! that appears in the fGn spectral density.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hurst parameter, `0 < H <= 1`.
///
/// `d = H - 1/2` is the matching fractional-differencing order. Operations
/// that need long-range dependence call [`HurstParam::require_lrd`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstParam(f64);

impl HurstParam {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.0 && h <= 1.0 {
            Ok(HurstParam(h))
        } else {
            Err(Error::domain(format!("Hurst parameter {h} outside (0, 1]")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Fractional-differencing order `H - 1/2`.
    #[inline]
    pub fn d(self) -> f64 {
        self.0 - 0.5
    }

    pub fn is_lrd(self) -> bool {
        self.0 > 0.5 && self.0 < 1.0
    }

    pub fn require_lrd(self) -> Result<()> {
        if self.is_lrd() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "H = {} is not in the long-range dependent range (1/2, 1)",
                self.0
            )))
        }
    }
}

impl TryFrom<f64> for HurstParam {
    type Error = Error;
    fn try_from(h: f64) -> Result<Self> {
        HurstParam::new(h)
    }
}

impl From<HurstParam> for f64 {
    fn from(h: HurstParam) -> f64 {
        h.0
    }
}

/// Accuracy targets for adaptive routines. `max_terms` bounds every
/// adaptive loop (lattice terms, FFT grid size, quadrature panels).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0 && max_terms > 0) {
            return Err(Error::domain(format!(
                "tolerance must be strictly positive (abs {abs_tol}, rel {rel_tol}, terms {max_terms})"
            )));
        }
        Ok(Tolerance { abs_tol, rel_tol, max_terms })
    }

    pub fn with_abs(self, abs_tol: f64) -> Result<Self> {
        Tolerance::new(abs_tol, self.rel_tol, self.max_terms)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-12, rel_tol: 1e-13, max_terms: 1 << 22 }
    }
}

// Bernoulli numbers B_2, B_4, ..., B_16.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Natural log of the gamma function for `x > 0`.
///
/// Stirling's series with eight Bernoulli corrections for `x >= 10`;
/// smaller arguments are shifted up with the recurrence.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(log_gamma_pos(x))
}

fn log_gamma_pos(x: f64) -> f64 {
    if x >= 10.0 {
        return stirling(x);
    }
    let shift = (10.0 - x).ceil() as usize;
    let mut prod = 1.0;
    for i in 0..shift {
        prod *= x + i as f64;
    }
    stirling(x + shift as f64) - prod.ln()
}

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut pow = inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let two_k = 2.0 * (k + 1) as f64;
        corr += b / (two_k * (two_k - 1.0)) * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + corr
}

/// Gamma function on the real line, using reflection for negative
/// arguments. Poles (non-positive integers) are a domain error.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("gamma of non-finite {x}")));
    }
    if x > 0.0 {
        return Ok(log_gamma_pos(x).exp());
    }
    if x == x.floor() {
        return Err(Error::domain(format!("gamma has a pole at {x}")));
    }
    // Γ(x) Γ(1-x) = π / sin(πx)
    let s = (PI * x).sin();
    Ok(PI / (s * log_gamma_pos(1.0 - x).exp()))
}

/// `C(H) = π⁻¹ H Γ(2H) sin(Hπ)`, the fGn spectral prefactor constant.
pub fn c_of_h(h: HurstParam) -> Result<f64> {
    let h = h.value();
    if h >= 1.0 {
        return Err(Error::domain("C(H) requires H < 1"));
    }
    Ok(h * gamma(2.0 * h)? * (PI * h).sin() / PI)
}

/// Coefficients `ψ_0..=ψ_{n_max}` of the expansion of `(1 - B)^d`.
pub fn frac_diff_coeffs(d: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(d > -1.0 && d < 0.5) {
        return Err(Error::domain(format!(
            "differencing order {d} outside (-1, 1/2)"
        )));
    }
    let mut psi = Vec::with_capacity(n_max + 1);
    psi.push(1.0);
    for j in 1..=n_max {
        let jf = j as f64;
        psi.push(psi[j - 1] * (jf - 1.0 - d) / jf);
    }
    Ok(psi)
}

/// Rising factorial `(p)_k`.
fn rising(p: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (p + i as f64))
}

/// Euler–Maclaurin value of `Σ_{j >= start} (j + shift)^{-p}` for `p > 1`
/// and `start + shift > 0`, together with the remainder bound.
///
/// The summand is completely monotone, so the error is bounded by the
/// first omitted correction (the `B_8` term).
pub(crate) fn power_tail(p: f64, shift: f64, start: f64) -> (f64, f64) {
    let a = start + shift;
    let f = a.powf(-p);
    let mut value = a * f / (p - 1.0) + 0.5 * f;
    let mut fact = 2.0; // (2k)!
    for k in 1..=3usize {
        let order = 2 * k - 1;
        value += BERNOULLI_EVEN[k - 1] / fact * rising(p, order) * a.powi(-(order as i32)) * f;
        fact *= ((2 * k + 1) * (2 * k + 2)) as f64;
    }
    let bound = (BERNOULLI_EVEN[3] / fact).abs() * rising(p, 7) * a.powi(-7) * f;
    (value, bound)
}

/// Lattice sum `S(x) = Σ_{j∈Z} |2πj + 2πx|^{-(2H+1)}` for `0 < |x| <= 1/2`.
///
/// Terms with `|j| <= J` are summed directly; both tails are replaced by
/// Euler–Maclaurin with `J` picked so that the remainder bound is below
/// `tol.abs_tol`.
pub fn fgn_lattice_sum(x: f64, h: HurstParam, tol: &Tolerance) -> Result<f64> {
    if x == 0.0 || !(x.abs() <= 0.5) {
        return Err(Error::domain(format!(
            "lattice sum needs 0 < |x| <= 1/2, got {x}"
        )));
    }
    let a = x.abs();
    let p = 2.0 * h.value() + 1.0;
    let scale = (2.0 * PI).powf(-p);

    // Remainder bound of one tail starting at J+1 is about c (J+1-a)^{-p-7}.
    let c = (BERNOULLI_EVEN[3] / 40320.0).abs() * rising(p, 7) * scale * 2.0;
    let head = a.powf(-p) * scale;
    let target = tol.abs_tol.min(tol.rel_tol * head);
    let mut j_max = ((c / target).powf(1.0 / (p + 7.0)).ceil() as usize).max(4);
    if j_max > tol.max_terms {
        return Err(Error::Convergence {
            routine: "fgn_lattice_sum",
            detail: format!("needs {j_max} terms, budget {}", tol.max_terms),
        });
    }
    loop {
        let start = (j_max + 1) as f64;
        let (t_plus, b_plus) = power_tail(p, a, start);
        let (t_minus, b_minus) = power_tail(p, -a, start);
        if (b_plus + b_minus) * scale <= target || j_max >= tol.max_terms {
            if (b_plus + b_minus) * scale > target {
                return Err(Error::Convergence {
                    routine: "fgn_lattice_sum",
                    detail: format!("remainder {:e} above {target:e}", (b_plus + b_minus) * scale),
                });
            }
            // Sum the small terms first.
            let mut acc = t_plus + t_minus;
            for j in (1..=j_max).rev() {
                let jf = j as f64;
                acc += (jf + a).powf(-p) + (jf - a).powf(-p);
            }
            acc += a.powf(-p);
            return Ok(acc * scale);
        }
        j_max = (j_max * 2).min(tol.max_terms);
    }
}
