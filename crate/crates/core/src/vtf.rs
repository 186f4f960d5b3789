//! Variance-time and correlation-time functions, the double-integration
//! operator and aggregation.
//!
//! `ω(n) = Var(X_1 + ... + X_n) = (Iγ)(n)` where
//! `(Ia)(n) = Σ_{k=0}^{n-1} Σ_{|i|≤k} a(i)`. Aggregating at level `m`
//! maps `ω(n)` to `ω(mn)/m²`, so aggregated views are plain index and
//! scale transforms of one base table.

use crate::covariance::AcvfTable;
use crate::error::{Error, Result};
use crate::process::ProcessSpec;
use crate::special::HurstParam;
use crate::summation::CompensatedSum;

/// The fGn fixed point `ω*(m) = V m^{2H}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FixedPoint {
    #[serde(rename = "H")]
    hurst: f64,
    #[serde(rename = "V")]
    variance: f64,
}

impl FixedPoint {
    pub fn new(hurst: HurstParam, variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::domain(format!("fixed-point variance must be positive, got {variance}")));
        }
        Ok(FixedPoint { hurst: hurst.value(), variance })
    }

    /// Fixed point of an fGn spec (as returned by `matched_fgn`).
    pub fn of_fgn(spec: &ProcessSpec) -> Result<Self> {
        match spec {
            ProcessSpec::Fgn { hurst, variance } => FixedPoint::new(*hurst, *variance),
            _ => Err(Error::config("fixed point must be given as an fGn spec")),
        }
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn spec(&self) -> ProcessSpec {
        ProcessSpec::Fgn { hurst: HurstParam::new(self.hurst).expect("validated"), variance: self.variance }
    }

    pub fn omega(&self, n: f64) -> f64 {
        self.variance * n.powf(2.0 * self.hurst)
    }

    pub fn rho(&self, n: f64) -> f64 {
        n.powf(2.0 * self.hurst)
    }

    /// `ω*^(m)(n) = V m^{2H-2} n^{2H}`.
    pub fn omega_aggregated(&self, m: f64, n: f64) -> f64 {
        self.variance * m.powf(2.0 * self.hurst - 2.0) * n.powf(2.0 * self.hurst)
    }
}

/// `(Ia)(0..=n_max)` for a symmetric sequence given by `a(0), a(1), ...`;
/// entries past the end of `a` are zero.
pub fn double_integrate(a: &[f64], n_max: usize) -> Vec<f64> {
    let at = |i: usize| a.get(i).copied().unwrap_or(0.0);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0.0);
    // inner = Σ_{|i|≤k} a(i), outer = Σ_{k<n} inner_k
    let mut inner = CompensatedSum::new();
    let mut outer = CompensatedSum::new();
    for k in 0..n_max {
        if k == 0 {
            inner.add(at(0));
        } else {
            inner.add(at(k));
            inner.add(at(k));
        }
        outer.add(inner.value());
        out.push(outer.value());
    }
    out
}

/// `ω(0..=n_max)` over an ACVF table.
#[derive(Debug, Clone)]
pub struct VtfView {
    acvf: AcvfTable,
    values: Vec<f64>,
}

pub fn vtf(acvf: &AcvfTable, n_max: usize) -> Result<VtfView> {
    if n_max > 0 && acvf.n_max() < n_max - 1 {
        return Err(Error::Coverage { required: n_max - 1, available: acvf.n_max() });
    }
    let values = double_integrate(&acvf.values()[..n_max.max(1).min(acvf.values().len())], n_max);
    Ok(VtfView { acvf: acvf.clone(), values })
}

impl VtfView {
    pub fn acvf(&self) -> &AcvfTable {
        &self.acvf
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `ω(n)`, symmetric in `n`.
    pub fn get(&self, n: i64) -> Result<f64> {
        let k = n.unsigned_abs() as usize;
        self.values
            .get(k)
            .copied()
            .ok_or(Error::Coverage { required: k, available: self.n_max() })
    }

    pub fn ctf(&self) -> CtfView<'_> {
        CtfView { vtf: self }
    }

    pub fn aggregate(&self, m: usize) -> Result<AggregatedVtf<'_>> {
        aggregate_vtf(self, m)
    }
}

/// `ρ(n) = ω(n) / ω(1)`.
#[derive(Debug, Clone, Copy)]
pub struct CtfView<'a> {
    vtf: &'a VtfView,
}

impl CtfView<'_> {
    pub fn get(&self, n: i64) -> Result<f64> {
        Ok(self.vtf.get(n)? / self.vtf.get(1)?)
    }
}

/// `ω^(m)(n) = ω(mn) / m²`.
#[derive(Debug, Clone, Copy)]
pub struct AggregatedVtf<'a> {
    base: &'a VtfView,
    m: usize,
}

pub fn aggregate_vtf(v: &VtfView, m: usize) -> Result<AggregatedVtf<'_>> {
    if m == 0 {
        return Err(Error::domain("aggregation level must be at least 1"));
    }
    Ok(AggregatedVtf { base: v, m })
}

impl AggregatedVtf<'_> {
    pub fn level(&self) -> usize {
        self.m
    }

    pub fn get(&self, n: usize) -> Result<f64> {
        let m = self.m as f64;
        Ok(self.base.get((self.m * n) as i64)? / (m * m))
    }

    /// Variance of the aggregated process, `ω(m) / m²`.
    pub fn variance(&self) -> Result<f64> {
        self.get(1)
    }
}

/// `ρ^(m)(n) = ω(mn) / ω(m)`.
pub fn aggregate_ctf(v: &VtfView, m: usize, n: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("aggregation level must be at least 1"));
    }
    Ok(v.get((m * n) as i64)? / v.get(m as i64)?)
}

/// Symmetric convolution of two one-sided finite sequences, returned for
/// lags `0..=n_max`.
fn symmetric_convolution(a: &dyn Fn(i64) -> f64, b: &[f64], n_max: usize) -> Vec<f64> {
    let lb = b.len() as i64 - 1;
    (0..=n_max as i64)
        .map(|n| {
            let mut acc = CompensatedSum::new();
            for j in -lb..=lb {
                acc.add(a(n - j) * b[j.unsigned_abs() as usize]);
            }
            acc.value()
        })
        .collect()
}

/// Largest deviation from `I(a⋆b)(n) = ((Ia)⋆b)(n) - ((Ia)⋆b)(0)` over
/// `n ≤ 2(len a + len b)`, for finitely supported symmetric `a` and `b`.
pub fn conv_double_int_identity_check(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let n_max = 2 * (a.len() + b.len());
    let a_at = |i: i64| a.get(i.unsigned_abs() as usize).copied().unwrap_or(0.0);
    let c = symmetric_convolution(&a_at, b, a.len() + b.len());
    let ic = double_integrate(&c, n_max);
    let ia = double_integrate(a, n_max + b.len());
    let ia_at = |i: i64| ia[i.unsigned_abs() as usize];
    let iab = symmetric_convolution(&ia_at, b, n_max);
    (0..=n_max).map(|n| (ic[n] - (iab[n] - iab[0])).abs()).fold(0.0, f64::max)
}
