//! Process specifications and their spectral densities.
//!
//! Frequencies are normalised to `x ∈ [-1/2, 1/2]` and the ACVF is
//! `γ(n) = ∫ f(x) e^{2πixn} dx` over that interval, so white noise of
//! variance `v` has the flat density `v`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{c_of_h, fgn_lattice_sum, HurstParam, Tolerance};

/// Root-modulus margin for ARMA causality and invertibility.
pub const ROOT_MARGIN: f64 = 1e-9;

/// Short-memory driver of a fractionally differenced process.
#[derive(Debug, Clone, PartialEq)]
pub enum ShortMemorySpec {
    WhiteNoise { variance: f64 },
    Arma(Arma),
    Fexp(Fexp),
}

/// Causal, invertible ARMA(p, q): `φ(B) Y = θ(B) ε` with
/// `φ(z) = 1 - Σ φ_k z^k`, `θ(z) = 1 + Σ θ_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Arma {
    ar: Vec<f64>,
    ma: Vec<f64>,
    innovation_variance: f64,
}

/// FEXP driver: `log h(x) = Σ_k θ_k cos(2πkx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fexp {
    theta: Vec<f64>,
}

fn check_variance(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be positive and finite, got {v}")))
    }
}

/// Moduli of the roots of `1 + Σ c_k z^k`.
fn root_moduli(coeffs: &[f64]) -> Vec<f64> {
    let trimmed: Vec<f64> = {
        let mut c = coeffs.to_vec();
        while c.last() == Some(&0.0) {
            c.pop();
        }
        c
    };
    let p = trimmed.len();
    if p == 0 {
        return Vec::new();
    }
    // Roots of z^p + (c_{p-1}/c_p) z^{p-1} + ... + 1/c_p via the companion matrix.
    let lead = trimmed[p - 1];
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    for k in 0..p {
        // coefficient of z^k in the monic polynomial
        let ck = if k == 0 { 1.0 } else { trimmed[k - 1] };
        companion[(k, p - 1)] = -ck / lead;
    }
    companion.complex_eigenvalues().iter().map(|z| z.norm()).collect()
}

impl Arma {
    pub fn new(ar: Vec<f64>, ma: Vec<f64>, innovation_variance: f64) -> Result<Self> {
        check_variance(innovation_variance, "ARMA innovation variance")?;
        if ar.iter().chain(ma.iter()).any(|c| !c.is_finite()) {
            return Err(Error::domain("ARMA coefficients must be finite"));
        }
        let neg_ar: Vec<f64> = ar.iter().map(|c| -c).collect();
        if let Some(m) = root_moduli(&neg_ar).into_iter().find(|&m| m <= 1.0 + ROOT_MARGIN) {
            return Err(Error::domain(format!(
                "AR polynomial is not causal: root modulus {m}"
            )));
        }
        if let Some(m) = root_moduli(&ma).into_iter().find(|&m| m <= 1.0 + ROOT_MARGIN) {
            return Err(Error::domain(format!(
                "MA polynomial is not invertible: root modulus {m}"
            )));
        }
        Ok(Arma { ar, ma, innovation_variance })
    }

    pub fn ar(&self) -> &[f64] {
        &self.ar
    }

    pub fn ma(&self) -> &[f64] {
        &self.ma
    }

    pub fn innovation_variance(&self) -> f64 {
        self.innovation_variance
    }

    fn density(&self, x: f64) -> f64 {
        let z = Complex64::from_polar(1.0, 2.0 * PI * x);
        let mut zk = Complex64::new(1.0, 0.0);
        let mut num = Complex64::new(1.0, 0.0);
        let mut den = Complex64::new(1.0, 0.0);
        for k in 0..self.ar.len().max(self.ma.len()) {
            zk *= z;
            if let Some(t) = self.ma.get(k) {
                num += zk * *t;
            }
            if let Some(p) = self.ar.get(k) {
                den -= zk * *p;
            }
        }
        self.innovation_variance * num.norm_sqr() / den.norm_sqr()
    }
}

impl Fexp {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("FEXP coefficients must be finite"));
        }
        Ok(Fexp { theta })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    fn density(&self, x: f64) -> f64 {
        self.theta
            .iter()
            .enumerate()
            .map(|(k, t)| t * (2.0 * PI * (k + 1) as f64 * x).cos())
            .sum::<f64>()
            .exp()
    }
}

impl ShortMemorySpec {
    pub fn white_noise(variance: f64) -> Result<Self> {
        check_variance(variance, "white-noise variance")?;
        Ok(ShortMemorySpec::WhiteNoise { variance })
    }

    pub fn arma(ar: Vec<f64>, ma: Vec<f64>, innovation_variance: f64) -> Result<Self> {
        Ok(ShortMemorySpec::Arma(Arma::new(ar, ma, innovation_variance)?))
    }

    pub fn fexp(theta: Vec<f64>) -> Result<Self> {
        Ok(ShortMemorySpec::Fexp(Fexp::new(theta)?))
    }

    fn validate(&self) -> Result<()> {
        match self {
            ShortMemorySpec::WhiteNoise { variance } => check_variance(*variance, "white-noise variance"),
            ShortMemorySpec::Arma(a) => Arma::new(a.ar.clone(), a.ma.clone(), a.innovation_variance).map(|_| ()),
            ShortMemorySpec::Fexp(f) => Fexp::new(f.theta.clone()).map(|_| ()),
        }
    }

    /// Same driver with its density multiplied by `factor`, when the
    /// variant has a scale parameter.
    fn scaled(&self, factor: f64) -> Option<Self> {
        match self {
            ShortMemorySpec::WhiteNoise { variance } => {
                Some(ShortMemorySpec::WhiteNoise { variance: variance * factor })
            }
            ShortMemorySpec::Arma(a) => Some(ShortMemorySpec::Arma(Arma {
                innovation_variance: a.innovation_variance * factor,
                ..a.clone()
            })),
            ShortMemorySpec::Fexp(_) => None,
        }
    }
}

/// Spectral density `h(x)` of a short-memory driver.
pub fn driver_density(s: &ShortMemorySpec, x: f64) -> Result<f64> {
    if !(x.abs() <= 0.5) {
        return Err(Error::domain(format!("frequency {x} outside [-1/2, 1/2]")));
    }
    Ok(match s {
        ShortMemorySpec::WhiteNoise { variance } => *variance,
        ShortMemorySpec::Arma(a) => a.density(x),
        ShortMemorySpec::Fexp(f) => f.density(x),
    })
}

/// One term of an independent sum; `weight` scales the variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub spec: ProcessSpec,
    pub weight: f64,
}

/// Declarative description of a stationary second-order process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "schema::SpecDoc", into = "schema::SpecDoc")]
pub enum ProcessSpec {
    /// Fractional Gaussian noise with variance `V`.
    Fgn { hurst: HurstParam, variance: f64 },
    /// `(1 - B)^{-(H - 1/2)} Y` with `Y` the short-memory driver.
    FracDiff { hurst: HurstParam, driver: ShortMemorySpec },
    /// A short-range dependent process on its own.
    ShortMemory(ShortMemorySpec),
    /// Independent sum, weights multiplying variances.
    Sum(Vec<Component>),
}

impl ProcessSpec {
    pub fn fgn(h: f64, variance: f64) -> Result<Self> {
        let hurst = HurstParam::new(h)?;
        check_variance(variance, "fGn variance")?;
        Ok(ProcessSpec::Fgn { hurst, variance })
    }

    pub fn frac_diff(h: f64, driver: ShortMemorySpec) -> Result<Self> {
        let hurst = HurstParam::new(h)?;
        if hurst.value() >= 1.0 {
            return Err(Error::domain("fractional differencing needs H < 1"));
        }
        driver.validate()?;
        Ok(ProcessSpec::FracDiff { hurst, driver })
    }

    /// FARIMA(0, d, 0) with innovation variance `sigma2`, `d = H - 1/2`.
    pub fn farima_0d0(d: f64, sigma2: f64) -> Result<Self> {
        ProcessSpec::frac_diff(d + 0.5, ShortMemorySpec::white_noise(sigma2)?)
    }

    pub fn short_memory(driver: ShortMemorySpec) -> Result<Self> {
        driver.validate()?;
        Ok(ProcessSpec::ShortMemory(driver))
    }

    pub fn sum(components: Vec<(ProcessSpec, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("a sum needs at least one component"));
        }
        let mut out = Vec::with_capacity(components.len());
        for (spec, weight) in components {
            check_variance(weight, "sum weight")?;
            spec.validate()?;
            out.push(Component { spec, weight });
        }
        Ok(ProcessSpec::Sum(out))
    }

    /// Re-checks every invariant; used after deserialisation.
    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::Fgn { variance, .. } => check_variance(*variance, "fGn variance"),
            ProcessSpec::FracDiff { hurst, driver } => {
                if hurst.value() >= 1.0 {
                    return Err(Error::domain("fractional differencing needs H < 1"));
                }
                driver.validate()
            }
            ProcessSpec::ShortMemory(d) => d.validate(),
            ProcessSpec::Sum(cs) => {
                if cs.is_empty() {
                    return Err(Error::domain("a sum needs at least one component"));
                }
                for c in cs {
                    check_variance(c.weight, "sum weight")?;
                    c.spec.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Largest Hurst parameter among the components; short-memory parts
    /// count as 1/2.
    pub fn dominant_hurst(&self) -> f64 {
        match self {
            ProcessSpec::Fgn { hurst, .. } | ProcessSpec::FracDiff { hurst, .. } => hurst.value(),
            ProcessSpec::ShortMemory(_) => 0.5,
            ProcessSpec::Sum(cs) => cs
                .iter()
                .map(|c| c.spec.dominant_hurst())
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn is_lrd(&self) -> bool {
        let h = self.dominant_hurst();
        h > 0.5 && h < 1.0
    }

    /// The process with every variance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        check_variance(factor, "scale factor")?;
        Ok(match self {
            ProcessSpec::Fgn { hurst, variance } => ProcessSpec::Fgn { hurst: *hurst, variance: variance * factor },
            ProcessSpec::FracDiff { hurst, driver } => match driver.scaled(factor) {
                Some(d) => ProcessSpec::FracDiff { hurst: *hurst, driver: d },
                None => ProcessSpec::Sum(vec![Component { spec: self.clone(), weight: factor }]),
            },
            ProcessSpec::ShortMemory(driver) => match driver.scaled(factor) {
                Some(d) => ProcessSpec::ShortMemory(d),
                None => ProcessSpec::Sum(vec![Component { spec: self.clone(), weight: factor }]),
            },
            ProcessSpec::Sum(cs) => ProcessSpec::Sum(
                cs.iter()
                    .map(|c| Component { spec: c.spec.clone(), weight: c.weight * factor })
                    .collect(),
            ),
        })
    }

    /// Spectral density at `x ∈ [-1/2, 1/2]`.
    pub fn spectrum(&self, x: f64, tol: &Tolerance) -> Result<f64> {
        spectrum(self, x, tol)
    }
}

/// Spectral density of `spec` at normalised frequency `x`.
///
/// `x = 0` is allowed only where the density is finite (no component
/// with `H > 1/2`).
pub fn spectrum(spec: &ProcessSpec, x: f64, tol: &Tolerance) -> Result<f64> {
    if !(x.abs() <= 0.5) {
        return Err(Error::domain(format!("frequency {x} outside [-1/2, 1/2]")));
    }
    match spec {
        ProcessSpec::Fgn { hurst, variance } => fgn_spectrum(*hurst, *variance, x, tol),
        ProcessSpec::FracDiff { hurst, driver } => {
            let h = driver_density(driver, x)?;
            let expo = 2.0 * hurst.value() - 1.0;
            if x == 0.0 {
                return zero_frequency(expo, h);
            }
            Ok(h * (2.0 * (PI * x).sin()).abs().powf(-expo))
        }
        ProcessSpec::ShortMemory(driver) => driver_density(driver, x),
        ProcessSpec::Sum(cs) => {
            let mut total = 0.0;
            for c in cs {
                total += c.weight * spectrum(&c.spec, x, tol)?;
            }
            Ok(total)
        }
    }
}

fn zero_frequency(expo: f64, value_at_half: f64) -> Result<f64> {
    if expo > 0.0 {
        Err(Error::domain("spectral density diverges at x = 0 for H > 1/2"))
    } else if expo == 0.0 {
        Ok(value_at_half)
    } else {
        Ok(0.0)
    }
}

fn fgn_spectrum(hurst: HurstParam, variance: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    let h = hurst.value();
    if x == 0.0 {
        return zero_frequency(2.0 * h - 1.0, variance);
    }
    let cfs = variance * (2.0 * PI).powf(2.0 - 2.0 * h) * c_of_h(hurst)?;
    let s = fgn_lattice_sum(x, hurst, tol)?;
    let sin = (PI * x).sin();
    Ok(cfs / (PI * PI) * (2.0 * PI).powf(2.0 * h + 1.0) * sin * sin * s)
}

/// Power-law prefactor `c_f = lim_{x→0} |x|^{2H-1} f(x)` for an LRD spec.
pub fn prefactor(spec: &ProcessSpec) -> Result<f64> {
    if !spec.is_lrd() {
        return Err(Error::domain("no LRD prefactor: dominating H is not in (1/2, 1)"));
    }
    prefactor_at(spec, spec.dominant_hurst())
}

fn prefactor_at(spec: &ProcessSpec, h_dom: f64) -> Result<f64> {
    if spec.dominant_hurst() < h_dom {
        return Ok(0.0);
    }
    match spec {
        ProcessSpec::Fgn { hurst, variance } => {
            Ok(variance * (2.0 * PI).powf(2.0 - 2.0 * h_dom) * c_of_h(*hurst)?)
        }
        ProcessSpec::FracDiff { driver, .. } => {
            Ok((2.0 * PI).powf(1.0 - 2.0 * h_dom) * driver_density(driver, 0.0)?)
        }
        ProcessSpec::ShortMemory(_) => Ok(0.0),
        ProcessSpec::Sum(cs) => {
            let mut total = 0.0;
            for c in cs {
                total += c.weight * prefactor_at(&c.spec, h_dom)?;
            }
            Ok(total)
        }
    }
}

/// The fGn that `spec` converges to under aggregation: same `H`, and a
/// variance chosen so that the two power-law prefactors coincide.
pub fn matched_fgn(spec: &ProcessSpec) -> Result<ProcessSpec> {
    if let ProcessSpec::Fgn { hurst, .. } = spec {
        hurst.require_lrd()?;
        return Ok(spec.clone());
    }
    let cf = prefactor(spec)?;
    let hurst = HurstParam::new(spec.dominant_hurst())?;
    let h = hurst.value();
    let variance = cf / ((2.0 * PI).powf(2.0 - 2.0 * h) * c_of_h(hurst)?);
    Ok(ProcessSpec::Fgn { hurst, variance })
}

/// `g(x) = f(x) / f*(x)` against the matched fGn; `g(0)` is the limit
/// `c_f / c_f* = 1`.
pub fn spectral_ratio(spec: &ProcessSpec, fixed: &ProcessSpec, x: f64, tol: &Tolerance) -> Result<f64> {
    if x == 0.0 {
        return Ok(prefactor(spec)? / prefactor(fixed)?);
    }
    Ok(spectrum(spec, x, tol)? / spectrum(fixed, x, tol)?)
}

pub(crate) mod schema {
    //! JSON layout of process specifications.

    use serde::{Deserialize, Serialize};

    use super::{Arma, Component, Fexp, ProcessSpec, ShortMemorySpec};
    use crate::error::Error;
    use crate::special::HurstParam;

    fn one() -> f64 {
        1.0
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    #[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
    pub enum DriverDoc {
        #[serde(alias = "white_noise")]
        White {
            #[serde(default = "one")]
            variance: f64,
        },
        Arma {
            #[serde(default)]
            ar: Vec<f64>,
            #[serde(default)]
            ma: Vec<f64>,
            #[serde(default = "one")]
            sigma2: f64,
        },
        Fexp {
            theta: Vec<f64>,
        },
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct ComponentDoc {
        pub spec: SpecDoc,
        pub weight: f64,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    #[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
    pub enum SpecDoc {
        Fgn {
            #[serde(rename = "H")]
            h: f64,
            #[serde(rename = "V", default = "one")]
            v: f64,
        },
        Fracdiff {
            #[serde(rename = "H")]
            h: f64,
            driver: DriverDoc,
        },
        Sum {
            components: Vec<ComponentDoc>,
        },
        #[serde(alias = "white_noise")]
        White {
            #[serde(default = "one")]
            variance: f64,
        },
        Arma {
            #[serde(default)]
            ar: Vec<f64>,
            #[serde(default)]
            ma: Vec<f64>,
            #[serde(default = "one")]
            sigma2: f64,
        },
        Fexp {
            theta: Vec<f64>,
        },
    }

    impl TryFrom<DriverDoc> for ShortMemorySpec {
        type Error = Error;
        fn try_from(d: DriverDoc) -> Result<Self, Error> {
            match d {
                DriverDoc::White { variance } => ShortMemorySpec::white_noise(variance),
                DriverDoc::Arma { ar, ma, sigma2 } => ShortMemorySpec::arma(ar, ma, sigma2),
                DriverDoc::Fexp { theta } => ShortMemorySpec::fexp(theta),
            }
        }
    }

    impl From<ShortMemorySpec> for DriverDoc {
        fn from(s: ShortMemorySpec) -> Self {
            match s {
                ShortMemorySpec::WhiteNoise { variance } => DriverDoc::White { variance },
                ShortMemorySpec::Arma(Arma { ar, ma, innovation_variance }) => {
                    DriverDoc::Arma { ar, ma, sigma2: innovation_variance }
                }
                ShortMemorySpec::Fexp(Fexp { theta }) => DriverDoc::Fexp { theta },
            }
        }
    }

    impl TryFrom<SpecDoc> for ProcessSpec {
        type Error = Error;
        fn try_from(doc: SpecDoc) -> Result<Self, Error> {
            match doc {
                SpecDoc::Fgn { h, v } => ProcessSpec::fgn(h, v),
                SpecDoc::Fracdiff { h, driver } => ProcessSpec::frac_diff(h, driver.try_into()?),
                SpecDoc::Sum { components } => {
                    let mut out = Vec::with_capacity(components.len());
                    for c in components {
                        out.push((ProcessSpec::try_from(c.spec)?, c.weight));
                    }
                    ProcessSpec::sum(out)
                }
                SpecDoc::White { variance } => ProcessSpec::short_memory(ShortMemorySpec::white_noise(variance)?),
                SpecDoc::Arma { ar, ma, sigma2 } => {
                    ProcessSpec::short_memory(ShortMemorySpec::arma(ar, ma, sigma2)?)
                }
                SpecDoc::Fexp { theta } => ProcessSpec::short_memory(ShortMemorySpec::fexp(theta)?),
            }
        }
    }

    impl From<ProcessSpec> for SpecDoc {
        fn from(spec: ProcessSpec) -> Self {
            match spec {
                ProcessSpec::Fgn { hurst, variance } => SpecDoc::Fgn { h: hurst.value(), v: variance },
                ProcessSpec::FracDiff { hurst, driver } => {
                    SpecDoc::Fracdiff { h: HurstParam::value(hurst), driver: driver.into() }
                }
                ProcessSpec::ShortMemory(d) => match DriverDoc::from(d) {
                    DriverDoc::White { variance } => SpecDoc::White { variance },
                    DriverDoc::Arma { ar, ma, sigma2 } => SpecDoc::Arma { ar, ma, sigma2 },
                    DriverDoc::Fexp { theta } => SpecDoc::Fexp { theta },
                },
                ProcessSpec::Sum(cs) => SpecDoc::Sum {
                    components: cs
                        .into_iter()
                        .map(|Component { spec, weight }| ComponentDoc { spec: spec.into(), weight })
                        .collect(),
                },
            }
        }
    }
}

/// Parses a process specification from JSON text.
pub fn parse_spec(json: &str) -> Result<ProcessSpec> {
    serde_json::from_str(json).map_err(|e| Error::config(format!("invalid process spec: {e}")))
}
