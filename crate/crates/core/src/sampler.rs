//! Exact Gaussian sample paths by circulant embedding.
//!
//! The covariance `γ(0..N-1)` is embedded in a circulant of size
//! `M ≥ 2(N-1)` (a power of two), whose eigenvalues come from one FFT.
//! Paths are the real part of `FFT(√(λ/M) (a + ib))` with `a, b` standard
//! normal.
//!
//! Randomness: `ChaCha20Rng` seeded from the 64-bit seed, path `i` drawn
//! from stream `i`, so batches are reproducible whatever the thread count.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, Fft, FftPlanner};
use std::sync::Arc;

use crate::covariance::acvf;
use crate::error::{Error, Result};
use crate::process::ProcessSpec;
use crate::special::Tolerance;

/// Negative eigenvalues above `-NEGATIVE_TOL · max λ` count as roundoff.
pub const NEGATIVE_TOL: f64 = 1e-10;
/// After the retries, eigenvalues down to `-CLIP_TOL · max λ` are clipped
/// to zero with a warning; anything more negative is an error.
pub const CLIP_TOL: f64 = 1e-4;
const RETRIES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub spec: ProcessSpec,
    pub seed: u64,
    pub values: Vec<f64>,
}

/// Square roots of the scaled circulant eigenvalues for one `(spec, N)`.
#[derive(Clone)]
pub struct CirculantEmbedding {
    n: usize,
    scaled_sqrt: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantEmbedding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantEmbedding")
            .field("n", &self.n)
            .field("size", &self.scaled_sqrt.len())
            .finish()
    }
}

fn eigenvalues(gamma: &[f64], m: usize, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> =
        (0..m).map(|k| Complex::new(gamma[k.min(m - k)], 0.0)).collect();
    planner.plan_fft_forward(m).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

impl CirculantEmbedding {
    pub fn new(spec: &ProcessSpec, n: usize, tol: &Tolerance) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("path length must be at least 2, got {n}")));
        }
        let mut planner = FftPlanner::new();
        let mut m = (2 * (n - 1)).next_power_of_two();
        let mut attempt = 0;
        loop {
            let gamma = acvf(spec, m / 2, tol)?;
            let lambda = eigenvalues(gamma.values(), m, &mut planner);
            let max = lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
            if min >= -NEGATIVE_TOL * max || attempt == RETRIES {
                if min < -CLIP_TOL * max {
                    return Err(Error::Convergence {
                        routine: "circulant_embedding",
                        detail: format!(
                            "smallest eigenvalue {min:e} (largest {max:e}) at size {m}; a larger embedding is needed"
                        ),
                    });
                }
                if min < -NEGATIVE_TOL * max {
                    warn!("clipping negative circulant eigenvalues down to {min:e} (largest {max:e}, size {m})");
                }
                let scaled_sqrt = lambda.iter().map(|&l| (l.max(0.0) / m as f64).sqrt()).collect();
                return Ok(CirculantEmbedding { n, scaled_sqrt, fft: planner.plan_fft_forward(m) });
            }
            attempt += 1;
            m *= 2;
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Embedding size `M`.
    pub fn size(&self) -> usize {
        self.scaled_sqrt.len()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = self
            .scaled_sqrt
            .iter()
            .map(|&s| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                Complex::new(s * a, s * b)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.iter().take(self.n).map(|c| c.re).collect()
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One path of length `n`.
pub fn sample(spec: &ProcessSpec, n: usize, seed: u64, tol: &Tolerance) -> Result<SamplePath> {
    let emb = CirculantEmbedding::new(spec, n, tol)?;
    let values = emb.draw(&mut stream_rng(seed, 0));
    Ok(SamplePath { spec: spec.clone(), seed, values })
}

/// `paths` independent paths; path `i` uses stream `i` of `seed`, and path 0
/// equals [`sample`] with the same seed.
pub fn sample_many(spec: &ProcessSpec, n: usize, paths: usize, seed: u64, tol: &Tolerance) -> Result<Vec<SamplePath>> {
    let emb = CirculantEmbedding::new(spec, n, tol)?;
    Ok((0..paths)
        .into_par_iter()
        .map(|i| SamplePath { spec: spec.clone(), seed, values: emb.draw(&mut stream_rng(seed, i as u64)) })
        .collect())
}

/// Empirical autocovariance with known zero mean,
/// `γ̂(k) = (N-k)^{-1} Σ_t x_t x_{t+k}`.
pub fn empirical_acvf(values: &[f64], max_lag: usize) -> Vec<f64> {
    let n = values.len();
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|k| values.iter().zip(&values[k..]).map(|(a, b)| a * b).sum::<f64>() / (n - k) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ShortMemorySpec;

    #[test]
    fn rejects_short_paths() {
        let spec = ProcessSpec::fgn(0.8, 1.0).unwrap();
        assert!(matches!(sample(&spec, 1, 0, &Tolerance::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let spec = ProcessSpec::fgn(0.8, 1.0).unwrap();
        let tol = Tolerance::default();
        let a = sample(&spec, 100, 42, &tol).unwrap();
        let b = sample(&spec, 100, 42, &tol).unwrap();
        let c = sample(&spec, 100, 43, &tol).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
        let many = sample_many(&spec, 100, 3, 42, &tol).unwrap();
        assert_eq!(many[0].values, a.values);
        assert_ne!(many[1].values, a.values);
    }

    #[test]
    fn embedding_size_is_a_power_of_two() {
        let spec = ProcessSpec::short_memory(ShortMemorySpec::white_noise(1.0).unwrap()).unwrap();
        let e = CirculantEmbedding::new(&spec, 1000, &Tolerance::default()).unwrap();
        assert_eq!(e.size(), 2048);
        assert_eq!(e.len(), 1000);
    }

    #[test]
    fn empirical_acvf_of_constant() {
        assert_eq!(empirical_acvf(&[2.0; 5], 2), vec![4.0, 4.0, 4.0]);
    }
}
