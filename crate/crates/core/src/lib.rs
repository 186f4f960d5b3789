//! Exact second-order structure of fractionally differenced processes and
//! fractional Gaussian noise: spectra, autocovariances, variance-time
//! functions, aggregation, closeness diagnostics and exact Gaussian
//! sampling.

pub mod asymptotics;
pub mod covariance;
pub mod error;
pub mod process;
pub mod quadrature;
pub mod sampler;
pub mod special;
pub mod summation;
pub mod vtf;

pub use covariance::{acvf, AcvfRoute, AcvfTable};
pub use error::{Error, Result};
pub use process::{matched_fgn, parse_spec, prefactor, spectrum, ProcessSpec, ShortMemorySpec};
pub use special::{HurstParam, Tolerance};
pub use vtf::{vtf, FixedPoint, VtfView};
