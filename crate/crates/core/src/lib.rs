//! Large-scale MISO links with transceiver hardware impairments.
//!
//! The crate covers the uplink pilot phase (distortion-aware LMMSE
//! estimation and its error floor), the downlink capacity bounds under
//! perfect and estimated CSI, energy efficiency under antenna-dependent
//! power scaling, and deterministic experiment sweeps that write CSV.
//!
//! ```
//! use hwmiso::capacity::{capacity_upper_bound, DownlinkConfig};
//! use hwmiso::estimation::ImpairmentProfile;
//! use hwmiso::randmat::CovarianceMatrix;
//!
//! let imp = ImpairmentProfile::uniform(0.05 * 0.05).unwrap();
//! let dl = DownlinkConfig::new(100.0, 1.0, imp).unwrap();
//! let c = capacity_upper_bound(&CovarianceMatrix::identity(64), &dl).unwrap();
//! assert!(c < (1.0f64 + 1.0 / 0.0025).log2());
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod energy;
pub mod error;
pub mod estimation;
pub mod experiment;
mod linalg;
pub mod montecarlo;
pub mod randmat;
pub mod specfun;
pub mod sweep;

pub use error::{Error, Result};
