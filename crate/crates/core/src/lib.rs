//! Fourier-domain sensitivity analysis for image classifiers.
//!
//! The crate covers amplitude/phase interpolation paths between images,
//! synthetic corruptions and the power spectrum of the shift they induce,
//! per-path prediction metrics (high frequency fraction and consistent
//! distance), a random-projection estimator of the input-output Jacobian
//! norm, and probit-domain regressions of out-of-distribution accuracy.

pub mod cli;
pub mod corruptions;
pub mod error;
pub mod image;
pub mod io;
pub mod jacobian;
pub mod path_metrics;
pub mod paths;
pub mod pipeline;
pub mod rng;
pub mod robustness_stats;
pub mod shift_psd;
pub mod spectral;
pub mod synthetic;

pub use error::{Error, Result};
pub use image::ImageTensor;
