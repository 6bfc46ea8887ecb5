//! L1 simplex regression with "first derivatives at the optimum" (fdao)
//! parameter uncertainty.
//!
//! A model is fit to `(x, y)` data by Nelder-Mead minimisation of the sum of
//! absolute residuals. Each residual is then divided by the model's analytic
//! partial derivative with respect to one parameter, evaluated at the optimum,
//! which yields a per-parameter sample of fluctuation estimates. Those samples
//! are summarised nonparametrically (median, Hodges-Lehmann 95% interval,
//! range, skewness, kurtosis) and scored with the `upsilon` quality estimator.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! operating system (entropy, files, the command line) lives in `fdao-cli`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;

pub mod fdao;
pub mod ingest;
pub mod models;
pub mod montecarlo;
pub mod prng;
pub mod simplex;
pub mod stats;

pub use error::Error;
pub use fdao::{analyze, gamma_sets, summarize, upsilon, AnalysisConfig, FdaoReport, GammaSet, ParamUncertainty};
pub use models::{Dataset, ModelFamily, ModelSpec, ParamVector};
pub use prng::{CauchyParams, Mt19937, SeedSource};
pub use simplex::{fit, FitResult, SimplexConfig, StopReason};

pub type Result<T, E = Error> = core::result::Result<T, E>;
