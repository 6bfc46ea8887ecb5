//! First derivatives at the optimum.
//!
//! At an optimum `theta_opt`, a residual `delta_i` is read as the change in
//! the model caused by a small fluctuation of one parameter, so
//! `dgamma_{j,i} = delta_i / omega_j(x_i)` where `omega_j` is the partial
//! derivative of the model with respect to parameter `j` at `x_i`. Pooling
//! over all points gives one fluctuation sample per parameter, which is then
//! summarised without distributional assumptions.

use alloc::string::String;
use alloc::vec::Vec;

use crate::models::{Dataset, ModelSpec, ParamVector};
use crate::prng::{derive_seed, Mt19937};
use crate::simplex::{fit, FitResult, SimplexConfig, StopReason};
use crate::stats::{self, Ecdf, HlConfig, HlMethod, Sample};
use crate::{Error, Result};

/// Partial derivatives smaller than this in magnitude count as zero.
pub const OMEGA_ZERO_CUTOFF: f64 = 1e-300;

pub const DEFAULT_ALPHA: f64 = 0.02;

/// Fluctuation sample for one parameter after dropping non-finite quotients.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet {
    pub param_index: usize,
    pub name: String,
    pub values: Vec<f64>,
    pub kept: usize,
    pub dropped_nonfinite: usize,
}

/// One data point's contribution to a [`GammaSet`], for machine-readable dumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRow {
    pub index: usize,
    pub x: f64,
    pub delta: f64,
    pub omega: f64,
    /// `delta / omega`, or `None` when the quotient was dropped.
    pub dgamma: Option<f64>,
}

fn quotient(delta: f64, omega: f64) -> Option<f64> {
    if !omega.is_finite() || omega.abs() < OMEGA_ZERO_CUTOFF {
        return None;
    }
    let q = delta / omega;
    q.is_finite().then_some(q)
}

fn check_alignment(data: &Dataset, fit: &FitResult) -> Result<()> {
    if fit.residuals.len() != data.len() {
        return Err(Error::config(alloc::format!(
            "fit has {} residuals but the dataset has {} points",
            fit.residuals.len(),
            data.len()
        )));
    }
    Ok(())
}

/// Per-point rows for parameter `j`.
pub fn gamma_rows(spec: ModelSpec, data: &Dataset, fit: &FitResult, j: usize) -> Result<Vec<GammaRow>> {
    check_alignment(data, fit)?;
    if j >= spec.arity() {
        return Err(Error::config(alloc::format!("parameter index {j} out of range")));
    }
    let theta = fit.theta_opt.values();
    let mut grad = alloc::vec![0.0; spec.arity()];
    Ok(data
        .xs()
        .iter()
        .zip(&fit.residuals)
        .enumerate()
        .map(|(index, (&x, &delta))| {
            spec.grad_raw(x, theta, &mut grad);
            GammaRow { index, x, delta, omega: grad[j], dgamma: quotient(delta, grad[j]) }
        })
        .collect())
}

/// One [`GammaSet`] per model parameter, in parameter order.
pub fn gamma_sets(spec: ModelSpec, data: &Dataset, fit: &FitResult) -> Result<Vec<GammaSet>> {
    check_alignment(data, fit)?;
    let k = spec.arity();
    let theta = fit.theta_opt.values();
    let mut sets: Vec<GammaSet> = fit
        .theta_opt
        .names()
        .iter()
        .enumerate()
        .map(|(j, name)| GammaSet {
            param_index: j,
            name: name.clone(),
            values: Vec::with_capacity(data.len()),
            kept: 0,
            dropped_nonfinite: 0,
        })
        .collect();
    let mut grad = alloc::vec![0.0; k];
    for (&x, &delta) in data.xs().iter().zip(&fit.residuals) {
        spec.grad_raw(x, theta, &mut grad);
        for (set, &omega) in sets.iter_mut().zip(&grad) {
            match quotient(delta, omega) {
                Some(q) => {
                    set.values.push(q);
                    set.kept += 1;
                }
                None => set.dropped_nonfinite += 1,
            }
        }
    }
    Ok(sets)
}

/// Nonparametric summary of one parameter's uncertainty.
///
/// Location fields are in parameter units (`theta_opt + statistic of dgamma`);
/// the `dgamma_*` fields keep the raw fluctuation-space values.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamUncertainty {
    pub name: String,
    pub theta_opt: f64,
    /// Hodges-Lehmann median, shifted by `theta_opt`.
    pub median: f64,
    /// Ordinary sample median, shifted by `theta_opt`.
    pub sample_median: f64,
    pub ci95: (f64, f64),
    pub range: (f64, f64),
    /// `None` when the sample has zero variance.
    pub sk: Option<f64>,
    pub kr: Option<f64>,
    pub upsilon: f64,
    pub m_kept: usize,
    pub dropped: usize,
    pub dgamma_median: f64,
    pub dgamma_ci95: (f64, f64),
    pub hl_method: HlMethod,
    /// Set by [`analyze`] when `upsilon > alpha`.
    pub flagged: bool,
}

/// Empirical probability mass between the sample median and zero.
///
/// Computed as `|F(0) - 1/2|` with `F` the mid-step ECDF, so values sitting
/// exactly on zero count half on each side. Always in `[0, 0.5]`.
pub fn upsilon(set: &GammaSet) -> Result<f64> {
    if set.values.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: set.values.len() });
    }
    let ecdf = Ecdf::new(&Sample::new(&set.values)?);
    Ok((ecdf.eval_mid(0.0) - 0.5).abs())
}

pub fn summarize(set: &GammaSet, theta_j: f64, rng: &mut Mt19937) -> Result<ParamUncertainty> {
    summarize_with(set, theta_j, HlConfig::default(), rng)
}

pub fn summarize_with(set: &GammaSet, theta_j: f64, hl: HlConfig, rng: &mut Mt19937) -> Result<ParamUncertainty> {
    if set.values.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: set.values.len() });
    }
    let sample = Sample::new(&set.values)?;
    let est = stats::hodges_lehmann_with(&sample, hl, rng)?;
    let undefined_as_none = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Undefined(_)) => Ok(None),
        Err(e) => Err(e),
    };
    let sk = undefined_as_none(stats::skewness(&sample))?;
    let kr = undefined_as_none(stats::kurtosis(&sample))?;
    Ok(ParamUncertainty {
        name: set.name.clone(),
        theta_opt: theta_j,
        median: theta_j + est.point,
        sample_median: theta_j + sample.median(),
        ci95: (theta_j + est.ci95.0, theta_j + est.ci95.1),
        range: (theta_j + sample.min(), theta_j + sample.max()),
        sk,
        kr,
        upsilon: upsilon(set)?,
        m_kept: set.kept,
        dropped: set.dropped_nonfinite,
        dgamma_median: est.point,
        dgamma_ci95: est.ci95,
        hl_method: est.method,
        flagged: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub simplex: SimplexConfig,
    /// Upper bound on an acceptable `upsilon`.
    pub alpha: f64,
    pub hl: HlConfig,
}

impl AnalysisConfig {
    pub fn new(simplex: SimplexConfig) -> Self {
        Self { simplex, alpha: DEFAULT_ALPHA, hl: HlConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdaoReport {
    pub spec: ModelSpec,
    pub theta_opt: ParamVector,
    pub params: Vec<ParamUncertainty>,
    pub stop_reason: StopReason,
    pub loops: u64,
    pub sr: f64,
    pub seed: u64,
    pub alpha: f64,
    pub fit: FitResult,
}

impl FdaoReport {
    pub fn flagged(&self) -> impl Iterator<Item = &ParamUncertainty> {
        self.params.iter().filter(|p| p.flagged)
    }
}

/// Fit, then summarise every parameter's fluctuation sample.
///
/// `seed` drives Walsh-pair subsampling; parameter `j` uses its own stream
/// derived from `seed` and `j`.
pub fn analyze(spec: ModelSpec, data: &Dataset, config: &AnalysisConfig, seed: u64) -> Result<FdaoReport> {
    if !(config.alpha >= 0.0 && config.alpha <= 0.5) {
        return Err(Error::config("alpha must lie in [0, 0.5]"));
    }
    let fit = fit(spec, data, &config.simplex)?;
    analyze_fit(spec, data, fit, config, seed)
}

/// [`analyze`] for an already computed fit.
pub fn analyze_fit(
    spec: ModelSpec,
    data: &Dataset,
    fit: FitResult,
    config: &AnalysisConfig,
    seed: u64,
) -> Result<FdaoReport> {
    let sets = gamma_sets(spec, data, &fit)?;
    let params = sets
        .iter()
        .map(|set| {
            let mut rng = Mt19937::from_seed(derive_seed(seed, set.param_index as u64 + 1));
            let theta_j = fit.theta_opt.values()[set.param_index];
            let mut u = summarize_with(set, theta_j, config.hl, &mut rng)?;
            u.flagged = u.upsilon > config.alpha;
            Ok(u)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FdaoReport {
        spec,
        theta_opt: fit.theta_opt.clone(),
        params,
        stop_reason: fit.stop_reason,
        loops: fit.loops,
        sr: fit.sr,
        seed,
        alpha: config.alpha,
        fit,
    })
}
