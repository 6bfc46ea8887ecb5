//! Synthetic Hill and Boltzmann datasets and the fit-and-summarise experiment.

use alloc::string::String;
use alloc::vec::Vec;

use crate::fdao::{analyze, AnalysisConfig, DEFAULT_ALPHA};
use crate::models::{Dataset, ModelFamily, ModelSpec, ParamVector};
use crate::prng::{CauchyParams, Mt19937};
use crate::simplex::{SimplexConfig, StopReason};
use crate::stats::HlConfig;
use crate::{Error, Result};

/// Default Hill concentrations.
pub const HILL_GRID: [f64; 7] = [0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0];
/// Default Boltzmann potentials (mV).
pub const BOLTZMANN_GRID: [f64; 11] = [-100.0, -80.0, -60.0, -40.0, -20.0, 0.0, 20.0, 40.0, 50.0, 80.0, 100.0];
pub const DEFAULT_HILL_GAMMA: f64 = 1.0 / 50.0;
pub const DEFAULT_BOLTZMANN_GAMMA: f64 = 2.0 / 50.0;
pub const DEFAULT_PHI: f64 = 0.05;

/// Additive noise applied to every simulated effect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    /// `gamma * tan(pi * (u - 1/2))`
    Cauchy { gamma: f64 },
    /// `phi * N(0, 1)`
    Gaussian { phi: f64 },
}

impl Noise {
    fn validate(&self) -> Result<()> {
        match *self {
            Noise::Cauchy { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            Noise::Cauchy { .. } => Err(Error::config("Cauchy noise scale gamma must be positive")),
            Noise::Gaussian { phi } if phi >= 0.0 && phi.is_finite() => Ok(()),
            Noise::Gaussian { .. } => Err(Error::config("Gaussian noise factor phi must be non-negative")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Noise::Cauchy { .. } => "cauchy",
            Noise::Gaussian { .. } => "gaussian",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub spec: ModelSpec,
    pub true_params: ParamVector,
    pub noise: Noise,
    pub x_grid: Vec<f64>,
    /// Draws per grid value.
    pub replicates: usize,
    pub fit_config: SimplexConfig,
    pub seed: u64,
    pub alpha: f64,
}

impl ExperimentPlan {
    /// Plan with the family's default grid and `alpha`.
    pub fn new(
        spec: ModelSpec,
        true_params: ParamVector,
        noise: Noise,
        replicates: usize,
        fit_config: SimplexConfig,
        seed: u64,
    ) -> Self {
        let x_grid = match spec.family() {
            ModelFamily::Hill4 => HILL_GRID.to_vec(),
            ModelFamily::Boltzmann2 => BOLTZMANN_GRID.to_vec(),
        };
        Self { spec, true_params, noise, x_grid, replicates, fit_config, seed, alpha: DEFAULT_ALPHA }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.replicates < 1 {
            return Err(Error::config("replicates r must be at least 1"));
        }
        if self.x_grid.is_empty() {
            return Err(Error::config("x grid is empty"));
        }
        if let Some(x) = self.x_grid.iter().find(|&&x| !self.spec.admissible(x)) {
            return Err(Error::domain(alloc::format!("grid value {x} is outside the {} domain", self.spec.family())));
        }
        for theta in [&self.true_params, &self.fit_config.theta_init] {
            if theta.len() != self.spec.arity() {
                return Err(Error::config(alloc::format!(
                    "{} takes {} parameters, got {}",
                    self.spec.family(),
                    self.spec.arity(),
                    theta.len()
                )));
            }
        }
        self.fit_config.validate()
    }

    pub fn len(&self) -> usize {
        self.replicates * self.x_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Simulate the plan's dataset from `rng`.
///
/// Draws are taken grid-major: all `r` replicates of the first grid value,
/// then the next.
pub fn generate(plan: &ExperimentPlan, rng: &mut Mt19937) -> Result<Dataset> {
    plan.validate()?;
    let theta = plan.true_params.values();
    let mut xs = Vec::with_capacity(plan.len());
    let mut ys = Vec::with_capacity(plan.len());
    for &x in &plan.x_grid {
        let mean = plan.spec.eval_raw(x, theta);
        if !mean.is_finite() {
            return Err(Error::domain(alloc::format!("model is not finite at x = {x}")));
        }
        for _ in 0..plan.replicates {
            let y = match plan.noise {
                Noise::Cauchy { gamma } => rng.cauchy(CauchyParams::new(mean, gamma)?),
                Noise::Gaussian { phi } => mean + phi * rng.gaussian(),
            };
            xs.push(x);
            ys.push(y);
        }
    }
    Dataset::new(xs, ys)
}

fn generate_checked(plan: &ExperimentPlan, family: ModelFamily, noise: &'static str) -> Result<Dataset> {
    if plan.spec.family() != family || plan.noise.name() != noise {
        return Err(Error::config(alloc::format!(
            "plan is {}/{}, expected {}/{}",
            plan.spec.family(),
            plan.noise.name(),
            family,
            noise
        )));
    }
    generate(plan, &mut Mt19937::from_seed(plan.seed))
}

/// Hill curve plus Cauchy noise.
pub fn gen_hill_cauchy(plan: &ExperimentPlan) -> Result<Dataset> {
    generate_checked(plan, ModelFamily::Hill4, "cauchy")
}

/// Hill curve plus Gaussian noise.
pub fn gen_hill_gauss(plan: &ExperimentPlan) -> Result<Dataset> {
    generate_checked(plan, ModelFamily::Hill4, "gaussian")
}

/// Boltzmann curve plus Gaussian noise.
pub fn gen_boltzmann_gauss(plan: &ExperimentPlan) -> Result<Dataset> {
    generate_checked(plan, ModelFamily::Boltzmann2, "gaussian")
}

/// Boltzmann curve plus Cauchy noise.
pub fn gen_boltzmann_cauchy(plan: &ExperimentPlan) -> Result<Dataset> {
    generate_checked(plan, ModelFamily::Boltzmann2, "cauchy")
}

/// One parameter's line in an experiment table.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamRow {
    pub name: String,
    pub simulated: f64,
    pub predicted: f64,
    pub ci95: (f64, f64),
    pub range: (f64, f64),
    pub sk: Option<f64>,
    pub kr: Option<f64>,
    pub upsilon: f64,
    pub theta_opt: f64,
    pub m_kept: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub params: Vec<ParamRow>,
    pub loops: u64,
    pub stop_reason: StopReason,
    pub sr: f64,
    /// Number of simulated points.
    pub m: usize,
    pub seed: u64,
    /// Pooled residuals at the optimum.
    pub residuals: Vec<f64>,
}

impl ExperimentRow {
    pub fn param(&self, name: &str) -> Option<&ParamRow> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// Generate, fit and summarise.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentRow> {
    let mut rng = Mt19937::from_seed(plan.seed);
    let data = generate(plan, &mut rng)?;
    let config = AnalysisConfig { simplex: plan.fit_config.clone(), alpha: plan.alpha, hl: HlConfig::default() };
    let report = analyze(plan.spec, &data, &config, plan.seed)?;
    let params = report
        .params
        .iter()
        .zip(plan.true_params.values())
        .map(|(u, &simulated)| ParamRow {
            name: u.name.clone(),
            simulated,
            predicted: u.median,
            ci95: u.ci95,
            range: u.range,
            sk: u.sk,
            kr: u.kr,
            upsilon: u.upsilon,
            theta_opt: u.theta_opt,
            m_kept: u.m_kept,
            dropped: u.dropped,
        })
        .collect();
    Ok(ExperimentRow {
        params,
        loops: report.loops,
        stop_reason: report.stop_reason,
        sr: report.sr,
        m: data.len(),
        seed: plan.seed,
        residuals: report.fit.residuals,
    })
}
