//! Nelder-Mead minimisation of the sum of absolute residuals.

use alloc::vec::Vec;
use core::fmt;

use crate::models::{Dataset, ModelSpec, ParamVector};
use crate::{Error, Result};

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

pub const DEFAULT_EPSILON_STOP: f64 = 1e-8;
pub const DEFAULT_LOOP_CAP: u64 = 1_024_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexConfig {
    pub theta_init: ParamVector,
    /// Fractional step used to build the starting simplex.
    pub delta_init: f64,
    pub epsilon_stop: f64,
    pub loop_cap: u64,
}

impl SimplexConfig {
    pub fn new(theta_init: ParamVector, delta_init: f64) -> Result<Self> {
        let config = Self { theta_init, delta_init, epsilon_stop: DEFAULT_EPSILON_STOP, loop_cap: DEFAULT_LOOP_CAP };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_init > 0.0 && self.delta_init.is_finite()) {
            return Err(Error::config("delta_init must be positive"));
        }
        if !(self.epsilon_stop > 0.0 && self.epsilon_stop.is_finite()) {
            return Err(Error::config("epsilon_stop must be positive"));
        }
        if self.loop_cap < 1 {
            return Err(Error::config("loop_cap must be at least 1"));
        }
        if self.theta_init.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::config("theta_init must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    /// The relative SR spread across the simplex fell below `epsilon_stop`.
    Converged,
    LoopCap,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::LoopCap => "loop_cap",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta_opt: ParamVector,
    /// Sum of absolute residuals at `theta_opt`.
    pub sr: f64,
    pub loops: u64,
    pub stop_reason: StopReason,
    /// `y_i - f(x_i | theta_opt)`, in dataset order.
    pub residuals: Vec<f64>,
    /// `|SR_worst - SR_best| / SR_best` when the fit stopped.
    pub last_relative_change: f64,
}

/// What one simplex transformation did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Reflect,
    Expand,
    ContractOutside,
    ContractInside,
    Shrink,
}

/// Snapshot passed to the observer after every loop.
#[derive(Debug, Clone, Copy)]
pub struct Iteration {
    pub loop_index: u64,
    pub step: Step,
    pub best_sr: f64,
    pub worst_sr: f64,
    pub relative_change: f64,
}

/// `sum |y_i - f(x_i | theta)|`; `+inf` if any model value is not finite.
pub fn objective_sr(spec: ModelSpec, data: &Dataset, theta: &[f64]) -> f64 {
    let mut sr = 0.0;
    for (x, y) in data.points() {
        let f = spec.eval_raw(x, theta);
        if !f.is_finite() {
            return f64::INFINITY;
        }
        sr += (y - f).abs();
    }
    sr
}

pub fn residuals(spec: ModelSpec, data: &Dataset, theta: &[f64]) -> Vec<f64> {
    data.points().map(|(x, y)| y - spec.eval_raw(x, theta)).collect()
}

pub fn fit(spec: ModelSpec, data: &Dataset, config: &SimplexConfig) -> Result<FitResult> {
    fit_observed(spec, data, config, |_| {})
}

/// [`fit`] with a callback invoked after every loop.
pub fn fit_observed(
    spec: ModelSpec,
    data: &Dataset,
    config: &SimplexConfig,
    mut observe: impl FnMut(&Iteration),
) -> Result<FitResult> {
    config.validate()?;
    data.validate_for(spec)?;
    let k = spec.arity();
    if config.theta_init.len() != k {
        return Err(Error::config(alloc::format!(
            "theta_init has {} parameters, {} needs {}",
            config.theta_init.len(),
            spec.family(),
            k
        )));
    }

    let cost = |theta: &[f64]| objective_sr(spec, data, theta);
    let mut simplex = Simplex::initial(config.theta_init.values(), config.delta_init, cost);
    if !simplex.values[0].is_finite() {
        return Err(Error::config("objective is not finite at theta_init"));
    }

    let mut loops = 0u64;
    let mut rel = simplex.relative_spread();
    let stop_reason = loop {
        if simplex.best_value() == 0.0 || rel < config.epsilon_stop {
            break StopReason::Converged;
        }
        if loops >= config.loop_cap {
            break StopReason::LoopCap;
        }
        let step = simplex.step(cost);
        loops += 1;
        rel = simplex.relative_spread();
        observe(&Iteration {
            loop_index: loops,
            step,
            best_sr: simplex.best_value(),
            worst_sr: simplex.worst_value(),
            relative_change: rel,
        });
    };

    let best = simplex.best_point().to_vec();
    Ok(FitResult {
        theta_opt: config.theta_init.with_values(&best),
        sr: simplex.best_value(),
        loops,
        stop_reason,
        residuals: residuals(spec, data, &best),
        last_relative_change: rel,
    })
}

/// k+1 vertices kept sorted by objective value, best first.
struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn initial(theta: &[f64], delta: f64, cost: impl Fn(&[f64]) -> f64) -> Self {
        let mut points = Vec::with_capacity(theta.len() + 1);
        points.push(theta.to_vec());
        for j in 0..theta.len() {
            let mut p = theta.to_vec();
            if p[j] == 0.0 {
                p[j] = delta;
            } else {
                p[j] *= 1.0 + delta;
            }
            points.push(p);
        }
        let values = points.iter().map(|p| cost(p)).collect();
        let mut s = Self { points, values };
        s.sort();
        s
    }

    fn sort(&mut self) {
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        // stable: ties keep their previous order, so the incumbent best stays first
        order.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = order.iter().map(|&i| core::mem::take(&mut self.points[i])).collect();
        self.values = order.iter().map(|&i| self.values[i]).collect();
    }

    fn best_value(&self) -> f64 {
        self.values[0]
    }

    fn worst_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    fn best_point(&self) -> &[f64] {
        &self.points[0]
    }

    fn relative_spread(&self) -> f64 {
        let best = self.best_value();
        let worst = self.worst_value();
        if best == 0.0 {
            return 0.0;
        }
        if !worst.is_finite() {
            return f64::INFINITY;
        }
        ((worst - best) / best).abs()
    }

    fn step(&mut self, cost: impl Fn(&[f64]) -> f64) -> Step {
        let k = self.points.len() - 1;
        let worst = k;
        let mut centroid = alloc::vec![0.0; k];
        for p in &self.points[..k] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / k as f64;
            }
        }
        let along = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, w)| c + coef * (c - w)).collect()
        };

        let reflected = along(REFLECTION, &self.points[worst]);
        let f_reflected = cost(&reflected);

        let step = if f_reflected < self.values[0] {
            let expanded = along(EXPANSION, &self.points[worst]);
            let f_expanded = cost(&expanded);
            if f_expanded < f_reflected {
                self.replace_worst(expanded, f_expanded);
                Step::Expand
            } else {
                self.replace_worst(reflected, f_reflected);
                Step::Reflect
            }
        } else if f_reflected < self.values[k - 1] {
            self.replace_worst(reflected, f_reflected);
            Step::Reflect
        } else if f_reflected < self.values[worst] {
            let contracted = along(CONTRACTION, &self.points[worst]);
            let f_contracted = cost(&contracted);
            if f_contracted <= f_reflected {
                self.replace_worst(contracted, f_contracted);
                Step::ContractOutside
            } else {
                self.shrink(&cost);
                Step::Shrink
            }
        } else {
            let contracted = along(-CONTRACTION, &self.points[worst]);
            let f_contracted = cost(&contracted);
            if f_contracted < self.values[worst] {
                self.replace_worst(contracted, f_contracted);
                Step::ContractInside
            } else {
                self.shrink(&cost);
                Step::Shrink
            }
        };
        self.sort();
        step
    }

    fn replace_worst(&mut self, point: Vec<f64>, value: f64) {
        let last = self.points.len() - 1;
        self.points[last] = point;
        self.values[last] = value;
    }

    fn shrink(&mut self, cost: &impl Fn(&[f64]) -> f64) {
        let best = self.points[0].clone();
        for i in 1..self.points.len() {
            for (v, b) in self.points[i].iter_mut().zip(&best) {
                *v = b + SHRINK * (*v - b);
            }
            self.values[i] = cost(&self.points[i]);
        }
    }
}
