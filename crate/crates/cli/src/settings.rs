//! `key = value` files for fits and simulation plans.
//!
//! Blank lines are ignored and `#` starts a comment. Keys may appear once.
//! Unknown keys are rejected so typos do not silently fall back to defaults.

use std::collections::BTreeMap;

use fdao_core::montecarlo::{ExperimentPlan, Noise, BOLTZMANN_GRID, HILL_GRID};
use fdao_core::simplex::{DEFAULT_EPSILON_STOP, DEFAULT_LOOP_CAP};
use fdao_core::{ModelFamily, ModelSpec, ParamVector, SimplexConfig};

use crate::error::{CliError, Result};

pub const DEFAULT_DELTA_INIT: f64 = 0.1;

#[derive(Debug)]
pub struct KeyValues {
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("line {line_no}: expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(CliError::input(format!("line {line_no}: empty key")));
            }
            if entries.insert(key.to_string(), (value.to_string(), line_no)).is_some() {
                return Err(CliError::input(format!("line {line_no}: duplicate key `{key}`")));
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn take_str(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|(v, _)| v)
    }

    fn require_str(&mut self, key: &str) -> Result<String> {
        self.take_str(key).ok_or_else(|| CliError::input(format!("missing key `{key}`")))
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key)
            .map(|(v, line)| parse_number(&v).map_err(|e| CliError::input(format!("line {line}: `{key}`: {e}"))))
            .transpose()
    }

    fn require_f64(&mut self, key: &str) -> Result<f64> {
        self.take_f64(key)?.ok_or_else(|| CliError::input(format!("missing key `{key}`")))
    }

    fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        self.take(key)
            .map(|(v, line)| {
                parse_u64(&v)
                    .ok_or_else(|| CliError::input(format!("line {line}: `{key}`: not a non-negative integer")))
            })
            .transpose()
    }

    /// Values for `<prefix>.<name>` in the model's parameter order.
    fn params(&mut self, prefix: &str, spec: ModelSpec) -> Result<ParamVector> {
        let mut values = Vec::with_capacity(spec.arity());
        for name in spec.param_names() {
            values.push(self.require_f64(&format!("{prefix}.{name}"))?);
        }
        let dotted = format!("{prefix}.");
        if let Some(extra) = self.entries.keys().find(|k| k.starts_with(&dotted)) {
            return Err(CliError::input(format!(
                "`{extra}` is not a {} parameter (expected {})",
                spec.family(),
                spec.param_names().join(", ")
            )));
        }
        Ok(ParamVector::for_model(spec, &values)?)
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (_, line))) => Err(CliError::input(format!("line {line}: unknown key `{key}`"))),
        }
    }
}

/// Decimal number or a fraction such as `2/50`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
            let den: f64 = den.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
            if den == 0.0 {
                return Err(format!("`{s}` divides by zero"));
            }
            num / den
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_u64(s: &str) -> Option<u64> {
    let s = s.replace('_', "");
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

fn simplex_config(kv: &mut KeyValues, theta_init: ParamVector) -> Result<SimplexConfig> {
    let mut config = SimplexConfig::new(theta_init, kv.take_f64("delta_init")?.unwrap_or(DEFAULT_DELTA_INIT))?;
    config.epsilon_stop = kv.take_f64("epsilon_stop")?.unwrap_or(DEFAULT_EPSILON_STOP);
    config.loop_cap = kv.take_u64("loop_cap")?.unwrap_or(DEFAULT_LOOP_CAP);
    config.validate()?;
    Ok(config)
}

/// Settings for `fdao fit`.
#[derive(Debug, Clone)]
pub struct FitSettings {
    pub spec: ModelSpec,
    pub simplex: SimplexConfig,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
}

impl FitSettings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KeyValues::parse(text)?;
        let spec = ModelSpec::new(kv.require_str("model")?.parse::<ModelFamily>()?);
        let theta_init = kv.params("theta_init", spec)?;
        let simplex = simplex_config(&mut kv, theta_init)?;
        let alpha = kv.take_f64("alpha")?;
        let seed = kv.take_u64("seed")?;
        kv.finish()?;
        Ok(Self { spec, simplex, alpha, seed })
    }
}

/// A parsed simulation plan; `seed` is `None` when the file leaves it to the run.
#[derive(Debug, Clone)]
pub struct PlanSettings {
    pub plan: ExperimentPlan,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
}

impl PlanSettings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KeyValues::parse(text)?;
        let family: ModelFamily = kv.require_str("family")?.parse()?;
        let spec = ModelSpec::new(family);
        let noise = match kv.require_str("noise")?.to_ascii_lowercase().as_str() {
            "cauchy" => Noise::Cauchy { gamma: kv.require_f64("gamma")? },
            "gaussian" | "gauss" => Noise::Gaussian { phi: kv.require_f64("phi")? },
            other => return Err(CliError::input(format!("unknown noise `{other}` (expected cauchy or gaussian)"))),
        };
        let grid = match kv.take_str("grid") {
            Some(list) => list
                .split(',')
                .map(|v| parse_number(v.trim()).map_err(|e| CliError::input(format!("`grid`: {e}"))))
                .collect::<Result<Vec<f64>>>()?,
            None => match family {
                ModelFamily::Hill4 => HILL_GRID.to_vec(),
                ModelFamily::Boltzmann2 => BOLTZMANN_GRID.to_vec(),
            },
        };
        let replicates = kv.take_u64("r")?.ok_or_else(|| CliError::input("missing key `r`"))?;
        let true_params = kv.params("theta_true", spec)?;
        let theta_init = kv.params("theta_init", spec)?;
        let fit_config = simplex_config(&mut kv, theta_init)?;
        let seed = kv.take_u64("seed")?;
        let alpha = kv.take_f64("alpha")?;
        kv.finish()?;

        let replicates = usize::try_from(replicates).map_err(|_| CliError::input("`r` is too large"))?;
        let mut plan = ExperimentPlan::new(spec, true_params, noise, replicates, fit_config, seed.unwrap_or(0));
        plan.x_grid = grid;
        if let Some(a) = alpha {
            plan.alpha = a;
        }
        plan.validate()?;
        Ok(Self { plan, seed, alpha })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIT: &str = "\
# Boltzmann fit
model = boltzmann2
theta_init.Vhalf = -20
theta_init.kappa = 1   # slope
delta_init = 0.5
seed = 0x10
";

    #[test]
    fn fit_settings() {
        let s = FitSettings::parse(FIT).unwrap();
        assert_eq!(s.spec.family(), ModelFamily::Boltzmann2);
        assert_eq!(s.simplex.theta_init.values(), &[-20.0, 1.0]);
        assert_eq!(s.simplex.delta_init, 0.5);
        assert_eq!(s.simplex.loop_cap, DEFAULT_LOOP_CAP);
        assert_eq!(s.seed, Some(16));
        assert_eq!(s.alpha, None);
    }

    #[test]
    fn fit_settings_errors() {
        assert!(FitSettings::parse("model = hill5\n").is_err());
        assert!(FitSettings::parse(&FIT.replace("theta_init.kappa = 1", "")).is_err());
        assert!(FitSettings::parse(&format!("{FIT}theta_init.n = 2\n")).is_err());
        assert!(FitSettings::parse(&format!("{FIT}colour = red\n")).is_err());
        assert!(FitSettings::parse(&format!("{FIT}seed = 3\n")).is_err());
        assert!(FitSettings::parse("model hill4\n").is_err());
        assert!(FitSettings::parse(&FIT.replace("delta_init = 0.5", "delta_init = -1")).is_err());
    }

    #[test]
    fn numbers_and_fractions() {
        assert_eq!(parse_number("2/50").unwrap(), 0.04);
        assert_eq!(parse_number("-40").unwrap(), -40.0);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("inf").is_err());
        assert!(parse_number("abc").is_err());
        assert_eq!(parse_u64("1_024_000"), Some(1_024_000));
    }

    const PLAN: &str = "\
family = boltzmann2
noise = gaussian
phi = 0.05
r = 100
theta_true.Vhalf = -40
theta_true.kappa = 10
theta_init.Vhalf = -20
theta_init.kappa = 1
delta_init = 0.5
";

    #[test]
    fn plan_settings() {
        let p = PlanSettings::parse(PLAN).unwrap();
        assert_eq!(p.plan.x_grid, BOLTZMANN_GRID.to_vec());
        assert_eq!(p.plan.replicates, 100);
        assert_eq!(p.plan.noise, Noise::Gaussian { phi: 0.05 });
        assert_eq!(p.seed, None);

        let cauchy =
            PLAN.replace("noise = gaussian\nphi = 0.05", "noise = cauchy\ngamma = 2/50\ngrid = -60, 0, 60\nseed = 7");
        let p = PlanSettings::parse(&cauchy).unwrap();
        assert_eq!(p.plan.noise, Noise::Cauchy { gamma: 0.04 });
        assert_eq!(p.plan.x_grid, vec![-60.0, 0.0, 60.0]);
        assert_eq!((p.seed, p.plan.seed), (Some(7), 7));
    }

    #[test]
    fn plan_errors() {
        assert!(PlanSettings::parse(&PLAN.replace("r = 100", "r = 0")).is_err());
        assert!(PlanSettings::parse(&PLAN.replace("phi = 0.05", "gamma = 0.05")).is_err());
        assert!(PlanSettings::parse(&PLAN.replace("noise = gaussian", "noise = uniform")).is_err());
        let hill = PLAN.replace("boltzmann2", "hill4");
        assert!(PlanSettings::parse(&hill).is_err());
    }
}
