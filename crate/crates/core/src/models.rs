//! Modified Hill and Boltzmann models with their analytic parameter derivatives.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// Ordered, named model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    names: Vec<String>,
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new<S: AsRef<str>>(names: &[S], values: &[f64]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::config("a parameter vector needs at least one parameter"));
        }
        if names.len() != values.len() {
            return Err(Error::config("parameter names and values differ in length"));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].iter().any(|n| n.as_ref() == name.as_ref()) {
                return Err(Error::config(alloc::format!("duplicate parameter name `{}`", name.as_ref())));
            }
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::config(alloc::format!("parameter `{}` is not finite", names[i].as_ref())));
        }
        Ok(Self { names: names.iter().map(|s| s.as_ref().to_string()).collect(), values: values.to_vec() })
    }

    /// Parameters for `spec` in the family's canonical order.
    pub fn for_model(spec: ModelSpec, values: &[f64]) -> Result<Self> {
        if values.len() != spec.arity() {
            return Err(Error::config(alloc::format!(
                "{} takes {} parameters, got {}",
                spec.family(),
                spec.arity(),
                values.len()
            )));
        }
        Self::new(spec.param_names(), values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    /// Same names, new values. Values are not validated; used by the optimiser.
    pub(crate) fn with_values(&self, values: &[f64]) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { names: self.names.clone(), values: values.to_vec() }
    }
}

/// Modified Hill equation `y0 + ym / (1 + (Km/[D])^n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillParams {
    pub y0: f64,
    pub ym: f64,
    pub km: f64,
    pub n: f64,
}

impl HillParams {
    pub fn new(y0: f64, ym: f64, km: f64, n: f64) -> Result<Self> {
        let p = Self { y0, ym, km, n };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if ![self.y0, self.ym, self.km, self.n].iter().all(|v| v.is_finite()) {
            return Err(Error::config("Hill parameters must be finite"));
        }
        if self.km <= 0.0 {
            return Err(Error::domain("Hill Km must be positive"));
        }
        Ok(())
    }

    fn from_slice(theta: &[f64]) -> Self {
        Self { y0: theta[0], ym: theta[1], km: theta[2], n: theta[3] }
    }
}

/// `ln(Km/d)`, the log-ratio every Hill derivative is built from.
fn hill_log_ratio(d: f64, km: f64) -> f64 {
    libm::log(km) - libm::log(d)
}

/// `zeta / (1 + zeta)^2` written so it stays finite when zeta over- or underflows.
fn mho(log_zeta: f64) -> f64 {
    // zeta/(1+zeta)^2 = 1/(4 cosh^2(log_zeta/2))
    let c = libm::cosh(0.5 * log_zeta);
    0.25 / (c * c)
}

fn check_concentration(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(alloc::format!("Hill concentration must be positive and finite, got {d}")))
    }
}

/// Evaluate the modified Hill equation at concentration `d`.
pub fn hill_eval(d: f64, p: &HillParams) -> Result<f64> {
    check_concentration(d)?;
    Ok(hill_eval_unchecked(d, p))
}

fn hill_eval_unchecked(d: f64, p: &HillParams) -> f64 {
    // zeta = exp(n ln(Km/d)); exp saturates to 0 or +inf, both giving the right limit.
    let log_zeta = p.n * hill_log_ratio(d, p.km);
    p.y0 + p.ym / (1.0 + libm::exp(log_zeta))
}

/// `(dy/dy0, dy/dym, dy/dKm, dy/dn)` at concentration `d`.
///
/// `dy/dn` carries the `1/n` factor of its closed form, so `n == 0` gives NaN
/// in that slot. At `d == Km` it is exactly zero.
pub fn hill_grad(d: f64, p: &HillParams) -> Result<[f64; 4]> {
    check_concentration(d)?;
    Ok(hill_grad_unchecked(d, p))
}

fn hill_grad_unchecked(d: f64, p: &HillParams) -> [f64; 4] {
    let l = hill_log_ratio(d, p.km);
    let log_zeta = p.n * l;
    let zeta = libm::exp(log_zeta);
    let w = mho(log_zeta);
    let d_ym = 1.0 / (1.0 + zeta);
    let d_km = -w * p.n * p.ym / p.km;
    let d_n = if p.n == 0.0 {
        f64::NAN
    } else if l == 0.0 {
        0.0
    } else {
        -w * p.ym * log_zeta / p.n
    };
    [1.0, d_ym, d_km, d_n]
}

/// Second derivatives of the modified Hill equation, rows and columns in
/// `(y0, ym, Km, n)` order. The `y0` row and column are identically zero.
pub fn hill_hessian(d: f64, p: &HillParams) -> Result<[[f64; 4]; 4]> {
    check_concentration(d)?;
    let l = hill_log_ratio(d, p.km);
    let log_zeta = p.n * l;
    let w = mho(log_zeta);
    // (zeta - 1)/(zeta + 1)
    let t = libm::tanh(0.5 * log_zeta);
    let (n, ym, km) = (p.n, p.ym, p.km);

    let ym_km = -w * n / km;
    let ym_n = -w * l;
    let km_km = w * n * ym * (1.0 + n * t) / (km * km);
    let km_n = -w * ym * (1.0 - t * log_zeta) / km;
    let n_n = w * t * ym * l * l;

    Ok([[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, ym_km, ym_n], [0.0, ym_km, km_km, km_n], [0.0, ym_n, km_n, n_n]])
}

/// Two-state Boltzmann function `1 / (1 + exp(-(v - vhalf)/kappa))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoltzmannParams {
    pub vhalf: f64,
    pub kappa: f64,
}

impl BoltzmannParams {
    pub fn new(vhalf: f64, kappa: f64) -> Result<Self> {
        if !(vhalf.is_finite() && kappa.is_finite()) {
            return Err(Error::config("Boltzmann parameters must be finite"));
        }
        if kappa == 0.0 {
            return Err(Error::domain("Boltzmann slope factor kappa must be non-zero"));
        }
        Ok(Self { vhalf, kappa })
    }
}

pub fn boltzmann_eval(v: f64, p: &BoltzmannParams) -> f64 {
    1.0 / (1.0 + libm::exp(-(v - p.vhalf) / p.kappa))
}

/// `(dB/dVhalf, dB/dkappa)`.
pub fn boltzmann_grad(v: f64, p: &BoltzmannParams) -> [f64; 2] {
    let nu = v - p.vhalf;
    let k = p.kappa;
    let d_vhalf = -1.0 / (2.0 * k * libm::cosh(nu / k) + 2.0 * k);
    let d_kappa = -nu * sech2(nu / (2.0 * k)) / (4.0 * k * k);
    [d_vhalf, d_kappa]
}

/// Sum of both parameter partials, `-(kappa + nu) sech^2(nu/2kappa) / (4 kappa^2)`.
pub fn boltzmann_param_gradient_sum(v: f64, p: &BoltzmannParams) -> f64 {
    let nu = v - p.vhalf;
    let k = p.kappa;
    -(k + nu) * sech2(nu / (2.0 * k)) / (4.0 * k * k)
}

fn sech2(x: f64) -> f64 {
    let c = libm::cosh(x);
    1.0 / (c * c)
}

/// Supported regression families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    Hill4,
    Boltzmann2,
}

impl ModelFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelFamily::Hill4 => "hill4",
            ModelFamily::Boltzmann2 => "boltzmann2",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "hill4" => Ok(ModelFamily::Hill4),
            "boltzmann2" => Ok(ModelFamily::Boltzmann2),
            other => {
                Err(Error::config(alloc::format!("unknown model family `{other}` (expected hill4 or boltzmann2)")))
            }
        }
    }
}

const HILL_NAMES: [&str; 4] = ["y0", "ym", "Km", "n"];
const BOLTZMANN_NAMES: [&str; 2] = ["Vhalf", "kappa"];

/// Uniform dispatch over model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    family: ModelFamily,
}

impl ModelSpec {
    pub fn new(family: ModelFamily) -> Self {
        Self { family }
    }

    pub fn family(&self) -> ModelFamily {
        self.family
    }

    pub fn arity(&self) -> usize {
        self.param_names().len()
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self.family {
            ModelFamily::Hill4 => &HILL_NAMES,
            ModelFamily::Boltzmann2 => &BOLTZMANN_NAMES,
        }
    }

    /// Whether `x` lies in the model's domain (Hill needs `x > 0`).
    pub fn admissible(&self, x: f64) -> bool {
        match self.family {
            ModelFamily::Hill4 => x > 0.0 && x.is_finite(),
            ModelFamily::Boltzmann2 => x.is_finite(),
        }
    }

    fn check(&self, x: f64, theta: &[f64]) -> Result<()> {
        if theta.len() != self.arity() {
            return Err(Error::config(alloc::format!(
                "{} takes {} parameters, got {}",
                self.family,
                self.arity(),
                theta.len()
            )));
        }
        if !self.admissible(x) {
            return Err(Error::domain(alloc::format!("x = {x} is outside the {} domain", self.family)));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, theta: &ParamVector) -> Result<f64> {
        self.check(x, theta.values())?;
        Ok(self.eval_raw(x, theta.values()))
    }

    pub fn grad(&self, x: f64, theta: &ParamVector) -> Result<Vec<f64>> {
        self.check(x, theta.values())?;
        let mut out = alloc::vec![0.0; self.arity()];
        self.grad_raw(x, theta.values(), &mut out);
        Ok(out)
    }

    /// Evaluation without validation. Parameters outside the family's
    /// natural domain (e.g. negative Km) produce whatever IEEE arithmetic
    /// gives, usually NaN, which the optimiser treats as an infinite cost.
    pub(crate) fn eval_raw(&self, x: f64, theta: &[f64]) -> f64 {
        match self.family {
            ModelFamily::Hill4 => hill_eval_unchecked(x, &HillParams::from_slice(theta)),
            ModelFamily::Boltzmann2 => boltzmann_eval(x, &BoltzmannParams { vhalf: theta[0], kappa: theta[1] }),
        }
    }

    pub(crate) fn grad_raw(&self, x: f64, theta: &[f64], out: &mut [f64]) {
        match self.family {
            ModelFamily::Hill4 => out.copy_from_slice(&hill_grad_unchecked(x, &HillParams::from_slice(theta))),
            ModelFamily::Boltzmann2 => {
                out.copy_from_slice(&boltzmann_grad(x, &BoltzmannParams { vhalf: theta[0], kappa: theta[1] }))
            }
        }
    }
}

impl From<ModelFamily> for ModelSpec {
    fn from(family: ModelFamily) -> Self {
        Self::new(family)
    }
}

/// Observation pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Dataset {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::config("x and y columns differ in length"));
        }
        if let Some(i) = xs.iter().zip(&ys).position(|(x, y)| !(x.is_finite() && y.is_finite())) {
            return Err(Error::config(alloc::format!("observation {i} is not finite")));
        }
        Ok(Self { xs, ys })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let (xs, ys) = pairs.into_iter().unzip();
        Self::new(xs, ys)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// Checks the dataset can be fit by `spec`: enough points and every `x` admissible.
    pub fn validate_for(&self, spec: ModelSpec) -> Result<()> {
        if self.len() < spec.arity() {
            return Err(Error::InsufficientData { needed: spec.arity(), got: self.len() });
        }
        if let Some(i) = self.xs.iter().position(|&x| !spec.admissible(x)) {
            return Err(Error::domain(alloc::format!(
                "row {}: x = {} is outside the {} domain",
                i + 1,
                self.xs[i],
                spec.family()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hill(y0: f64, ym: f64, km: f64, n: f64) -> HillParams {
        HillParams::new(y0, ym, km, n).unwrap()
    }

    #[test]
    fn hill_half_effect_at_km() {
        let p = hill(-0.1, 1.0, 0.5, 3.0);
        assert_eq!(hill_eval(0.5, &p).unwrap(), -0.1 + 0.5);
        assert_eq!(hill_eval(0.1, &hill(0.0, 100.0, 0.1, 2.0)).unwrap(), 50.0);
    }

    #[test]
    fn hill_saturates_for_large_and_small_concentration() {
        let p = hill(-0.1, 1.0, 0.5, 2.0);
        assert!((hill_eval(1e200, &p).unwrap() - 0.9).abs() < 1e-12);
        let steep = hill(-5.0, 100.0, 0.01, 60.0);
        assert_eq!(hill_eval(1e-3, &steep).unwrap(), -5.0);
        assert_eq!(hill_eval(1.0, &steep).unwrap(), 95.0);
    }

    #[test]
    fn hill_rejects_nonpositive_concentration() {
        let p = hill(0.0, 1.0, 1.0, 1.0);
        assert!(hill_eval(0.0, &p).unwrap_err().is_domain());
        assert!(hill_eval(-1.0, &p).unwrap_err().is_domain());
        assert!(hill_grad(0.0, &p).is_err());
        assert!(hill_hessian(-2.0, &p).is_err());
    }

    #[test]
    fn hill_params_need_positive_km() {
        assert!(HillParams::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(HillParams::new(0.0, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn hill_gradient_special_values() {
        let p = hill(-0.1, 1.0, 0.5, 2.0);
        let g = hill_grad(0.5, &p).unwrap();
        assert_eq!(g[0], 1.0);
        assert_eq!(g[1], 0.5);
        assert_eq!(g[3], 0.0);
        let g0 = hill_grad(0.3, &hill(0.0, 1.0, 0.5, 0.0)).unwrap();
        assert!(g0[3].is_nan());
    }

    #[test]
    fn hill_gradient_finite_when_zeta_overflows() {
        let p = hill(-5.0, 100.0, 0.01, 60.0);
        for d in [1e-3, 1.0] {
            let g = hill_grad(d, &p).unwrap();
            assert!(g.iter().all(|v| v.is_finite()), "{g:?}");
        }
    }

    #[test]
    fn hill_hessian_is_symmetric_and_singular_at_km() {
        let p = hill(-0.1, 1.0, 0.5, 3.0);
        let h = hill_hessian(0.5, &p).unwrap();
        for (i, row) in h.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, h[j][i]);
            }
        }
        assert_eq!(h[0], [0.0; 4]);
        // matches the closed form ym/(4Km) * [[0,0,0,0],[0,0,-n/ym,0],[0,0,n/Km,-1],[0,0,-1,0]] off the y0 row
        let s = p.ym / (4.0 * p.km);
        assert!((h[1][2] + s * p.n / p.ym).abs() < 1e-15);
        assert!((h[2][2] - s * p.n / p.km).abs() < 1e-15);
        assert!((h[2][3] + s).abs() < 1e-15);
        assert_eq!(h[3][3], 0.0);
    }

    #[test]
    fn boltzmann_values() {
        let p = BoltzmannParams::new(-40.0, 10.0).unwrap();
        assert_eq!(boltzmann_eval(-40.0, &p), 0.5);
        assert_eq!(boltzmann_eval(1e6, &p), 1.0);
        let g = boltzmann_grad(-40.0, &p);
        assert_eq!(g[0], -0.025);
        assert_eq!(g[1], 0.0);
        assert_eq!(boltzmann_param_gradient_sum(-40.0, &p), -0.025);
        assert!(BoltzmannParams::new(0.0, 0.0).is_err());
    }

    #[test]
    fn boltzmann_gradient_sum_identity() {
        for (vh, k) in [(-40.0, 10.0), (0.0, -3.0), (12.0, 0.7)] {
            let p = BoltzmannParams::new(vh, k).unwrap();
            for v in [-100.0, -41.0, 0.0, 13.0, 80.0] {
                let g = boltzmann_grad(v, &p);
                assert!((boltzmann_param_gradient_sum(v, &p) - (g[0] + g[1])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn family_parsing_and_dispatch() {
        assert_eq!("hill4".parse::<ModelFamily>().unwrap(), ModelFamily::Hill4);
        assert!(matches!("logistic".parse::<ModelFamily>(), Err(Error::Config(_))));

        let hill = ModelSpec::new(ModelFamily::Hill4);
        let theta = ParamVector::for_model(hill, &[-5.0, 100.0, 0.1, 2.0]).unwrap();
        assert_eq!(hill.eval(0.1, &theta).unwrap(), 45.0);
        assert!(hill.eval(0.0, &theta).unwrap_err().is_domain());

        let boltz = ModelSpec::new(ModelFamily::Boltzmann2);
        let theta = ParamVector::for_model(boltz, &[-40.0, 10.0]).unwrap();
        assert_eq!(boltz.eval(-40.0, &theta).unwrap(), 0.5);
        assert_eq!(boltz.param_names(), &["Vhalf", "kappa"]);

        let wrong = ParamVector::new(&["a", "b", "c"], &[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(boltz.eval(0.0, &wrong), Err(Error::Config(_))));
    }

    #[test]
    fn param_vector_invariants() {
        assert!(ParamVector::new::<&str>(&[], &[]).is_err());
        assert!(ParamVector::new(&["a", "a"], &[1.0, 2.0]).is_err());
        assert!(ParamVector::new(&["a"], &[f64::INFINITY]).is_err());
        let p = ParamVector::new(&["a", "b"], &[1.0, 2.0]).unwrap();
        assert_eq!(p.get("b"), Some(2.0));
        assert_eq!(p.get("c"), None);
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(alloc::vec![1.0], alloc::vec![]).is_err());
        assert!(Dataset::new(alloc::vec![1.0], alloc::vec![f64::NAN]).is_err());
        let d = Dataset::from_pairs([(0.1, 1.0), (0.0, 2.0), (1.0, 3.0), (2.0, 4.0)]).unwrap();
        let hill = ModelSpec::new(ModelFamily::Hill4);
        let err = d.validate_for(hill).unwrap_err();
        assert!(err.is_domain());
        assert!(alloc::format!("{err}").contains("row 2"));
        assert!(d.validate_for(ModelSpec::new(ModelFamily::Boltzmann2)).is_ok());
        let short = Dataset::from_pairs([(1.0, 1.0)]).unwrap();
        assert!(matches!(short.validate_for(hill), Err(Error::InsufficientData { .. })));
    }
}
