//! Absorbance readings to percent-death datasets.
//!
//! Blank correction and the living-fraction ratio are taken over every
//! pairing of the two inputs, so a concentration with `nf` treated wells,
//! `nd` live controls and `nb` blanks yields `nf * nd * nb^2` quotients.

use alloc::vec::Vec;

use crate::models::Dataset;
use crate::{Error, Result};

/// Raw plate readings for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbanceSets {
    blanks: Vec<f64>,
    live_controls: Vec<f64>,
    /// `(concentration, treated readings)`
    treated: Vec<(f64, Vec<f64>)>,
}

impl AbsorbanceSets {
    pub fn new(blanks: Vec<f64>, live_controls: Vec<f64>, treated: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        check_role("blanks", &blanks)?;
        check_role("live controls", &live_controls)?;
        if treated.is_empty() {
            return Err(Error::config("no treated concentrations"));
        }
        for (conc, wells) in &treated {
            if !conc.is_finite() {
                return Err(Error::config("concentration must be finite"));
            }
            check_role("treated", wells)?;
        }
        Ok(Self { blanks, live_controls, treated })
    }

    pub fn blanks(&self) -> &[f64] {
        &self.blanks
    }

    pub fn live_controls(&self) -> &[f64] {
        &self.live_controls
    }

    pub fn treated(&self) -> &[(f64, Vec<f64>)] {
        &self.treated
    }

    /// Corrected live controls, shared by every concentration.
    pub fn corrected_live(&self) -> Vec<f64> {
        blank_correct(&self.live_controls, &self.blanks)
    }

    /// Effect sample for treated group `k`.
    pub fn effect_sample(&self, k: usize) -> Option<EffectSample> {
        let (conc, wells) = self.treated.get(k)?;
        Some(effect_for(*conc, wells, &self.blanks, &self.corrected_live()))
    }

    /// Effect samples for every concentration, in input order.
    pub fn effect_samples(&self) -> Vec<EffectSample> {
        let live = self.corrected_live();
        self.treated.iter().map(|(conc, wells)| effect_for(*conc, wells, &self.blanks, &live)).collect()
    }
}

fn check_role(role: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::config(alloc::format!("{role} set is empty")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::config(alloc::format!("{role} set has a non-finite absorbance")));
    }
    Ok(())
}

fn effect_for(concentration: f64, wells: &[f64], blanks: &[f64], live: &[f64]) -> EffectSample {
    let treated = blank_correct(wells, blanks);
    let (fractions, dropped) = living_fraction(&treated, live);
    EffectSample { concentration, y_values: percent_death(&fractions), dropped_nonfinite: dropped }
}

/// Percent death at one concentration.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectSample {
    pub concentration: f64,
    pub y_values: Vec<f64>,
    pub dropped_nonfinite: usize,
}

impl EffectSample {
    pub fn kept(&self) -> usize {
        self.y_values.len()
    }

    pub fn raw_count(&self) -> usize {
        self.kept() + self.dropped_nonfinite
    }
}

/// Stack effect samples into one `(concentration, percent death)` dataset.
pub fn to_dataset(samples: &[EffectSample]) -> Result<Dataset> {
    Dataset::from_pairs(samples.iter().flat_map(|s| s.y_values.iter().map(move |&y| (s.concentration, y))))
}

/// Every `s - b`, sample-major.
pub fn blank_correct(samples: &[f64], blanks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len() * blanks.len());
    for &s in samples {
        out.extend(blanks.iter().map(|&b| s - b));
    }
    out
}

/// Every finite `f / l`, plus the number of non-finite quotients dropped.
pub fn living_fraction(treated: &[f64], live: &[f64]) -> (Vec<f64>, usize) {
    let mut out = Vec::with_capacity(treated.len() * live.len());
    let mut dropped = 0;
    for &f in treated {
        for &l in live {
            let q = f / l;
            if q.is_finite() {
                out.push(q);
            } else {
                dropped += 1;
            }
        }
    }
    (out, dropped)
}

/// `100 * (1 - p)`; negative values are kept.
pub fn percent_death(fractions: &[f64]) -> Vec<f64> {
    fractions.iter().map(|&p| 100.0 * (1.0 - p)).collect()
}
