//! Tunable thresholds for the stochastic and discretisation experiments.
//!
//! None of these numbers are theorems. They were chosen from convergence
//! runs of this crate and can be overridden from the command line with
//! `--tol-override key=value`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Allowed ratio of mean sup error to `R * norm / sqrt(n)`.
    pub mean_slack: f64,
    /// Largest acceptable log-log slope of mean error against `n`.
    pub slope_max: f64,
    /// Tolerance for ramp integrals of set-A null densities.
    pub null_tol: f64,
    /// Largest sup change allowed when a null network is added.
    pub modeconnect_change: f64,
    /// Smallest coefficient mass the added null network must carry.
    pub modeconnect_mass: f64,
    /// Tolerance on the affine-fit residual.
    pub affine_tol: f64,
    /// Slack in the `norm <= 2 R C_f` comparison.
    pub bound_slack: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            mean_slack: 1.1,
            slope_max: -0.4,
            null_tol: 1e-8,
            modeconnect_change: 1e-3,
            modeconnect_mass: 0.5,
            affine_tol: 1e-6,
            bound_slack: 1e-10,
        }
    }
}

impl Calibration {
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "mean_slack" => &mut self.mean_slack,
            "slope_max" => &mut self.slope_max,
            "null_tol" => &mut self.null_tol,
            "modeconnect_change" => &mut self.modeconnect_change,
            "modeconnect_mass" => &mut self.modeconnect_mass,
            "affine_tol" => &mut self.affine_tol,
            "bound_slack" => &mut self.bound_slack,
            _ => return Err(Error::Parse(format!("unknown tolerance key `{key}`"))),
        };
        if !value.is_finite() {
            return Err(Error::Parse(format!("tolerance `{key}` must be finite")));
        }
        *slot = value;
        Ok(())
    }

    /// Apply `key=value` strings; returns the overrides actually applied.
    pub fn apply_overrides(&mut self, pairs: &[String]) -> Result<BTreeMap<String, f64>> {
        let mut applied = BTreeMap::new();
        for p in pairs {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{p}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number in `{p}`")))?;
            self.set(k.trim(), v)?;
            applied.insert(k.trim().to_string(), v);
        }
        Ok(applied)
    }
}
