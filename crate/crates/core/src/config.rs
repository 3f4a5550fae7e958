//! Tunable constants shared by the simulator and the modeled subroutines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative singular-value cutoff used by every pseudoinverse and kernel computation.
pub const RANK_CUTOFF: f64 = 1e-10;

/// Eigenphases with magnitude at most this are treated as zero.
pub const ZERO_PHASE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// Negative witness bound constant: `W̃₋ = c_minus · n²`.
    pub c_minus: f64,
    /// PathDetection cost constant.
    pub c_pd: f64,
    /// WitnessSizeEst cost constant.
    pub c_we: f64,
    /// Iterative amplitude estimation cost constant.
    pub c_iqae: f64,
    /// Minimum algebraic connectivity of each expander half.
    pub expander_gap: f64,
    /// When false, IQAE never fails and modeled subroutines never err.
    pub inject_failures: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config { c_minus: 2.0, c_pd: 1.0, c_we: 1.0, c_iqae: 10.0, expander_gap: 0.2, inject_failures: true }
    }
}

impl Config {
    /// Configuration with failure injection switched off.
    pub fn faithful() -> Self {
        Config { inject_failures: false, ..Config::default() }
    }

    /// Apply a `NAME=VALUE` style override.
    pub fn set(&mut self, name: &str, value: &str) -> Result<()> {
        let num = || {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| Error::InvalidParameter(format!("{name}={value}")))
        };
        match name {
            "c_minus" => self.c_minus = num()?,
            "c_pd" => self.c_pd = num()?,
            "c_we" => self.c_we = num()?,
            "c_iqae" => self.c_iqae = num()?,
            "expander_gap" => self.expander_gap = num()?,
            "inject_failures" => {
                self.inject_failures = value.parse().map_err(|_| Error::InvalidParameter(format!("{name}={value}")))?
            }
            _ => return Err(Error::InvalidParameter(format!("unknown constant {name}"))),
        }
        Ok(())
    }
}
