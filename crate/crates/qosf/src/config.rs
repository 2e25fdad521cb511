//! Scenario configuration.
//!
//! A [`SystemConfig`] is loaded from a flat TOML document whose keys are the
//! field names below. Delays are in seconds, angles in radians, and unknown
//! keys are rejected.
//!
//! ```toml
//! num_tx = 2
//! num_rx = 1
//! num_states = 2
//! num_paths = 2
//! num_subcarriers = 128
//! cp_len = 21
//! symbol_duration_s = 128e-6
//! delays_s = [[0.0, 20e-6], [0.0, 20e-6]]
//! path_powers = [[0.5, 0.5], [0.5, 0.5]]
//! constellation = "bpsk"
//! rotation_angles = [0.7853981633974483, 1.5707963267948966, 2.356194490192345]
//! master_seed = 1
//! ```

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use crate::primitives::Constellation;

/// Default OFDM symbol duration: 1 MHz sampling with 128 tones.
pub const DEFAULT_SYMBOL_DURATION_S: f64 = 128e-6;

const POWER_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub num_tx: usize,
    pub num_rx: usize,
    pub num_states: usize,
    pub num_paths: usize,
    pub num_subcarriers: usize,
    pub cp_len: usize,
    pub symbol_duration_s: f64,
    /// `delays_s[p][l]`, non-decreasing in `l`.
    pub delays_s: Vec<Vec<f64>>,
    /// `path_powers[p][l]`, each row summing to one.
    pub path_powers: Vec<Vec<f64>>,
    pub constellation: Constellation,
    /// `num_states * num_paths - 1` rotation angles in `[0, 2π)`.
    pub rotation_angles: Vec<f64>,
    pub master_seed: u64,
}

/// Evenly spread angles `k·π/pl` for `k = 1..pl`; for `pl = 4` these are
/// `π/4, π/2, 3π/4`.
pub fn default_rotation_angles(pl: usize) -> Vec<f64> {
    (1..pl).map(|k| k as f64 * PI / pl as f64).collect()
}

impl SystemConfig {
    /// Two transmit antennas, one receive antenna, two radiation states,
    /// a two-ray equal-power channel with the given maximum delay shared by
    /// both states, 128 tones, BPSK and angles `π/4, π/2, 3π/4`.
    pub fn two_ray(max_delay_s: f64) -> Self {
        let num_states = 2;
        Self {
            num_tx: 2,
            num_rx: 1,
            num_states,
            num_paths: 2,
            num_subcarriers: 128,
            cp_len: 21,
            symbol_duration_s: DEFAULT_SYMBOL_DURATION_S,
            delays_s: vec![vec![0.0, max_delay_s]; num_states],
            path_powers: vec![vec![0.5, 0.5]; num_states],
            constellation: Constellation::Bpsk,
            rotation_angles: default_rotation_angles(4),
            master_seed: 1,
        }
    }

    pub fn pl(&self) -> usize {
        self.num_states * self.num_paths
    }

    /// Subcarrier spacing Δf = 1 / Ts.
    pub fn subcarrier_spacing_hz(&self) -> f64 {
        1.0 / self.symbol_duration_s
    }

    /// Sample period Ts / Nc.
    pub fn sample_period_s(&self) -> f64 {
        self.symbol_duration_s / self.num_subcarriers as f64
    }

    /// Number of symbol groups per OFDM symbol, `⌊Nc / (L·Mt)⌋`.
    pub fn num_groups(&self) -> usize {
        self.num_subcarriers / (self.num_paths * self.num_tx)
    }

    /// Same scenario restricted to its first radiation state.
    pub fn single_state(&self) -> Self {
        let mut c = self.clone();
        c.num_states = 1;
        c.delays_s.truncate(1);
        c.path_powers.truncate(1);
        c.rotation_angles = default_rotation_angles(c.num_paths);
        c
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_tx != 2 {
            return Err(Error::UnsupportedTxCount(self.num_tx));
        }
        if self.num_rx == 0
            || self.num_states == 0
            || self.num_paths == 0
            || self.num_subcarriers == 0
        {
            return invalid(
                "num_rx, num_states, num_paths and num_subcarriers must be positive".into(),
            );
        }
        if !(self.symbol_duration_s.is_finite() && self.symbol_duration_s > 0.0) {
            return invalid(format!(
                "symbol_duration_s must be positive, got {}",
                self.symbol_duration_s
            ));
        }
        let block = self.num_paths * self.num_tx;
        if !self.num_subcarriers.is_multiple_of(block) {
            return Err(Error::SubcarriersNotMultiple {
                num_subcarriers: self.num_subcarriers,
                block,
            });
        }
        if !self.pl().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.pl()));
        }
        if self.delays_s.len() != self.num_states || self.path_powers.len() != self.num_states {
            return invalid(format!(
                "delays_s and path_powers need one row per state ({})",
                self.num_states
            ));
        }
        let cp_s = self.cp_len as f64 * self.sample_period_s();
        for p in 0..self.num_states {
            let delays = &self.delays_s[p];
            let powers = &self.path_powers[p];
            if delays.len() != self.num_paths || powers.len() != self.num_paths {
                return invalid(format!(
                    "state {}: expected {} paths",
                    p + 1,
                    self.num_paths
                ));
            }
            if delays.iter().any(|d| !d.is_finite() || *d < 0.0) {
                return invalid(format!(
                    "state {}: delays must be finite and non-negative",
                    p + 1
                ));
            }
            if delays.windows(2).any(|w| w[1] < w[0]) {
                return invalid(format!("state {}: delays must be non-decreasing", p + 1));
            }
            if powers.iter().any(|s| !s.is_finite() || *s < 0.0) {
                return invalid(format!("state {}: path powers must be non-negative", p + 1));
            }
            let sum: f64 = powers.iter().sum();
            if (sum - 1.0).abs() > POWER_SUM_TOL {
                return Err(Error::PathPowersNotNormalized { state: p + 1, sum });
            }
            let max_delay_s = delays.last().copied().unwrap_or(0.0);
            // allow for the rounding in cp_len * Ts / Nc
            if max_delay_s > cp_s * (1.0 + 1e-12) {
                return Err(Error::DelayExceedsCyclicPrefix { max_delay_s, cp_s });
            }
        }
        if self.rotation_angles.len() != self.pl() - 1 {
            return Err(Error::LengthMismatch {
                what: "rotation_angles",
                expected: self.pl() - 1,
                actual: self.rotation_angles.len(),
            });
        }
        if self
            .rotation_angles
            .iter()
            .any(|a| !(a.is_finite() && (0.0..2.0 * PI).contains(a)))
        {
            return invalid("rotation angles must lie in [0, 2π)".into());
        }
        Ok(())
    }

    /// Parses and validates a TOML document.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let config: Self = toml::from_str(s).map_err(|e| Error::ConfigFormat(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Fails for seeds above `i64::MAX`, which TOML integers cannot hold.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigFormat(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }
}
