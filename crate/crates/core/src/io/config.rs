use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::Pattern;
use crate::sram_model::{ArrayGeometry, SeuRateLaw, VariationModel};
use crate::units::Millivolts;

const BUNDLED: &str = include_str!("../../config/default_sim.json");

/// Everything needed to build and measure a set of virtual parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub variation: VariationModel,
    pub ground_truth: SeuRateLaw,
    #[serde(default = "default_parts")]
    pub n_parts: usize,
    /// Half-width of the uniform per-part flux factor draw around 1.0.
    #[serde(default)]
    pub geom_spread: f64,
    /// Fixed per-part flux factors; overrides `geom_spread` when present.
    #[serde(default)]
    pub geom_factors: Option<Vec<f64>>,
    /// Geometric uncertainty attached to each SER measurement.
    #[serde(default = "default_geom_unc")]
    pub rel_geom_unc: f64,
    #[serde(default = "default_ts")]
    pub ts: f64,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_delta_v")]
    pub delta_v: Millivolts,
    #[serde(default)]
    pub geometry: ArrayGeometry,
    #[serde(default)]
    pub pattern: Pattern,
}

fn default_parts() -> usize {
    5
}
fn default_geom_unc() -> f64 {
    0.03
}
fn default_ts() -> f64 {
    1800.0
}
fn default_duration() -> f64 {
    120.0 * 3600.0
}
fn default_delta_v() -> Millivolts {
    Millivolts(10)
}

impl SimConfig {
    pub fn bundled() -> Self {
        SimConfig::from_json(BUNDLED).expect("bundled simulation config is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SimConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.variation.validate()?;
        if self.n_parts == 0 {
            return Err(Error::Config("n_parts must be at least 1".into()));
        }
        if !(0.0..=0.1).contains(&self.geom_spread) {
            return Err(Error::Config(format!("geom_spread {} outside [0, 0.1]", self.geom_spread)));
        }
        if let Some(g) = &self.geom_factors {
            if g.len() != self.n_parts {
                return Err(Error::Config(format!(
                    "{} geom_factors for {} parts",
                    g.len(),
                    self.n_parts
                )));
            }
            if let Some(bad) = g.iter().find(|f| !(0.9..=1.1).contains(*f)) {
                return Err(Error::Config(format!("geom factor {bad} outside [0.9, 1.1]")));
            }
        }
        if !(self.ts > 0.0 && self.duration >= self.ts) {
            return Err(Error::Config(format!(
                "need 0 < ts <= duration, got ts={} duration={}",
                self.ts, self.duration
            )));
        }
        if self.delta_v <= Millivolts::ZERO {
            return Err(Error::Config("delta_v must be positive".into()));
        }
        ArrayGeometry::new(self.geometry.rows, self.geometry.cols)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_defaults() {
        let c = SimConfig::bundled();
        assert_eq!(c.n_parts, 5);
        assert_eq!(c.ts, 1800.0);
        assert_eq!(c.duration, 432_000.0);
        assert_eq!(c.delta_v, Millivolts(10));
        assert_eq!(c.geometry.cells(), 4096);
        assert_eq!(c.ground_truth, SeuRateLaw::Linear { m: 4.32, b: -0.25 });
    }

    #[test]
    fn geom_factor_count_must_match() {
        let mut c = SimConfig::bundled();
        c.geom_factors = Some(vec![1.03, 1.0]);
        assert!(c.validate().is_err());
        c.geom_factors = Some(vec![1.03, 1.0, 1.0, 1.0, 1.0]);
        assert!(c.validate().is_ok());
    }
}
