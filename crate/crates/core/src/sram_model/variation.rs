use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CellTypeName;
use crate::error::{Error, Result};
use crate::units::Millivolts;

/// Gaussian threshold distributions (mV) for one cell type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeVariation {
    pub mu_vwlmin: f64,
    pub sigma_vwlmin: f64,
    pub mu_hold: f64,
    pub sigma_hold: f64,
    pub mu_read: f64,
    pub sigma_read: f64,
}

/// Intra-die threshold distributions per cell type plus the part-to-part
/// offset spread. Loaded from JSON keyed by cell-type name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationModel {
    #[serde(default = "default_nominal")]
    pub v_dd_nominal: Millivolts,
    /// Standard deviation of the common offset added to every type mean of a part.
    #[serde(default = "default_sigma_part")]
    pub sigma_part: f64,
    pub types: BTreeMap<CellTypeName, TypeVariation>,
}

fn default_nominal() -> Millivolts {
    Millivolts(1200)
}

fn default_sigma_part() -> f64 {
    8.0
}

impl VariationModel {
    /// Defaults shipped with the crate: write-threshold statistics averaged
    /// over the five measured parts, placeholder hold/read distributions.
    pub fn bundled() -> Self {
        crate::io::SimConfig::bundled().variation
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: VariationModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let vdd = self.v_dd_nominal.as_f64();
        if vdd <= 0.0 {
            return Err(Error::Config(format!(
                "nominal supply must be positive, got {}",
                self.v_dd_nominal
            )));
        }
        if !(self.sigma_part >= 0.0 && self.sigma_part.is_finite()) {
            return Err(Error::Config(format!(
                "sigma_part must be a finite non-negative value, got {}",
                self.sigma_part
            )));
        }
        for (name, t) in &self.types {
            let sigmas = [
                ("sigma_vwlmin", t.sigma_vwlmin),
                ("sigma_hold", t.sigma_hold),
                ("sigma_read", t.sigma_read),
            ];
            for (field, s) in sigmas {
                if !(s >= 0.0 && s.is_finite()) {
                    return Err(Error::Config(format!("{name}: {field} must be >= 0, got {s}")));
                }
            }
            let means = [
                ("mu_vwlmin", t.mu_vwlmin),
                ("mu_hold", t.mu_hold),
                ("mu_read", t.mu_read),
            ];
            for (field, m) in means {
                if !(m > 0.0 && m <= vdd) {
                    return Err(Error::Config(format!(
                        "{name}: {field} = {m} outside (0, {vdd}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, name: CellTypeName) -> Result<&TypeVariation> {
        self.types
            .get(&name)
            .ok_or_else(|| Error::Config(format!("variation model has no entry for {name}")))
    }

    /// Same distributions, different nominal supply (the V_DD +/-10% runs).
    pub fn with_nominal(&self, v_dd_nominal: Millivolts) -> Self {
        VariationModel {
            v_dd_nominal,
            ..self.clone()
        }
    }

    /// Replace one type's write-threshold distribution.
    pub fn with_write_distribution(mut self, name: CellTypeName, mu: f64, sigma: f64) -> Self {
        let entry = self.types.entry(name).or_insert(TypeVariation {
            mu_vwlmin: mu,
            sigma_vwlmin: sigma,
            mu_hold: 450.0,
            sigma_hold: 30.0,
            mu_read: 650.0,
            sigma_read: 30.0,
        });
        entry.mu_vwlmin = mu;
        entry.sigma_vwlmin = sigma;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_model_is_valid_and_complete() {
        let m = VariationModel::bundled();
        m.validate().unwrap();
        assert_eq!(m.v_dd_nominal, Millivolts(1200));
        assert_eq!(m.sigma_part, 8.0);
        for t in CellTypeName::ALL {
            assert!(m.get(t).is_ok());
        }
    }

    #[test]
    fn negative_sigma_is_a_config_error() {
        let mut m = VariationModel::bundled();
        m.types.get_mut(&CellTypeName::SS).unwrap().sigma_hold = -1.0;
        assert!(matches!(m.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn mean_above_nominal_is_rejected() {
        let m = VariationModel::bundled().with_write_distribution(CellTypeName::SL, 1300.0, 10.0);
        assert!(m.validate().is_err());
    }

    #[test]
    fn json_keyed_by_type_name() {
        let text = r#"{
            "v_dd_nominal": 1200,
            "types": {
                "SS": {"mu_vwlmin": 791, "sigma_vwlmin": 44, "mu_hold": 450,
                       "sigma_hold": 30, "mu_read": 650, "sigma_read": 30}
            }
        }"#;
        let m = VariationModel::from_json(text).unwrap();
        assert_eq!(m.get(CellTypeName::SS).unwrap().mu_vwlmin, 791.0);
        assert_eq!(m.sigma_part, 8.0);
        assert!(m.get(CellTypeName::LS).is_err());
    }
}
