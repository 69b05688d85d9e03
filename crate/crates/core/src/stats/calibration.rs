use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{combine_rel_uncertainties, weighted_linfit, CalibrationFit, WeightedPoint};
use crate::error::{Error, Result};
use crate::io::PartDataset;
use crate::protocols::word_line_voltage_margin;
use crate::sram_model::CellTypeName;
use crate::units::Millivolts;

/// How a point's SER uncertainty is built from its statistical and
/// geometric relative terms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// `sqrt(stat^2 + geom^2)`.
    #[default]
    Combined,
    /// Poisson term only.
    StatOnly,
    /// `stat + geom`, the worst-case linear sum.
    Linear,
}

impl WeightMode {
    pub const ALL: [WeightMode; 3] = [WeightMode::Combined, WeightMode::StatOnly, WeightMode::Linear];

    pub fn as_str(self) -> &'static str {
        match self {
            WeightMode::Combined => "combined",
            WeightMode::StatOnly => "stat-only",
            WeightMode::Linear => "linear",
        }
    }

    pub fn relative(self, stat: f64, geom: f64) -> f64 {
        match self {
            WeightMode::Combined => combine_rel_uncertainties(stat, geom),
            WeightMode::StatOnly => stat,
            WeightMode::Linear => stat + geom,
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WeightMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown weight mode `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub weight_mode: WeightMode,
    /// Geometric flux uncertainty for parts that do not carry their own.
    pub default_rel_geom_unc: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            weight_mode: WeightMode::Combined,
            default_rel_geom_unc: 0.03,
        }
    }
}

impl CalibrationOptions {
    pub fn with_mode(weight_mode: WeightMode) -> Self {
        CalibrationOptions {
            weight_mode,
            ..Default::default()
        }
    }
}

/// A fit point together with where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub part_id: String,
    pub cell_type: CellTypeName,
    pub v_dd: Millivolts,
    pub point: WeightedPoint,
}

/// Build fit points from every (part, type) that has both an SER record and
/// a margin record. `x` is the word-line voltage margin in volts; its own
/// uncertainty is ignored.
pub fn calibration_points(datasets: &[PartDataset], opts: &CalibrationOptions) -> Result<Vec<LabeledPoint>> {
    let mut out = Vec::new();
    for ds in datasets {
        let geom = ds.rel_geom_unc.unwrap_or(opts.default_rel_geom_unc);
        for (&cell_type, rec) in &ds.types {
            let (Some(ser), Some(margin)) = (&rec.ser, &rec.margin) else {
                continue;
            };
            let stat = ser.rel_stat_unc.ok_or_else(|| {
                Error::Config(format!(
                    "part {} {cell_type}: SER has no statistical uncertainty",
                    ds.part_id
                ))
            })?;
            let x = word_line_voltage_margin(ds.v_dd.as_f64(), margin.v_mewlvm_mv)? / 1000.0;
            out.push(LabeledPoint {
                part_id: ds.part_id.clone(),
                cell_type,
                v_dd: ds.v_dd,
                point: WeightedPoint {
                    x,
                    y: ser.ser,
                    sigma_y: ser.ser * opts.weight_mode.relative(stat, geom),
                },
            });
        }
    }
    Ok(out)
}

pub fn calibrate_parts(datasets: &[PartDataset], opts: &CalibrationOptions) -> Result<CalibrationFit> {
    let points: Vec<WeightedPoint> = calibration_points(datasets, opts)?
        .into_iter()
        .map(|p| p.point)
        .collect();
    weighted_linfit(&points)
}
