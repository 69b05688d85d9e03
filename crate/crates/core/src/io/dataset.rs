use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::protocols::{SerMeasurement, SweepResult};
use crate::sram_model::CellTypeName;
use crate::units::Millivolts;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerRecord {
    /// µSEU/(bit·s).
    pub ser: f64,
    pub rel_stat_unc: Option<f64>,
}

impl From<&SerMeasurement> for SerRecord {
    fn from(m: &SerMeasurement) -> Self {
        SerRecord {
            ser: m.ser,
            rel_stat_unc: m.rel_stat_unc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginRecord {
    /// Mean effective word-line write voltage, mV.
    pub v_mewlvm_mv: f64,
    pub sigma_mv: Option<f64>,
}

impl From<&SweepResult> for MarginRecord {
    fn from(s: &SweepResult) -> Self {
        MarginRecord {
            v_mewlvm_mv: s.mu,
            sigma_mv: Some(s.sigma),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeRecord {
    pub ser: Option<SerRecord>,
    pub margin: Option<MarginRecord>,
}

/// Everything measured on one part, keyed by cell type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartDataset {
    pub part_id: String,
    pub v_dd: Millivolts,
    /// Overrides the calibration-wide geometric flux uncertainty.
    pub rel_geom_unc: Option<f64>,
    pub types: BTreeMap<CellTypeName, TypeRecord>,
}

impl PartDataset {
    pub fn new(part_id: impl Into<String>, v_dd: Millivolts) -> Self {
        PartDataset {
            part_id: part_id.into(),
            v_dd,
            rel_geom_unc: None,
            types: BTreeMap::new(),
        }
    }

    pub fn set_ser(&mut self, cell_type: CellTypeName, rec: SerRecord) {
        self.types.entry(cell_type).or_default().ser = Some(rec);
    }

    pub fn set_margin(&mut self, cell_type: CellTypeName, rec: MarginRecord) {
        self.types.entry(cell_type).or_default().margin = Some(rec);
    }

    pub fn ser(&self, cell_type: CellTypeName) -> Option<&SerRecord> {
        self.types.get(&cell_type)?.ser.as_ref()
    }

    pub fn margin(&self, cell_type: CellTypeName) -> Option<&MarginRecord> {
        self.types.get(&cell_type)?.margin.as_ref()
    }
}
