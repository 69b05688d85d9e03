use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{CellType, VariationModel};
use crate::error::{Error, Result};
use crate::units::Millivolts;

const MAX_REDRAWS: usize = 100_000;

/// Rows x columns of a block. Protocols never use the split, only the count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
}

impl ArrayGeometry {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config(format!("geometry must be positive, got {rows}x{cols}")));
        }
        Ok(ArrayGeometry { rows, cols })
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        ArrayGeometry { rows: 64, cols: 64 }
    }
}

/// Ground-truth upset rate assigned to every cell of a block, in µSEU/(bit·s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeuRateLaw {
    /// Same rate for every block.
    Uniform { rate: f64 },
    /// `m * margin + b` with the margin (volts) taken between the nominal
    /// supply and the block's true mean write threshold; clipped at zero.
    Linear { m: f64, b: f64 },
}

impl SeuRateLaw {
    pub fn rate_for(&self, v_dd_nominal: Millivolts, mean_vwlmin_mv: f64) -> f64 {
        match *self {
            SeuRateLaw::Uniform { rate } => rate.max(0.0),
            SeuRateLaw::Linear { m, b } => {
                let margin_v = (v_dd_nominal.as_f64() - mean_vwlmin_mv) / 1000.0;
                (m * margin_v + b).max(0.0)
            }
        }
    }
}

impl Default for SeuRateLaw {
    fn default() -> Self {
        SeuRateLaw::Uniform { rate: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub v_wl_min: Millivolts,
    pub v_dd_min_hold: Millivolts,
    pub v_dd_min_read: Millivolts,
    /// State the latch collapses to when the supply drops below `v_dd_min_hold`.
    pub preferred_state: bool,
    /// µSEU/(bit·s).
    pub true_seu_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteOutcome {
    Success,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadOutcome {
    Bit(bool),
    ReadFailure,
}

/// One memory block: a cell type, per-cell thresholds and the stored bits.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryArray {
    part_id: String,
    cell_type: CellType,
    geometry: ArrayGeometry,
    v_dd_nominal: Millivolts,
    v_dd: Millivolts,
    cells: Vec<CellParams>,
    state: Vec<bool>,
}

impl MemoryArray {
    /// Build an array from explicit cell records; every bit starts at 0.
    pub fn from_cells(
        part_id: impl Into<String>,
        cell_type: CellType,
        geometry: ArrayGeometry,
        v_dd_nominal: Millivolts,
        cells: Vec<CellParams>,
    ) -> Result<Self> {
        if cells.len() != geometry.cells() {
            return Err(Error::Config(format!(
                "{} cell records for a {}x{} array",
                cells.len(),
                geometry.rows,
                geometry.cols
            )));
        }
        for (i, c) in cells.iter().enumerate() {
            for v in [c.v_wl_min, c.v_dd_min_hold, c.v_dd_min_read] {
                if v <= Millivolts::ZERO || v > v_dd_nominal {
                    return Err(Error::Config(format!(
                        "cell {i}: threshold {v} outside (0, {v_dd_nominal}]"
                    )));
                }
            }
            if !(c.true_seu_rate >= 0.0) {
                return Err(Error::Config(format!("cell {i}: negative SEU rate")));
            }
        }
        let n = cells.len();
        Ok(MemoryArray {
            part_id: part_id.into(),
            cell_type,
            geometry,
            v_dd_nominal,
            v_dd: v_dd_nominal,
            cells,
            state: vec![false; n],
        })
    }

    pub fn part_id(&self) -> &str {
        &self.part_id
    }

    pub fn cell_type(&self) -> CellType {
        self.cell_type
    }

    pub fn geometry(&self) -> ArrayGeometry {
        self.geometry
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn v_dd_nominal(&self) -> Millivolts {
        self.v_dd_nominal
    }

    /// Last core supply applied through [`Self::apply_hold_voltage`].
    pub fn v_dd(&self) -> Millivolts {
        self.v_dd
    }

    pub fn cells(&self) -> &[CellParams] {
        &self.cells
    }

    pub fn state(&self) -> &[bool] {
        &self.state
    }

    fn check(&self, index: usize) -> Result<()> {
        if index < self.cells.len() {
            Ok(())
        } else {
            Err(Error::Address {
                index,
                len: self.cells.len(),
            })
        }
    }

    pub fn cell(&self, index: usize) -> Result<&CellParams> {
        self.check(index)?;
        Ok(&self.cells[index])
    }

    /// Direct view of the stored bit, bypassing the read path.
    pub fn stored(&self, index: usize) -> Result<bool> {
        self.check(index)?;
        Ok(self.state[index])
    }

    pub fn write_cell(&mut self, index: usize, value: bool, v_wl: Millivolts) -> Result<WriteOutcome> {
        self.check(index)?;
        if v_wl < Millivolts::ZERO || v_wl > self.v_dd_nominal {
            return Err(Error::Domain(format!(
                "word-line voltage {v_wl} outside [0, {}]",
                self.v_dd_nominal
            )));
        }
        if v_wl >= self.cells[index].v_wl_min {
            self.state[index] = value;
            Ok(WriteOutcome::Success)
        } else {
            Ok(WriteOutcome::Failed)
        }
    }

    /// Non-destructive read at core supply `v_dd` with the word line at nominal.
    pub fn read_cell(&self, index: usize, v_dd: Millivolts) -> Result<ReadOutcome> {
        self.check(index)?;
        if v_dd >= self.cells[index].v_dd_min_read {
            Ok(ReadOutcome::Bit(self.state[index]))
        } else {
            Ok(ReadOutcome::ReadFailure)
        }
    }

    /// Hold the array at core supply `v_dd`. Cells whose retention threshold
    /// exceeds it collapse to their preferred state. Returns how many stored
    /// bits changed.
    pub fn apply_hold_voltage(&mut self, v_dd: Millivolts) -> usize {
        self.v_dd = v_dd;
        let mut changed = 0;
        for (cell, bit) in self.cells.iter().zip(self.state.iter_mut()) {
            if cell.v_dd_min_hold > v_dd {
                if *bit != cell.preferred_state {
                    changed += 1;
                }
                *bit = cell.preferred_state;
            }
        }
        changed
    }

    /// Return the core supply to nominal. Stored bits are unaffected.
    pub fn restore_supply(&mut self) {
        self.v_dd = self.v_dd_nominal;
    }

    pub fn flip_cell(&mut self, index: usize) -> Result<()> {
        self.check(index)?;
        self.state[index] = !self.state[index];
        Ok(())
    }

    pub fn set_seu_rates(&mut self, rate: f64) {
        for c in &mut self.cells {
            c.true_seu_rate = rate.max(0.0);
        }
    }

    pub fn mean_vwl_min(&self) -> f64 {
        self.cells.iter().map(|c| c.v_wl_min.as_f64()).sum::<f64>() / self.cells.len() as f64
    }
}

/// Draws [`MemoryArray`]s from a [`VariationModel`].
#[derive(Debug, Clone)]
pub struct ArraySampler<'a> {
    model: &'a VariationModel,
    geometry: ArrayGeometry,
    law: SeuRateLaw,
    part_id: String,
}

impl<'a> ArraySampler<'a> {
    pub fn new(model: &'a VariationModel) -> Self {
        ArraySampler {
            model,
            geometry: ArrayGeometry::default(),
            law: SeuRateLaw::default(),
            part_id: "part".to_string(),
        }
    }

    pub fn geometry(mut self, geometry: ArrayGeometry) -> Self {
        self.geometry = geometry;
        self
    }

    pub fn law(mut self, law: SeuRateLaw) -> Self {
        self.law = law;
        self
    }

    pub fn part_id(mut self, part_id: impl Into<String>) -> Self {
        self.part_id = part_id.into();
        self
    }

    pub fn sample(&self, cell_type: CellType, part_offset: f64, seed: u64) -> Result<MemoryArray> {
        self.model.validate()?;
        let t = self.model.get(cell_type.name)?;
        let vdd = self.model.v_dd_nominal;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let normal = |mu: f64, sigma: f64| {
            Normal::new(mu + part_offset, sigma)
                .map_err(|e| Error::Config(format!("{}: {e}", cell_type.name)))
        };
        let write = normal(t.mu_vwlmin, t.sigma_vwlmin)?;
        let hold = normal(t.mu_hold, t.sigma_hold)?;
        let read = normal(t.mu_read, t.sigma_read)?;

        let rate = self.law.rate_for(vdd, t.mu_vwlmin + part_offset);
        let mut cells = Vec::with_capacity(self.geometry.cells());
        for _ in 0..self.geometry.cells() {
            let v_wl_min = draw_in_range(&write, &mut rng, vdd)?;
            let v_dd_min_hold = draw_in_range(&hold, &mut rng, vdd)?;
            let v_dd_min_read = draw_in_range(&read, &mut rng, vdd)?;
            cells.push(CellParams {
                v_wl_min,
                v_dd_min_hold,
                v_dd_min_read,
                preferred_state: rng.random(),
                true_seu_rate: rate,
            });
        }
        MemoryArray::from_cells(self.part_id.clone(), cell_type, self.geometry, vdd, cells)
    }
}

/// Rejection-sample a threshold on the mV grid inside (0, vdd].
fn draw_in_range(dist: &Normal<f64>, rng: &mut ChaCha8Rng, vdd: Millivolts) -> Result<Millivolts> {
    for _ in 0..MAX_REDRAWS {
        let v = dist.sample(rng).round();
        if v >= 1.0 && v <= vdd.as_f64() {
            return Ok(Millivolts(v as i32));
        }
    }
    Err(Error::Config(format!(
        "threshold distribution N({}, {}) has no usable mass inside (0, {vdd}]",
        dist.mean(),
        dist.std_dev()
    )))
}

/// Sample a default-geometry block with zero upset rates.
pub fn sample_array(
    cell_type: CellType,
    model: &VariationModel,
    part_offset: f64,
    seed: u64,
) -> Result<MemoryArray> {
    ArraySampler::new(model).sample(cell_type, part_offset, seed)
}
