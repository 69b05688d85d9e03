use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Pattern;
use crate::error::{Error, Result};
use crate::sram_model::{CellTypeName, MemoryArray, ReadOutcome};
use crate::units::Millivolts;

/// Instrument granularity of the voltage sweeps.
pub const DEFAULT_DELTA_V: Millivolts = Millivolts(10);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptQuantity {
    WordLine,
    VddHold,
    VddRead,
}

impl SweptQuantity {
    pub fn as_str(self) -> &'static str {
        match self {
            SweptQuantity::WordLine => "word_line",
            SweptQuantity::VddHold => "vdd_hold",
            SweptQuantity::VddRead => "vdd_read",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepStep {
    pub step: usize,
    pub v: Millivolts,
    pub new_failures: usize,
    pub cumulative_failures: usize,
}

/// Per-cell failure voltages from a downward sweep and their statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub part_id: String,
    pub cell_type: CellTypeName,
    pub swept_quantity: SweptQuantity,
    pub delta_v: Millivolts,
    pub v_start: Millivolts,
    /// First failing voltage + delta_v/2, mV.
    pub per_cell_threshold: Vec<f64>,
    /// First failing voltage -> number of cells registered there.
    pub histogram: BTreeMap<Millivolts, usize>,
    /// Mean threshold (V_MEWLVM for word-line sweeps), mV.
    pub mu: f64,
    pub sigma: f64,
    pub se_mean: f64,
}

impl SweepResult {
    fn from_first_failures(
        array: &MemoryArray,
        quantity: SweptQuantity,
        delta_v: Millivolts,
        first_fail: &[Millivolts],
    ) -> Self {
        let half = delta_v.as_f64() / 2.0;
        let per_cell_threshold: Vec<f64> = first_fail.iter().map(|v| v.as_f64() + half).collect();
        let mut histogram = BTreeMap::new();
        for &v in first_fail {
            *histogram.entry(v).or_insert(0) += 1;
        }
        let n = per_cell_threshold.len() as f64;
        let mu = per_cell_threshold.iter().sum::<f64>() / n;
        let sigma = if per_cell_threshold.len() > 1 {
            (per_cell_threshold.iter().map(|t| (t - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        SweepResult {
            part_id: array.part_id().to_string(),
            cell_type: array.cell_type().name,
            swept_quantity: quantity,
            delta_v,
            v_start: array.v_dd_nominal(),
            per_cell_threshold,
            histogram,
            mu,
            sigma,
            se_mean: sigma / n.sqrt(),
        }
    }

    pub fn n_cells(&self) -> usize {
        self.per_cell_threshold.len()
    }

    /// Step-by-step log, from the first lowered voltage down to the step at
    /// which the last cell registered.
    pub fn steps(&self) -> Vec<SweepStep> {
        let Some((&lowest, _)) = self.histogram.iter().next() else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut cumulative = 0;
        let mut step = 1;
        loop {
            let v = level(self.v_start, self.delta_v, step);
            let new_failures = self.histogram.get(&v).copied().unwrap_or(0);
            cumulative += new_failures;
            out.push(SweepStep {
                step,
                v,
                new_failures,
                cumulative_failures: cumulative,
            });
            if v <= lowest {
                break;
            }
            step += 1;
        }
        out
    }

    /// CSV with columns `step,v_mV,new_failures,cumulative_failures`.
    pub fn write_log<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "v_mV", "new_failures", "cumulative_failures"])?;
        for s in self.steps() {
            w.write_record([
                s.step.to_string(),
                s.v.get().to_string(),
                s.new_failures.to_string(),
                s.cumulative_failures.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("sweep log", e))?;
        Ok(())
    }
}

fn level(start: Millivolts, delta_v: Millivolts, step: usize) -> Millivolts {
    Millivolts((start.get() - step as i32 * delta_v.get()).max(0))
}

fn check_delta(array: &MemoryArray, delta_v: Millivolts) -> Result<()> {
    if delta_v <= Millivolts::ZERO || delta_v > array.v_dd_nominal() {
        return Err(Error::Config(format!(
            "sweep step {delta_v} outside (0, {}]",
            array.v_dd_nominal()
        )));
    }
    Ok(())
}

fn write_background(array: &mut MemoryArray, pattern: Pattern, invert: bool) -> Result<()> {
    let nominal = array.v_dd_nominal();
    let cols = array.geometry().cols;
    for i in 0..array.len() {
        array.write_cell(i, pattern.bit(i, cols) ^ invert, nominal)?;
    }
    Ok(())
}

/// Word-line margin sweep. At step n the block is written with the background
/// at nominal, then written with the complement at `nominal - n*delta_v`, then
/// read at nominal; cells not holding the complement that have not failed
/// before are registered at the current word-line voltage.
pub fn run_wlvm_sweep(array: &mut MemoryArray, delta_v: Millivolts, pattern: Pattern) -> Result<SweepResult> {
    check_delta(array, delta_v)?;
    let nominal = array.v_dd_nominal();
    let cols = array.geometry().cols;
    let n = array.len();
    let mut first_fail: Vec<Option<Millivolts>> = vec![None; n];
    let mut remaining = n;
    let mut step = 0;
    while remaining > 0 {
        step += 1;
        let v = level(nominal, delta_v, step);
        write_background(array, pattern, false)?;
        for i in 0..n {
            array.write_cell(i, !pattern.bit(i, cols), v)?;
        }
        for i in 0..n {
            if first_fail[i].is_some() {
                continue;
            }
            let ok = array.read_cell(i, nominal)? == ReadOutcome::Bit(!pattern.bit(i, cols));
            if !ok {
                first_fail[i] = Some(v);
                remaining -= 1;
            }
        }
        if v == Millivolts::ZERO && remaining > 0 {
            return Err(Error::Domain(format!("{remaining} cells still writable at 0 mV")));
        }
    }
    let first_fail: Vec<Millivolts> = first_fail.into_iter().flatten().collect();
    Ok(SweepResult::from_first_failures(array, SweptQuantity::WordLine, delta_v, &first_fail))
}

/// Hold-voltage sweep. Run once with the background and once with its
/// complement; each pass writes at nominal, holds at `nominal - n*delta_v`,
/// restores the supply and reads back. A cell's threshold is its first
/// corruption over both passes.
pub fn run_hold_sweep(array: &mut MemoryArray, delta_v: Millivolts, pattern: Pattern) -> Result<SweepResult> {
    check_delta(array, delta_v)?;
    let nominal = array.v_dd_nominal();
    let cols = array.geometry().cols;
    let n = array.len();
    let mut first_fail: Vec<Option<Millivolts>> = vec![None; n];
    let mut remaining = n;

    for invert in [false, true] {
        let mut seen = vec![false; n];
        let mut step = 0;
        loop {
            step += 1;
            let v = level(nominal, delta_v, step);
            write_background(array, pattern, invert)?;
            array.apply_hold_voltage(v);
            array.restore_supply();
            for i in 0..n {
                if seen[i] {
                    continue;
                }
                let expected = pattern.bit(i, cols) ^ invert;
                if array.read_cell(i, nominal)? != ReadOutcome::Bit(expected) {
                    seen[i] = true;
                    match first_fail[i] {
                        None => {
                            first_fail[i] = Some(v);
                            remaining -= 1;
                        }
                        Some(prev) if v > prev => first_fail[i] = Some(v),
                        Some(_) => {}
                    }
                }
            }
            if v == Millivolts::ZERO || (invert && remaining == 0) {
                break;
            }
        }
    }
    if remaining > 0 {
        return Err(Error::Domain(format!("{remaining} cells retained data at 0 mV")));
    }
    let first_fail: Vec<Millivolts> = first_fail.into_iter().flatten().collect();
    Ok(SweepResult::from_first_failures(array, SweptQuantity::VddHold, delta_v, &first_fail))
}

/// Read-voltage sweep: write at nominal, then read with the core supply at
/// `nominal - n*delta_v` and the word line at nominal.
pub fn run_read_sweep(array: &mut MemoryArray, delta_v: Millivolts, pattern: Pattern) -> Result<SweepResult> {
    check_delta(array, delta_v)?;
    let nominal = array.v_dd_nominal();
    let cols = array.geometry().cols;
    let n = array.len();
    let mut first_fail: Vec<Option<Millivolts>> = vec![None; n];
    let mut remaining = n;
    let mut step = 0;
    while remaining > 0 {
        step += 1;
        let v = level(nominal, delta_v, step);
        write_background(array, pattern, false)?;
        for i in 0..n {
            if first_fail[i].is_some() {
                continue;
            }
            if array.read_cell(i, v)? != ReadOutcome::Bit(pattern.bit(i, cols)) {
                first_fail[i] = Some(v);
                remaining -= 1;
            }
        }
        if v == Millivolts::ZERO && remaining > 0 {
            return Err(Error::Domain(format!("{remaining} cells still readable at 0 mV")));
        }
    }
    let first_fail: Vec<Millivolts> = first_fail.into_iter().flatten().collect();
    Ok(SweepResult::from_first_failures(array, SweptQuantity::VddRead, delta_v, &first_fail))
}

/// `v_dd - v_mewlvm`, in the same units as the inputs.
pub fn word_line_voltage_margin(v_dd: f64, v_mewlvm: f64) -> Result<f64> {
    if !(v_mewlvm >= 0.0 && v_mewlvm <= v_dd) {
        return Err(Error::Domain(format!(
            "mean write voltage {v_mewlvm} outside [0, {v_dd}]"
        )));
    }
    Ok(v_dd - v_mewlvm)
}
