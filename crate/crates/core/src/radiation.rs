//! Alpha-induced upsets as a homogeneous Poisson process.
//!
//! Each cell `c` is hit at rate `true_seu_rate(c) * geom_factor * 1e-6` per
//! second. Events are generated for the whole block at the aggregate rate and
//! assigned to cells in proportion to their individual rates.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sram_model::MemoryArray;

/// µSEU/(bit·s) to SEU/(bit·s).
pub const MICRO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSource {
    /// Baseline upset rate in µSEU/(bit·s), used for uniform-rate scenarios.
    pub rate_per_bit: f64,
    /// Flux multiplier from source-to-sample positioning.
    pub geom_factor: f64,
}

impl AlphaSource {
    pub fn new(rate_per_bit: f64, geom_factor: f64) -> Result<Self> {
        if !(rate_per_bit >= 0.0 && rate_per_bit.is_finite()) {
            return Err(Error::Config(format!("source rate must be >= 0, got {rate_per_bit}")));
        }
        if !(0.9..=1.1).contains(&geom_factor) {
            return Err(Error::Config(format!(
                "geometric flux factor {geom_factor} outside [0.9, 1.1]"
            )));
        }
        Ok(AlphaSource {
            rate_per_bit,
            geom_factor,
        })
    }

    pub fn nominal(rate_per_bit: f64) -> Result<Self> {
        AlphaSource::new(rate_per_bit, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeuEvent {
    /// Seconds since the start of irradiation.
    pub time: f64,
    pub cell: usize,
}

/// Generate the time-ordered upsets hitting `array` over `[0, duration)`.
pub fn generate_events(
    array: &MemoryArray,
    source: &AlphaSource,
    duration: f64,
    seed: u64,
) -> Result<Vec<SeuEvent>> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Domain(format!("duration must be positive, got {duration}")));
    }
    let rates: Vec<f64> = array
        .cells()
        .iter()
        .map(|c| c.true_seu_rate * source.geom_factor * MICRO)
        .collect();
    let total: f64 = rates.iter().sum();
    if total <= 0.0 {
        return Ok(Vec::new());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = Exp::new(total).map_err(|e| Error::Domain(e.to_string()))?;
    let uniform = rates.iter().all(|&r| r == rates[0]);
    let picker = if uniform {
        None
    } else {
        Some(WeightedIndex::new(&rates).map_err(|e| Error::Domain(e.to_string()))?)
    };

    let expected = (total * duration) as usize;
    let mut events = Vec::with_capacity(expected + 4 * (expected as f64).sqrt() as usize + 16);
    let mut t = 0.0;
    loop {
        t += gaps.sample(&mut rng);
        if t >= duration {
            break;
        }
        let cell = match &picker {
            Some(w) => w.sample(&mut rng),
            None => rng.random_range(0..rates.len()),
        };
        events.push(SeuEvent { time: t, cell });
    }
    Ok(events)
}

/// Apply every event with `t0 <= time < t1` as a bit flip, in time order.
/// Returns the number of events applied, which can exceed the number of cells
/// whose state visibly changed.
pub fn inject_window(array: &mut MemoryArray, events: &[SeuEvent], t0: f64, t1: f64) -> Result<usize> {
    if !(t0 < t1) {
        return Err(Error::Domain(format!("empty injection window [{t0}, {t1})")));
    }
    debug_assert!(events.windows(2).all(|w| w[0].time <= w[1].time));
    let lo = events.partition_point(|e| e.time < t0);
    let hi = events.partition_point(|e| e.time < t1);
    for e in &events[lo..hi] {
        array.flip_cell(e.cell)?;
    }
    Ok(hi - lo)
}

/// Expected fraction of upsets hidden by an even number of hits on the same
/// cell within one sampling window: `1 - (1 - exp(-2 λ Ts)) / (2 λ Ts)`.
pub fn undetected_fraction(lambda_cell: f64, ts: f64) -> f64 {
    let x = 2.0 * lambda_cell * ts;
    if x <= 0.0 {
        0.0
    } else if x < 1e-4 {
        x / 2.0 - x * x / 6.0 + x * x * x / 24.0
    } else {
        1.0 + (-x).exp_m1() / x
    }
}

/// Event log as CSV with columns `time_s,cell_index`.
pub fn write_event_log<W: Write>(events: &[SeuEvent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_s", "cell_index"])?;
    for e in events {
        w.write_record([e.time.to_string(), e.cell.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("event log", e))?;
    Ok(())
}
