//! Measurement procedures run against a [`MemoryArray`](crate::sram_model::MemoryArray):
//! the accelerated SER test and the word-line / hold / read voltage sweeps.

mod sweep;

pub use ser_test::{choose_sampling_time, run_ser_test, SerMeasurement, SerTest};
pub use sweep::{
    run_hold_sweep, run_read_sweep, run_wlvm_sweep, word_line_voltage_margin, SweepResult,
    SweepStep, SweptQuantity, DEFAULT_DELTA_V,
};

use serde::{Deserialize, Serialize};

/// Data background written before a test.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    #[default]
    Zeros,
    Ones,
    Checkerboard,
}

impl Pattern {
    pub fn bit(self, index: usize, cols: usize) -> bool {
        match self {
            Pattern::Zeros => false,
            Pattern::Ones => true,
            Pattern::Checkerboard => (index / cols + index % cols) % 2 == 1,
        }
    }
}

impl std::str::FromStr for Pattern {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "zeros" | "0" => Ok(Pattern::Zeros),
            "ones" | "1" => Ok(Pattern::Ones),
            "checkerboard" => Ok(Pattern::Checkerboard),
            _ => Err(crate::Error::Config(format!("unknown pattern `{s}`"))),
        }
    }
}
