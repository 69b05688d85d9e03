//! Virtual SRAM test chip and statistical toolkit for estimating the alpha
//! soft-error rate (SER) of a part from word-line voltage margin (WLVM)
//! measurements.
//!
//! The crate is organised bottom-up:
//!
//! - [`sram_model`]: cell types, per-cell threshold variation and the
//!   voltage-dependent write/read/hold behaviour of a memory block.
//! - [`radiation`]: homogeneous Poisson upset generation and injection.
//! - [`protocols`]: the accelerated SER test, the word-line margin sweep and
//!   the hold/read supply sweeps.
//! - [`stats`]: Poisson uncertainties, weighted line fitting and SER
//!   prediction from a calibration.
//! - [`io`] and [`pipeline`]: datasets, configuration, reports and the
//!   end-to-end simulate → measure → calibrate flow used by the CLI.

pub mod cli;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod protocols;
pub mod radiation;
pub mod sram_model;
pub mod stats;
pub mod units;

pub use error::{Error, Result};
pub use units::Millivolts;
