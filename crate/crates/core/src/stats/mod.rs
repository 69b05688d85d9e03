//! Poisson uncertainties, weighted straight-line fitting, and SER prediction
//! from a calibrated line.

mod calibration;
mod regression;
mod uncertainty;

pub use calibration::{calibrate_parts, calibration_points, CalibrationOptions, LabeledPoint, WeightMode};
pub use regression::{predict_ser, weighted_linfit, CalibrationFit, FitArtifact, Prediction, WeightedPoint};
pub use uncertainty::{combine_rel_uncertainties, poisson_rel_uncertainty};
