use super::{parse_measurements_csv, PartDataset};
use crate::stats::CalibrationFit;

/// Five measured parts: SER with its Poisson uncertainty and the word-line
/// write-failure mean and spread for every cell type.
pub const REFERENCE_MEASUREMENTS_CSV: &str = include_str!("../../data/reference_measurements.csv");

/// Published weighted-fit result for the bundled measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceFit {
    pub m: f64,
    pub sigma_m: f64,
    pub b: f64,
    pub sigma_b: f64,
    pub chi2: f64,
    pub nu: usize,
    pub chi2_red: f64,
    pub r2: f64,
}

pub const REFERENCE_FIT: ReferenceFit = ReferenceFit {
    m: 4.32,
    sigma_m: 0.20,
    b: -0.25,
    sigma_b: 0.06,
    chi2: 22.3,
    nu: 23,
    chi2_red: 0.97,
    r2: 0.96,
};

/// One acceptance window applied to a fit of the bundled data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproCheck {
    pub name: &'static str,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ReproCheck {
    pub fn pass(&self) -> bool {
        self.value >= self.lo && self.value <= self.hi
    }
}

/// Windows a reproduction of the reference fit has to land in.
pub fn repro_checks(fit: &CalibrationFit) -> Vec<ReproCheck> {
    vec![
        ReproCheck { name: "m", value: fit.m, lo: 4.12, hi: 4.52 },
        ReproCheck { name: "b", value: fit.b, lo: -0.31, hi: -0.19 },
        ReproCheck { name: "nu", value: fit.nu as f64, lo: 23.0, hi: 23.0 },
        ReproCheck { name: "chi2_red", value: fit.chi2_red.unwrap_or(f64::NAN), lo: 0.7, hi: 1.3 },
        ReproCheck { name: "r2", value: fit.r2, lo: 0.94, hi: 1.0 },
    ]
}

pub fn bundled_reference_dataset() -> Vec<PartDataset> {
    parse_measurements_csv(REFERENCE_MEASUREMENTS_CSV.as_bytes(), "reference_measurements.csv")
        .expect("bundled measurement file is well formed")
}
