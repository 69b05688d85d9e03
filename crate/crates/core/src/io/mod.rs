//! Datasets, configuration, bundled reference measurements and report output.

mod config;
mod dataset;
mod measurements_csv;
mod reference;
mod report;

pub use config::SimConfig;
pub use dataset::{MarginRecord, PartDataset, SerRecord, TypeRecord};
pub use measurements_csv::{
    ingest_measurements_csv, parse_measurements_csv, write_measurements_csv, Quantity,
};
pub use reference::{
    bundled_reference_dataset, repro_checks, ReferenceFit, ReproCheck, REFERENCE_MEASUREMENTS_CSV,
    REFERENCE_FIT,
};
pub use report::{
    build_report, emit_report, CumulativeSeries, HistogramSeries, PredictionRow, ReportBundle,
};
