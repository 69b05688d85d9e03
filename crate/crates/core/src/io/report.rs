use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PartDataset;
use crate::error::{Error, Result};
use crate::pipeline::SimulatedPart;
use crate::protocols::{word_line_voltage_margin, SweepResult, SweptQuantity};
use crate::sram_model::CellTypeName;
use crate::stats::{
    calibration_points, predict_ser, weighted_linfit, CalibrationOptions, FitArtifact, LabeledPoint,
    Prediction, WeightedPoint,
};
use crate::units::Millivolts;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub part_id: String,
    pub cell_type: CellTypeName,
    pub v_wlvm_v: f64,
    pub prediction: Prediction,
    pub measured_ser: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSeries {
    pub part_id: String,
    pub cell_type: CellTypeName,
    pub quantity: SweptQuantity,
    pub n_cells: usize,
    pub bins: Vec<(Millivolts, usize)>,
}

impl From<&SweepResult> for HistogramSeries {
    fn from(s: &SweepResult) -> Self {
        HistogramSeries {
            part_id: s.part_id.clone(),
            cell_type: s.cell_type,
            quantity: s.swept_quantity,
            n_cells: s.n_cells(),
            bins: s.histogram.iter().map(|(v, c)| (*v, *c)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeSeries {
    pub part_id: String,
    pub cell_type: CellTypeName,
    pub ts: f64,
    pub cumulative: Vec<u64>,
}

/// Fit, predictions and plot-ready series for one calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub fit: FitArtifact,
    pub points: Vec<LabeledPoint>,
    pub predictions: Vec<PredictionRow>,
    pub histograms: Vec<HistogramSeries>,
    pub cumulative: Vec<CumulativeSeries>,
}

/// Calibrate on every complete (part, type) and predict SER for every
/// (part, type) that has a margin, measured or not.
pub fn build_report(datasets: &[PartDataset], opts: &CalibrationOptions) -> Result<ReportBundle> {
    let points = calibration_points(datasets, opts)?;
    let fit_points: Vec<WeightedPoint> = points.iter().map(|p| p.point).collect();
    let fit = weighted_linfit(&fit_points)?;

    let mut predictions = Vec::new();
    for ds in datasets {
        for (&cell_type, rec) in &ds.types {
            let Some(margin) = &rec.margin else { continue };
            let v_wlvm_v = word_line_voltage_margin(ds.v_dd.as_f64(), margin.v_mewlvm_mv)? / 1000.0;
            predictions.push(PredictionRow {
                part_id: ds.part_id.clone(),
                cell_type,
                v_wlvm_v,
                prediction: predict_ser(&fit, v_wlvm_v),
                measured_ser: rec.ser.map(|s| s.ser),
            });
        }
    }

    Ok(ReportBundle {
        fit: FitArtifact::new(fit, opts.weight_mode),
        points,
        predictions,
        histograms: Vec::new(),
        cumulative: Vec::new(),
    })
}

impl ReportBundle {
    /// Attach sweep histograms and cumulative-upset series from a simulation.
    pub fn with_simulation(mut self, parts: &[SimulatedPart]) -> Self {
        for p in parts {
            for b in &p.blocks {
                for s in [Some(&b.sweep), b.hold.as_ref(), b.read.as_ref()].into_iter().flatten() {
                    self.histograms.push(HistogramSeries::from(s));
                }
                self.cumulative.push(CumulativeSeries {
                    part_id: p.part_id.clone(),
                    cell_type: b.cell_type,
                    ts: b.ser.ts,
                    cumulative: b.ser.cumulative(),
                });
            }
        }
        self
    }
}

fn tsv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().delimiter(b'\t').from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write `fit.json`, `predictions.csv`, `scatter_fit.tsv` and, when the bundle
/// carries them, `histograms.tsv` and `cumulative_seu.tsv`. Returns the paths
/// written, in that order.
pub fn emit_report(bundle: &ReportBundle, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = Vec::new();

    let path = dir.join("fit.json");
    fs::write(&path, bundle.fit.to_json()?).map_err(|e| Error::io(&path, e))?;
    manifest.push(path);

    let path = dir.join("predictions.csv");
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["part_id", "cell_type", "v_wlvm_V", "ser_pred", "sigma", "measured_ser", "below_floor"])?;
    for r in &bundle.predictions {
        w.write_record([
            r.part_id.clone(),
            r.cell_type.to_string(),
            r.v_wlvm_v.to_string(),
            r.prediction.ser.to_string(),
            r.prediction.sigma.to_string(),
            r.measured_ser.map(|s| s.to_string()).unwrap_or_default(),
            r.prediction.below_floor.to_string(),
        ])?;
    }
    finish(w, &path)?;
    manifest.push(path);

    let path = dir.join("scatter_fit.tsv");
    let mut w = tsv_writer(&path)?;
    w.write_record(["part_id", "cell_type", "vdd_mV", "v_wlvm_V", "ser", "sigma_ser", "fit_ser"])?;
    for p in &bundle.points {
        w.write_record([
            p.part_id.clone(),
            p.cell_type.to_string(),
            p.v_dd.get().to_string(),
            p.point.x.to_string(),
            p.point.y.to_string(),
            p.point.sigma_y.to_string(),
            (bundle.fit.m * p.point.x + bundle.fit.b).to_string(),
        ])?;
    }
    finish(w, &path)?;
    manifest.push(path);

    if !bundle.histograms.is_empty() {
        let path = dir.join("histograms.tsv");
        let mut w = tsv_writer(&path)?;
        w.write_record(["part_id", "cell_type", "quantity", "v_mV", "count", "fraction"])?;
        for h in &bundle.histograms {
            for (v, c) in &h.bins {
                w.write_record([
                    h.part_id.clone(),
                    h.cell_type.to_string(),
                    h.quantity.as_str().to_string(),
                    v.get().to_string(),
                    c.to_string(),
                    (*c as f64 / h.n_cells as f64).to_string(),
                ])?;
            }
        }
        finish(w, &path)?;
        manifest.push(path);
    }

    if !bundle.cumulative.is_empty() {
        let path = dir.join("cumulative_seu.tsv");
        let mut w = tsv_writer(&path)?;
        w.write_record(["part_id", "cell_type", "window", "t_end_s", "cumulative"])?;
        for s in &bundle.cumulative {
            for (i, c) in s.cumulative.iter().enumerate() {
                w.write_record([
                    s.part_id.clone(),
                    s.cell_type.to_string(),
                    (i + 1).to_string(),
                    ((i + 1) as f64 * s.ts).to_string(),
                    c.to_string(),
                ])?;
            }
        }
        finish(w, &path)?;
        manifest.push(path);
    }

    Ok(manifest)
}
