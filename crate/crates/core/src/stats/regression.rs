use serde::{Deserialize, Serialize};

use super::WeightMode;
use crate::error::{Error, Result};

/// One (margin, SER) observation. `x` in volts, `y` and `sigma_y` in µSEU/(bit·s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub x: f64,
    pub y: f64,
    pub sigma_y: f64,
}

/// Weighted straight line `y = m x + b` with parameter covariance and
/// goodness-of-fit figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFit {
    pub m: f64,
    pub b: f64,
    pub sigma_m: f64,
    pub sigma_b: f64,
    pub cov_mb: f64,
    pub chi2: f64,
    pub nu: usize,
    /// `chi2 / nu`; `None` for an exact two-point line.
    pub chi2_red: Option<f64>,
    /// `1 - chi2 / chi2_null`, where the null model is the weighted mean.
    pub r2: f64,
    pub n_points: usize,
}

impl CalibrationFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.m * x + self.b
    }

    /// `chi2` of an arbitrary line against `points`.
    pub fn chi2_of(points: &[WeightedPoint], m: f64, b: f64) -> f64 {
        points
            .iter()
            .map(|p| ((p.y - m * p.x - b) / p.sigma_y).powi(2))
            .sum()
    }
}

/// Least-squares line minimising `sum(((y - m x - b) / sigma_y)^2)`.
///
/// Uses sums centred on the weighted mean of `x`, which keeps the slope
/// well conditioned when the margins sit far from zero.
pub fn weighted_linfit(points: &[WeightedPoint]) -> Result<CalibrationFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    for (i, p) in points.iter().enumerate() {
        if !(p.sigma_y > 0.0 && p.sigma_y.is_finite()) {
            return Err(Error::DegenerateFit(format!(
                "point {i}: sigma_y must be positive, got {}",
                p.sigma_y
            )));
        }
        if !(p.x.is_finite() && p.y.is_finite()) {
            return Err(Error::DegenerateFit(format!("point {i} is not finite")));
        }
    }

    let w: Vec<f64> = points.iter().map(|p| p.sigma_y.powi(-2)).collect();
    let s: f64 = w.iter().sum();
    let x_bar = points.iter().zip(&w).map(|(p, w)| w * p.x).sum::<f64>() / s;
    let y_bar = points.iter().zip(&w).map(|(p, w)| w * p.y).sum::<f64>() / s;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (p, w) in points.iter().zip(&w) {
        let dx = p.x - x_bar;
        sxx += w * dx * dx;
        sxy += w * dx * (p.y - y_bar);
    }
    let x_scale = points.iter().map(|p| p.x.abs()).fold(0.0, f64::max);
    if !(sxx / s > (1e-12 * x_scale).powi(2)) || sxx == 0.0 {
        return Err(Error::DegenerateFit("all x values coincide".into()));
    }

    let m = sxy / sxx;
    let b = y_bar - m * x_bar;
    let chi2 = CalibrationFit::chi2_of(points, m, b);
    let chi2_null: f64 = points
        .iter()
        .map(|p| ((p.y - y_bar) / p.sigma_y).powi(2))
        .sum();
    let nu = points.len() - 2;
    Ok(CalibrationFit {
        m,
        b,
        sigma_m: (1.0 / sxx).sqrt(),
        sigma_b: (1.0 / s + x_bar * x_bar / sxx).sqrt(),
        cov_mb: -x_bar / sxx,
        chi2,
        nu,
        chi2_red: (nu > 0).then(|| chi2 / nu as f64),
        r2: if chi2_null > 0.0 { 1.0 - chi2 / chi2_null } else { 1.0 },
        n_points: points.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// µSEU/(bit·s).
    pub ser: f64,
    /// 1-sigma from the fit-parameter covariance only.
    pub sigma: f64,
    /// Set when the line predicts a negative rate.
    pub below_floor: bool,
}

pub fn predict_ser(fit: &CalibrationFit, v_wlvm: f64) -> Prediction {
    let ser = fit.eval(v_wlvm);
    let var = v_wlvm * v_wlvm * fit.sigma_m * fit.sigma_m
        + fit.sigma_b * fit.sigma_b
        + 2.0 * v_wlvm * fit.cov_mb;
    Prediction {
        ser,
        sigma: var.max(0.0).sqrt(),
        below_floor: ser < 0.0,
    }
}

/// On-disk form of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitArtifact {
    pub m: f64,
    pub b: f64,
    pub sigma_m: f64,
    pub sigma_b: f64,
    pub cov_mb: f64,
    pub chi2: f64,
    pub nu: usize,
    pub chi2_red: Option<f64>,
    pub r2: f64,
    pub weight_mode: WeightMode,
    pub n_points: usize,
}

impl FitArtifact {
    pub fn new(fit: CalibrationFit, weight_mode: WeightMode) -> Self {
        FitArtifact {
            m: fit.m,
            b: fit.b,
            sigma_m: fit.sigma_m,
            sigma_b: fit.sigma_b,
            cov_mb: fit.cov_mb,
            chi2: fit.chi2,
            nu: fit.nu,
            chi2_red: fit.chi2_red,
            r2: fit.r2,
            weight_mode,
            n_points: fit.n_points,
        }
    }

    pub fn fit(&self) -> CalibrationFit {
        CalibrationFit {
            m: self.m,
            b: self.b,
            sigma_m: self.sigma_m,
            sigma_b: self.sigma_b,
            cov_mb: self.cov_mb,
            chi2: self.chi2,
            nu: self.nu,
            chi2_red: self.chi2_red,
            r2: self.r2,
            n_points: self.n_points,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
