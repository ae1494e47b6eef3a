use serde::{Deserialize, Serialize};

use super::ExperimentError;

/// Coordinates in which an order is fitted by least squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `ln y` against `ln x`.
    LogLog,
    /// `ln y` against `ln ln(1/x)`, for `0 < x < 1`.
    LogVsLoglog,
    /// `ln y` against `ln(1/(x − 1))`, for `x > 1` (a `q` axis).
    InverseQ,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub model: FitModel,
}

fn transform(model: FitModel, x: f64, y: f64) -> Option<(f64, f64)> {
    if !(x.is_finite() && y.is_finite() && y > 0.0) {
        return None;
    }
    let tx = match model {
        FitModel::LogLog => (x > 0.0).then(|| x.ln()),
        FitModel::LogVsLoglog => (x > 0.0 && x < 1.0).then(|| (1.0 / x).ln().ln()),
        FitModel::InverseQ => (x > 1.0).then(|| (1.0 / (x - 1.0)).ln()),
    }?;
    Some((tx, y.ln()))
}

/// Least-squares line in the coordinates of `model`.
pub fn fit_order(xs: &[f64], ys: &[f64], model: FitModel) -> Result<OrderFit, ExperimentError> {
    if xs.len() != ys.len() {
        return Err(ExperimentError::Fit(format!(
            "{} xs but {} ys",
            xs.len(),
            ys.len()
        )));
    }
    let pts = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            transform(model, x, y).ok_or_else(|| ExperimentError::Fit(format!("({x}, {y})")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if pts.len() < 3 {
        return Err(ExperimentError::Fit(format!("only {} points", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(ExperimentError::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(OrderFit {
        slope,
        intercept,
        r_squared,
        model,
    })
}
