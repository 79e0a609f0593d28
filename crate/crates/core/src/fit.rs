//! Least-squares line fits used for scaling exponents.

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum coefficient of determination accepted by the fits.
pub const MIN_R2: f64 = 0.99;

/// y = slope * x + intercept fitted to the stored (x, y) points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: Vec<[f64; 2]>,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::FitFailed(format!("need at least two points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::FitFailed("non-finite data".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitFailed("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let fit = LinearFit {
        slope,
        intercept,
        r2,
        points: xs.iter().zip(ys).map(|(&x, &y)| [x, y]).collect(),
    };
    if r2 < MIN_R2 {
        return Err(Error::FitFailed(format!("r2 = {r2:.6} below {MIN_R2}")));
    }
    Ok(fit)
}

/// Fit of ln y against ln x.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Fit of ln y against x.
pub fn semi_log_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(xs, &ly)
}
