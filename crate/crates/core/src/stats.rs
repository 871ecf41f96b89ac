//! Log-log scaling fits and Poissonianity checks.

use crate::error::{Error, Result};
use crate::noise::NoiseStats;

/// Ordinary least squares line through `(log10 x, log10 y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    /// `y_i - (slope x_i + intercept)` in log space.
    pub residuals: Vec<f64>,
    /// Residual-based standard error of the slope; NaN with two points.
    pub slope_stderr: f64,
}

pub fn loglog_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "log-log fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::invalid("points", format!("{p:?} is not strictly positive")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("points", "all x values coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    let slope_stderr = if points.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        points: points.len(),
        residuals,
        slope_stderr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispersion {
    SubPoissonian,
    Poissonian,
    SuperPoissonian,
    /// Zero mean, ratio undefined.
    Undefined,
}

impl Dispersion {
    /// Half-width of the band around variance/mean = 1 counted as Poissonian.
    pub const BAND: f64 = 0.05;

    pub fn classify(ratio: f64) -> Self {
        if !ratio.is_finite() {
            Dispersion::Undefined
        } else if ratio < 1.0 - Self::BAND {
            Dispersion::SubPoissonian
        } else if ratio > 1.0 + Self::BAND {
            Dispersion::SuperPoissonian
        } else {
            Dispersion::Poissonian
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dispersion::SubPoissonian => "sub",
            Dispersion::Poissonian => "poisson",
            Dispersion::SuperPoissonian => "super",
            Dispersion::Undefined => "undefined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub mean: f64,
    pub variance: f64,
    /// variance / mean, NaN when the mean is zero.
    pub ratio: f64,
    pub class: Dispersion,
}

pub fn classify_points(points: impl IntoIterator<Item = (f64, f64)>) -> Vec<DispersionPoint> {
    points
        .into_iter()
        .map(|(mean, variance)| {
            let ratio = if mean > 0.0 { variance / mean } else { f64::NAN };
            DispersionPoint {
                mean,
                variance,
                ratio,
                class: Dispersion::classify(ratio),
            }
        })
        .collect()
}

/// Per-pixel dispersion classification of characterized noise.
pub fn poisson_check(stats: &NoiseStats) -> Vec<DispersionPoint> {
    classify_points(stats.points().map(|(_, _, m, v)| (m, v)))
}
