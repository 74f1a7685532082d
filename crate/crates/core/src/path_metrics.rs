//! Prediction-trace metrics along interpolation paths.
//!
//! A trace is the `T x K` matrix of class probabilities a model assigns to
//! the `T` images of one path. The high frequency fraction (HFF) measures
//! how much of the trace's 1D spectrum sits above a cutoff; the consistent
//! distance (CD) is the first step whose top class differs from step 1.

use crate::error::{Error, Result};
use crate::spectral::dft_real_1d;

/// Default HFF cutoff bin (of 50 one-sided bins for a 100-step path).
pub const DEFAULT_HFF_THRESHOLD: usize = 10;

const ROW_SUM_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTrace {
    pub path_id: String,
    steps: usize,
    classes: usize,
    probs: Vec<f64>,
}

impl PredictionTrace {
    /// `probs` is row-major `(steps, classes)`. Every row must be
    /// nonnegative and sum to 1 within 1e-4.
    pub fn new(path_id: impl Into<String>, steps: usize, classes: usize, probs: Vec<f64>) -> Result<Self> {
        let path_id = path_id.into();
        if steps < 2 || classes < 2 {
            return Err(Error::invalid(format!(
                "trace {path_id}: need T >= 2 and K >= 2, got T={steps} K={classes}"
            )));
        }
        if probs.len() != steps * classes {
            return Err(Error::invalid(format!(
                "trace {path_id}: {} values for a {steps}x{classes} matrix",
                probs.len()
            )));
        }
        for (t, row) in probs.chunks_exact(classes).enumerate() {
            validate_row(row).map_err(|msg| {
                Error::invalid(format!("trace {path_id} step {}: {msg}", t + 1))
            })?;
        }
        Ok(Self {
            path_id,
            steps,
            classes,
            probs,
        })
    }

    pub fn from_rows(path_id: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let classes = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != classes) {
            return Err(Error::invalid("trace rows have differing lengths"));
        }
        Self::new(path_id, rows.len(), classes, rows.concat())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Probabilities at 0-based step `t`.
    pub fn row(&self, t: usize) -> &[f64] {
        &self.probs[t * self.classes..(t + 1) * self.classes]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    /// Probability sequence of class `k` along the path.
    pub fn class_series(&self, k: usize) -> Vec<f64> {
        (0..self.steps).map(|t| self.probs[t * self.classes + k]).collect()
    }
}

/// Checks one probability row, returning a human-readable complaint.
pub fn validate_row(row: &[f64]) -> std::result::Result<(), String> {
    if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(format!("probability {p} is negative or non-finite"));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(format!("probabilities sum to {sum}, expected 1"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathMetrics {
    pub hff: f64,
    pub cd: usize,
}

pub fn path_metrics(trace: &PredictionTrace, threshold_k: usize) -> Result<PathMetrics> {
    Ok(PathMetrics {
        hff: hff(trace, threshold_k)?,
        cd: consistent_distance(trace),
    })
}

/// Class-averaged one-sided amplitude spectrum of the trace, bins `0..=T/2`.
pub fn mean_amplitude_spectrum(trace: &PredictionTrace) -> Vec<f64> {
    let half = trace.steps / 2;
    let mut mean = vec![0.0; half + 1];
    for k in 0..trace.classes {
        // Shifting by the first value only moves DC, and makes a constant
        // series transform to exact zeros.
        let series = trace.class_series(k);
        let base = series[0];
        let shifted: Vec<f64> = series.iter().map(|v| v - base).collect();
        let spectrum = dft_real_1d(&shifted);
        mean[0] += series.iter().sum::<f64>().abs();
        for (m, z) in mean.iter_mut().zip(&spectrum).skip(1) {
            *m += z.norm();
        }
    }
    for m in &mut mean {
        *m /= trace.classes as f64;
    }
    mean
}

/// High frequency fraction: the share of class-averaged amplitude in bins
/// strictly above `threshold_k`. DC counts toward the total, so a constant
/// trace scores exactly 0.
pub fn hff(trace: &PredictionTrace, threshold_k: usize) -> Result<f64> {
    let half = trace.steps / 2;
    if threshold_k < 1 || threshold_k > half {
        return Err(Error::invalid(format!(
            "HFF threshold {threshold_k} outside [1, {half}]"
        )));
    }
    let amp = mean_amplitude_spectrum(trace);
    let total: f64 = amp.iter().sum();
    if total <= 0.0 {
        return Err(Error::UndefinedMetric(format!(
            "trace {} has zero spectral amplitude",
            trace.path_id
        )));
    }
    let above: f64 = amp[threshold_k + 1..].iter().sum();
    Ok((above / total).clamp(0.0, 1.0))
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in row.iter().enumerate().skip(1) {
        if p > row[best] {
            best = i;
        }
    }
    best
}

/// 1-based step of the first top-class change relative to step 1, or `T`
/// when the top class never changes.
pub fn consistent_distance(trace: &PredictionTrace) -> usize {
    let original = argmax(trace.row(0));
    (1..trace.steps)
        .find(|&t| argmax(trace.row(t)) != original)
        .map_or(trace.steps, |t| t + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    pub sample_std: f64,
    pub n: usize,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

/// Mean with a Gaussian 95% interval `mean +- 1.96 s / sqrt(n)`.
pub fn summarize_gaussian(values: &[f64]) -> Result<MetricSummary> {
    if values.is_empty() {
        return Err(Error::invalid("cannot summarize an empty sample"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("cannot summarize non-finite values"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sample_std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let half = 1.96 * sample_std / (n as f64).sqrt();
    Ok(MetricSummary {
        mean,
        sample_std,
        n,
        ci95_low: mean - half,
        ci95_high: mean + half,
    })
}
