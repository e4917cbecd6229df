//! Repeated independent calibrations and their statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ga::{run_with_model, CalibrationResult, GaConfig, GaError, Genome, GENE_NAMES};
use crate::metrics::{CostModel, ExperimentalDataset};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("column {0} has zero variance")]
    ZeroVariance(usize),
    #[error("columns have unequal lengths")]
    Ragged,
}

/// Mean, sample standard deviation and range of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// Single-pass (Welford) accumulation; `std` uses the `n - 1` denominator
    /// and is zero for a single sample.
    pub fn from_slice(xs: &[f64]) -> Result<Self, StatsError> {
        if xs.is_empty() {
            return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
        }
        let (mut mean, mut m2) = (0.0, 0.0);
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for (k, &x) in xs.iter().enumerate() {
            let d = x - mean;
            mean += d / (k + 1) as f64;
            m2 += d * (x - mean);
            min = min.min(x);
            max = max.max(x);
        }
        let n = xs.len();
        let std = if n > 1 {
            (m2 / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            count: n,
            mean,
            std,
            min,
            max,
        })
    }

    /// Coefficient of variation `std / |mean|`.
    pub fn cv(&self) -> f64 {
        self.std / self.mean.abs()
    }
}

/// Pearson correlation matrix of `K` columns given as rows of samples.
pub fn pearson<const K: usize>(rows: &[[f64; K]]) -> Result<[[f64; K]; K], StatsError> {
    if rows.len() < 2 {
        return Err(StatsError::TooFewSamples {
            needed: 2,
            got: rows.len(),
        });
    }
    let n = rows.len() as f64;
    let mean: [f64; K] = std::array::from_fn(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n);
    let mut cov = [[0.0; K]; K];
    for r in rows {
        for i in 0..K {
            for j in 0..K {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    for (i, c) in cov.iter().enumerate() {
        let scale = mean[i].abs().max(1.0);
        if c[i].sqrt() <= 1e-14 * scale * n.sqrt() {
            return Err(StatsError::ZeroVariance(i));
        }
    }
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            if i == j {
                1.0
            } else {
                (cov[i][j] / (cov[i][i] * cov[j][j]).sqrt()).clamp(-1.0, 1.0)
            }
        })
    }))
}

/// Least-squares line `y = slope·x + intercept` with its correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::Ragged);
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewSamples {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx <= 0.0 {
        return Err(StatsError::ZeroVariance(0));
    }
    let slope = sxy / sxx;
    // a constant response is uncorrelated by convention
    let r = if syy > 0.0 {
        (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r,
    })
}

/// Converts a genome into reporting units: degrees and kPa.
pub fn reporting_units(g: &Genome) -> [f64; 6] {
    let mut out = *g;
    out[0] = g[0].to_degrees();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub x: String,
    pub y: String,
    pub fit: LineFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub trials: Vec<CalibrationResult>,
    /// Trials whose final population held no feasible candidate.
    pub failed: usize,
    pub summary: Option<[Summary; 6]>,
    pub pearson: Option<[[f64; 6]; 6]>,
    pub regressions: Vec<Regression>,
}

impl EnsembleResult {
    /// Best parameters of each feasible trial in reporting units.
    pub fn samples(&self) -> Vec<[f64; 6]> {
        feasible_samples(&self.trials)
    }

    pub fn from_trials(trials: Vec<CalibrationResult>, regression_threshold: f64) -> Self {
        let samples = feasible_samples(&trials);
        let failed = trials.len() - samples.len();
        let summary = if samples.is_empty() {
            None
        } else {
            let cols: Vec<Summary> = (0..6)
                .map(|j| {
                    let col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
                    Summary::from_slice(&col).expect("non-empty")
                })
                .collect();
            Some(std::array::from_fn(|j| cols[j]))
        };
        let pearson = pearson(&samples).ok();
        let mut regressions = Vec::new();
        if let Some(r) = &pearson {
            for i in 0..6 {
                for j in i + 1..6 {
                    if r[i][j].abs() < regression_threshold {
                        continue;
                    }
                    let x: Vec<f64> = samples.iter().map(|s| s[i]).collect();
                    let y: Vec<f64> = samples.iter().map(|s| s[j]).collect();
                    if let Ok(fit) = fit_line(&x, &y) {
                        regressions.push(Regression {
                            x: GENE_NAMES[i].to_string(),
                            y: GENE_NAMES[j].to_string(),
                            fit,
                        });
                    }
                }
            }
        }
        Self {
            trials,
            failed,
            summary,
            pearson,
            regressions,
        }
    }
}

pub const REGRESSION_THRESHOLD: f64 = 0.7;

fn feasible_samples(trials: &[CalibrationResult]) -> Vec<[f64; 6]> {
    trials
        .iter()
        .filter(|t| t.is_feasible())
        .map(|t| reporting_units(&t.genome))
        .collect()
}

/// Runs `trials` calibrations with seeds `base_seed, base_seed + 1, ...`.
pub fn run_ensemble(
    config: &GaConfig,
    data: &ExperimentalDataset<f64>,
    trials: usize,
    base_seed: u64,
) -> Result<EnsembleResult, GaError> {
    let seeds: Vec<u64> = (0..trials as u64)
        .map(|k| base_seed.wrapping_add(k))
        .collect();
    run_ensemble_with_seeds(config, data, &seeds)
}

/// Results are collected in seed order regardless of scheduling.
pub fn run_ensemble_with_seeds(
    config: &GaConfig,
    data: &ExperimentalDataset<f64>,
    seeds: &[u64],
) -> Result<EnsembleResult, GaError> {
    if seeds.len() < 2 {
        return Err(GaError::InvalidConfig(
            "an ensemble needs at least 2 trials",
        ));
    }
    config.validate()?;
    let model = CostModel::new(data, config.weights)?;
    let trials: Vec<CalibrationResult> = seeds
        .par_iter()
        .map(|&seed| run_with_model(&GaConfig { seed, ..*config }, &model))
        .collect();
    Ok(EnsembleResult::from_trials(trials, REGRESSION_THRESHOLD))
}
