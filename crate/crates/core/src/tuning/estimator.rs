//! Parameter estimator: three boosted-tree ensembles predicting `c`,
//! `c / dt` and `dt * step` (all in log space) from graph features.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::gbrt::{Gbrt, GbrtParams};
use super::grid::TrainingRecord;
use crate::error::{Error, Result};
use crate::formulations::GraphFeatures;
use crate::rng::{derive_seed, rng_from_seed};
use crate::sb::SbParams;

pub const MIN_RECORDS: usize = 20;
pub const STEP_RANGE: (usize, usize) = (50, 100_000);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub trees: GbrtParams,
    /// Fraction of graphs held out for the reported error.
    pub holdout_fraction: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { trees: GbrtParams::default(), holdout_fraction: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub n_train: usize,
    pub n_holdout: usize,
    /// Log-space RMSE of (c, c/dt, dt*step) on the holdout records.
    pub holdout_rmse: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorModel {
    pub config: EstimatorConfig,
    pub c: Gbrt,
    pub c_over_dt: Gbrt,
    pub dt_times_step: Gbrt,
    pub report: EstimatorReport,
}

/// `(c, c / dt, dt * step)`.
pub fn decompose(p: &SbParams) -> [f64; 3] {
    [p.c, p.c / p.dt, p.dt * p.step as f64]
}

/// Inverse of [`decompose`] with `step` rounded and clamped to [`STEP_RANGE`].
pub fn recompose(c: f64, c_over_dt: f64, dt_times_step: f64) -> SbParams {
    let dt = c / c_over_dt;
    let step = ((dt_times_step / dt).round() as usize).clamp(STEP_RANGE.0, STEP_RANGE.1);
    SbParams { c, dt, step, a0: 1.0 }
}

fn targets(r: &TrainingRecord) -> [f64; 3] {
    decompose(&r.best_params).map(f64::ln)
}

fn features(f: &GraphFeatures) -> Vec<f64> {
    f.as_array().to_vec()
}

impl EstimatorModel {
    /// Predicted `(c, c / dt, dt * step)`.
    pub fn predict_targets(&self, f: &GraphFeatures) -> [f64; 3] {
        let x = features(f);
        [self.c.predict(&x).exp(), self.c_over_dt.predict(&x).exp(), self.dt_times_step.predict(&x).exp()]
    }

    pub fn estimate_params(&self, f: &GraphFeatures) -> SbParams {
        let [c, r1, r2] = self.predict_targets(f);
        recompose(c, r1, r2)
    }
}

/// Fits the three ensembles. Records of the same graph stay on the same
/// side of the holdout split.
pub fn train_estimator(records: &[TrainingRecord], config: &EstimatorConfig) -> Result<EstimatorModel> {
    if records.len() < MIN_RECORDS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_RECORDS} training records, got {}",
            records.len()
        )));
    }
    if !(0.0..1.0).contains(&config.holdout_fraction) {
        return Err(Error::InvalidParameter("holdout_fraction must lie in [0, 1)".into()));
    }
    for r in records {
        r.best_params.validate()?;
    }
    let mut graphs: Vec<u64> = records.iter().map(|r| r.graph_id).collect::<BTreeSet<_>>().into_iter().collect();
    graphs.shuffle(&mut rng_from_seed(derive_seed(config.trees.seed, 0x686f_6c64)));
    let n_hold = (graphs.len() as f64 * config.holdout_fraction).floor() as usize;
    let held: BTreeSet<u64> = graphs[..n_hold].iter().copied().collect();
    let (test, train): (Vec<&TrainingRecord>, Vec<&TrainingRecord>) =
        records.iter().partition(|r| held.contains(&r.graph_id));

    let x: Vec<Vec<f64>> = train.iter().map(|r| features(&r.features)).collect();
    let y: Vec<[f64; 3]> = train.iter().map(|r| targets(r)).collect();
    let fit = |k: usize| {
        let col: Vec<f64> = y.iter().map(|t| t[k]).collect();
        Gbrt::fit(&x, &col, GbrtParams { seed: derive_seed(config.trees.seed, k as u64), ..config.trees })
    };
    let (c, c_over_dt, dt_times_step) = (fit(0)?, fit(1)?, fit(2)?);

    let holdout_rmse = (!test.is_empty()).then(|| {
        let mut sq = [0.0; 3];
        for r in &test {
            let x = features(&r.features);
            let t = targets(r);
            let p = [c.predict(&x), c_over_dt.predict(&x), dt_times_step.predict(&x)];
            for k in 0..3 {
                sq[k] += (p[k] - t[k]).powi(2);
            }
        }
        sq.map(|s| (s / test.len() as f64).sqrt())
    });
    Ok(EstimatorModel {
        config: *config,
        c,
        c_over_dt,
        dt_times_step,
        report: EstimatorReport { n_train: train.len(), n_holdout: test.len(), holdout_rmse },
    })
}
