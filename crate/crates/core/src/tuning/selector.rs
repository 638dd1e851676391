//! Machine selector: logistic regression on degree-2 polynomial features of
//! standardized `(ln n, ln step)`.

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::latency::LatencyRow;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::sb::EngineKind;

const N_FEATURES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectorConfig {
    pub holdout_fraction: f64,
    /// Ridge penalty (keeps separable tables bounded).
    pub l2: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self { holdout_fraction: 0.25, l2: 1e-3, iterations: 100, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorReport {
    pub n_train: usize,
    pub n_holdout: usize,
    pub train_accuracy: f64,
    /// `None` without holdout rows.
    pub holdout_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorModel {
    pub mean: [f64; 2],
    pub scale: [f64; 2],
    /// Coefficients of `[1, u, v, u^2, u v, v^2]`; probability is of `wide`.
    pub weights: [f64; N_FEATURES],
    /// Set when training saw only one label.
    pub constant: Option<EngineKind>,
    pub report: SelectorReport,
}

fn raw(n: usize, step: usize) -> [f64; 2] {
    [(n.max(1) as f64).ln(), (step.max(1) as f64).ln()]
}

fn poly([u, v]: [f64; 2]) -> [f64; N_FEATURES] {
    [1.0, u, v, u * u, u * v, v * v]
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl SelectorModel {
    fn phi(&self, n: usize, step: usize) -> [f64; N_FEATURES] {
        let r = raw(n, step);
        poly([(r[0] - self.mean[0]) / self.scale[0], (r[1] - self.mean[1]) / self.scale[1]])
    }

    /// Probability that the wide engine is faster.
    pub fn probability(&self, n: usize, step: usize) -> f64 {
        match self.constant {
            Some(EngineKind::Wide) => 1.0,
            Some(EngineKind::Light) => 0.0,
            None => sigmoid(self.phi(n, step).iter().zip(&self.weights).map(|(a, b)| a * b).sum()),
        }
    }

    /// Wide when the probability exceeds 0.5; exactly 0.5 goes to light.
    pub fn select(&self, n: usize, step: usize) -> EngineKind {
        if self.probability(n, step) > 0.5 {
            EngineKind::Wide
        } else {
            EngineKind::Light
        }
    }

    pub fn accuracy(&self, rows: &[LatencyRow]) -> f64 {
        let hits = rows.iter().filter(|r| self.select(r.n, r.step) == r.label).count();
        hits as f64 / rows.len().max(1) as f64
    }
}

pub fn select_machine(model: &SelectorModel, n: usize, step: usize) -> EngineKind {
    model.select(n, step)
}

/// Solves `a x = b` for a small symmetric positive-definite system.
fn solve(mut a: [[f64; N_FEATURES]; N_FEATURES], mut b: [f64; N_FEATURES]) -> [f64; N_FEATURES] {
    for col in 0..N_FEATURES {
        let piv = (col..N_FEATURES).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N_FEATURES {
            let f = a[row][col] / a[col][col];
            let pivot = a[col];
            for (dst, src) in a[row][col..].iter_mut().zip(&pivot[col..]) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N_FEATURES];
    for row in (0..N_FEATURES).rev() {
        let s: f64 = (row + 1..N_FEATURES).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Newton iterations on the ridge-penalized log-likelihood.
fn fit_logistic(x: &[[f64; N_FEATURES]], y: &[f64], l2: f64, iterations: usize) -> [f64; N_FEATURES] {
    let mut w = [0.0; N_FEATURES];
    let m = x.len() as f64;
    for _ in 0..iterations {
        let mut grad = [0.0; N_FEATURES];
        let mut hess = [[0.0; N_FEATURES]; N_FEATURES];
        for (xi, &yi) in x.iter().zip(y) {
            let p = sigmoid(xi.iter().zip(&w).map(|(a, b)| a * b).sum());
            let s = p * (1.0 - p);
            for a in 0..N_FEATURES {
                grad[a] += (p - yi) * xi[a] / m;
                for b in 0..N_FEATURES {
                    hess[a][b] += s * xi[a] * xi[b] / m;
                }
            }
        }
        for a in 0..N_FEATURES {
            grad[a] += l2 * w[a];
            hess[a][a] += l2;
        }
        let delta = solve(hess, grad);
        let mut moved = 0.0f64;
        for a in 0..N_FEATURES {
            w[a] -= delta[a];
            moved = moved.max(delta[a].abs());
        }
        if moved < 1e-10 {
            break;
        }
    }
    w
}

pub fn train_selector(rows: &[LatencyRow], cfg: &SelectorConfig) -> Result<SelectorModel> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("empty latency table".into()));
    }
    if !(0.0..1.0).contains(&cfg.holdout_fraction) {
        return Err(Error::InvalidParameter("holdout_fraction must lie in [0, 1)".into()));
    }
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.shuffle(&mut rng_from_seed(cfg.seed));
    let n_hold = (rows.len() as f64 * cfg.holdout_fraction).floor() as usize;
    let (hold_idx, train_idx) = idx.split_at(n_hold);
    let train: Vec<LatencyRow> = train_idx.iter().map(|&i| rows[i].clone()).collect();
    let hold: Vec<LatencyRow> = hold_idx.iter().map(|&i| rows[i].clone()).collect();

    let r: Vec<[f64; 2]> = train.iter().map(|t| raw(t.n, t.step)).collect();
    let mut mean = [0.0; 2];
    let mut scale = [1.0; 2];
    for k in 0..2 {
        mean[k] = r.iter().map(|v| v[k]).sum::<f64>() / r.len() as f64;
        let var = r.iter().map(|v| (v[k] - mean[k]).powi(2)).sum::<f64>() / r.len() as f64;
        if var > 0.0 {
            scale[k] = var.sqrt();
        }
    }
    let wide = train.iter().filter(|t| t.label == EngineKind::Wide).count();
    let constant = if wide == 0 {
        Some(EngineKind::Light)
    } else if wide == train.len() {
        Some(EngineKind::Wide)
    } else {
        None
    };
    let weights = match constant {
        Some(k) => {
            warn!("latency table has a single label ({k}); selector is constant");
            [0.0; N_FEATURES]
        }
        None => {
            let x: Vec<[f64; N_FEATURES]> =
                r.iter().map(|v| poly([(v[0] - mean[0]) / scale[0], (v[1] - mean[1]) / scale[1]])).collect();
            let y: Vec<f64> = train.iter().map(|t| f64::from(u8::from(t.label == EngineKind::Wide))).collect();
            fit_logistic(&x, &y, cfg.l2, cfg.iterations)
        }
    };
    let mut model = SelectorModel {
        mean,
        scale,
        weights,
        constant,
        report: SelectorReport {
            n_train: train.len(),
            n_holdout: hold.len(),
            train_accuracy: 0.0,
            holdout_accuracy: None,
        },
    };
    model.report.train_accuracy = model.accuracy(&train);
    model.report.holdout_accuracy = (!hold.is_empty()).then(|| model.accuracy(&hold));
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic() -> Vec<LatencyRow> {
        let mut rows = Vec::new();
        for &n in &[8, 16, 32, 64, 128, 256, 512, 1024, 2048] {
            for &step in &[50, 100, 200, 400, 800, 1600] {
                // light cost ~ n^2 step, wide cost ~ 2048 * 40 * step + fixed staging
                let t_light = (n * n * step) as f64;
                let t_wide = 2048.0 * 40.0 * step as f64 + 5e6;
                rows.push(LatencyRow { n, step, t_wide, t_light, label: LatencyRow::label_for(t_wide, t_light) });
            }
        }
        rows
    }

    #[test]
    fn separable_table() {
        let rows = synthetic();
        let m = train_selector(&rows, &SelectorConfig { holdout_fraction: 0.0, ..SelectorConfig::default() }).unwrap();
        assert_eq!(m.accuracy(&rows), 1.0);
        assert_eq!(m.select(5, 100), EngineKind::Light);
        assert_eq!(m.select(2000, 1600), EngineKind::Wide);
        let again =
            train_selector(&rows, &SelectorConfig { holdout_fraction: 0.0, ..SelectorConfig::default() }).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn monotone_rescaling_keeps_labels() {
        let rows = synthetic();
        let scaled: Vec<LatencyRow> = rows
            .iter()
            .map(|r| {
                let (w, l) = (r.t_wide.ln() * 3.0, r.t_light.ln() * 3.0);
                LatencyRow { t_wide: w, t_light: l, label: LatencyRow::label_for(w, l), ..r.clone() }
            })
            .collect();
        let cfg = SelectorConfig::default();
        let a = train_selector(&rows, &cfg).unwrap();
        let b = train_selector(&scaled, &cfg).unwrap();
        for r in &rows {
            assert_eq!(a.select(r.n, r.step), b.select(r.n, r.step));
        }
    }

    #[test]
    fn single_class() {
        let rows: Vec<LatencyRow> = synthetic().into_iter().filter(|r| r.label == EngineKind::Light).collect();
        let m = train_selector(&rows, &SelectorConfig::default()).unwrap();
        assert_eq!(m.constant, Some(EngineKind::Light));
        assert_eq!(m.select(4096, 100_000), EngineKind::Light);
    }

    #[test]
    fn tie_goes_light() {
        let m = SelectorModel {
            mean: [0.0; 2],
            scale: [1.0; 2],
            weights: [0.0; N_FEATURES],
            constant: None,
            report: SelectorReport { n_train: 0, n_holdout: 0, train_accuracy: 0.0, holdout_accuracy: None },
        };
        assert_eq!(m.probability(10, 10), 0.5);
        assert_eq!(select_machine(&m, 10, 10), EngineKind::Light);
    }
}
