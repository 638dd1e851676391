//! Batch mapping: small problems are tiled along the diagonal of a
//! fixed-capacity engine so one pass yields several independent shots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{IsingModel, SpinConfig};

/// Engine capacity of the wide engine.
pub const N_MAX: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchLayout {
    pub n: usize,
    pub n_max: usize,
    pub replicas: usize,
    pub offsets: Vec<usize>,
}

impl BatchLayout {
    /// `floor(n_max / n)` replicas when `n <= n_max / 2`, otherwise one.
    pub fn new(n: usize, n_max: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel("model must have at least one spin".into()));
        }
        if n > n_max {
            return Err(Error::CapacityExceeded { n, n_max });
        }
        let replicas = if n <= n_max / 2 { n_max / n } else { 1 };
        Ok(Self { n, n_max, replicas, offsets: (0..replicas).map(|r| r * n).collect() })
    }

    /// Spins in `0..used()` belong to replicas; the rest is padding.
    pub fn used(&self) -> usize {
        self.replicas * self.n
    }
}

/// Tiles `model` along the diagonal of an `n_max`-spin model, zero elsewhere.
pub fn batch_map(model: &IsingModel, n_max: usize) -> Result<(IsingModel, BatchLayout)> {
    let layout = BatchLayout::new(model.n(), n_max)?;
    let n = model.n();
    let mut j = vec![0.0; n_max * n_max];
    let mut h = vec![0.0; n_max];
    for &off in &layout.offsets {
        for i in 0..n {
            j[(off + i) * n_max + off..(off + i) * n_max + off + n].copy_from_slice(model.row(i));
        }
        h[off..off + n].copy_from_slice(model.bias());
    }
    Ok((IsingModel::from_dense(n_max, j, h)?, layout))
}

/// Per-replica spin slices of a stacked configuration; padding is dropped.
pub fn decode_replicas(stacked: &SpinConfig, layout: &BatchLayout) -> Result<Vec<SpinConfig>> {
    if stacked.len() != layout.n_max {
        return Err(Error::DimensionMismatch { expected: layout.n_max, actual: stacked.len() });
    }
    let s = stacked.as_slice();
    Ok(layout
        .offsets
        .iter()
        .map(|&off| SpinConfig::new(s[off..off + layout.n].to_vec()).expect("slice of valid spins"))
        .collect())
}
