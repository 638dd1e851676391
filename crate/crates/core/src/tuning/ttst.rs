//! Time-to-sectional-target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Success probability at and above which one shot counts as enough.
pub const TARGET_QUANTILE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtstInputs {
    pub t_com: f64,
    pub p_s: f64,
}

/// Expected time to hit the sectional target with probability 0.99:
/// `t_com * ln(1 - 0.99) / ln(1 - p_s)` below 0.99, `t_com` at or above.
pub fn ttst(t_com: f64, p_s: f64) -> Result<f64> {
    if !(t_com > 0.0 && t_com.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_com must be positive, got {t_com}")));
    }
    if !(0.0..=1.0).contains(&p_s) {
        return Err(Error::InvalidParameter(format!("p_s must lie in [0, 1], got {p_s}")));
    }
    if p_s == 0.0 {
        return Err(Error::UnreachableTarget);
    }
    if p_s < TARGET_QUANTILE {
        // Same expression on both sides so the ratio is exactly 1 at the boundary.
        let log_miss = |p: f64| (1.0 - p).ln();
        Ok(t_com * log_miss(TARGET_QUANTILE) / log_miss(p_s))
    } else {
        Ok(t_com)
    }
}

impl TtstInputs {
    pub fn ttst(&self) -> Result<f64> {
        ttst(self.t_com, self.p_s)
    }
}

/// `0.99 * max(values)`.
///
/// # Panics
/// On an empty slice.
pub fn sectional_target(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "sectional target of no values");
    TARGET_QUANTILE * values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
