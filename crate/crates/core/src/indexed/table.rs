use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted list of the distinct values occurring in a coupling matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedJTable {
    values: Vec<f64>,
}

/// Folds `-0.0` into `+0.0` so both spellings of zero share one entry.
#[inline]
pub(crate) fn canonical(v: f64) -> f64 {
    v + 0.0
}

impl IndexedJTable {
    /// Table from arbitrary values; sorts ascending and removes duplicates.
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut v: Vec<f64> = Vec::new();
        for x in values {
            if !x.is_finite() {
                return Err(Error::InvalidModel(format!("non-finite coupling value {x}")));
            }
            v.push(canonical(x));
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        if v.is_empty() {
            return Err(Error::InvalidModel("empty matrix".into()));
        }
        Ok(Self { values: v })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of distinct values (`N_v`).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value for a 1-based index.
    pub fn value(&self, index: usize) -> Result<f64> {
        index
            .checked_sub(1)
            .and_then(|i| self.values.get(i))
            .copied()
            .ok_or(Error::IndexOutOfRange { index, len: self.values.len() })
    }

    /// `max(1, ceil(log2 N_v))`.
    pub fn bits_per_entry(&self) -> u32 {
        bits_for(self.values.len())
    }

    /// Zero-based code of the value `0.0`, if present.
    pub(crate) fn zero_code(&self) -> Option<usize> {
        self.values.iter().position(|&v| v == 0.0)
    }

    /// Value to zero-based code map.
    pub(crate) fn reverse(&self) -> HashMap<u64, usize> {
        self.values.iter().enumerate().map(|(t, v)| (v.to_bits(), t)).collect()
    }
}

pub(crate) fn bits_for(n_v: usize) -> u32 {
    if n_v <= 2 {
        1
    } else {
        usize::BITS - (n_v - 1).leading_zeros()
    }
}

/// Builds the indexed table of `j`'s distinct values.
pub fn build_table(j: &[f64]) -> Result<IndexedJTable> {
    IndexedJTable::from_values(j.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mis_table() {
        let t = build_table(&[0.0, -1.0, -1.0, 0.0]).unwrap();
        assert_eq!(t.values(), &[-1.0, 0.0]);
        assert_eq!(t.len(), 2);
        assert_eq!(t.bits_per_entry(), 1);
    }

    #[test]
    fn single_value_floors_at_one_bit() {
        let t = build_table(&[0.0; 9]).unwrap();
        assert_eq!(t.values(), &[0.0]);
        assert_eq!(t.bits_per_entry(), 1);
    }

    #[test]
    fn bit_widths() {
        assert_eq!(build_table(&[1.0, 2.0, 3.0]).unwrap().bits_per_entry(), 2);
        let expected = [(1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4), (16, 4), (17, 5)];
        for (n_v, bits) in expected {
            assert_eq!(bits_for(n_v), bits, "N_v = {n_v}");
        }
    }

    #[test]
    fn negative_zero_is_zero() {
        let t = build_table(&[-0.0, 0.0, 1.0]).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.values()[0].is_sign_positive());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(build_table(&[0.0, f64::NAN]).is_err());
        assert!(build_table(&[]).is_err());
    }

    #[test]
    fn one_based_lookup() {
        let t = build_table(&[3.0, 1.0]).unwrap();
        assert_eq!(t.value(1).unwrap(), 1.0);
        assert_eq!(t.value(2).unwrap(), 3.0);
        assert!(t.value(0).is_err());
        assert!(t.value(3).is_err());
    }
}
