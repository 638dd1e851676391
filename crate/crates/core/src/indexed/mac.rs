//! Indexed multiply-accumulate: positions are summed per table index in
//! fixed point, then each table value is applied once.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encoded::EncodedJ;
use crate::error::{Error, Result};

/// Signed fixed-point format for positions in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointFormat {
    pub total_bits: u32,
    pub frac_bits: u32,
}

impl Default for FixedPointFormat {
    /// Q1.14 in 16 bits.
    fn default() -> Self {
        Self { total_bits: 16, frac_bits: 14 }
    }
}

impl FixedPointFormat {
    pub fn scale(&self) -> f64 {
        (self.frac_bits as f64).exp2()
    }

    /// Round to nearest, saturating at the format's range.
    pub fn quantize(&self, x: f64) -> i32 {
        let max = ((1i64 << (self.total_bits - 1)) - 1) as f64;
        let min = -((1i64 << (self.total_bits - 1)) as f64);
        (x * self.scale()).round().clamp(min, max) as i32
    }

    pub fn dequantize(&self, q: i32) -> f64 {
        q as f64 / self.scale()
    }

    pub fn quantize_all(&self, x: &[f64], out: &mut Vec<i32>) {
        out.clear();
        out.extend(x.iter().map(|&v| self.quantize(v)));
    }

    /// Positions as the MAC sees them: quantized and mapped back to reals.
    pub fn round_trip(&self, x: f64) -> f64 {
        self.dequantize(self.quantize(x))
    }
}

/// Encoded matrix prepared for repeated row MACs.
#[derive(Debug, Clone)]
pub struct IndexedMac<'a> {
    enc: &'a EncodedJ,
    format: FixedPointFormat,
    /// Codes whose table value is nonzero; zero-valued entries are never accumulated.
    live: Vec<(usize, f64)>,
}

impl<'a> IndexedMac<'a> {
    pub fn new(enc: &'a EncodedJ, format: FixedPointFormat) -> Self {
        let live = enc.table().values().iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(t, &v)| (t, v)).collect();
        Self { enc, format, live }
    }

    pub fn n(&self) -> usize {
        self.enc.n()
    }

    /// Per-code fixed-point sums of row `i`.
    fn accumulate(&self, i: usize, xq: &[i32], acc: &mut [i64]) {
        acc.fill(0);
        let words = self.enc.row_words(i);
        let n = self.enc.n();
        let bits = self.enc.bits_per_entry();
        if bits == 1 {
            for &(code, _) in &self.live {
                let mut sum = 0i64;
                for (w, &word) in words.iter().enumerate() {
                    let base = w * 64;
                    let valid = (n - base).min(64);
                    let valid_mask = if valid == 64 { u64::MAX } else { (1u64 << valid) - 1 };
                    let mut hits = if code == 1 { word } else { !word } & valid_mask;
                    while hits != 0 {
                        let b = hits.trailing_zeros() as usize;
                        sum += i64::from(xq[base + b]);
                        hits &= hits - 1;
                    }
                }
                acc[code] = sum;
            }
        } else {
            for (j, &x) in xq.iter().enumerate() {
                acc[EncodedJ::code_in_row(words, bits, j)] += i64::from(x);
            }
        }
    }

    fn combine(&self, acc: &[i64]) -> f64 {
        let scale = self.format.scale();
        let mut out = 0.0;
        for &(code, value) in &self.live {
            out += value * (acc[code] as f64 / scale);
        }
        out
    }

    pub fn row(&self, i: usize, xq: &[i32]) -> Result<f64> {
        if xq.len() != self.enc.n() {
            return Err(Error::DimensionMismatch { expected: self.enc.n(), actual: xq.len() });
        }
        if i >= self.enc.n() {
            return Err(Error::DimensionMismatch { expected: self.enc.n(), actual: i });
        }
        let mut acc = vec![0i64; self.enc.table().len()];
        self.accumulate(i, xq, &mut acc);
        Ok(self.combine(&acc))
    }

    /// Writes the MAC of every row into `out`. Rows are independent, so the
    /// result does not depend on how rows are distributed over threads.
    pub fn full_into(&self, xq: &[i32], out: &mut [f64]) -> Result<()> {
        let n = self.enc.n();
        if xq.len() != n || out.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: xq.len().min(out.len()) });
        }
        let nv = self.enc.table().len();
        let work = |(i, o): (usize, &mut f64)| {
            let mut acc = vec![0i64; nv];
            self.accumulate(i, xq, &mut acc);
            *o = self.combine(&acc);
        };
        if n >= 512 && rayon::current_num_threads() > 1 {
            out.par_iter_mut().enumerate().with_min_len(64).for_each(work);
        } else {
            out.iter_mut().enumerate().for_each(work);
        }
        Ok(())
    }
}

/// `sum_t TBL[t] * sum_j x_j [J^c_ij == t]` for one row.
pub fn indexed_mac_row(e: &EncodedJ, i: usize, xq: &[i32], format: FixedPointFormat) -> Result<f64> {
    IndexedMac::new(e, format).row(i, xq)
}

/// Row MAC for every row.
pub fn indexed_mac_full(e: &EncodedJ, xq: &[i32], format: FixedPointFormat) -> Result<Vec<f64>> {
    let mut out = vec![0.0; e.n()];
    IndexedMac::new(e, format).full_into(xq, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexed::{build_table, encode};

    #[test]
    fn q14_quantization() {
        let f = FixedPointFormat::default();
        assert_eq!(f.quantize(1.0), 16384);
        assert_eq!(f.quantize(-1.0), -16384);
        assert_eq!(f.quantize(0.5), 8192);
        assert_eq!(f.quantize(3.0), 32767);
        assert_eq!(f.round_trip(0.25), 0.25);
        assert!((f.round_trip(0.1) - 0.1).abs() <= 0.5 / 16384.0);
    }

    #[test]
    fn hand_example() {
        let f = FixedPointFormat::default();
        let j = [0.0, 0.0, 0.0, -1.0, 0.0, -1.0, 0.0, 0.0, 0.0];
        let e = encode(&j, 3, &build_table(&j).unwrap()).unwrap();
        let xq: Vec<i32> = [0.5, -0.5, 1.0].iter().map(|&x| f.quantize(x)).collect();
        let r = indexed_mac_row(&e, 1, &xq, f).unwrap();
        assert_eq!(r, -1.5);
        assert_eq!(indexed_mac_row(&e, 0, &xq, f).unwrap(), 0.0);
    }

    #[test]
    fn single_spin() {
        let f = FixedPointFormat::default();
        let e = encode(&[0.0], 1, &build_table(&[0.0]).unwrap()).unwrap();
        assert_eq!(indexed_mac_full(&e, &[f.quantize(0.7)], f).unwrap(), vec![0.0]);
    }

    #[test]
    fn dimension_checks() {
        let f = FixedPointFormat::default();
        let e = encode(&[0.0; 4], 2, &build_table(&[0.0]).unwrap()).unwrap();
        assert!(indexed_mac_row(&e, 0, &[1], f).is_err());
        assert!(indexed_mac_full(&e, &[1, 2, 3], f).is_err());
    }
}
