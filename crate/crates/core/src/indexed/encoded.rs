use std::io::{Read, Write};

use super::table::{canonical, IndexedJTable};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"IDXJ";
const VERSION: u32 = 1;

/// Coupling matrix stored as bit-packed table codes.
///
/// Row `i` occupies `words_per_row` little-endian `u64` words; entry `j` of the
/// row sits at bit offset `j * bits` (entries may straddle a word boundary).
/// Each stored code is the zero-based table position, i.e. index `t - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedJ {
    n: usize,
    bits: u32,
    words_per_row: usize,
    packed: Vec<u64>,
    table: IndexedJTable,
}

impl EncodedJ {
    fn blank(n: usize, table: IndexedJTable) -> Self {
        let bits = table.bits_per_entry();
        let words_per_row = (n * bits as usize).div_ceil(64);
        Self { n, bits, words_per_row, packed: vec![0; n * words_per_row], table }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits_per_entry(&self) -> u32 {
        self.bits
    }

    pub fn table(&self) -> &IndexedJTable {
        &self.table
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.packed[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    /// Size of the packed index payload in bytes.
    pub fn payload_bytes(&self) -> usize {
        self.packed.len() * 8
    }

    /// Size of the same matrix as dense float32.
    pub fn dense_f32_bytes(&self) -> usize {
        self.n * self.n * 4
    }

    #[inline]
    pub(crate) fn code_in_row(words: &[u64], bits: u32, j: usize) -> usize {
        let bit = j * bits as usize;
        let (w, off) = (bit / 64, bit % 64);
        let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        let mut v = words[w] >> off;
        if off + bits as usize > 64 {
            v |= words[w + 1] << (64 - off);
        }
        (v & mask) as usize
    }

    #[inline]
    fn set_code(&mut self, i: usize, j: usize, code: usize) {
        let row = &mut self.packed[i * self.words_per_row..(i + 1) * self.words_per_row];
        put_code(row, self.bits, j, code);
    }

    /// 1-based table index of entry `(i, j)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        Self::code_in_row(self.row_words(i), self.bits, j) + 1
    }

    /// Builds an `n_max`-sized matrix with `replicas` copies of `self` on the
    /// diagonal and zeros elsewhere.
    pub fn block_diagonal(&self, replicas: usize, n_max: usize) -> Result<EncodedJ> {
        if replicas * self.n > n_max {
            return Err(Error::CapacityExceeded { n: replicas * self.n, n_max });
        }
        let table = IndexedJTable::from_values(self.table.values().iter().copied().chain([0.0]))?;
        let reverse = table.reverse();
        let remap: Vec<usize> = self.table.values().iter().map(|v| reverse[&v.to_bits()]).collect();
        let zero = table.zero_code().expect("zero inserted above");
        let mut out = EncodedJ::blank(n_max, table);
        if zero != 0 {
            let mut template = vec![0u64; out.words_per_row];
            for j in 0..n_max {
                put_code(&mut template, out.bits, j, zero);
            }
            for row in out.packed.chunks_mut(out.words_per_row) {
                row.copy_from_slice(&template);
            }
        }
        for r in 0..replicas {
            let base = r * self.n;
            for i in 0..self.n {
                let words = self.row_words(i);
                for j in 0..self.n {
                    let code = remap[Self::code_in_row(words, self.bits, j)];
                    if code != zero {
                        out.set_code(base + i, base + j, code);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Writes the documented little-endian binary layout.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.table.len() as u32).to_le_bytes())?;
        w.write_all(&self.bits.to_le_bytes())?;
        for v in self.table.values() {
            w.write_all(&v.to_le_bytes())?;
        }
        for word in &self.packed {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(24 + self.table.len() * 8 + self.payload_bytes());
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from(mut r: impl Read) -> Result<EncodedJ> {
        fn take<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
            let mut b = [0u8; N];
            r.read_exact(&mut b)?;
            Ok(b)
        }
        if &take::<4>(&mut r)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = u32::from_le_bytes(take(&mut r)?);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n = u64::from_le_bytes(take(&mut r)?) as usize;
        let n_v = u32::from_le_bytes(take(&mut r)?) as usize;
        let bits = u32::from_le_bytes(take(&mut r)?);
        if n == 0 || n_v == 0 {
            return Err(Error::Format("empty matrix".into()));
        }
        let mut values = Vec::with_capacity(n_v);
        for _ in 0..n_v {
            values.push(f64::from_le_bytes(take(&mut r)?));
        }
        let table = IndexedJTable::from_values(values.iter().copied())?;
        if table.values() != values.as_slice() {
            return Err(Error::Format("table is not sorted and distinct".into()));
        }
        let mut e = EncodedJ::blank(n, table);
        if e.bits != bits {
            return Err(Error::Format(format!("bit width {bits} does not match table of {n_v}")));
        }
        for word in &mut e.packed {
            *word = u64::from_le_bytes(take(&mut r)?);
        }
        Ok(e)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<EncodedJ> {
        EncodedJ::read_from(bytes)
    }
}

#[inline]
fn put_code(row: &mut [u64], bits: u32, j: usize, code: usize) {
    let bits = bits as usize;
    let bit = j * bits;
    let (w, off) = (bit / 64, bit % 64);
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let code = code as u64 & mask;
    row[w] = (row[w] & !(mask << off)) | (code << off);
    if off + bits > 64 {
        let spill = off + bits - 64;
        let hi_mask = (1u64 << spill) - 1;
        row[w + 1] = (row[w + 1] & !hi_mask) | (code >> (bits - spill));
    }
}

/// Replaces every entry of the row-major `n x n` matrix `j` with its table index.
pub fn encode(j: &[f64], n: usize, table: &IndexedJTable) -> Result<EncodedJ> {
    if j.len() != n * n || n == 0 {
        return Err(Error::DimensionMismatch { expected: n * n, actual: j.len() });
    }
    let reverse = table.reverse();
    let mut e = EncodedJ::blank(n, table.clone());
    for i in 0..n {
        for k in 0..n {
            let v = j[i * n + k];
            let code = *reverse.get(&canonical(v).to_bits()).ok_or(Error::ValueNotInTable(v))?;
            if code != 0 {
                e.set_code(i, k, code);
            }
        }
    }
    Ok(e)
}

/// Restores the row-major matrix by table lookup.
pub fn decode(e: &EncodedJ) -> Result<Vec<f64>> {
    let values = e.table.values();
    let mut out = Vec::with_capacity(e.n * e.n);
    for i in 0..e.n {
        let words = e.row_words(i);
        for k in 0..e.n {
            let code = EncodedJ::code_in_row(words, e.bits, k);
            let v = values.get(code).ok_or(Error::IndexOutOfRange { index: code + 1, len: values.len() })?;
            out.push(*v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexed::build_table;

    #[test]
    fn encode_example() {
        let j = [0.0, -1.0, -1.0, 0.0];
        let t = build_table(&j).unwrap();
        let e = encode(&j, 2, &t).unwrap();
        assert_eq!(e.bits_per_entry(), 1);
        let idx: Vec<usize> = (0..4).map(|p| e.index(p / 2, p % 2)).collect();
        assert_eq!(idx, vec![2, 1, 1, 2]);
        assert_eq!(decode(&e).unwrap(), j);
    }

    #[test]
    fn value_missing_from_table() {
        let t = build_table(&[0.0, 1.0]).unwrap();
        assert!(matches!(encode(&[0.0, 2.0, 2.0, 0.0], 2, &t), Err(Error::ValueNotInTable(_))));
    }

    #[test]
    fn straddling_codes_round_trip() {
        // 5 distinct values -> 3 bits, so entries cross word boundaries
        let n = 50;
        let j: Vec<f64> = (0..n * n).map(|p| [0.0, -1.5, 2.0, 0.25, 7.0][(p * 7 + p / 3) % 5]).collect();
        let t = build_table(&j).unwrap();
        let e = encode(&j, n, &t).unwrap();
        assert_eq!(e.bits_per_entry(), 3);
        assert_eq!(decode(&e).unwrap(), j);
    }

    #[test]
    fn corrupted_index_detected() {
        let j = [0.0, 1.0, 2.0, 0.0];
        let t = build_table(&j).unwrap();
        let mut e = encode(&j, 2, &t).unwrap();
        e.set_code(0, 0, 3);
        assert!(matches!(decode(&e), Err(Error::IndexOutOfRange { index: 4, len: 3 })));
    }

    #[test]
    fn mis_scale_ratio() {
        let n = 2048;
        let t = build_table(&[-1.0, 0.0]).unwrap();
        let e = EncodedJ::blank(n, t);
        assert_eq!(e.payload_bytes(), 524_288);
        assert_eq!(e.dense_f32_bytes(), 16_777_216);
        assert_eq!(e.payload_bytes() * 32, e.dense_f32_bytes());
    }

    #[test]
    fn binary_round_trip() {
        let j = [0.0, -1.0, 0.5, -1.0, 0.0, 0.5, 0.5, 0.5, 0.0];
        let e = encode(&j, 3, &build_table(&j).unwrap()).unwrap();
        let bytes = e.to_bytes();
        assert_eq!(&bytes[..4], b"IDXJ");
        assert_eq!(bytes.len(), 24 + 3 * 8 + 3 * 8);
        assert_eq!(EncodedJ::from_bytes(&bytes).unwrap(), e);
        assert!(EncodedJ::from_bytes(&bytes[..20]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(EncodedJ::from_bytes(&bad).is_err());
    }

    #[test]
    fn block_diagonal_layout() {
        let j = [0.0, -1.0, -1.0, 0.0];
        let e = encode(&j, 2, &build_table(&j).unwrap()).unwrap();
        let big = e.block_diagonal(3, 7).unwrap();
        let dense = decode(&big).unwrap();
        for r in 0..7 {
            for c in 0..7 {
                let same_block = r / 2 == c / 2 && r < 6 && c < 6;
                let expected = if same_block { j[(r % 2) * 2 + c % 2] } else { 0.0 };
                assert_eq!(dense[r * 7 + c], expected, "({r}, {c})");
            }
        }
        assert!(e.block_diagonal(4, 7).is_err());
    }

    #[test]
    fn block_diagonal_inserts_zero() {
        let j = [1.0, 2.0, 2.0, 1.0];
        let e = encode(&j, 2, &build_table(&j).unwrap()).unwrap();
        let big = e.block_diagonal(1, 3).unwrap();
        assert_eq!(big.table().values(), &[0.0, 1.0, 2.0]);
        assert_eq!(decode(&big).unwrap(), vec![1.0, 2.0, 0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
