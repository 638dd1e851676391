//! Dense Ising and QUBO models, energies, and the QUBO to Ising mapping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ising model with a dense symmetric coupling matrix and zero diagonal.
///
/// The coupling matrix is stored row-major; JSON uses nested rows
/// `{"n": .., "j": [[..]], "h": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IsingFile", into = "IsingFile")]
pub struct IsingModel {
    n: usize,
    j: Vec<f64>,
    h: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct IsingFile {
    n: usize,
    j: Vec<Vec<f64>>,
    h: Vec<f64>,
}

impl TryFrom<IsingFile> for IsingModel {
    type Error = Error;

    fn try_from(f: IsingFile) -> Result<Self> {
        if f.j.len() != f.n {
            return Err(Error::DimensionMismatch { expected: f.n, actual: f.j.len() });
        }
        let mut flat = Vec::with_capacity(f.n * f.n);
        for row in &f.j {
            if row.len() != f.n {
                return Err(Error::DimensionMismatch { expected: f.n, actual: row.len() });
            }
            flat.extend_from_slice(row);
        }
        IsingModel::from_dense(f.n, flat, f.h)
    }
}

impl From<IsingModel> for IsingFile {
    fn from(m: IsingModel) -> Self {
        IsingFile { n: m.n, j: m.j.chunks(m.n).map(<[f64]>::to_vec).collect(), h: m.h }
    }
}

impl IsingModel {
    /// Builds a model from a row-major `n x n` coupling matrix and bias vector.
    pub fn from_dense(n: usize, j: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel("model must have at least one spin".into()));
        }
        if j.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, actual: j.len() });
        }
        if h.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: h.len() });
        }
        for i in 0..n {
            if j[i * n + i] != 0.0 {
                return Err(Error::InvalidModel(format!("nonzero diagonal at {i}")));
            }
            for k in (i + 1)..n {
                if j[i * n + k] != j[k * n + i] {
                    return Err(Error::InvalidModel(format!("asymmetric coupling at ({i}, {k})")));
                }
            }
        }
        Ok(Self { n, j, h })
    }

    /// Builds a model from nested rows.
    pub fn from_rows(j: Vec<Vec<f64>>, h: Vec<f64>) -> Result<Self> {
        IsingFile { n: j.len(), j, h }.try_into()
    }

    /// Model with all couplings zero.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_dense(n, vec![0.0; n * n], vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coupling(&self, i: usize, k: usize) -> f64 {
        self.j[i * self.n + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.j[i * self.n..(i + 1) * self.n]
    }

    /// Row-major coupling matrix.
    pub fn couplings(&self) -> &[f64] {
        &self.j
    }

    pub fn bias(&self) -> &[f64] {
        &self.h
    }

    pub fn is_finite(&self) -> bool {
        self.j.iter().chain(&self.h).all(|v| v.is_finite())
    }

    /// `-(1/2) sum_ij J_ij s_i s_j + sum_i h_i s_i`.
    pub fn energy(&self, s: &SpinConfig) -> Result<f64> {
        if s.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: s.len() });
        }
        Ok(self.energy_unchecked(s.as_slice()))
    }

    pub(crate) fn energy_unchecked(&self, s: &[i8]) -> f64 {
        let mut quad = 0.0;
        let mut lin = 0.0;
        for (i, &si) in s.iter().enumerate() {
            let si = f64::from(si);
            let mut acc = 0.0;
            for (&jik, &sk) in self.row(i).iter().zip(s) {
                acc += jik * f64::from(sk);
            }
            quad += si * acc;
            lin += self.h[i] * si;
        }
        -0.5 * quad + lin
    }
}

/// Free-function form of [`IsingModel::energy`].
pub fn ising_energy(model: &IsingModel, s: &SpinConfig) -> Result<f64> {
    model.energy(s)
}

/// Spin assignment with every entry exactly -1 or +1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinConfig(Vec<i8>);

impl TryFrom<Vec<i8>> for SpinConfig {
    type Error = Error;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        SpinConfig::new(v)
    }
}

impl From<SpinConfig> for Vec<i8> {
    fn from(s: SpinConfig) -> Self {
        s.0
    }
}

impl SpinConfig {
    pub fn new(s: Vec<i8>) -> Result<Self> {
        if let Some(bad) = s.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidModel(format!("spin value {bad} is not +/-1")));
        }
        Ok(Self(s))
    }

    /// Spins from the signs of continuous positions; zero maps to +1.
    pub fn from_signs(x: &[f64]) -> Self {
        Self(x.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect())
    }

    /// `s_i = 2 b_i - 1`.
    pub fn from_bits(b: &[u8]) -> Result<Self> {
        b.iter()
            .map(|&bit| match bit {
                0 => Ok(-1),
                1 => Ok(1),
                other => Err(Error::InvalidModel(format!("bit value {other} is not 0/1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// `b_i = (s_i + 1) / 2`.
    pub fn to_bits(&self) -> Vec<u8> {
        self.0.iter().map(|&s| u8::from(s == 1)).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }
}

pub fn spins_to_bits(s: &SpinConfig) -> Vec<u8> {
    s.to_bits()
}

pub fn bits_to_spins(b: &[u8]) -> Result<SpinConfig> {
    SpinConfig::from_bits(b)
}

/// QUBO model `sum_ij Q_ij b_i b_j`. Q is kept as given; it need not be symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuboFile", into = "QuboFile")]
pub struct QuboModel {
    n: usize,
    q: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct QuboFile {
    n: usize,
    q: Vec<Vec<f64>>,
}

impl TryFrom<QuboFile> for QuboModel {
    type Error = Error;

    fn try_from(f: QuboFile) -> Result<Self> {
        if f.q.len() != f.n {
            return Err(Error::DimensionMismatch { expected: f.n, actual: f.q.len() });
        }
        let mut flat = Vec::with_capacity(f.n * f.n);
        for row in &f.q {
            if row.len() != f.n {
                return Err(Error::DimensionMismatch { expected: f.n, actual: row.len() });
            }
            flat.extend_from_slice(row);
        }
        QuboModel::from_dense(f.n, flat)
    }
}

impl From<QuboModel> for QuboFile {
    fn from(m: QuboModel) -> Self {
        QuboFile { n: m.n, q: m.q.chunks(m.n).map(<[f64]>::to_vec).collect() }
    }
}

impl QuboModel {
    pub fn from_dense(n: usize, q: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel("model must have at least one variable".into()));
        }
        if q.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, actual: q.len() });
        }
        Ok(Self { n, q })
    }

    pub fn from_rows(q: Vec<Vec<f64>>) -> Result<Self> {
        QuboFile { n: q.len(), q }.try_into()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.q[i * self.n + k]
    }

    pub(crate) fn add(&mut self, i: usize, k: usize, v: f64) {
        self.q[i * self.n + k] += v;
    }

    pub fn energy(&self, b: &[u8]) -> Result<f64> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: b.len() });
        }
        let mut e = 0.0;
        for i in (0..self.n).filter(|&i| b[i] != 0) {
            for k in (0..self.n).filter(|&k| b[k] != 0) {
                e += self.get(i, k);
            }
        }
        Ok(e)
    }
}

/// Maps a QUBO onto an Ising model via `s = 2b - 1`.
///
/// Q is symmetrized first (`S = (Q + Q^T) / 2`), giving `J_ij = -S_ij / 2`
/// off the diagonal and `h_i = sum_j S_ij / 2`. The returned offset satisfies
/// `H_qubo(b) = H_ising(s(b)) + offset` for every assignment.
pub fn qubo_to_ising(q: &QuboModel) -> (IsingModel, f64) {
    let n = q.n;
    let mut j = vec![0.0; n * n];
    let mut h = vec![0.0; n];
    let mut offset = 0.0;
    for i in 0..n {
        for k in 0..n {
            let s = 0.5 * (q.get(i, k) + q.get(k, i));
            h[i] += 0.5 * s;
            if i == k {
                offset += 0.5 * s;
            } else {
                // +0.0 folds a negative zero into positive zero
                j[i * n + k] = -0.5 * s + 0.0;
                offset += 0.25 * s;
            }
        }
    }
    let model = IsingModel { n, j, h };
    (model, offset)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_bits(n: usize) -> impl Iterator<Item = Vec<u8>> {
        (0u32..1 << n).map(move |m| (0..n).map(|i| ((m >> i) & 1) as u8).collect())
    }

    #[test]
    fn energy_examples() {
        let m = IsingModel::from_rows(vec![vec![0.0]], vec![0.0]).unwrap();
        assert_eq!(m.energy(&SpinConfig::new(vec![1]).unwrap()).unwrap(), 0.0);

        let m = IsingModel::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.0, 0.0]).unwrap();
        assert_eq!(m.energy(&SpinConfig::new(vec![1, 1]).unwrap()).unwrap(), -1.0);
        assert_eq!(m.energy(&SpinConfig::new(vec![1, -1]).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn energy_dimension_mismatch() {
        let m = IsingModel::zeros(3).unwrap();
        let s = SpinConfig::new(vec![1, 1]).unwrap();
        assert!(matches!(m.energy(&s), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_invalid_models() {
        assert!(IsingModel::from_rows(vec![vec![0.0, 1.0], vec![2.0, 0.0]], vec![0.0; 2]).is_err());
        assert!(IsingModel::from_rows(vec![vec![1.0]], vec![0.0]).is_err());
        assert!(IsingModel::from_dense(0, vec![], vec![]).is_err());
        assert!(SpinConfig::new(vec![1, 0]).is_err());
    }

    #[test]
    fn qubo_conversion_example() {
        let q = QuboModel::from_rows(vec![vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        let (m, offset) = qubo_to_ising(&q);
        assert_eq!(m.couplings(), &[0.0, -1.0, -1.0, 0.0]);
        assert_eq!(m.bias(), &[1.0, 1.0]);
        for b in all_bits(2) {
            let s = SpinConfig::from_bits(&b).unwrap();
            assert_eq!(q.energy(&b).unwrap(), m.energy(&s).unwrap() + offset);
        }
    }

    #[test]
    fn qubo_zero_matrix() {
        let q = QuboModel::from_dense(3, vec![0.0; 9]).unwrap();
        let (m, offset) = qubo_to_ising(&q);
        assert!(m.couplings().iter().all(|&v| v == 0.0 && v.is_sign_positive()));
        assert!(m.bias().iter().all(|&v| v == 0.0));
        assert_eq!(offset, 0.0);
    }

    #[test]
    fn asymmetric_qubo_matches_symmetrized() {
        let asym = QuboModel::from_rows(vec![vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let sym = QuboModel::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (ma, oa) = qubo_to_ising(&asym);
        let (ms, os) = qubo_to_ising(&sym);
        assert_eq!(ma, ms);
        assert_eq!(oa, os);
        for b in all_bits(2) {
            let s = SpinConfig::from_bits(&b).unwrap();
            assert_eq!(asym.energy(&b).unwrap(), ma.energy(&s).unwrap() + oa);
        }
    }

    #[test]
    fn bits_round_trip() {
        let s = SpinConfig::new(vec![1, -1]).unwrap();
        assert_eq!(spins_to_bits(&s), vec![1, 0]);
        assert_eq!(spins_to_bits(&SpinConfig::new(vec![1; 4]).unwrap()), vec![1; 4]);
        assert_eq!(bits_to_spins(&spins_to_bits(&s)).unwrap(), s);
    }

    #[test]
    fn json_round_trip() {
        let m = IsingModel::from_rows(vec![vec![0.0, 1.5], vec![1.5, 0.0]], vec![0.5, -1.0]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, r#"{"n":2,"j":[[0.0,1.5],[1.5,0.0]],"h":[0.5,-1.0]}"#);
        let back: IsingModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<IsingModel>(r#"{"n":2,"j":[[0,1],[2,0]],"h":[0,0]}"#).is_err());
    }
}
