//! Ising / QUBO builders for MIS, weighted bipartite matching, MAX-CUT and TSP.

use serde::{Deserialize, Serialize};

use super::graph::Graph;
use crate::error::{Error, Result};
use crate::ising::{IsingModel, QuboModel};

/// Penalty `a` for selected edges and incentive `b` per selected node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MisWeights {
    pub a: f64,
    pub b: f64,
}

impl Default for MisWeights {
    fn default() -> Self {
        Self { a: 2.0, b: 1.0 }
    }
}

impl MisWeights {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let w = Self { a, b };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.a > self.b && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "MIS weights need a > b > 0 (got a = {}, b = {})",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

/// `J_ij = -(A/2) G_ij`, `h_i = (A deg_i - B) / 2`.
///
/// Spin +1 marks membership in the independent set.
pub fn build_mis_ising(g: &Graph, weights: MisWeights) -> IsingModel {
    let n = g.num_nodes();
    let mut j = vec![0.0; n * n];
    let coupling = -weights.a / 2.0;
    for &(u, v) in g.edges() {
        j[u * n + v] = coupling;
        j[v * n + u] = coupling;
    }
    let h = (0..n).map(|i| 0.5 * (weights.a * g.degree(i) as f64 - weights.b)).collect();
    IsingModel::from_dense(n, j, h).expect("MIS model is symmetric with zero diagonal")
}

/// Weighted maximum matching on a balanced bipartite graph with `n` nodes per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WmmbgInstance {
    pub n: usize,
    pub w: Vec<Vec<f64>>,
    pub c_penalty: f64,
}

impl WmmbgInstance {
    fn validate(&self) -> Result<()> {
        check_square(self.n, &self.w)?;
        if self.c_penalty.is_nan() || self.c_penalty <= 0.0 {
            return Err(Error::InvalidParameter("constraint weight C must be positive".into()));
        }
        if self.w.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("weights must be finite".into()));
        }
        Ok(())
    }

    /// Constant dropped from the QUBO expansion of the one-hot penalties.
    pub fn constant(&self) -> f64 {
        2.0 * self.n as f64 * self.c_penalty
    }
}

fn check_square(n: usize, m: &[Vec<f64>]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("instance size must be positive".into()));
    }
    if m.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: m.len() });
    }
    if let Some(row) = m.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, actual: row.len() });
    }
    Ok(())
}

/// Adds `C * sum_rows (sum b - 1)^2 + C * sum_cols (sum b - 1)^2` over an
/// `n x n` grid of variables `b[r * n + c]`, without the constant `2nC`.
fn add_one_hot_penalties(q: &mut QuboModel, n: usize, c: f64) {
    let var = |r: usize, col: usize| r * n + col;
    for r in 0..n {
        for a in 0..n {
            // b^2 = b, so each square contributes C*b - 2C*b on the diagonal.
            q.add(var(r, a), var(r, a), -c);
            q.add(var(a, r), var(a, r), -c);
            for b in 0..n {
                if a != b {
                    q.add(var(r, a), var(r, b), c);
                    q.add(var(a, r), var(b, r), c);
                }
            }
        }
    }
}

/// QUBO over `b[l * n + r]` (node `l` matched to node `r`).
pub fn build_wmmbg_qubo(inst: &WmmbgInstance) -> Result<QuboModel> {
    inst.validate()?;
    let n = inst.n;
    let mut q = QuboModel::from_dense(n * n, vec![0.0; n * n * n * n])?;
    for l in 0..n {
        for r in 0..n {
            q.add(l * n + r, l * n + r, -inst.w[l][r]);
        }
    }
    add_one_hot_penalties(&mut q, n, inst.c_penalty);
    Ok(q)
}

/// Weighted MAX-CUT instance; `weights[e]` belongs to `graph.edges()[e]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxCutInstance {
    pub graph: Graph,
    pub weights: Vec<f64>,
}

/// `H = -(1/2) sum_E w_ij (1 - s_i s_j)` as `(model, offset)` with
/// `J_ij = -w_ij / 2`, `h = 0` and `offset = -(1/2) sum_E w_ij`.
pub fn build_maxcut_ising(inst: &MaxCutInstance) -> Result<(IsingModel, f64)> {
    let g = &inst.graph;
    if inst.weights.len() != g.num_edges() {
        return Err(Error::DimensionMismatch { expected: g.num_edges(), actual: inst.weights.len() });
    }
    let n = g.num_nodes();
    let mut j = vec![0.0; n * n];
    let mut offset = 0.0;
    for (&(u, v), &w) in g.edges().iter().zip(&inst.weights) {
        let c = -w / 2.0 + 0.0;
        j[u * n + v] = c;
        j[v * n + u] = c;
        offset -= 0.5 * w;
    }
    Ok((IsingModel::from_dense(n, j, vec![0.0; n])?, offset))
}

/// Cut weight of a spin partition.
pub fn cut_value(inst: &MaxCutInstance, s: &[i8]) -> f64 {
    inst.graph.edges().iter().zip(&inst.weights).filter(|(&(u, v), _)| s[u] != s[v]).map(|(_, &w)| w).sum()
}

/// Symmetric TSP instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TspInstance {
    pub n: usize,
    pub d: Vec<Vec<f64>>,
    pub c_penalty: f64,
}

impl TspInstance {
    fn validate(&self) -> Result<()> {
        check_square(self.n, &self.d)?;
        if self.n < 2 {
            return Err(Error::InvalidParameter("TSP needs at least two cities".into()));
        }
        if self.c_penalty.is_nan() || self.c_penalty <= 0.0 {
            return Err(Error::InvalidParameter("constraint weight C must be positive".into()));
        }
        for i in 0..self.n {
            if self.d[i][i] != 0.0 {
                return Err(Error::InvalidParameter(format!("d[{i}][{i}] must be zero")));
            }
            for k in 0..self.n {
                if self.d[i][k] != self.d[k][i] || self.d[i][k].is_nan() || self.d[i][k] < 0.0 {
                    return Err(Error::InvalidParameter("distances must be symmetric and nonnegative".into()));
                }
            }
        }
        Ok(())
    }

    pub fn constant(&self) -> f64 {
        2.0 * self.n as f64 * self.c_penalty
    }
}

/// QUBO over `b[t * n + i]` (city `i` visited at position `t`), positions wrap.
pub fn build_tsp_qubo(inst: &TspInstance) -> Result<QuboModel> {
    inst.validate()?;
    let n = inst.n;
    let mut q = QuboModel::from_dense(n * n, vec![0.0; n * n * n * n])?;
    for t in 0..n {
        let next = (t + 1) % n;
        for i in 0..n {
            for k in 0..n {
                if inst.d[i][k] != 0.0 {
                    q.add(t * n + i, next * n + k, inst.d[i][k]);
                }
            }
        }
    }
    add_one_hot_penalties(&mut q, n, inst.c_penalty);
    Ok(q)
}
