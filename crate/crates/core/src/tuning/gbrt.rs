//! Gradient-boosted regression trees with squared-error loss, exact greedy
//! splits and L2-regularized leaves.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbrtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Row fraction drawn (without replacement) for each tree.
    pub subsample: f64,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    pub seed: u64,
}

impl Default for GbrtParams {
    fn default() -> Self {
        Self { n_trees: 200, max_depth: 4, learning_rate: 0.1, subsample: 0.8, lambda: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

/// A fitted ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gbrt {
    pub params: GbrtParams,
    base: f64,
    trees: Vec<Tree>,
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    r: &'a [f64],
    max_depth: usize,
    lambda: f64,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn leaf_value(&self, rows: &[usize]) -> f64 {
        let g: f64 = rows.iter().map(|&i| self.r[i]).sum();
        g / (rows.len() as f64 + self.lambda)
    }

    fn score(&self, g: f64, count: usize) -> f64 {
        g * g / (count as f64 + self.lambda)
    }

    /// Best `(gain, feature, threshold)` over all features.
    fn best_split(&self, rows: &[usize]) -> Option<(f64, usize, f64)> {
        let total: f64 = rows.iter().map(|&i| self.r[i]).sum();
        let parent = self.score(total, rows.len());
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for f in 0..self.x[rows[0]].len() {
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut gl = 0.0;
            for k in 0..sorted.len() - 1 {
                gl += self.r[sorted[k]];
                let (lo, hi) = (self.x[sorted[k]][f], self.x[sorted[k + 1]][f]);
                if lo == hi {
                    continue;
                }
                let gain = self.score(gl, k + 1) + self.score(total - gl, sorted.len() - k - 1) - parent;
                if gain > 1e-12 && best.is_none_or(|(bg, _, _)| gain > bg) {
                    best = Some((gain, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: &[usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: self.leaf_value(rows) });
        if depth >= self.max_depth || rows.len() < 2 {
            return id;
        }
        if let Some((_, feature, threshold)) = self.best_split(rows) {
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x[i][feature] <= threshold);
            let left = self.grow(&l, depth + 1);
            let right = self.grow(&r, depth + 1);
            self.nodes[id] = Node::Split { feature, threshold, left, right };
        }
        id
    }
}

impl Gbrt {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: GbrtParams) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::InvalidParameter(format!(
                "need matching non-empty inputs ({} rows, {} targets)",
                x.len(),
                y.len()
            )));
        }
        if !(params.subsample > 0.0 && params.subsample <= 1.0) || params.learning_rate <= 0.0 || params.lambda < 0.0 {
            return Err(Error::InvalidParameter(format!("bad boosting parameters {params:?}")));
        }
        let width = x[0].len();
        if x.iter().any(|r| r.len() != width) || x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("ragged or non-finite training data".into()));
        }
        let n = x.len();
        let base = y.iter().sum::<f64>() / n as f64;
        let mut pred = vec![base; n];
        let mut trees = Vec::with_capacity(params.n_trees);
        let m = ((n as f64 * params.subsample).round() as usize).clamp(1, n);
        for t in 0..params.n_trees {
            let r: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
            let mut rows = sample(&mut stream_rng(params.seed, t as u64), n, m).into_vec();
            rows.sort_unstable();
            let mut b = Builder { x, r: &r, max_depth: params.max_depth, lambda: params.lambda, nodes: Vec::new() };
            b.grow(&rows, 0);
            let tree = Tree { nodes: b.nodes };
            for (p, xi) in pred.iter_mut().zip(x) {
                *p += params.learning_rate * tree.predict(xi);
            }
            trees.push(tree);
        }
        Ok(Self { params, base, trees })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.base + self.params.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_target() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let y = vec![2.5; 30];
        let m = Gbrt::fit(&x, &y, GbrtParams::default()).unwrap();
        assert_eq!(m.predict(&[3.0, 1.0]), 2.5);
    }

    #[test]
    fn fits_step_function() {
        let x: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..100).map(|i| if i < 50 { 1.0 } else { 3.0 }).collect();
        let m = Gbrt::fit(&x, &y, GbrtParams { subsample: 1.0, ..GbrtParams::default() }).unwrap();
        assert!((m.predict(&[10.0]) - 1.0).abs() < 0.05);
        assert!((m.predict(&[90.0]) - 3.0).abs() < 0.05);
    }

    #[test]
    fn deterministic_and_serializable() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![(i * 7 % 11) as f64, i as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] * 0.5 - r[1] * 0.1).collect();
        let a = Gbrt::fit(&x, &y, GbrtParams::default()).unwrap();
        let b = Gbrt::fit(&x, &y, GbrtParams::default()).unwrap();
        assert_eq!(a, b);
        let back: Gbrt = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(back.predict(&x[3]), a.predict(&x[3]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Gbrt::fit(&[], &[], GbrtParams::default()).is_err());
        assert!(Gbrt::fit(&[vec![1.0]], &[f64::NAN], GbrtParams::default()).is_err());
    }
}
