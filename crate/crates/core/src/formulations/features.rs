use serde::{Deserialize, Serialize};

use super::graph::Graph;

/// Estimator inputs describing a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphFeatures {
    pub n: usize,
    /// `|E| / C(n, 2)`, zero for a single node.
    pub density: f64,
    /// `2|E| / n`.
    pub avg_degree: f64,
    /// Gini coefficient of the degree sequence, zero when all degrees are zero.
    pub gini: f64,
}

impl GraphFeatures {
    pub fn as_array(&self) -> [f64; 4] {
        [self.n as f64, self.density, self.avg_degree, self.gini]
    }
}

pub fn graph_features(g: &Graph) -> GraphFeatures {
    let n = g.num_nodes();
    let m = g.num_edges();
    let pairs = n * n.saturating_sub(1) / 2;
    let density = if pairs == 0 { 0.0 } else { m as f64 / pairs as f64 };
    let avg_degree = if n == 0 { 0.0 } else { 2.0 * m as f64 / n as f64 };
    GraphFeatures { n, density, avg_degree, gini: degree_gini(&g.degrees()) }
}

/// `sum_{i,k} |d_i - d_k| / (2 n^2 mean(d))`, using the sorted-order identity
/// `sum_{i,k} |d_i - d_k| = 2 sum_i (2i - n + 1) d_(i)`.
fn degree_gini(degrees: &[usize]) -> f64 {
    let n = degrees.len();
    let total: usize = degrees.iter().sum();
    if n == 0 || total == 0 {
        return 0.0;
    }
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable();
    let mut pair_sum: i128 = 0;
    for (i, &d) in sorted.iter().enumerate() {
        pair_sum += (2 * i as i128 - n as i128 + 1) * d as i128;
    }
    pair_sum *= 2;
    pair_sum as f64 / (2.0 * n as f64 * total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_gini(d: &[usize]) -> f64 {
        let n = d.len() as f64;
        let mean = d.iter().sum::<usize>() as f64 / n;
        if mean == 0.0 {
            return 0.0;
        }
        let mut s = 0.0;
        for &a in d {
            for &b in d {
                s += (a as f64 - b as f64).abs();
            }
        }
        s / (2.0 * n * n * mean)
    }

    #[test]
    fn complete_graph() {
        let f = graph_features(&Graph::complete(4));
        assert_eq!(f, GraphFeatures { n: 4, density: 1.0, avg_degree: 3.0, gini: 0.0 });
    }

    #[test]
    fn star_graph() {
        let g = Graph::new(5, (1..5).map(|v| (0, v))).unwrap();
        let f = graph_features(&g);
        assert_eq!(f.n, 5);
        assert!((f.density - 0.4).abs() < 1e-15);
        assert!((f.avg_degree - 1.6).abs() < 1e-15);
        assert!((f.gini - 0.3).abs() < 1e-15);
    }

    #[test]
    fn edgeless_graph() {
        let f = graph_features(&Graph::empty(5));
        assert_eq!(f, GraphFeatures { n: 5, density: 0.0, avg_degree: 0.0, gini: 0.0 });
        assert_eq!(graph_features(&Graph::empty(1)).density, 0.0);
    }

    #[test]
    fn gini_matches_pairwise_sum() {
        for d in [vec![1, 2, 3, 4], vec![0, 0, 7], vec![5, 1, 1, 1, 1, 3, 9]] {
            assert!((degree_gini(&d) - brute_gini(&d)).abs() < 1e-12);
        }
    }
}
