//! Random graph families: Erdos-Renyi, Barabasi-Albert (scale-free) and
//! Watts-Strogatz (small-world).

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::graph::Graph;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Er,
    Sf,
    Sw,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Er, Family::Sf, Family::Sw];
}

/// Family plus its structural parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GraphSpec {
    /// Each of the C(n, 2) pairs is an edge with probability `p`.
    Er { n: usize, p: f64 },
    /// Preferential attachment; each new node attaches `m` edges.
    Sf { n: usize, m: usize },
    /// Ring lattice of even degree `k`, each edge rewired with probability `beta`.
    Sw { n: usize, k: usize, beta: f64 },
}

impl GraphSpec {
    pub fn family(&self) -> Family {
        match self {
            GraphSpec::Er { .. } => Family::Er,
            GraphSpec::Sf { .. } => Family::Sf,
            GraphSpec::Sw { .. } => Family::Sw,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            GraphSpec::Er { n, .. } | GraphSpec::Sf { n, .. } | GraphSpec::Sw { n, .. } => n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            GraphSpec::Er { n, p } => {
                if n == 0 {
                    return bad("ER graph needs n >= 1".into());
                }
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("ER edge probability {p} outside [0, 1]"));
                }
            }
            GraphSpec::Sf { n, m } => {
                if m == 0 || m >= n {
                    return bad(format!("SF attachment m = {m} must satisfy 1 <= m < n = {n}"));
                }
            }
            GraphSpec::Sw { n, k, beta } => {
                if k == 0 || k % 2 != 0 || k >= n {
                    return bad(format!("SW ring degree k = {k} must be even with 2 <= k < n = {n}"));
                }
                if !(0.0..=1.0).contains(&beta) {
                    return bad(format!("SW rewiring probability {beta} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }
}

/// Generates a reproducible random graph for `spec` and `seed`.
pub fn gen_random_graph(spec: &GraphSpec, seed: u64) -> Result<Graph> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    match *spec {
        GraphSpec::Er { n, p } => {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            Graph::new(n, edges)
        }
        GraphSpec::Sf { n, m } => {
            // Seed with a star on m + 1 nodes, then attach by degree.
            let mut edges: Vec<(usize, usize)> = (1..=m).map(|v| (0, v)).collect();
            let mut repeated: Vec<usize> = Vec::with_capacity(2 * m * n);
            for &(u, v) in &edges {
                repeated.push(u);
                repeated.push(v);
            }
            for source in (m + 1)..n {
                let mut targets = BTreeSet::new();
                while targets.len() < m {
                    targets.insert(*repeated.choose(&mut rng).expect("nonempty"));
                }
                for &t in &targets {
                    edges.push((source, t));
                    repeated.push(source);
                    repeated.push(t);
                }
            }
            Graph::new(n, edges)
        }
        GraphSpec::Sw { n, k, beta } => {
            let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
            for u in 0..n {
                for off in 1..=k / 2 {
                    let v = (u + off) % n;
                    adj[u].insert(v);
                    adj[v].insert(u);
                }
            }
            for off in 1..=k / 2 {
                for u in 0..n {
                    let v = (u + off) % n;
                    if !adj[u].contains(&v) || !rng.gen_bool(beta) {
                        continue;
                    }
                    // A node already adjacent to everyone cannot be rewired.
                    if adj[u].len() >= n - 1 {
                        continue;
                    }
                    let w = loop {
                        let w = rng.gen_range(0..n);
                        if w != u && !adj[u].contains(&w) {
                            break w;
                        }
                    };
                    adj[u].remove(&v);
                    adj[v].remove(&u);
                    adj[u].insert(w);
                    adj[w].insert(u);
                }
            }
            let edges =
                adj.iter().enumerate().flat_map(|(u, s)| s.iter().filter(move |&&v| u < v).map(move |&v| (u, v)));
            Graph::new(n, edges)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_extremes() {
        let g = gen_random_graph(&GraphSpec::Er { n: 10, p: 0.0 }, 1).unwrap();
        assert_eq!(g.num_edges(), 0);
        let g = gen_random_graph(&GraphSpec::Er { n: 10, p: 1.0 }, 1).unwrap();
        assert!(g.is_complete());
    }

    #[test]
    fn er_edge_count_is_binomial() {
        let g = gen_random_graph(&GraphSpec::Er { n: 1000, p: 0.1 }, 42).unwrap();
        let pairs = 1000.0 * 999.0 / 2.0;
        let mean = pairs * 0.1;
        let sigma = (pairs * 0.1 * 0.9_f64).sqrt();
        assert!((g.num_edges() as f64 - mean).abs() <= 4.0 * sigma);
    }

    #[test]
    fn sf_edge_count() {
        let g = gen_random_graph(&GraphSpec::Sf { n: 50, m: 3 }, 7).unwrap();
        // star of m edges, then m edges per added node
        assert_eq!(g.num_edges(), 3 + 3 * (50 - 4));
    }

    #[test]
    fn sw_preserves_edge_count() {
        let g = gen_random_graph(&GraphSpec::Sw { n: 40, k: 4, beta: 0.3 }, 3).unwrap();
        assert_eq!(g.num_edges(), 40 * 2);
        let lattice = gen_random_graph(&GraphSpec::Sw { n: 10, k: 2, beta: 0.0 }, 3).unwrap();
        assert!(lattice.degrees().iter().all(|&d| d == 2));
    }

    #[test]
    fn invalid_parameters() {
        assert!(gen_random_graph(&GraphSpec::Er { n: 5, p: 1.5 }, 0).is_err());
        assert!(gen_random_graph(&GraphSpec::Sf { n: 5, m: 5 }, 0).is_err());
        assert!(gen_random_graph(&GraphSpec::Sw { n: 10, k: 3, beta: 0.1 }, 0).is_err());
        assert!(gen_random_graph(&GraphSpec::Sw { n: 10, k: 4, beta: -0.1 }, 0).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        for spec in
            [GraphSpec::Er { n: 30, p: 0.3 }, GraphSpec::Sf { n: 30, m: 2 }, GraphSpec::Sw { n: 30, k: 4, beta: 0.2 }]
        {
            assert_eq!(gen_random_graph(&spec, 9).unwrap(), gen_random_graph(&spec, 9).unwrap());
        }
    }
}
