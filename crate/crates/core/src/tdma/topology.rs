//! Unit, routing-tree and interference graphs. Node 0 is the base station.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::field::Field;
use crate::error::{Error, Result};
use crate::formulations::Graph;

/// Edge between every pair within the communication radius (closed disk).
pub fn build_unit_graph(f: &Field) -> Graph {
    let n = f.n_s() + 1;
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if f.within(a, b) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(n, edges).expect("pairs are in range")
}

/// Shortest-hop routing tree towards the base station.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeGraph {
    /// `parent[0]` is `None`; every sensor has `Some`.
    pub parent: Vec<Option<usize>>,
}

impl TreeGraph {
    pub fn n_s(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn parent_of(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.parent.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                c[*p].push(v);
            }
        }
        c
    }

    /// Hop count of each node.
    pub fn hops(&self) -> Vec<usize> {
        let mut h = vec![usize::MAX; self.parent.len()];
        h[0] = 0;
        fn walk(v: usize, parent: &[Option<usize>], h: &mut [usize]) -> usize {
            if h[v] == usize::MAX {
                let p = parent[v].expect("sensor has a parent");
                h[v] = walk(p, parent, h) + 1;
            }
            h[v]
        }
        for v in 1..self.parent.len() {
            walk(v, &self.parent, &mut h);
        }
        h
    }

    pub fn depth(&self) -> usize {
        self.hops().into_iter().max().unwrap_or(0)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parent.iter().enumerate().filter_map(|(v, p)| p.map(|p| (v, p))).collect()
    }
}

/// Breadth-first tree from the base station. Among parents at the minimal
/// hop count the geometrically nearest wins, then the lowest id.
pub fn build_tree(f: &Field, unit: &Graph) -> Result<TreeGraph> {
    let n = f.n_s() + 1;
    if unit.num_nodes() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: unit.num_nodes() });
    }
    let mut hop = vec![usize::MAX; n];
    hop[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &v in unit.neighbors(u) {
            if hop[v] == usize::MAX {
                hop[v] = hop[u] + 1;
                queue.push_back(v);
            }
        }
    }
    if let Some(v) = (1..n).find(|&v| hop[v] == usize::MAX) {
        return Err(Error::Disconnected(v));
    }
    let mut parent = vec![None; n];
    for v in 1..n {
        parent[v] = unit
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| hop[u] + 1 == hop[v])
            .min_by(|&a, &b| f.dist(v, a).total_cmp(&f.dist(v, b)).then(a.cmp(&b)));
    }
    Ok(TreeGraph { parent })
}

/// Conflicts between sensors: `i` and `j` clash when either lies within the
/// radius of the other's parent. Node 0 is isolated.
pub fn build_interference(f: &Field, tree: &TreeGraph) -> Graph {
    let n = f.n_s() + 1;
    let mut edges = Vec::new();
    for i in 1..n {
        let pi = tree.parent[i].expect("sensor has a parent");
        for j in i + 1..n {
            let pj = tree.parent[j].expect("sensor has a parent");
            if f.within(j, pi) || f.within(i, pj) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges).expect("pairs are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tdma::field::CENTER;

    #[test]
    fn closed_disk() {
        let f = Field::new(vec![[0.5, 0.75]], CENTER, 0.25).unwrap();
        assert!(build_unit_graph(&f).has_edge(0, 1));
    }

    #[test]
    fn huge_radius_complete() {
        let f = Field::new(vec![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]], CENTER, 1.5).unwrap();
        assert!(build_unit_graph(&f).is_complete());
    }

    #[test]
    fn isolated_node() {
        let f = Field::new(vec![[0.55, 0.5], [0.0, 0.0]], CENTER, 0.1).unwrap();
        let u = build_unit_graph(&f);
        assert_eq!(u.degree(2), 0);
        assert!(matches!(build_tree(&f, &u), Err(Error::Disconnected(2))));
    }

    #[test]
    fn chain_tree() {
        // sensors every 0.09 to the right of the BS, radius 0.1
        let f = Field::new((1..=5).map(|i| [0.5 + 0.09 * i as f64, 0.5]).collect(), CENTER, 0.1).unwrap();
        let t = build_tree(&f, &build_unit_graph(&f)).unwrap();
        assert_eq!(t.parent, vec![None, Some(0), Some(1), Some(2), Some(3), Some(4)]);
        assert_eq!(t.depth(), 5);
        assert_eq!(t.edges().len(), 5);
    }

    #[test]
    fn star_tree_and_sibling_conflicts() {
        let f = Field::new(vec![[0.55, 0.5], [0.45, 0.5], [0.5, 0.55]], CENTER, 0.1).unwrap();
        let t = build_tree(&f, &build_unit_graph(&f)).unwrap();
        assert_eq!(t.depth(), 1);
        let g = build_interference(&f, &t);
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.degree(0), 0);
    }

    #[test]
    fn nearest_parent_then_lowest_id() {
        // sensors 1 and 2 both one hop out; sensor 3 reaches both, nearer to 2
        let f = Field::new(vec![[0.6, 0.5], [0.5, 0.6], [0.58, 0.6]], CENTER, 0.105).unwrap();
        let u = build_unit_graph(&f);
        assert!(!u.has_edge(0, 3));
        let t = build_tree(&f, &u).unwrap();
        assert_eq!(t.parent_of(3), Some(2));
    }

    #[test]
    fn far_subtrees_do_not_conflict() {
        // two chains heading left and right from the BS, radius 0.1
        let f = Field::new(vec![[0.59, 0.5], [0.68, 0.5], [0.41, 0.5], [0.32, 0.5]], CENTER, 0.1).unwrap();
        let t = build_tree(&f, &build_unit_graph(&f)).unwrap();
        let g = build_interference(&f, &t);
        // sensors 2 and 4 are the outer ends of opposite chains
        assert!(!g.has_edge(2, 4));
        // 1 and 3 share the BS as parent
        assert!(g.has_edge(1, 3));
    }
}
