use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simple undirected graph on nodes `0..num_nodes`.
///
/// Node ids are zero-based in memory and one-based in JSON
/// (`{"num_nodes": n, "edges": [[i, j], ..]}`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Graph {
    num_nodes: usize,
    /// Sorted, deduplicated, each pair stored with `u < v`.
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    num_nodes: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        let mut edges = Vec::with_capacity(f.edges.len());
        for [a, b] in f.edges {
            if a == 0 || b == 0 {
                return Err(Error::InvalidModel("graph file node ids are 1-based".into()));
            }
            edges.push((a - 1, b - 1));
        }
        Graph::new(f.num_nodes, edges)
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> Self {
        GraphFile { num_nodes: g.num_nodes, edges: g.edges.iter().map(|&(u, v)| [u + 1, v + 1]).collect() }
    }
}

impl Graph {
    /// Builds a graph from zero-based edge pairs. Duplicate pairs collapse.
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b) in edges {
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::InvalidModel(format!("edge ({a}, {b}) out of range for {num_nodes} nodes")));
            }
            if a == b {
                return Err(Error::InvalidModel(format!("self-loop at node {a}")));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        let mut adj = vec![Vec::new(); num_nodes];
        for &(u, v) in &list {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(Self { num_nodes, edges: list, adj })
    }

    pub fn empty(num_nodes: usize) -> Self {
        Self { num_nodes, edges: Vec::new(), adj: vec![Vec::new(); num_nodes] }
    }

    pub fn complete(num_nodes: usize) -> Self {
        let edges = (0..num_nodes).flat_map(|u| ((u + 1)..num_nodes).map(move |v| (u, v)));
        Self::new(num_nodes, edges).expect("complete graph edges are valid")
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn is_complete(&self) -> bool {
        self.num_nodes >= 2 && self.edges.len() == self.num_nodes * (self.num_nodes - 1) / 2
    }

    /// Induced subgraph on `nodes` (relabelled to `0..nodes.len()` in the given order).
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.num_nodes];
        for (i, &u) in nodes.iter().enumerate() {
            local[u] = i;
        }
        let mut edges = Vec::new();
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &self.adj[u] {
                let k = local[v];
                if k != usize::MAX && i < k {
                    edges.push((i, k));
                }
            }
        }
        Graph::new(nodes.len(), edges).expect("induced edges are valid")
    }

    /// True if no two nodes of `set` are adjacent.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        let mut mark = vec![false; self.num_nodes];
        for &u in set {
            if u >= self.num_nodes || mark[u] {
                return false;
            }
            mark[u] = true;
        }
        set.iter().all(|&u| self.adj[u].iter().all(|&v| !mark[v]))
    }

    /// True if `set` is independent and no further node can be added.
    pub fn is_maximal_independent(&self, set: &[usize]) -> bool {
        if !self.is_independent(set) {
            return false;
        }
        let mut blocked = vec![false; self.num_nodes];
        for &u in set {
            blocked[u] = true;
            for &v in &self.adj[u] {
                blocked[v] = true;
            }
        }
        blocked.iter().all(|&b| b)
    }
}
