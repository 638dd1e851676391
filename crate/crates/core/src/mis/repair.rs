//! Turning spin vectors into feasible independent sets, plus the randomized
//! greedy reference heuristic.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;

use crate::formulations::Graph;
use crate::ising::SpinConfig;
use crate::rng::rng_from_seed;

/// Nodes with spin `+1`, made independent and then maximal.
///
/// Conflicts are resolved by repeatedly dropping the selected node with the
/// most selected neighbours (higher id on ties); the result is then extended
/// greedily in ascending id order.
///
/// # Panics
/// If `spins.len() != g.num_nodes()`.
pub fn decode_and_repair(spins: &SpinConfig, g: &Graph) -> Vec<usize> {
    assert_eq!(spins.len(), g.num_nodes(), "spin vector does not match graph");
    let selected: Vec<bool> = spins.as_slice().iter().map(|&s| s > 0).collect();
    repair_selection(selected, g)
}

pub(crate) fn repair_selection(mut selected: Vec<bool>, g: &Graph) -> Vec<usize> {
    let n = g.num_nodes();
    let mut deg = vec![0usize; n];
    for &(u, v) in g.edges() {
        if selected[u] && selected[v] {
            deg[u] += 1;
            deg[v] += 1;
        }
    }
    let mut conflicted: BTreeSet<(usize, usize)> = (0..n).filter(|&i| deg[i] > 0).map(|i| (deg[i], i)).collect();
    while let Some((_, u)) = conflicted.pop_last() {
        selected[u] = false;
        deg[u] = 0;
        for &v in g.neighbors(u) {
            if selected[v] {
                conflicted.remove(&(deg[v], v));
                deg[v] -= 1;
                if deg[v] > 0 {
                    conflicted.insert((deg[v], v));
                }
            }
        }
    }

    // deg now counts selected neighbours of every node, selected or not.
    let mut blocked = vec![0usize; n];
    for (u, &sel) in selected.iter().enumerate() {
        if sel {
            for &v in g.neighbors(u) {
                blocked[v] += 1;
            }
        }
    }
    for u in 0..n {
        if !selected[u] && blocked[u] == 0 {
            selected[u] = true;
            for &v in g.neighbors(u) {
                blocked[v] += 1;
            }
        }
    }
    (0..n).filter(|&i| selected[i]).collect()
}

/// Randomized greedy maximal independent set: pick a uniformly random
/// remaining node, keep it, delete its closed neighbourhood, repeat.
pub fn baseline_mis_nodes(g: &Graph, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.num_nodes()).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut gone = vec![false; g.num_nodes()];
    let mut set = Vec::new();
    // The first still-available node of a uniform permutation is uniform
    // over the available nodes.
    for u in order {
        if gone[u] {
            continue;
        }
        set.push(u);
        gone[u] = true;
        for &v in g.neighbors(u) {
            gone[v] = true;
        }
    }
    set.sort_unstable();
    set
}
