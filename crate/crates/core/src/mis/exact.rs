//! Exact maximum independent set by branch and bound on bitmasks.

use crate::error::{Error, Result};
use crate::formulations::Graph;

/// Largest graph `exact_mis` accepts.
pub const EXACT_LIMIT: usize = 30;

/// A maximum independent set, ascending node ids.
pub fn exact_mis(g: &Graph) -> Result<Vec<usize>> {
    let n = g.num_nodes();
    if n > EXACT_LIMIT {
        return Err(Error::TooLarge { n, limit: EXACT_LIMIT });
    }
    let adj: Vec<u64> = (0..n).map(|u| g.neighbors(u).iter().fold(0u64, |m, &v| m | 1 << v)).collect();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut best = 0u64;
    search(&adj, all, 0, &mut best);
    Ok((0..n).filter(|&i| best >> i & 1 == 1).collect())
}

fn search(adj: &[u64], mut cand: u64, mut cur: u64, best: &mut u64) {
    // Nodes with at most one candidate neighbour can always be taken.
    loop {
        let mut changed = false;
        let mut rest = cand;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if cand >> v & 1 == 0 {
                continue;
            }
            if (adj[v] & cand).count_ones() <= 1 {
                cur |= 1 << v;
                cand &= !(adj[v] | 1 << v);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if cand == 0 {
        if cur.count_ones() > best.count_ones() {
            *best = cur;
        }
        return;
    }
    if cur.count_ones() + cand.count_ones() <= best.count_ones() {
        return;
    }
    let mut v = 0;
    let mut vd = 0;
    let mut rest = cand;
    while rest != 0 {
        let u = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let d = (adj[u] & cand).count_ones();
        if d > vd {
            v = u;
            vd = d;
        }
    }
    search(adj, cand & !(adj[v] | 1 << v), cur | 1 << v, best);
    search(adj, cand & !(1 << v), cur, best);
}
