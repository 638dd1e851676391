//! Greedy leaf-by-leaf TDMA scheduling: each slot solves an MIS on the
//! interference subgraph of the tree's current leaves.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::field::Field;
use super::topology::{build_interference, build_tree, build_unit_graph, TreeGraph};
use crate::error::Result;
use crate::formulations::{graph_features, Graph, GraphFeatures};
use crate::mis::{MisAlgorithm, SolutionSource};
use crate::rng::derive_seed;
use crate::sb::SbParams;

/// Slot assignment. Sensor ids are 1-based (0 is the base station).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub slots: Vec<Vec<usize>>,
    pub elapsed_s: f64,
}

impl Schedule {
    pub fn total_slots(&self) -> usize {
        self.slots.len()
    }
}

/// What happened in one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotTrace {
    /// 1-based slot number.
    pub slot: usize,
    pub leaves: Vec<usize>,
    pub features: GraphFeatures,
    pub num_edges: usize,
    pub scheduled: Vec<usize>,
    pub engine: SolutionSource,
    pub params: Option<SbParams>,
    pub solver_elapsed_s: f64,
    /// The solver returned nothing and one leaf was scheduled instead.
    pub fallback: bool,
}

/// The scheduling loop as an explicit state machine, so callers can advance
/// it one slot at a time.
#[derive(Debug, Clone)]
pub struct Scheduler {
    field: Field,
    tree: TreeGraph,
    interference: Graph,
    pending_children: Vec<usize>,
    done: Vec<bool>,
    remaining: usize,
    slots: Vec<Vec<usize>>,
    trace: Vec<SlotTrace>,
    seed: u64,
    busy_s: f64,
}

impl Scheduler {
    pub fn new(field: Field, seed: u64) -> Result<Self> {
        let unit = build_unit_graph(&field);
        let tree = build_tree(&field, &unit)?;
        let interference = build_interference(&field, &tree);
        Ok(Self::from_parts(field, tree, interference, seed))
    }

    pub fn from_parts(field: Field, tree: TreeGraph, interference: Graph, seed: u64) -> Self {
        let n = field.n_s() + 1;
        let mut pending_children = vec![0; n];
        for p in tree.parent.iter().flatten() {
            pending_children[*p] += 1;
        }
        Self {
            remaining: field.n_s(),
            field,
            tree,
            interference,
            pending_children,
            done: vec![false; n],
            slots: Vec::new(),
            trace: Vec::new(),
            seed,
            busy_s: 0.0,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn tree(&self) -> &TreeGraph {
        &self.tree
    }

    pub fn interference(&self) -> &Graph {
        &self.interference
    }

    pub fn trace(&self) -> &[SlotTrace] {
        &self.trace
    }

    pub fn slots(&self) -> &[Vec<usize>] {
        &self.slots
    }

    pub fn is_done(&self) -> bool {
        self.remaining == 0
    }

    /// Unscheduled sensors without unscheduled children, ascending.
    pub fn leaves(&self) -> Vec<usize> {
        (1..=self.field.n_s()).filter(|&v| !self.done[v] && self.pending_children[v] == 0).collect()
    }

    /// Schedules the next slot; `None` once every sensor is placed.
    pub fn step(&mut self, solver: &dyn MisAlgorithm) -> Result<Option<&SlotTrace>> {
        if self.is_done() {
            return Ok(None);
        }
        let start = Instant::now();
        let k = self.slots.len() + 1;
        let leaves = self.leaves();
        let g = self.interference.induced(&leaves);
        let sol = solver.solve(&g, derive_seed(self.seed, k as u64))?;
        let valid =
            !sol.nodes.is_empty() && sol.nodes.iter().all(|&i| i < leaves.len()) && g.is_independent(&sol.nodes);
        let (mut chosen, fallback) = if valid {
            (sol.nodes.iter().map(|&i| leaves[i]).collect::<Vec<_>>(), false)
        } else {
            if !sol.nodes.is_empty() {
                log::warn!("slot {k}: solver {} returned an invalid set; scheduling one leaf", solver.name());
            }
            (vec![leaves[0]], true)
        };
        chosen.sort_unstable();
        for &v in &chosen {
            self.done[v] = true;
            if let Some(p) = self.tree.parent[v] {
                self.pending_children[p] -= 1;
            }
        }
        self.remaining -= chosen.len();
        self.slots.push(chosen.clone());
        self.busy_s += start.elapsed().as_secs_f64();
        self.trace.push(SlotTrace {
            slot: k,
            features: graph_features(&g),
            num_edges: g.num_edges(),
            leaves,
            scheduled: chosen,
            engine: sol.engine,
            params: sol.params,
            solver_elapsed_s: sol.elapsed_s,
            fallback,
        });
        Ok(self.trace.last())
    }

    /// Runs to completion.
    pub fn run(&mut self, solver: &dyn MisAlgorithm) -> Result<Schedule> {
        while self.step(solver)?.is_some() {}
        Ok(self.schedule())
    }

    /// Slots so far; `elapsed_s` counts only time spent inside `step`.
    pub fn schedule(&self) -> Schedule {
        Schedule { slots: self.slots.clone(), elapsed_s: self.busy_s }
    }
}

/// Builds the graphs for `f` and runs the loop with `solver`.
pub fn schedule(f: &Field, solver: &dyn MisAlgorithm, seed: u64) -> Result<Schedule> {
    Scheduler::new(f.clone(), seed)?.run(solver)
}

/// First broken schedule invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleViolation {
    UnknownNode { node: usize },
    Duplicate { node: usize },
    Missing { node: usize },
    EmptySlot { slot: usize },
    Conflict { slot: usize, a: usize, b: usize },
    Order { child: usize, parent: usize },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleViolation::UnknownNode { node } => write!(f, "node {node} is not a sensor"),
            ScheduleViolation::Duplicate { node } => write!(f, "node {node} scheduled twice"),
            ScheduleViolation::Missing { node } => write!(f, "node {node} never scheduled"),
            ScheduleViolation::EmptySlot { slot } => write!(f, "slot {slot} is empty"),
            ScheduleViolation::Conflict { slot, a, b } => write!(f, "nodes {a} and {b} interfere in slot {slot}"),
            ScheduleViolation::Order { child, parent } => {
                write!(f, "parent {parent} transmits no later than its child {child}")
            }
        }
    }
}

/// Checks partition, per-slot independence and that every parent transmits
/// strictly after each of its children. Slots are reported 1-based.
pub fn validate_schedule(
    f: &Field,
    tree: &TreeGraph,
    interference: &Graph,
    sched: &Schedule,
) -> std::result::Result<(), ScheduleViolation> {
    let n = f.n_s();
    let mut slot_of = vec![0usize; n + 1];
    for (k, slot) in sched.slots.iter().enumerate() {
        if slot.is_empty() {
            return Err(ScheduleViolation::EmptySlot { slot: k + 1 });
        }
        for &v in slot {
            if v == 0 || v > n {
                return Err(ScheduleViolation::UnknownNode { node: v });
            }
            if slot_of[v] != 0 {
                return Err(ScheduleViolation::Duplicate { node: v });
            }
            slot_of[v] = k + 1;
        }
        for (i, &a) in slot.iter().enumerate() {
            for &b in &slot[i + 1..] {
                if interference.has_edge(a, b) {
                    return Err(ScheduleViolation::Conflict { slot: k + 1, a, b });
                }
            }
        }
    }
    if let Some(v) = (1..=n).find(|&v| slot_of[v] == 0) {
        return Err(ScheduleViolation::Missing { node: v });
    }
    for v in 1..=n {
        if let Some(p) = tree.parent[v].filter(|&p| p != 0) {
            if slot_of[p] <= slot_of[v] {
                return Err(ScheduleViolation::Order { child: v, parent: p });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mis::{BaselineSolver, MisSolution, MisSolver};
    use crate::tdma::field::CENTER;

    struct Empty;

    impl MisAlgorithm for Empty {
        fn name(&self) -> &str {
            "empty"
        }

        fn solve(&self, _: &Graph, _: u64) -> Result<MisSolution> {
            Ok(MisSolution { nodes: vec![], elapsed_s: 0.0, engine: SolutionSource::Baseline, params: None })
        }
    }

    fn chain3() -> Field {
        Field::new((1..=3).map(|i| [0.5 + 0.09 * i as f64, 0.5]).collect(), CENTER, 0.1).unwrap()
    }

    #[test]
    fn chain_takes_three_slots() {
        let f = chain3();
        let s = schedule(&f, &MisSolver::new(), 0).unwrap();
        assert_eq!(s.slots, vec![vec![3], vec![2], vec![1]]);
    }

    #[test]
    fn star_takes_one_slot_per_leaf() {
        let f = Field::new(vec![[0.55, 0.5], [0.45, 0.5], [0.5, 0.55], [0.5, 0.45]], CENTER, 0.1).unwrap();
        let s = schedule(&f, &BaselineSolver, 0).unwrap();
        assert_eq!(s.total_slots(), 4);
    }

    #[test]
    fn empty_field() {
        let f = Field::new(vec![], CENTER, 0.1).unwrap();
        assert_eq!(schedule(&f, &MisSolver::new(), 0).unwrap().total_slots(), 0);
    }

    #[test]
    fn empty_solver_falls_back() {
        let f = Field::new(vec![[0.55, 0.5], [0.45, 0.5]], CENTER, 0.1).unwrap();
        let mut s = Scheduler::new(f.clone(), 0).unwrap();
        let sched = s.run(&Empty).unwrap();
        assert_eq!(sched.slots, vec![vec![1], vec![2]]);
        assert!(s.trace().iter().all(|t| t.fallback));
        assert!(validate_schedule(&f, s.tree(), s.interference(), &sched).is_ok());
    }

    #[test]
    fn validator_catches_corruption() {
        let f = chain3();
        let s = Scheduler::new(f.clone(), 0).unwrap();
        let (t, g) = (s.tree().clone(), s.interference().clone());
        let bad = Schedule { slots: vec![vec![1], vec![2], vec![3]], elapsed_s: 0.0 };
        assert!(matches!(validate_schedule(&f, &t, &g, &bad), Err(ScheduleViolation::Order { .. })));
        let bad = Schedule { slots: vec![vec![2, 3], vec![1]], elapsed_s: 0.0 };
        assert!(matches!(validate_schedule(&f, &t, &g, &bad), Err(ScheduleViolation::Conflict { .. })));
        let bad = Schedule { slots: vec![vec![3], vec![2]], elapsed_s: 0.0 };
        assert_eq!(validate_schedule(&f, &t, &g, &bad), Err(ScheduleViolation::Missing { node: 1 }));
        let bad = Schedule { slots: vec![vec![3], vec![3], vec![2], vec![1]], elapsed_s: 0.0 };
        assert_eq!(validate_schedule(&f, &t, &g, &bad), Err(ScheduleViolation::Duplicate { node: 3 }));
    }
}
