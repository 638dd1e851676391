//! Maximum independent set: SB pipeline, repair, and reference solvers.

mod exact;
mod repair;
mod solver;

pub use exact::{exact_mis, EXACT_LIMIT};
pub use repair::{baseline_mis_nodes, decode_and_repair};
pub use solver::{
    baseline_mis, default_engine, default_params, solve_mis, BaselineSolver, MisAlgorithm, MisSolution, MisSolver,
    SolutionSource,
};
