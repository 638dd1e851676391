//! Problem instances and their Ising / QUBO encodings, graph features, and
//! random graph generators.

mod features;
mod generators;
mod graph;
mod problems;

pub use features::{graph_features, GraphFeatures};
pub use generators::{gen_random_graph, Family, GraphSpec};
pub use graph::Graph;
pub use problems::{
    build_maxcut_ising, build_mis_ising, build_tsp_qubo, build_wmmbg_qubo, cut_value, MaxCutInstance, MisWeights,
    TspInstance, WmmbgInstance,
};
