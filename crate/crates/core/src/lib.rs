//! Ballistic simulated-bifurcation Ising solving for dynamically changing
//! maximum-independent-set problems.
//!
//! The crate is organised bottom-up:
//!
//! * [`ising`]: dense Ising / QUBO models and energies.
//! * [`formulations`]: problem encodings, graph features and random graphs.
//! * [`indexed`]: lossless J-matrix index coding and the encoded MAC.
//! * [`sb`]: the bSB dynamics and the two engines (`wide`, `light`).
//! * [`tuning`]: TTST, grid search, the boosted-tree parameter estimator and
//!   the logistic machine selector.
//! * [`mis`]: the end-to-end MIS solver plus baseline and exact references.
//! * [`tdma`]: the wireless multi-hop TDMA scheduling simulator.

pub mod error;
pub mod formulations;
pub mod indexed;
pub mod ising;
pub mod mis;
pub mod rng;
pub mod sb;
pub mod tdma;
pub mod tuning;

pub use error::{Error, Result};
