//! Ballistic simulated bifurcation and its engines.

mod batch;
mod dynamics;
mod engine;

pub use batch::{batch_map, decode_replicas, BatchLayout, N_MAX};
pub use dynamics::{evolve, sb_step, Coupling, DenseCoupling, EncodedCoupling, SbParams, SbState, INIT_MOMENTUM};
pub use engine::{run_multishot, run_shot, EngineKind, LightEngine, MultiShot, ShotResult, WideEngine};
