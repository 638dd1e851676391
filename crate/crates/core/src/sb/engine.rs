//! The two engines. `Light` runs one shot at a time on a dense float matrix
//! sized to the problem; `Wide` always runs at full capacity on the encoded
//! matrix and fills idle capacity with batch-mapped replicas.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::batch::{BatchLayout, N_MAX};
use super::dynamics::{evolve, DenseCoupling, EncodedCoupling, SbParams, SbState};
use crate::error::{Error, Result};
use crate::indexed::{encode_model, EncodedJ, FixedPointFormat};
use crate::ising::{IsingModel, SpinConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotResult {
    pub spins: SpinConfig,
    pub energy: f64,
    pub shot_index: u64,
    pub replica_index: usize,
}

impl ShotResult {
    fn rank(&self, other: &Self) -> Ordering {
        self.energy
            .total_cmp(&other.energy)
            .then(self.shot_index.cmp(&other.shot_index))
            .then(self.replica_index.cmp(&other.replica_index))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiShot {
    pub best: ShotResult,
    pub results: Vec<ShotResult>,
    /// Engine passes executed (one per shot on the light engine).
    pub passes: usize,
}

impl MultiShot {
    fn from_results(results: Vec<ShotResult>, passes: usize) -> Self {
        let best = results.iter().min_by(|a, b| a.rank(b)).cloned().expect("at least one shot");
        Self { best, results, passes }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Wide,
    Light,
}

impl EngineKind {
    pub const ALL: [EngineKind; 2] = [EngineKind::Wide, EngineKind::Light];

    pub fn as_str(&self) -> &'static str {
        match self {
            EngineKind::Wide => "wide",
            EngineKind::Light => "light",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wide" => Ok(EngineKind::Wide),
            "light" => Ok(EngineKind::Light),
            other => Err(Error::InvalidParameter(format!("unknown engine {other:?}"))),
        }
    }
}

fn check_inputs(model: &IsingModel, params: &SbParams, shots: usize) -> Result<()> {
    params.validate()?;
    if !model.is_finite() {
        return Err(Error::InvalidModel("non-finite entries".into()));
    }
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    Ok(())
}

/// Variable-size engine with a direct float MAC.
#[derive(Debug, Clone, Copy, Default)]
pub struct LightEngine {
    /// Optional position quantization, matching what the wide engine's MAC sees.
    pub quantization: Option<FixedPointFormat>,
}

impl LightEngine {
    pub fn quantized(format: FixedPointFormat) -> Self {
        Self { quantization: Some(format) }
    }

    pub fn shot(&self, model: &IsingModel, params: &SbParams, seed: u64, shot: u64) -> Result<ShotResult> {
        check_inputs(model, params, 1)?;
        Ok(self.shot_unchecked(model, params, seed, shot))
    }

    fn shot_unchecked(&self, model: &IsingModel, params: &SbParams, seed: u64, shot: u64) -> ShotResult {
        let n = model.n();
        let mut coupling = DenseCoupling::new(model.couplings(), n);
        if let Some(f) = self.quantization {
            coupling = coupling.with_quantization(f);
        }
        let mut state = SbState::initial(n, seed, shot);
        evolve(&mut state, &mut coupling, model.bias(), params);
        let spins = state.spins();
        let energy = model.energy_unchecked(spins.as_slice());
        ShotResult { spins, energy, shot_index: shot, replica_index: 0 }
    }

    pub fn run(&self, model: &IsingModel, params: &SbParams, shots: usize, seed: u64) -> Result<MultiShot> {
        check_inputs(model, params, shots)?;
        let results = (0..shots as u64).map(|k| self.shot_unchecked(model, params, seed, k)).collect();
        Ok(MultiShot::from_results(results, shots))
    }
}

/// Fixed-capacity engine over the encoded matrix.
#[derive(Debug, Clone, Copy)]
pub struct WideEngine {
    pub n_max: usize,
    pub format: FixedPointFormat,
}

impl Default for WideEngine {
    fn default() -> Self {
        Self { n_max: N_MAX, format: FixedPointFormat::default() }
    }
}

impl WideEngine {
    pub fn layout(&self, n: usize) -> Result<BatchLayout> {
        BatchLayout::new(n, self.n_max)
    }

    pub fn run(&self, model: &IsingModel, params: &SbParams, shots: usize, seed: u64) -> Result<MultiShot> {
        check_inputs(model, params, shots)?;
        let layout = self.layout(model.n())?;
        let enc = encode_model(model)?;
        self.run_staged(&enc, model, &layout, params, shots, seed)
    }

    /// Runs an already-encoded matrix with biases `h`.
    pub fn run_encoded(
        &self,
        enc: &EncodedJ,
        h: &[f64],
        params: &SbParams,
        shots: usize,
        seed: u64,
    ) -> Result<MultiShot> {
        if h.len() != enc.n() {
            return Err(Error::DimensionMismatch { expected: enc.n(), actual: h.len() });
        }
        let j = crate::indexed::decode(enc)?;
        let model = IsingModel::from_dense(enc.n(), j, h.to_vec())?;
        check_inputs(&model, params, shots)?;
        let layout = self.layout(enc.n())?;
        self.run_staged(enc, &model, &layout, params, shots, seed)
    }

    fn run_staged(
        &self,
        enc: &EncodedJ,
        model: &IsingModel,
        layout: &BatchLayout,
        params: &SbParams,
        shots: usize,
        seed: u64,
    ) -> Result<MultiShot> {
        let n = model.n();
        let stacked = enc.block_diagonal(layout.replicas, self.n_max)?;
        let mut h = vec![0.0; self.n_max];
        for &off in &layout.offsets {
            h[off..off + n].copy_from_slice(model.bias());
        }
        let passes = shots.div_ceil(layout.replicas);
        let mut coupling = EncodedCoupling::new(&stacked, self.format);
        let mut results = Vec::with_capacity(passes * layout.replicas);
        for p in 0..passes {
            let mut state = SbState::zeros(self.n_max);
            for (r, &off) in layout.offsets.iter().enumerate() {
                state.randomize_momenta(off, n, seed, (p * layout.replicas + r) as u64);
            }
            evolve(&mut state, &mut coupling, &h, params);
            for (r, &off) in layout.offsets.iter().enumerate() {
                let spins = SpinConfig::from_signs(&state.x[off..off + n]);
                let energy = model.energy_unchecked(spins.as_slice());
                results.push(ShotResult {
                    spins,
                    energy,
                    shot_index: (p * layout.replicas + r) as u64,
                    replica_index: r,
                });
            }
        }
        Ok(MultiShot::from_results(results, passes))
    }
}

/// Single light-engine shot with stream 0.
pub fn run_shot(model: &IsingModel, params: &SbParams, seed: u64) -> Result<ShotResult> {
    LightEngine::default().shot(model, params, seed, 0)
}

/// Best of at least `shots` independent runs.
pub fn run_multishot(
    model: &IsingModel,
    params: &SbParams,
    shots: usize,
    engine: EngineKind,
    seed: u64,
) -> Result<MultiShot> {
    match engine {
        EngineKind::Light => LightEngine::default().run(model, params, shots, seed),
        EngineKind::Wide => WideEngine::default().run(model, params, shots, seed),
    }
}
