//! The end-to-end MIS pipeline: shortcuts, feature extraction, parameter
//! estimation, machine selection, SB, repair.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::repair::{baseline_mis_nodes, decode_and_repair};
use crate::error::{Error, Result};
use crate::formulations::{build_mis_ising, graph_features, Graph, GraphFeatures, MisWeights};
use crate::sb::{EngineKind, LightEngine, SbParams, WideEngine, N_MAX};
use crate::tuning::{EstimatorModel, SelectorModel};

/// What produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionSource {
    Wide,
    Light,
    Shortcut,
    Baseline,
}

impl From<EngineKind> for SolutionSource {
    fn from(k: EngineKind) -> Self {
        match k {
            EngineKind::Wide => SolutionSource::Wide,
            EngineKind::Light => SolutionSource::Light,
        }
    }
}

impl fmt::Display for SolutionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionSource::Wide => "wide",
            SolutionSource::Light => "light",
            SolutionSource::Shortcut => "shortcut",
            SolutionSource::Baseline => "baseline",
        })
    }
}

/// An independent set with bookkeeping. Node ids are zero-based in memory
/// and one-based in JSON, like graph files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SolutionFile", into = "SolutionFile")]
pub struct MisSolution {
    pub nodes: Vec<usize>,
    pub elapsed_s: f64,
    pub engine: SolutionSource,
    pub params: Option<SbParams>,
}

impl MisSolution {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    nodes: Vec<usize>,
    size: usize,
    elapsed_s: f64,
    engine: SolutionSource,
    params: Option<SbParams>,
}

impl From<MisSolution> for SolutionFile {
    fn from(s: MisSolution) -> Self {
        SolutionFile {
            size: s.nodes.len(),
            nodes: s.nodes.iter().map(|&v| v + 1).collect(),
            elapsed_s: s.elapsed_s,
            engine: s.engine,
            params: s.params,
        }
    }
}

impl TryFrom<SolutionFile> for MisSolution {
    type Error = Error;

    fn try_from(f: SolutionFile) -> Result<Self> {
        if f.size != f.nodes.len() {
            return Err(Error::Format(format!("size {} but {} nodes", f.size, f.nodes.len())));
        }
        let nodes = f
            .nodes
            .iter()
            .map(|&v| v.checked_sub(1).ok_or_else(|| Error::Format("node ids are 1-based".into())))
            .collect::<Result<_>>()?;
        Ok(MisSolution { nodes, elapsed_s: f.elapsed_s, engine: f.engine, params: f.params })
    }
}

/// Hand-tuned parameters used when no estimator is loaded.
pub fn default_params() -> SbParams {
    SbParams { c: 0.4, dt: 0.3, step: 400, a0: 1.0 }
}

/// Engine choice when no selector is loaded: the wide engine's fixed
/// per-step cost only pays off for large problems.
pub fn default_engine(n: usize, _step: usize) -> EngineKind {
    if n >= 512 {
        EngineKind::Wide
    } else {
        EngineKind::Light
    }
}

/// Anything that can serve as the per-slot MIS oracle.
pub trait MisAlgorithm {
    fn name(&self) -> &str;
    fn solve(&self, g: &Graph, seed: u64) -> Result<MisSolution>;
}

/// Configured pipeline. Models are loaded once and only used for inference.
#[derive(Debug, Clone)]
pub struct MisSolver {
    pub estimator: Option<EstimatorModel>,
    pub selector: Option<SelectorModel>,
    pub shots: usize,
    pub weights: MisWeights,
    /// Overrides the estimator.
    pub params: Option<SbParams>,
    /// Overrides the selector.
    pub engine: Option<EngineKind>,
}

impl Default for MisSolver {
    fn default() -> Self {
        Self { estimator: None, selector: None, shots: 4, weights: MisWeights::default(), params: None, engine: None }
    }
}

impl MisSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_estimator(mut self, m: EstimatorModel) -> Self {
        self.estimator = Some(m);
        self
    }

    pub fn with_selector(mut self, m: SelectorModel) -> Self {
        self.selector = Some(m);
        self
    }

    pub fn with_shots(mut self, shots: usize) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_params(mut self, p: SbParams) -> Self {
        self.params = Some(p);
        self
    }

    pub fn with_engine(mut self, e: EngineKind) -> Self {
        self.engine = Some(e);
        self
    }

    pub fn params_for(&self, f: &GraphFeatures) -> SbParams {
        match (&self.params, &self.estimator) {
            (Some(p), _) => *p,
            (None, Some(m)) => m.estimate_params(f),
            (None, None) => default_params(),
        }
    }

    pub fn engine_for(&self, n: usize, step: usize) -> EngineKind {
        let pick = match (&self.engine, &self.selector) {
            (Some(e), _) => *e,
            (None, Some(m)) => m.select(n, step),
            (None, None) => default_engine(n, step),
        };
        if pick == EngineKind::Wide && n > N_MAX {
            EngineKind::Light
        } else {
            pick
        }
    }

    pub fn solve(&self, g: &Graph, seed: u64) -> Result<MisSolution> {
        let start = Instant::now();
        let n = g.num_nodes();
        if g.num_edges() == 0 {
            return Ok(MisSolution {
                nodes: (0..n).collect(),
                elapsed_s: start.elapsed().as_secs_f64(),
                engine: SolutionSource::Shortcut,
                params: None,
            });
        }
        if g.is_complete() {
            return Ok(MisSolution {
                nodes: vec![0],
                elapsed_s: start.elapsed().as_secs_f64(),
                engine: SolutionSource::Shortcut,
                params: None,
            });
        }
        let features = graph_features(g);
        let params = self.params_for(&features);
        let engine = self.engine_for(n, params.step);
        let model = build_mis_ising(g, self.weights);
        let shots = self.shots.max(1);
        let run = match engine {
            EngineKind::Light => LightEngine::default().run(&model, &params, shots, seed)?,
            EngineKind::Wide => WideEngine::default().run(&model, &params, shots, seed)?,
        };
        let mut order: Vec<_> = run.results.iter().collect();
        order.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then(a.shot_index.cmp(&b.shot_index))
                .then(a.replica_index.cmp(&b.replica_index))
        });
        let mut best: Vec<usize> = Vec::new();
        for r in order {
            let set = decode_and_repair(&r.spins, g);
            if set.len() > best.len() {
                best = set;
            }
        }
        Ok(MisSolution {
            nodes: best,
            elapsed_s: start.elapsed().as_secs_f64(),
            engine: engine.into(),
            params: Some(params),
        })
    }
}

impl MisAlgorithm for MisSolver {
    fn name(&self) -> &str {
        "sb"
    }

    fn solve(&self, g: &Graph, seed: u64) -> Result<MisSolution> {
        MisSolver::solve(self, g, seed)
    }
}

/// The randomized greedy reference solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaselineSolver;

impl MisAlgorithm for BaselineSolver {
    fn name(&self) -> &str {
        "baseline"
    }

    fn solve(&self, g: &Graph, seed: u64) -> Result<MisSolution> {
        Ok(baseline_mis(g, seed))
    }
}

/// Runs the pipeline with optional trained models and `shots` shots.
pub fn solve_mis(
    g: &Graph,
    estimator: Option<&EstimatorModel>,
    selector: Option<&SelectorModel>,
    shots: usize,
    seed: u64,
) -> Result<MisSolution> {
    let solver =
        MisSolver { estimator: estimator.cloned(), selector: selector.cloned(), shots, ..MisSolver::default() };
    solver.solve(g, seed)
}

pub fn baseline_mis(g: &Graph, seed: u64) -> MisSolution {
    let start = Instant::now();
    let nodes = baseline_mis_nodes(g, seed);
    MisSolution { nodes, elapsed_s: start.elapsed().as_secs_f64(), engine: SolutionSource::Baseline, params: None }
}
