//! Grid search over SB parameters and training-set generation.

use std::io::{BufRead, Write};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ttst::{sectional_target, ttst};
use crate::error::{Error, Result};
use crate::formulations::{
    build_mis_ising, gen_random_graph, graph_features, Family, Graph, GraphFeatures, GraphSpec, MisWeights,
};
use crate::mis::decode_and_repair;
use crate::rng::{derive_seed, stream_rng};
use crate::sb::{LightEngine, SbParams};

/// Nominal compute time of one shot: one multiply-accumulate per coupling
/// entry per step. Used instead of wall-clock time so grid results are
/// reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub ns_per_mac: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self { ns_per_mac: 1.0 }
    }
}

impl CostModel {
    pub fn shot_time(&self, n: usize, step: usize) -> f64 {
        step as f64 * (n * n).max(1) as f64 * self.ns_per_mac * 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamGrid {
    pub c: Vec<f64>,
    pub dt: Vec<f64>,
    pub step: Vec<usize>,
}

impl Default for ParamGrid {
    /// `c`: 7 log-spaced points on `[0.01, 1]`; `dt` and `step` as listed.
    fn default() -> Self {
        Self {
            c: (0..7).map(|i| 10f64.powf(-2.0 + 2.0 * i as f64 / 6.0)).collect(),
            dt: vec![0.1, 0.2, 0.35, 0.5, 0.8, 1.25],
            step: vec![400, 4000, 20000],
        }
    }
}

impl ParamGrid {
    /// Points in `step`, `c`, `dt` order.
    pub fn points(&self) -> Vec<SbParams> {
        let mut out = Vec::with_capacity(self.c.len() * self.dt.len() * self.step.len());
        for &step in &self.step {
            for &c in &self.c {
                for &dt in &self.dt {
                    out.push(SbParams { c, dt, step, a0: 1.0 });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.is_empty() || self.dt.is_empty() || self.step.is_empty() {
            return Err(Error::InvalidParameter("parameter grid has an empty axis".into()));
        }
        self.points().iter().try_for_each(SbParams::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub grid: ParamGrid,
    pub shots_per_point: usize,
    #[serde(default)]
    pub cost: CostModel,
    #[serde(default)]
    pub weights: MisWeights,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            grid: ParamGrid::default(),
            shots_per_point: 20,
            cost: CostModel::default(),
            weights: MisWeights::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: SbParams,
    /// Repaired independent-set size of each shot.
    pub sizes: Vec<usize>,
    pub mean_size: f64,
    pub p_s: f64,
    pub t_com: f64,
    /// `None` when no shot reached the target.
    pub ttst: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub points: Vec<GridPoint>,
    pub target: f64,
    /// Indices of every point attaining the minimum TTST.
    pub best: Vec<usize>,
}

impl GridOutcome {
    pub fn best_ttst(&self) -> f64 {
        self.points[self.best[0]].ttst.expect("best point has a TTST")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub graph_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    pub features: GraphFeatures,
    pub best_params: SbParams,
    pub ttst: f64,
}

/// Repaired set sizes of `shots` light-engine shots (streams `0..shots`).
pub fn shot_sizes(g: &Graph, params: &SbParams, shots: usize, weights: MisWeights, seed: u64) -> Result<Vec<usize>> {
    if g.num_nodes() == 0 {
        return Ok(vec![0; shots]);
    }
    let model = build_mis_ising(g, weights);
    let engine = LightEngine::default();
    (0..shots as u64).map(|k| Ok(decode_and_repair(&engine.shot(&model, params, seed, k)?.spins, g).len())).collect()
}

fn score(sizes: Vec<usize>, params: SbParams, n: usize, target: f64, cost: &CostModel) -> GridPoint {
    let hits = sizes.iter().filter(|&&s| s as f64 >= target).count();
    let p_s = hits as f64 / sizes.len() as f64;
    let t_com = cost.shot_time(n, params.step);
    let mean_size = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
    GridPoint { params, sizes, mean_size, p_s, t_com, ttst: ttst(t_com, p_s).ok() }
}

/// Runs every grid point, sets the sectional target from the best shot seen
/// anywhere on the grid, and scores each point by TTST.
pub fn grid_scan(g: &Graph, cfg: &GridConfig, seed: u64) -> Result<GridOutcome> {
    cfg.grid.validate()?;
    if cfg.shots_per_point == 0 {
        return Err(Error::InvalidParameter("shots_per_point must be at least 1".into()));
    }
    let params = cfg.grid.points();
    let sizes: Vec<Vec<usize>> =
        params.par_iter().map(|p| shot_sizes(g, p, cfg.shots_per_point, cfg.weights, seed)).collect::<Result<_>>()?;
    let all: Vec<f64> = sizes.iter().flatten().map(|&s| s as f64).collect();
    let target = sectional_target(&all);
    let points: Vec<GridPoint> =
        params.into_iter().zip(sizes).map(|(p, s)| score(s, p, g.num_nodes(), target, &cfg.cost)).collect();
    let min = points.iter().filter_map(|p| p.ttst).fold(f64::INFINITY, f64::min);
    let best = points.iter().enumerate().filter(|(_, p)| p.ttst == Some(min)).map(|(i, _)| i).collect();
    Ok(GridOutcome { points, target, best })
}

/// One record per TTST-minimizing grid point.
pub fn grid_search(g: &Graph, cfg: &GridConfig, seed: u64) -> Result<Vec<TrainingRecord>> {
    let out = grid_scan(g, cfg, seed)?;
    let features = graph_features(g);
    Ok(out
        .best
        .iter()
        .map(|&i| TrainingRecord {
            graph_id: 0,
            family: None,
            features,
            best_params: out.points[i].params,
            ttst: out.points[i].ttst.expect("best point has a TTST"),
        })
        .collect())
}

/// TTST of `params` on `g` against an externally fixed target, scored the
/// same way as a grid point. `None` when no shot reaches the target.
pub fn evaluate_params(g: &Graph, params: &SbParams, cfg: &GridConfig, target: f64, seed: u64) -> Result<GridPoint> {
    params.validate()?;
    let sizes = shot_sizes(g, params, cfg.shots_per_point, cfg.weights, seed)?;
    Ok(score(sizes, *params, g.num_nodes(), target, &cfg.cost))
}

/// Random-graph ranges for dataset generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub count: usize,
    pub families: Vec<Family>,
    pub n_min: usize,
    pub n_max: usize,
    /// ER edge probability range.
    pub er_p: (f64, f64),
    /// SF attachment count range.
    pub sf_m: (usize, usize),
    /// SW half-degree range (`k = 2 * half`).
    pub sw_half_k: (usize, usize),
    pub sw_beta: (f64, f64),
    pub grid: GridConfig,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            count: 200,
            families: Family::ALL.to_vec(),
            n_min: 20,
            n_max: 200,
            er_p: (0.05, 0.5),
            sf_m: (1, 6),
            sw_half_k: (1, 6),
            sw_beta: (0.05, 0.5),
            grid: GridConfig::default(),
            seed: 0,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 || self.families.is_empty() {
            return Err(Error::InvalidParameter("dataset needs count >= 1 and at least one family".into()));
        }
        if self.n_min < 4 || self.n_min > self.n_max {
            return Err(Error::InvalidParameter(format!("bad size range {}..={}", self.n_min, self.n_max)));
        }
        let ordered = self.er_p.0 <= self.er_p.1
            && self.sf_m.0 >= 1
            && self.sf_m.0 <= self.sf_m.1
            && self.sw_half_k.0 >= 1
            && self.sw_half_k.0 <= self.sw_half_k.1
            && self.sw_beta.0 <= self.sw_beta.1;
        if !ordered {
            return Err(Error::InvalidParameter("empty or inverted generator range".into()));
        }
        self.grid.grid.validate()
    }

    /// Spec of graph `i`; families rotate, everything else is drawn from
    /// stream `i`.
    pub fn spec(&self, i: u64) -> GraphSpec {
        let mut rng = stream_rng(self.seed, i);
        let n = rng.gen_range(self.n_min..=self.n_max);
        match self.families[(i % self.families.len() as u64) as usize] {
            Family::Er => GraphSpec::Er { n, p: uniform(&mut rng, self.er_p) },
            Family::Sf => GraphSpec::Sf { n, m: rng.gen_range(self.sf_m.0..=self.sf_m.1).min(n - 1) },
            Family::Sw => {
                let half = rng.gen_range(self.sw_half_k.0..=self.sw_half_k.1).min((n - 1) / 2);
                GraphSpec::Sw { n, k: 2 * half, beta: uniform(&mut rng, self.sw_beta) }
            }
        }
    }

    pub fn graph(&self, i: u64) -> Result<(GraphSpec, Graph)> {
        let spec = self.spec(i);
        Ok((spec, gen_random_graph(&spec, derive_seed(self.seed, i ^ 0x6772_6170))?))
    }
}

fn uniform(rng: &mut impl rand::Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Generates `count` graphs and grid-searches each.
pub fn build_dataset(cfg: &DatasetConfig) -> Result<Vec<TrainingRecord>> {
    cfg.validate()?;
    let per_graph: Vec<Vec<TrainingRecord>> = (0..cfg.count as u64)
        .into_par_iter()
        .map(|i| {
            let (spec, g) = cfg.graph(i)?;
            let mut recs = grid_search(&g, &cfg.grid, derive_seed(cfg.seed, i))?;
            for r in &mut recs {
                r.graph_id = i;
                r.family = Some(spec.family());
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    Ok(per_graph.into_iter().flatten().collect())
}

pub fn write_dataset(records: &[TrainingRecord], mut w: impl Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_dataset(r: impl BufRead) -> Result<Vec<TrainingRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
