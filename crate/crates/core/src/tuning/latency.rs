//! Engine latency measurement for training the machine selector.

use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulations::{build_mis_ising, gen_random_graph, GraphSpec, MisWeights};
use crate::rng::derive_seed;
use crate::sb::{EngineKind, LightEngine, SbParams, WideEngine, N_MAX};

/// One row of the latency table (`n,step,t_wide,t_light,label`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyRow {
    pub n: usize,
    pub step: usize,
    pub t_wide: f64,
    pub t_light: f64,
    pub label: EngineKind,
}

impl LatencyRow {
    /// Faster engine; an exact tie goes to the light engine.
    pub fn label_for(t_wide: f64, t_light: f64) -> EngineKind {
        if t_wide < t_light {
            EngineKind::Wide
        } else {
            EngineKind::Light
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LatencyConfig {
    pub sizes: Vec<usize>,
    pub steps: Vec<usize>,
    pub repeats: usize,
    pub shots: usize,
    /// ER edge probability of the probe graphs.
    pub density: f64,
    pub params: (f64, f64),
    pub seed: u64,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        Self {
            sizes: vec![8, 16, 32, 64, 128, 256, 512, 1024],
            steps: vec![50, 100, 200, 400, 800],
            repeats: 3,
            shots: 4,
            density: 0.1,
            params: (0.4, 0.3),
            seed: 0,
        }
    }
}

/// Times a full multi-shot solve on both engines for every `(n, step)`.
/// Runs serially; each cell keeps the median of `repeats` timings.
pub fn measure_latency(cfg: &LatencyConfig) -> Result<Vec<LatencyRow>> {
    if cfg.sizes.is_empty() || cfg.steps.is_empty() || cfg.repeats == 0 || cfg.shots == 0 {
        return Err(Error::InvalidParameter("latency sweep needs sizes, steps, repeats and shots".into()));
    }
    if let Some(&n) = cfg.sizes.iter().find(|&&n| !(2..=N_MAX).contains(&n)) {
        return Err(Error::InvalidParameter(format!("size {n} outside 2..={N_MAX}")));
    }
    let mut rows = Vec::new();
    for (i, &n) in cfg.sizes.iter().enumerate() {
        let g = gen_random_graph(&GraphSpec::Er { n, p: cfg.density }, derive_seed(cfg.seed, i as u64))?;
        let model = build_mis_ising(&g, MisWeights::default());
        for &step in &cfg.steps {
            let params = SbParams::new(cfg.params.0, cfg.params.1, step)?;
            let time = |kind: EngineKind| -> Result<f64> {
                let mut ts = Vec::with_capacity(cfg.repeats);
                for r in 0..cfg.repeats {
                    let start = Instant::now();
                    match kind {
                        EngineKind::Wide => WideEngine::default().run(&model, &params, cfg.shots, r as u64)?,
                        EngineKind::Light => LightEngine::default().run(&model, &params, cfg.shots, r as u64)?,
                    };
                    ts.push(start.elapsed().as_secs_f64());
                }
                ts.sort_by(f64::total_cmp);
                Ok(ts[ts.len() / 2])
            };
            let t_wide = time(EngineKind::Wide)?;
            let t_light = time(EngineKind::Light)?;
            log::debug!("latency n={n} step={step}: wide {t_wide:.4}s light {t_light:.4}s");
            rows.push(LatencyRow { n, step, t_wide, t_light, label: LatencyRow::label_for(t_wide, t_light) });
        }
    }
    Ok(rows)
}

/// Convenience form taking the sweep axes directly.
pub fn measure_latency_dataset(sizes: &[usize], steps: &[usize], repeats: usize, seed: u64) -> Result<Vec<LatencyRow>> {
    measure_latency(&LatencyConfig {
        sizes: sizes.to_vec(),
        steps: steps.to_vec(),
        repeats,
        seed,
        ..LatencyConfig::default()
    })
}

pub fn write_latency_csv(rows: &[LatencyRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_latency_csv(r: impl Read) -> Result<Vec<LatencyRow>> {
    csv::Reader::from_reader(r).deserialize().map(|row| Ok(row?)).collect()
}
