//! Solver comparison on identical seeded fields.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::field::{gen_field, gen_field_with_radius, InterferenceClass};
use super::schedule::{validate_schedule, Scheduler};
use crate::error::{Error, Result};
use crate::mis::MisAlgorithm;
use crate::rng::derive_seed;

/// How the fields of one condition are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub n_s: usize,
    /// Calibrated class; ignored when `radius` is set.
    pub class: Option<InterferenceClass>,
    pub radius: Option<f64>,
}

impl Condition {
    pub fn class(n_s: usize, class: InterferenceClass) -> Self {
        Self { n_s, class: Some(class), radius: None }
    }

    pub fn radius(n_s: usize, radius: f64) -> Self {
        Self { n_s, class: None, radius: Some(radius) }
    }

    pub fn label(&self) -> String {
        match (self.radius, self.class) {
            (Some(r), _) => format!("n{}_r{r}", self.n_s),
            (None, Some(c)) => format!("{c}_{}", self.n_s),
            (None, None) => format!("lif_{}", self.n_s),
        }
    }

    pub fn field(&self, seed: u64) -> Result<super::Field> {
        match self.radius {
            Some(r) => gen_field_with_radius(self.n_s, r, seed),
            None => gen_field(self.n_s, self.class.unwrap_or(InterferenceClass::Lif), seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub condition: String,
    pub solver: String,
    pub instance: usize,
    pub slots: usize,
    pub tree_depth: usize,
    pub elapsed_s: f64,
    pub valid: bool,
}

/// One CSV row: `condition,solver,slots_mean,slots_std,time_mean,time_std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub condition: String,
    pub solver: String,
    pub slots_mean: f64,
    pub slots_std: f64,
    pub time_mean: f64,
    pub time_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub runs: Vec<BenchRun>,
}

/// Sample mean and standard deviation (zero for a single value).
fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (m, var.sqrt())
}

/// Schedules `instances` fields per condition with every solver. Field `i`
/// of condition `c` is the same for all solvers.
pub fn benchmark(
    conditions: &[Condition],
    solvers: &[&dyn MisAlgorithm],
    instances: usize,
    seed: u64,
) -> Result<BenchReport> {
    if solvers.is_empty() || conditions.is_empty() || instances == 0 {
        return Err(Error::InvalidParameter("benchmark needs conditions, solvers and instances".into()));
    }
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (ci, cond) in conditions.iter().enumerate() {
        let label = cond.label();
        let fields = (0..instances)
            .map(|i| cond.field(derive_seed(seed, (ci * 10_000 + i) as u64)))
            .collect::<Result<Vec<_>>>()?;
        for solver in solvers {
            let mut slots = Vec::new();
            let mut times = Vec::new();
            for (i, f) in fields.iter().enumerate() {
                let mut s = Scheduler::new(f.clone(), derive_seed(seed, i as u64))?;
                let sched = s.run(*solver)?;
                let valid = validate_schedule(f, s.tree(), s.interference(), &sched).is_ok();
                slots.push(sched.total_slots() as f64);
                times.push(sched.elapsed_s);
                runs.push(BenchRun {
                    condition: label.clone(),
                    solver: solver.name().to_string(),
                    instance: i,
                    slots: sched.total_slots(),
                    tree_depth: s.tree().depth(),
                    elapsed_s: sched.elapsed_s,
                    valid,
                });
            }
            let (slots_mean, slots_std) = mean_std(&slots);
            let (time_mean, time_std) = mean_std(&times);
            rows.push(BenchRow {
                condition: label.clone(),
                solver: solver.name().to_string(),
                slots_mean,
                slots_std,
                time_mean,
                time_std,
            });
        }
    }
    Ok(BenchReport { rows, runs })
}

pub fn write_bench_csv(rows: &[BenchRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
