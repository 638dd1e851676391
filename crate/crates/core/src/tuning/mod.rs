//! Parameter tuning: TTST, grid search, the boosted-tree estimator and the
//! latency-trained machine selector.

mod estimator;
mod gbrt;
mod grid;
mod latency;
mod selector;
mod ttst;

pub use estimator::{
    decompose, recompose, train_estimator, EstimatorConfig, EstimatorModel, EstimatorReport, MIN_RECORDS, STEP_RANGE,
};
pub use gbrt::{Gbrt, GbrtParams};
pub use grid::{
    build_dataset, evaluate_params, grid_scan, grid_search, read_dataset, shot_sizes, write_dataset, CostModel,
    DatasetConfig, GridConfig, GridOutcome, GridPoint, ParamGrid, TrainingRecord,
};
pub use latency::{
    measure_latency, measure_latency_dataset, read_latency_csv, write_latency_csv, LatencyConfig, LatencyRow,
};
pub use selector::{select_machine, train_selector, SelectorConfig, SelectorModel, SelectorReport};
pub use ttst::{sectional_target, ttst, TtstInputs, TARGET_QUANTILE};
