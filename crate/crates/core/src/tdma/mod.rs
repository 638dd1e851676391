//! Multi-hop wireless TDMA scheduling driven by a per-slot MIS solver.

mod bench;
mod field;
mod schedule;
mod topology;

pub use bench::{benchmark, write_bench_csv, BenchReport, BenchRow, BenchRun, Condition};
pub use field::{calibrate_radius, gen_field, gen_field_with_radius, Field, InterferenceClass, CENTER};
pub use schedule::{schedule, validate_schedule, Schedule, ScheduleViolation, Scheduler, SlotTrace};
pub use topology::{build_interference, build_tree, build_unit_graph, TreeGraph};
