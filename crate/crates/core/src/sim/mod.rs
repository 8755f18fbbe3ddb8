//! Agent-based generator of synthetic ecosystems with known ground truth.
//!
//! AI agents pick modules by a softmax over size, private affinity and
//! governance friction; humans review with a fixed budget, so review depth
//! thins as the agent head-count grows. Failing commits seed branching
//! cascades, shallow review lets boundary-violating dependencies through,
//! and periodic governance gates the worst offenders.

mod config;
mod engine;

pub use config::{Offspring, SimConfig, PRESETS};
pub use engine::{
    calibration_series, parse_truth_jsonl, run, step, ModuleState, PredictionRecord, SimRun, SimState,
    StepTruth, ORIGIN, STEP_SECONDS,
};
