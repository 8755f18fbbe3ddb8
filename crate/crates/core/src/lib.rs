//! Measurement and simulation toolkit for causal emergence in software
//! ecosystems where AI agents and humans commit side by side.
//!
//! The pipeline runs from raw evidence to verdicts:
//! [`ingest`] builds a validated [`state::EventLog`], [`coarse`] folds it
//! into a windowed [`state::StateSeries`], [`ei`] compares effective
//! information across the two levels, and [`harness`] tests the seven
//! ecosystem propositions. [`sim`] produces synthetic logs with known
//! ground truth.

pub mod bundle;
pub mod cli;
pub mod coarse;
pub mod ei;
pub mod error;
pub mod graph;
pub mod harness;
pub mod ingest;
pub mod plot;
pub mod rng;
pub mod sim;
pub mod state;
pub mod stats;

pub use error::{Error, Result};
