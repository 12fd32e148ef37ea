//! Experiment harness around `gradabs-core`: JSON experiment configuration,
//! deterministic run reports, parameter-sweep atlases, trajectory snapshot
//! files, and plot-data CSV emission.
//!
//! Everything here is deterministic by construction: configs are echoed
//! verbatim into reports, numeric output uses the shortest round-trip
//! decimal representation, sweep cells are merged in a fixed (p, q) order,
//! and wall-clock timing is only ever written to stderr.

pub mod config;
pub mod experiment;
pub mod plot;
pub mod report;
pub mod snapshot;
pub mod sweep;
