//! Experiment harness for the heat laboratory: configuration, reference
//! oracles, frozen baselines and the acceptance matrix.

pub mod accept;
pub mod baseline;
pub mod config;
pub mod oracle;
pub mod report;
pub mod suites;
