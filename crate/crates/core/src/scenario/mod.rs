//! Configuration, orchestration and on-disk artifacts for whole scenarios.
mod artifacts;
mod config;
mod pipeline;
pub mod stages;

pub use self::artifacts::{groups_csv, indicators_csv, welfare_csv, ArtifactStore, MANIFEST};
pub use self::config::{DesignConfig, ScenarioConfig, WelfareConfig};
pub use self::pipeline::{
    compare, design_schemes, evaluate, network_for, run_indicators, run_scenario, synthesize, zone_attraction,
    Comparison, DesignOutput, DesignedScheme, Evaluation, RunOutput, Synthesis,
};
