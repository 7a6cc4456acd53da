//! Studies built on the ensemble generator, and their CSV export.

mod config;
mod export;
pub mod stats;
mod studies;

pub use config::{ExperimentConfig, InitialStateKind};
pub use export::{
    CODE_VERSION, Cell, Column, Manifest, Provenance, SCHEMA_VERSION, StudyResult, Table,
    row_counts, write_study,
};
pub use studies::{
    ConvergencePoint, ConvergenceStudy, LayerPoint, LayerStudy, SlopeFit, WernerFit, WernerPoint,
    WernerStudy, ensemble_result, partition_statistics, run_convergence_study, run_ensemble_dump,
    run_layer_comparison, run_werner_study,
};
