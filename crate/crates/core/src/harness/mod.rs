//! Check orchestration, configuration and report output behind the `qdlab` CLI.

mod checks;
mod commands;
mod config;
mod instance;
mod report;
mod spectrum;
mod tolerance;

pub use checks::run_check;
pub use commands::{bloch_report, gadget_report, BlochReport, GadgetReport, LowSpectrum, OrderNorms};
pub use config::{
    default_size, parse_lambda_grid, validate_lambda_grid, CheckId, ExperimentConfig, GadgetConfig, GadgetMode,
    SiteKind, DEFAULT_LAMBDA_GRID, MAX_ORDER,
};
pub use instance::{load_group, load_lattice, site_model, site_of, GadgetInstance, GadgetSummary, IdleSet};
pub use report::{
    csv_string, emit_csv, emit_sweep_csv, fmt_num, read_report, sweep_csv_string, CheckRecord, Comparison,
    Environment, Report, Row,
};
pub use spectrum::{group_levels, hqd_model, hqd_spectrum, torus_ground_degeneracy, Level, SpectrumReport};
pub use tolerance::Tolerances;

use crate::error::Result;

/// Runs the configured checks in order and writes any requested outputs.
pub fn run_suite(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let mut records = Vec::new();
    for id in config.check_ids()? {
        records.push(run_check(id, config)?);
    }
    let report = Report {
        records,
        environment: Environment::current(config.seed, config.tolerances),
    };
    if let Some(p) = &config.out {
        report.write_json(p)?;
    }
    if let Some(p) = &config.csv {
        emit_csv(&report, p)?;
    }
    if let Some(p) = &config.sweep_csv {
        emit_sweep_csv(&report, p)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests;
