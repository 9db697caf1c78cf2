use serde::Serialize;

use super::series::BlochSeries;
use crate::error::{QdError, Result};
use crate::gadget::Gadget;
use crate::linop::operator_norm;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub order: usize,
    pub u_norm: f64,
    /// `(16 gamma)^m`
    pub refined_bound: f64,
    /// `(4 |V| / E1)^m`
    pub naive_bound: f64,
    pub violates_refined: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaVerdict {
    pub lambda: f64,
    pub within_refined: bool,
    pub within_naive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub gamma: f64,
    pub v_norm: f64,
    pub first_excitation: f64,
    /// `1 / (16 gamma)`
    pub refined_threshold: f64,
    /// `E1 / (4 |V|)`
    pub naive_threshold: f64,
    pub rows: Vec<ConvergenceRow>,
    pub lambdas: Vec<LambdaVerdict>,
}

impl ConvergenceReport {
    pub fn bounds_hold(&self) -> bool {
        self.rows.iter().all(|r| !r.violates_refined)
    }
}

/// Slack for rounding in the norm comparison.
const BOUND_SLACK: f64 = 1e-9;

pub fn convergence_report(
    series: &mut BlochSeries,
    gadget: &Gadget,
    max_order: usize,
    lambdas: &[f64],
) -> Result<ConvergenceReport> {
    let gamma = gadget.gamma_bound()?;
    let v_norm = operator_norm(series.v());
    let e1 = series
        .levels()
        .first_excitation()
        .ok_or_else(|| QdError::invalid("unperturbed Hamiltonian has a single level"))?;
    let mut rows = Vec::new();
    for m in 1..=max_order {
        let u = operator_norm(&series.u_term(m)?.operator);
        if u.is_nan() {
            return Err(QdError::numeric(format!("norm of U^({m}) failed")));
        }
        let refined = (16.0 * gamma).powi(m as i32);
        rows.push(ConvergenceRow {
            order: m,
            u_norm: u,
            refined_bound: refined,
            naive_bound: (4.0 * v_norm / e1).powi(m as i32),
            violates_refined: u > refined * (1.0 + BOUND_SLACK),
        });
    }
    let refined_threshold = 1.0 / (16.0 * gamma);
    let naive_threshold = e1 / (4.0 * v_norm);
    Ok(ConvergenceReport {
        gamma,
        v_norm,
        first_excitation: e1,
        refined_threshold,
        naive_threshold,
        rows,
        lambdas: lambdas
            .iter()
            .map(|&lambda| LambdaVerdict {
                lambda,
                within_refined: lambda < refined_threshold,
                within_naive: lambda < naive_threshold,
            })
            .collect(),
    })
}
