use serde::Serialize;

use super::instance::{GadgetInstance, GadgetSummary};
use super::report::{CheckRecord, Comparison, Row};
use super::tolerance::Tolerances;
use crate::bloch::{theorem1_algebraic, theorem1_spectral, AlgebraicReport, SpectralReport};
use crate::error::{QdError, Result};
use crate::linop::{fit_scalar, lowest_eigenpairs, operator_norm};

#[derive(Debug, Clone, Serialize)]
pub struct OrderNorms {
    pub order: usize,
    pub a_norm: f64,
    pub u_norm: f64,
    /// `A^(m) ~ c P0` residual; only meaningful below the clock dimension
    pub ground_residual: f64,
    pub ground_coefficient: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlochReport {
    pub gadget: GadgetSummary,
    pub orders: Vec<OrderNorms>,
    pub algebraic: Option<AlgebraicReport>,
    pub spectral: SpectralReport,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

/// Per-order norms plus both routes of the leading-order check. The
/// algebraic route runs only when `orders` reaches the clock dimension.
pub fn bloch_report(inst: &GadgetInstance, orders: usize, lambdas: &[f64], tol: &Tolerances) -> Result<BlochReport> {
    if orders == 0 || orders > super::config::MAX_ORDER {
        return Err(QdError::invalid(format!("orders {orders} outside 1..={}", super::config::MAX_ORDER)));
    }
    let n = inst.gadget.clock_dim();
    let mut series = inst.series()?;
    let mut rows = Vec::new();
    for m in 1..=orders {
        let u = series.u_term(m)?.operator;
        let a = series.a_term_from_u(m)?;
        let fit = fit_scalar(&a, inst.gadget.p0())?;
        rows.push(OrderNorms {
            order: m,
            a_norm: operator_norm(&a),
            u_norm: operator_norm(&u),
            ground_residual: fit.residual,
            ground_coefficient: fit.coefficient.re,
        });
    }
    let mut checks = Vec::new();
    let algebraic = if orders >= n {
        let r = theorem1_algebraic(&mut series, &inst.gadget, &inst.oracle()?)?;
        let mut rs: Vec<Row> = r
            .lower_orders
            .iter()
            .map(|o| Row::test(format!("order{}", o.order), o.fit.residual, Comparison::AtMost, tol.proportionality))
            .collect();
        rs.push(Row::test(format!("order{n}"), r.top_residual, Comparison::AtMost, tol.proportionality));
        rs.push(Row::test("coefficient-error", r.coefficient_rel_error, Comparison::AtMost, tol.coefficient));
        checks.push(CheckRecord::from_rows("algebraic", rs, 0.0));
        Some(r)
    } else {
        None
    };
    let spectral = theorem1_spectral(&inst.gadget, &inst.predicted_unit()?, lambdas)?;
    let mut rs: Vec<Row> = spectral
        .points
        .iter()
        .map(|p| Row::info(format!("lambda={}", p.lambda), p.residual).at_lambda(p.lambda))
        .collect();
    rs.push(Row::test("slope", spectral.slope, Comparison::AtLeast, n as f64 + tol.slope_margin));
    checks.push(CheckRecord::from_rows("spectral", rs, 0.0));
    let pass = checks.iter().all(|c| c.pass);
    Ok(BlochReport {
        gadget: inst.summary()?,
        orders: rows,
        algebraic,
        spectral,
        checks,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LowSpectrum {
    pub lambda: f64,
    pub energies: Vec<f64>,
    /// splitting of the lowest `ground_rank` levels
    pub ground_band_width: f64,
    pub gap_above_band: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GadgetReport {
    pub gadget: GadgetSummary,
    pub spectra: Vec<LowSpectrum>,
}

/// Gadget structure and the low spectrum of `H0 + lambda V` at each lambda.
pub fn gadget_report(inst: &GadgetInstance, lambdas: &[f64]) -> Result<GadgetReport> {
    let rank = inst.gadget.ground_rank();
    let mut spectra = Vec::new();
    for &l in lambdas {
        let h = inst.gadget.hamiltonian(l);
        let pairs = lowest_eigenpairs(&h, rank)?;
        let e = &pairs.energies;
        spectra.push(LowSpectrum {
            lambda: l,
            energies: e.clone(),
            ground_band_width: e[rank - 1] - e[0],
            gap_above_band: pairs.next_energy.map(|x| x - e[rank - 1]),
        });
    }
    Ok(GadgetReport {
        gadget: inst.summary()?,
        spectra,
    })
}
