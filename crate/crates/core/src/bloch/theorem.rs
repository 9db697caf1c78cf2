use num_complex::Complex64;
use serde::Serialize;

use super::diagrams::{enumerate_valid_diagrams, g_coefficient, ThetaBuilder};
use super::series::{loglog_slope, BlochSeries};
use crate::error::Result;
use crate::gadget::Gadget;
use crate::linop::{effective_hamiltonian_with_projector, fit_scalar, operator_norm, remove_shift, Operator, ScalarFit};

#[derive(Debug, Clone, Serialize)]
pub struct OrderFit {
    pub order: usize,
    pub fit: ScalarFit,
}

/// Order-by-order structure of the `A` terms of a gadget.
#[derive(Debug, Clone, Serialize)]
pub struct AlgebraicReport {
    pub clock_dim: usize,
    /// `A^(m) ~ P0` for `1 <= m < n`
    pub lower_orders: Vec<OrderFit>,
    /// `c` in `A^(n) - c P0 = (-1)^(n-1) sum_a target(a)`
    pub shift: Complex64,
    pub top_residual: f64,
    /// Coefficient of the shift-removed `A^(n)` on the shift-removed oracle.
    pub coefficient: Complex64,
    pub coefficient_residual: f64,
    pub expected_coefficient: f64,
    pub coefficient_rel_error: f64,
}

impl AlgebraicReport {
    pub fn passes(&self, prop_tol: f64, coeff_tol: f64) -> bool {
        self.lower_orders.iter().all(|o| o.fit.residual <= prop_tol)
            && self.top_residual <= prop_tol
            && self.coefficient_residual <= prop_tol
            && self.coefficient_rel_error <= coeff_tol
    }

    pub fn worst_proportionality(&self) -> f64 {
        self.lower_orders
            .iter()
            .map(|o| o.fit.residual)
            .fold(self.top_residual, f64::max)
            .max(self.coefficient_residual)
    }
}

/// `oracle` is the independently built `sum_s Q(s) (x) G (x) |0><0|`, on
/// which the order-`n` term should have coefficient `2 (-1)^(n-1)`.
pub fn theorem1_algebraic(series: &mut BlochSeries, gadget: &Gadget, oracle: &Operator) -> Result<AlgebraicReport> {
    let n = gadget.clock_dim();
    let p0 = gadget.p0().clone();
    let mut lower_orders = Vec::new();
    for m in 1..n {
        let a = series.a_term_from_u(m)?;
        lower_orders.push(OrderFit {
            order: m,
            fit: fit_scalar(&a, &p0)?,
        });
    }
    let top = series.a_term_from_u(n)?;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let predicted = gadget.target_sum()?.scale_re(sign);
    let fit = fit_scalar(&top.sub(&predicted)?, &p0)?;
    let top_norm = operator_norm(&top).max(1.0);
    let top_residual = operator_norm(&top.sub(&predicted)?.sub(&p0.scale(fit.coefficient))?) / top_norm;
    let coeff = fit_scalar(&remove_shift(&top, &p0)?, &remove_shift(oracle, &p0)?)?;
    let expected = 2.0 * sign;
    Ok(AlgebraicReport {
        clock_dim: n,
        lower_orders,
        shift: fit.coefficient,
        top_residual,
        coefficient: coeff.coefficient,
        coefficient_residual: coeff.residual,
        expected_coefficient: expected,
        coefficient_rel_error: (coeff.coefficient - expected).norm() / expected.abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub clock_dim: usize,
    pub points: Vec<SweepPoint>,
    pub slope: f64,
    pub required_slope: f64,
}

impl SpectralReport {
    pub fn passes(&self) -> bool {
        self.slope >= self.required_slope
    }
}

/// Shift-removed exact effective Hamiltonian against
/// `lambda^n (unit - shift)` over a grid; `unit` is the order-`n`
/// coefficient operator.
pub fn theorem1_spectral(gadget: &Gadget, unit: &Operator, lambdas: &[f64]) -> Result<SpectralReport> {
    let n = gadget.clock_dim();
    let d = gadget.ground_rank();
    let p0 = gadget.p0();
    let unit = remove_shift(unit, p0)?;
    let mut points = Vec::new();
    for &lambda in lambdas {
        let (heff, pi) = effective_hamiltonian_with_projector(&gadget.hamiltonian(lambda), d)?;
        let exact = heff.sub(&pi.scale(heff.trace() / d as f64))?;
        let pred = unit.scale_re(lambda.powi(n as i32));
        points.push(SweepPoint {
            lambda,
            residual: operator_norm(&exact.sub(&pred)?),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.residual).collect();
    Ok(SpectralReport {
        clock_dim: n,
        slope: loglog_slope(&xs, &ys),
        required_slope: n as f64 + 0.5,
        points,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagramOrder {
    pub order: usize,
    pub diagrams: usize,
    pub nonspecial: usize,
    /// `|sum g Theta - A^(m)| / max(1, |A^(m)|)`
    pub reconstruction_residual: f64,
    /// Largest `Theta ~ P0` fit residual over non-special diagrams.
    pub worst_nonspecial_residual: f64,
}

/// Diagram expansion of `A^(m)` for `m = 1..=max_order` (at most `n`).
pub fn diagram_check(series: &mut BlochSeries, gadget: &Gadget, max_order: usize) -> Result<Vec<DiagramOrder>> {
    let builder = ThetaBuilder::new(gadget)?;
    let rules = builder.rules().clone();
    let p0 = gadget.p0();
    let mut out = Vec::new();
    for m in 1..=max_order.min(rules.n) {
        let diagrams = enumerate_valid_diagrams(&rules, m)?;
        let mut acc = Operator::zero(gadget.layout());
        let mut worst: f64 = 0.0;
        let mut nonspecial = 0;
        for d in &diagrams {
            let theta = builder.theta(d)?;
            let g = g_coefficient(&d.column_sums());
            acc = acc.add(&theta.scale_re(g))?;
            if !d.is_special(&rules) {
                nonspecial += 1;
                worst = worst.max(fit_scalar(&theta, p0)?.residual);
            }
        }
        let direct = series.a_term(m)?.operator;
        let residual = operator_norm(&acc.sub(&direct)?) / operator_norm(&direct).max(1.0);
        out.push(DiagramOrder {
            order: m,
            diagrams: diagrams.len(),
            nonspecial,
            reconstruction_residual: residual,
            worst_nonspecial_residual: worst,
        });
    }
    Ok(out)
}
