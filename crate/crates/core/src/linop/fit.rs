use num_complex::Complex64;
use serde::Serialize;

use super::eigen::operator_norm;
use super::operator::Operator;
use crate::error::{QdError, Result};

/// Below this magnitude a fitted coefficient counts as zero.
pub const DEGENERATE_COEFF: f64 = 1e-12;

/// Least-squares fit `X ~ c Y`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalarFit {
    pub coefficient: Complex64,
    /// `|X - cY| / max(1, |X|)` in the spectral norm
    pub residual: f64,
    /// `Y = 0`, or `c = 0` with `Y != 0`: proportionality holds only trivially
    pub degenerate: bool,
}

impl ScalarFit {
    pub fn holds(&self, tol: f64) -> bool {
        !self.degenerate && self.residual <= tol
    }
}

/// `c = tr(Y^dagger X) / tr(Y^dagger Y)`.
pub fn fit_scalar(x: &Operator, y: &Operator) -> Result<ScalarFit> {
    let yy = y.inner(y)?.re;
    if yy == 0.0 {
        let xn = operator_norm(x);
        return Ok(ScalarFit {
            coefficient: Complex64::new(0.0, 0.0),
            residual: xn / xn.max(1.0),
            degenerate: true,
        });
    }
    let c = y.inner(x)? / yy;
    let xn = operator_norm(x);
    let residual = operator_norm(&x.sub(&y.scale(c))?) / xn.max(1.0);
    if residual.is_nan() {
        return Err(QdError::numeric("norm evaluation failed in scalar fit"));
    }
    Ok(ScalarFit {
        coefficient: c,
        residual,
        degenerate: c.norm() <= DEGENERATE_COEFF,
    })
}

/// `X - (tr(P X) / tr(P)) P`: removes the component along a projector.
pub fn remove_shift(x: &Operator, p: &Operator) -> Result<Operator> {
    let tp = p.trace().re;
    if tp == 0.0 {
        return Err(QdError::invalid("shift removal along a zero projector"));
    }
    let c = p.mul(x)?.trace() / tp;
    x.sub(&p.scale(c))
}
