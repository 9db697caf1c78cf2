use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QdError, Result};

/// Default guard on the joint Hilbert-space dimension, overridable through `QDLAB_DIM_CAP`.
pub const DEFAULT_DIM_CAP: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorRole {
    Edge,
    Register,
    Clock,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub id: String,
    pub dim: usize,
    pub role: FactorRole,
}

impl Factor {
    pub fn new(id: impl Into<String>, dim: usize, role: FactorRole) -> Self {
        Factor {
            id: id.into(),
            dim,
            role,
        }
    }
}

/// Ordered tensor factors. Basis index `i` has digits `d_k` with
/// `i = sum_k d_k * stride_k`, factor 0 varying fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemLayout {
    factors: Vec<Factor>,
    strides: Vec<usize>,
    total_dim: usize,
}

impl SystemLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let mut strides = Vec::with_capacity(factors.len());
        let mut total: usize = 1;
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(QdError::invalid(format!("factor '{}' has dimension 0", f.id)));
            }
            if factors[..i].iter().any(|g| g.id == f.id) {
                return Err(QdError::invalid(format!("duplicate factor id '{}'", f.id)));
            }
            strides.push(total);
            total = total.checked_mul(f.dim).ok_or_else(|| {
                QdError::invalid("layout dimension overflows the address space")
            })?;
        }
        Ok(SystemLayout {
            factors,
            strides,
            total_dim: total,
        })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn position(&self, id: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.id == id)
            .ok_or_else(|| QdError::invalid(format!("unknown factor id '{id}'")))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.factors.iter().any(|f| f.id == id)
    }

    pub fn factor(&self, id: &str) -> Result<&Factor> {
        Ok(&self.factors[self.position(id)?])
    }

    pub fn stride(&self, pos: usize) -> usize {
        self.strides[pos]
    }

    #[inline]
    pub fn digit(&self, index: usize, pos: usize) -> usize {
        (index / self.strides[pos]) % self.factors[pos].dim
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        (0..self.factors.len()).map(|p| self.digit(index, p)).collect()
    }

    pub fn index_of_digits(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    /// Layout with one factor removed, keeping the order of the rest.
    pub fn without(&self, id: &str) -> Result<SystemLayout> {
        let pos = self.position(id)?;
        let mut factors = self.factors.clone();
        factors.remove(pos);
        SystemLayout::new(factors)
    }
}

impl fmt::Display for SystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| format!("{}:{}", x.id, x.dim)).collect();
        write!(f, "[{}] dim {}", parts.join(" "), self.total_dim)
    }
}

/// Active dimension cap: `QDLAB_DIM_CAP` if set and parseable, otherwise [`DEFAULT_DIM_CAP`].
pub fn dim_cap() -> u128 {
    std::env::var("QDLAB_DIM_CAP")
        .ok()
        .and_then(|s| s.trim().parse::<u128>().ok())
        .unwrap_or(DEFAULT_DIM_CAP)
}

pub fn check_dim_cap(dims: impl IntoIterator<Item = usize>, cap: u128) -> Result<u128> {
    let dim = dims
        .into_iter()
        .try_fold(1u128, |acc, d| acc.checked_mul(d as u128))
        .unwrap_or(u128::MAX);
    if dim > cap {
        return Err(QdError::ResourceLimit { dim, cap });
    }
    Ok(dim)
}
