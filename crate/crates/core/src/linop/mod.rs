//! Sparse complex operators on registered tensor-product spaces.

pub mod dense;
mod eigen;
mod fit;
pub mod io;
mod layout;
mod operator;

pub use eigen::{
    effective_hamiltonian_exact, effective_hamiltonian_with_projector, eigenspaces, lowest_eigenpairs,
    operator_norm, spectral_projector, EigenPairs, SparseState, DENSE_LIMIT, GAP_TOL,
    HERMITIAN_TOL, RESIDUAL_TOL,
};
pub use fit::{fit_scalar, remove_shift, ScalarFit, DEGENERATE_COEFF};
pub use layout::{check_dim_cap, dim_cap, Factor, FactorRole, SystemLayout, DEFAULT_DIM_CAP};
pub use operator::{embed, product, sum, Operator, DROP_TOL};

#[cfg(test)]
mod tests;
