//! Bloch's degenerate perturbation series computed term by term, and its
//! diagram expansion for clock gadgets.

mod convergence;
mod diagrams;
mod series;
mod theorem;
mod tuples;

pub use convergence::{convergence_report, ConvergenceReport, ConvergenceRow, LambdaVerdict};
pub use diagrams::{
    enumerate_valid_diagrams, g_coefficient, g_single, resolvent_weight, theta_operator, Arrow, Diagram,
    DiagramRules, Direction, ThetaBuilder, MAX_DIAGRAM_CLOCKS, MAX_DIAGRAM_ORDER,
};
pub use series::{
    bloch_a_term, bloch_u_term, effective_hamiltonian_series, loglog_slope, reduced_resolvent, BlochSeries,
    BlochTerm, Levels, TermKind, LEVEL_TOL,
};
pub use theorem::{
    diagram_check, theorem1_algebraic, theorem1_spectral, AlgebraicReport, DiagramOrder, OrderFit,
    SpectralReport, SweepPoint,
};
pub use tuples::{count_pm, enumerate_pm, is_member, IndexTuple};
