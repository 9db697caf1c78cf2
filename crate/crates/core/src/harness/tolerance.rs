use serde::{Deserialize, Serialize};

/// Default thresholds used by every check; config files may override single keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// operator identities
    pub identity: f64,
    /// finite-dimensional algebra identities (double representation)
    pub exact: f64,
    /// `X ~ P0` scalar fits
    pub proportionality: f64,
    /// relative error of the extracted order-n coefficient (single clock)
    pub coefficient: f64,
    /// multi-clock pair instance: residuals and coefficient
    pub pair: f64,
    /// lower bound on same-edge vertex/plaquette commutators
    pub noncommuting_min: f64,
    /// required excess of the log-log slope over `n`
    pub slope_margin: f64,
    /// energies closer than this count as degenerate
    pub degeneracy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-10,
            exact: 1e-12,
            proportionality: 1e-9,
            coefficient: 1e-9,
            pair: 1e-8,
            noncommuting_min: 1e-6,
            slope_margin: 0.5,
            degeneracy: 1e-8,
        }
    }
}
