use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::tolerance::Tolerances;
use crate::error::{QdError, Result};
use crate::lattice::LatticeKind;

pub const MAX_ORDER: usize = 8;
pub const DEFAULT_LAMBDA_GRID: [f64; 3] = [0.01, 0.02, 0.04];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    Prop1,
    Lemma1,
    Lemma2,
    HqdSpectrum,
    Thm1Bloch,
    Thm1Exact,
    Thm1pPair,
    Diagrams,
    Combinatorics,
    Convergence,
}

impl CheckId {
    pub const ALL: [CheckId; 10] = [
        CheckId::Prop1,
        CheckId::Lemma1,
        CheckId::Lemma2,
        CheckId::HqdSpectrum,
        CheckId::Thm1Bloch,
        CheckId::Thm1Exact,
        CheckId::Thm1pPair,
        CheckId::Diagrams,
        CheckId::Combinatorics,
        CheckId::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Prop1 => "prop1",
            CheckId::Lemma1 => "lemma1",
            CheckId::Lemma2 => "lemma2",
            CheckId::HqdSpectrum => "hqd-spectrum",
            CheckId::Thm1Bloch => "thm1-bloch",
            CheckId::Thm1Exact => "thm1-exact",
            CheckId::Thm1pPair => "thm1p-pair",
            CheckId::Diagrams => "diagrams",
            CheckId::Combinatorics => "combinatorics",
            CheckId::Convergence => "convergence",
        }
    }
}

impl FromStr for CheckId {
    type Err = QdError;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| QdError::invalid(format!("unknown check id '{s}'")))
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteKind {
    Vertex,
    Plaquette,
}

impl FromStr for SiteKind {
    type Err = QdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertex" => Ok(SiteKind::Vertex),
            "plaquette" => Ok(SiteKind::Plaquette),
            other => Err(QdError::invalid(format!("unknown site kind '{other}'"))),
        }
    }
}

impl fmt::Display for SiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SiteKind::Vertex => "vertex",
            SiteKind::Plaquette => "plaquette",
        })
    }
}

/// One suite run. Unset selectors (`group`, `lattice`, `size`, `site`) mean
/// each check's full default scope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub checks: Vec<String>,
    pub group: Option<String>,
    pub lattice: Option<LatticeKind>,
    pub size: Option<String>,
    pub site: Option<SiteKind>,
    pub lambda_grid: Vec<f64>,
    pub order: usize,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub sweep_csv: Option<PathBuf>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            checks: Vec::new(),
            group: None,
            lattice: None,
            size: None,
            site: None,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            order: 6,
            tolerances: Tolerances::default(),
            out: None,
            csv: None,
            sweep_csv: None,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    /// Every check with default scope.
    pub fn full_suite() -> Self {
        ExperimentConfig {
            checks: CheckId::ALL.iter().map(|c| c.name().to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn single(check: CheckId) -> Self {
        ExperimentConfig {
            checks: vec![check.name().to_string()],
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| QdError::Parse(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QdError::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    /// Parsed check ids, in config order.
    pub fn check_ids(&self) -> Result<Vec<CheckId>> {
        let ids = self.checks.iter().map(|c| c.parse()).collect::<Result<Vec<CheckId>>>()?;
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(QdError::invalid(format!("check '{id}' listed twice")));
            }
        }
        Ok(ids)
    }

    pub fn validate(&self) -> Result<()> {
        self.check_ids()?;
        validate_lambda_grid(&self.lambda_grid)?;
        if self.order == 0 || self.order > MAX_ORDER {
            return Err(QdError::invalid(format!("order {} outside 1..={MAX_ORDER}", self.order)));
        }
        if let Some(s) = &self.size {
            crate::lattice::parse_size(s)?;
        }
        Ok(())
    }
}

pub fn validate_lambda_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(QdError::invalid("empty lambda grid"));
    }
    if grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(QdError::invalid("lambda grid entries must be positive"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QdError::invalid("lambda grid must be strictly increasing"));
    }
    Ok(())
}

/// Parses `0.01,0.02,0.04`.
pub fn parse_lambda_grid(s: &str) -> Result<Vec<f64>> {
    let grid = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| QdError::invalid(format!("bad lambda value '{t}'")))
        })
        .collect::<Result<Vec<f64>>>()?;
    validate_lambda_grid(&grid)?;
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GadgetMode {
    Vertex,
    Plaquette,
    /// a vertex and an adjacent plaquette, coupled through idle sets
    Pair,
    VerticesOnly,
    PlaquettesOnly,
    Full,
}

impl FromStr for GadgetMode {
    type Err = QdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertex" => Ok(GadgetMode::Vertex),
            "plaquette" => Ok(GadgetMode::Plaquette),
            "pair" => Ok(GadgetMode::Pair),
            "vertices-only" => Ok(GadgetMode::VerticesOnly),
            "plaquettes-only" => Ok(GadgetMode::PlaquettesOnly),
            "full" => Ok(GadgetMode::Full),
            other => Err(QdError::invalid(format!("unknown gadget mode '{other}'"))),
        }
    }
}

/// Gadget description read by the `gadget` and `bloch` commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GadgetConfig {
    pub group: String,
    pub lattice: LatticeKind,
    pub size: Option<String>,
    pub mode: GadgetMode,
    pub site_index: usize,
    pub lambda_grid: Vec<f64>,
    pub order: usize,
}

impl Default for GadgetConfig {
    fn default() -> Self {
        GadgetConfig {
            group: "Z2".into(),
            lattice: LatticeKind::Square,
            size: None,
            mode: GadgetMode::Plaquette,
            site_index: 0,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            order: 6,
        }
    }
}

impl GadgetConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| QdError::Parse(format!("gadget config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QdError::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        validate_lambda_grid(&self.lambda_grid)?;
        if self.order == 0 || self.order > MAX_ORDER {
            return Err(QdError::invalid(format!("order {} outside 1..={MAX_ORDER}", self.order)));
        }
        Ok(())
    }
}

/// Torus used when no size is given: 3x3 square, 2x2 honeycomb.
pub fn default_size(kind: LatticeKind) -> (usize, usize) {
    match kind {
        LatticeKind::Square => (3, 3),
        LatticeKind::Honeycomb => (2, 2),
    }
}
