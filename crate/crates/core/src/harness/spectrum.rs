use std::collections::BTreeSet;

use serde::Serialize;

use super::instance::{load_group, load_lattice};
use crate::error::Result;
use crate::groups::FiniteGroup;
use crate::lattice::LatticeKind;
use crate::linop::{lowest_eigenpairs, EigenPairs, Operator};
use crate::qdmodel::QdModel;

#[derive(Debug, Clone, Serialize)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: usize,
    /// false for the last level if the requested count cut through it
    pub complete: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub group: String,
    pub lattice: LatticeKind,
    pub size: (usize, usize),
    pub dim: usize,
    pub levels: Vec<Level>,
}

impl SpectrumReport {
    pub fn ground(&self) -> &Level {
        &self.levels[0]
    }
}

/// Groups sorted energies into levels no wider than `tol`.
pub fn group_levels(pairs: &EigenPairs, tol: f64) -> Vec<Level> {
    let mut levels: Vec<Level> = Vec::new();
    for &e in &pairs.energies {
        match levels.last_mut() {
            Some(l) if (e - l.energy).abs() <= tol => l.degeneracy += 1,
            _ => levels.push(Level {
                energy: e,
                degeneracy: 1,
                complete: true,
            }),
        }
    }
    if let (Some(last), Some(next)) = (levels.last_mut(), pairs.next_energy) {
        if (next - last.energy).abs() <= tol {
            last.complete = false;
        }
    }
    levels
}

pub fn hqd_model(group: &str, kind: LatticeKind, size: Option<&str>) -> Result<QdModel> {
    QdModel::new(load_group(group)?, load_lattice(kind, size.or(Some("2x2")))?)
}

/// Lowest `count` eigenvalues of the quantum double Hamiltonian, grouped.
pub fn hqd_spectrum(group: &str, kind: LatticeKind, size: Option<&str>, count: usize, tol: f64) -> Result<SpectrumReport> {
    let model = hqd_model(group, kind, size)?;
    let h = model.build_hqd()?;
    let pairs = lowest_eigenpairs(&h, count.min(h.dim()))?;
    Ok(SpectrumReport {
        group: model.group().name().to_string(),
        lattice: kind,
        size: model.lattice().dims(),
        dim: h.dim(),
        levels: group_levels(&pairs, tol),
    })
}

/// Commuting pairs `(a, b)` up to simultaneous conjugation: the ground
/// degeneracy of the quantum double model on a torus.
pub fn torus_ground_degeneracy(group: &FiniteGroup) -> usize {
    let mut seen = BTreeSet::new();
    let mut orbits = 0;
    for a in group.elements() {
        for b in group.elements() {
            if group.mul(a, b) != group.mul(b, a) || seen.contains(&(a, b)) {
                continue;
            }
            orbits += 1;
            for g in group.elements() {
                seen.insert((group.conj(g, a), group.conj(g, b)));
            }
        }
    }
    orbits
}

/// Largest Frobenius norm of a commutator among all pairs of the list.
pub fn max_pairwise_commutator(ops: &[Operator]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, a) in ops.iter().enumerate() {
        for b in &ops[i + 1..] {
            worst = worst.max(a.commutator(b)?.frobenius_norm());
        }
    }
    Ok(worst)
}
