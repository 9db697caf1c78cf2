use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{hermitian_eigen, CMatrix};
use super::operator::Operator;
use crate::error::{QdError, Result};

/// Components up to this size are diagonalized densely.
pub const DENSE_LIMIT: usize = 4096;
/// Relative Hermiticity tolerance for eigen-solver input.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Required residual `|H psi - E psi|` of every returned eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Minimum gap between the kept and the first discarded level.
pub const GAP_TOL: f64 = 1e-8;

const KRYLOV_SEED: u64 = 0x51ab_2718;
const KRYLOV_MAX_RESTARTS: usize = 300;
/// Rough memory budget (bytes) for one Krylov basis.
const KRYLOV_BUDGET: usize = 1 << 28;

/// Vector supported on a subset of basis indices.
#[derive(Debug, Clone)]
pub struct SparseState {
    pub indices: Arc<Vec<usize>>,
    pub amplitudes: Vec<Complex64>,
}

impl SparseState {
    pub fn to_dense(&self, dim: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for (&i, &a) in self.indices.iter().zip(&self.amplitudes) {
            v[i] = a;
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub energies: Vec<f64>,
    pub states: Vec<SparseState>,
    /// Lowest discarded eigenvalue, if any level was left out.
    pub next_energy: Option<f64>,
    pub max_residual: f64,
}

impl EigenPairs {
    /// States as orthonormal columns of a dense `dim x d` matrix.
    pub fn states_dense(&self, dim: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, self.states.len());
        for (j, s) in self.states.iter().enumerate() {
            for (&i, &a) in s.indices.iter().zip(&s.amplitudes) {
                m[(i, j)] = a;
            }
        }
        m
    }

    pub fn gap(&self) -> Option<f64> {
        match (self.energies.last(), self.next_energy) {
            (Some(&last), Some(next)) => Some(next - last),
            _ => None,
        }
    }
}

fn check_hermitian(h: &Operator) -> Result<()> {
    let defect = h.hermiticity_defect();
    let scale = h.max_abs().max(1.0);
    if defect > HERMITIAN_TOL * scale {
        return Err(QdError::invalid(format!(
            "operator is not Hermitian: entrywise defect {defect:.3e}"
        )));
    }
    Ok(())
}

/// Restriction of an operator to a component closed under its sparsity graph.
struct Block {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl Block {
    fn new(h: &Operator, idx: &[usize]) -> Self {
        let mut row_ptr = Vec::with_capacity(idx.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for &r in idx {
            let (cs, vs) = h.row(r);
            for (&c, &v) in cs.iter().zip(vs) {
                if let Ok(k) = idx.binary_search(&c) {
                    cols.push(k);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Block { row_ptr, cols, vals }
    }

    fn apply(&self, x: &[Complex64], sign: f64) -> Vec<Complex64> {
        (0..self.row_ptr.len() - 1)
            .map(|r| {
                let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
                let s: Complex64 = (a..b).map(|k| self.vals[k] * x[self.cols[k]]).sum();
                s * sign
            })
            .collect()
    }

    fn abs_row_bound(&self) -> f64 {
        (0..self.row_ptr.len() - 1)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.vals[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormalizes `v` against `basis` (two passes) and returns it, or `None`
/// if it is numerically contained in the span.
fn orthonormalize(basis: &[Vec<Complex64>], mut v: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let start = norm(&v);
    if start == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &v);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
    let n = norm(&v);
    if n <= 1e-10 * start {
        return None;
    }
    for x in v.iter_mut() {
        *x /= n;
    }
    Some(v)
}

/// Lowest `k` eigenpairs of a Hermitian block by restarted block Krylov
/// iteration with full reorthogonalization and Rayleigh-Ritz extraction.
fn krylov_lowest(block: &Block, k: usize, sign: f64) -> Result<(Vec<f64>, Vec<Vec<Complex64>>, f64)> {
    let s = block.row_ptr.len() - 1;
    let bsize = (k + 4).min(s);
    let budget_cols = (KRYLOV_BUDGET / (16 * s)).max(3 * bsize);
    let max_basis = s.min((30 * bsize).min(budget_cols).max(3 * bsize));
    let scale = block.abs_row_bound().max(1.0);
    let tol = 1e-11 * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(KRYLOV_SEED);
    let mut start: Vec<Vec<Complex64>> = (0..bsize)
        .map(|_| (0..s).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect())
        .collect();
    let mut worst = f64::INFINITY;
    for _ in 0..KRYLOV_MAX_RESTARTS {
        let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(max_basis);
        let mut aq: Vec<Vec<Complex64>> = Vec::with_capacity(max_basis);
        let mut block_vecs = start;
        while q.len() < max_basis && !block_vecs.is_empty() {
            let mut next = Vec::new();
            for v in block_vecs {
                if q.len() >= max_basis {
                    break;
                }
                if let Some(u) = orthonormalize(&q, v) {
                    let au = block.apply(&u, sign);
                    next.push(au.clone());
                    q.push(u);
                    aq.push(au);
                }
            }
            block_vecs = next;
        }
        if q.is_empty() {
            // random start fully degenerate; reseed
            start = (0..bsize)
                .map(|_| (0..s).map(|_| Complex64::new(rng.random::<f64>() - 0.5, 0.0)).collect())
                .collect();
            continue;
        }
        let m = q.len();
        let t = CMatrix::from_fn(m, m, |i, j| dot(&q[i], &aq[j]));
        let (theta, svec) = hermitian_eigen(&t);
        let keep = bsize.min(m);
        let mut ritz = Vec::with_capacity(keep);
        let mut residuals = Vec::with_capacity(keep);
        for j in 0..keep {
            let mut y = vec![Complex64::new(0.0, 0.0); s];
            let mut ay = vec![Complex64::new(0.0, 0.0); s];
            for i in 0..m {
                let c = svec[(i, j)];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (yy, qq) in y.iter_mut().zip(&q[i]) {
                    *yy += c * qq;
                }
                for (yy, qq) in ay.iter_mut().zip(&aq[i]) {
                    *yy += c * qq;
                }
            }
            let r: f64 = ay
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b * theta[j]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            residuals.push(r);
            ritz.push(y);
        }
        worst = residuals[..k.min(keep)].iter().copied().fold(0.0, f64::max);
        if worst <= tol || m == s {
            let vals = theta[..k.min(keep)].iter().map(|x| x * sign).collect();
            ritz.truncate(k.min(keep));
            return Ok((vals, ritz, worst));
        }
        start = ritz;
    }
    Err(QdError::numeric(format!(
        "block Krylov did not converge for a component of size {s}: worst residual {worst:.3e}"
    )))
}

/// Gershgorin lower bound of the spectrum restricted to `idx`.
fn gershgorin_floor(h: &Operator, idx: &[usize]) -> f64 {
    idx.iter()
        .map(|&r| {
            let (cs, vs) = h.row(r);
            let mut diag = 0.0;
            let mut off = 0.0;
            for (&c, v) in cs.iter().zip(vs) {
                if c == r {
                    diag += v.re;
                } else {
                    off += v.norm();
                }
            }
            diag - off
        })
        .fold(f64::INFINITY, f64::min)
}

/// Lowest `count` eigenpairs of each sparsity component, tagged with the
/// component. Components are visited by increasing Gershgorin bound and
/// skipped once the bound reaches the `count`-th lowest value found, since
/// they cannot contribute anything lower.
fn component_spectra(h: &Operator, count: usize) -> Result<Vec<(f64, usize, usize, SparseState)>> {
    let comps = h.connected_components();
    let mut order: Vec<(f64, usize)> = comps
        .iter()
        .enumerate()
        .map(|(ci, c)| (gershgorin_floor(h, c), ci))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut comps: Vec<Option<Vec<usize>>> = comps.into_iter().map(Some).collect();
    let mut out = Vec::new();
    let mut found: Vec<f64> = Vec::new();
    for (floor, ci) in order {
        if found.len() >= count {
            found.sort_by(f64::total_cmp);
            found.truncate(count);
            if floor >= found[count - 1] {
                break;
            }
        }
        let comp = comps[ci].take().expect("component visited once");
        let size = comp.len();
        let k = count.min(size);
        let idx = Arc::new(comp);
        if size <= DENSE_LIMIT {
            let sub = h.submatrix(&idx);
            let (vals, vecs) = hermitian_eigen(&sub);
            found.extend_from_slice(&vals.as_slice()[..k]);
            for j in 0..k {
                let amps = vecs.column(j).iter().copied().collect();
                out.push((
                    vals[j],
                    ci,
                    j,
                    SparseState {
                        indices: idx.clone(),
                        amplitudes: amps,
                    },
                ));
            }
        } else {
            let block = Block::new(h, &idx);
            let (vals, vecs, _) = krylov_lowest(&block, k, 1.0)?;
            found.extend_from_slice(&vals);
            for (j, (e, v)) in vals.into_iter().zip(vecs).enumerate() {
                out.push((
                    e,
                    ci,
                    j,
                    SparseState {
                        indices: idx.clone(),
                        amplitudes: v,
                    },
                ));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    Ok(out)
}

/// `d` lowest eigenpairs of a Hermitian operator, ascending.
///
/// The operator is split into connected components of its sparsity graph;
/// components up to [`DENSE_LIMIT`] are solved densely, larger ones by block
/// Krylov iteration.
pub fn lowest_eigenpairs(h: &Operator, d: usize) -> Result<EigenPairs> {
    let dim = h.dim();
    if d > dim {
        return Err(QdError::invalid(format!("requested {d} eigenpairs of a {dim}-dimensional operator")));
    }
    check_hermitian(h)?;
    let want = (d + 1).min(dim);
    let mut all = component_spectra(h, want)?;
    let next_energy = all.get(d).map(|x| x.0);
    all.truncate(d);
    let mut max_residual: f64 = 0.0;
    let mut energies = Vec::with_capacity(d);
    let mut states = Vec::with_capacity(d);
    for (e, _, _, st) in all {
        let v = st.to_dense(dim);
        let hv = h.apply(&v);
        let r = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * e).norm_sqr())
            .sum::<f64>()
            .sqrt();
        max_residual = max_residual.max(r);
        energies.push(e);
        states.push(st);
    }
    if max_residual > RESIDUAL_TOL {
        return Err(QdError::numeric(format!(
            "eigenpair residual {max_residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )));
    }
    Ok(EigenPairs {
        energies,
        states,
        next_energy,
        max_residual,
    })
}

fn checked_pairs(h: &Operator, d: usize) -> Result<EigenPairs> {
    let pairs = lowest_eigenpairs(h, d)?;
    if let Some(gap) = pairs.gap() {
        if gap <= GAP_TOL {
            return Err(QdError::DegenerateCut {
                index: d,
                next: d + 1,
                gap,
                threshold: GAP_TOL,
            });
        }
    }
    Ok(pairs)
}

fn weighted_projector(h: &Operator, pairs: &EigenPairs, weights: &[f64]) -> Result<Operator> {
    let mut trip = Vec::new();
    for (st, &w) in pairs.states.iter().zip(weights) {
        for (&i, &a) in st.indices.iter().zip(&st.amplitudes) {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (&j, &b) in st.indices.iter().zip(&st.amplitudes) {
                trip.push((i, j, a * b.conj() * w));
            }
        }
    }
    Operator::from_triplets(h.layout(), trip)
}

/// Projector onto the span of the `d` lowest eigenstates.
pub fn spectral_projector(h: &Operator, d: usize) -> Result<Operator> {
    let pairs = checked_pairs(h, d)?;
    weighted_projector(h, &pairs, &vec![1.0; d])
}

/// `sum_i E_i |phi_i><phi_i|` over the `d` lowest eigenstates.
pub fn effective_hamiltonian_exact(h: &Operator, d: usize) -> Result<Operator> {
    let pairs = checked_pairs(h, d)?;
    weighted_projector(h, &pairs, &pairs.energies)
}

/// Both the effective Hamiltonian and its support projector from one solve.
pub fn effective_hamiltonian_with_projector(h: &Operator, d: usize) -> Result<(Operator, Operator)> {
    let pairs = checked_pairs(h, d)?;
    Ok((
        weighted_projector(h, &pairs, &pairs.energies)?,
        weighted_projector(h, &pairs, &vec![1.0; d])?,
    ))
}

/// Distinct eigenvalues of a Hermitian operator, merged when closer than
/// `tol`, each with its spectral projector. Every sparsity component must be
/// small enough for a dense solve.
pub fn eigenspaces(h: &Operator, tol: f64) -> Result<Vec<(f64, Operator)>> {
    check_hermitian(h)?;
    let mut items: Vec<(f64, usize, usize)> = Vec::new();
    let mut comps = Vec::new();
    for (ci, comp) in h.connected_components().into_iter().enumerate() {
        if comp.len() > DENSE_LIMIT {
            return Err(QdError::ResourceLimit {
                dim: comp.len() as u128,
                cap: DENSE_LIMIT as u128,
            });
        }
        let (vals, vecs) = hermitian_eigen(&h.submatrix(&comp));
        items.extend(vals.iter().enumerate().map(|(j, &e)| (e, ci, j)));
        comps.push((comp, vecs));
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut clusters: Vec<Vec<(f64, usize, usize)>> = Vec::new();
    for it in items {
        match clusters.last_mut() {
            Some(c) if it.0 - c[0].0 <= tol => c.push(it),
            _ => clusters.push(vec![it]),
        }
    }
    let mut out = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        let energy = cluster.iter().map(|x| x.0).sum::<f64>() / cluster.len() as f64;
        let mut by_comp: Vec<(usize, Vec<usize>)> = Vec::new();
        for &(_, ci, j) in &cluster {
            match by_comp.iter_mut().find(|(c, _)| *c == ci) {
                Some((_, js)) => js.push(j),
                None => by_comp.push((ci, vec![j])),
            }
        }
        let mut trip = Vec::new();
        for (ci, js) in by_comp {
            let (idx, vecs) = &comps[ci];
            let cols: Vec<usize> = js;
            let sub = vecs.select_columns(&cols);
            let block = &sub * sub.adjoint();
            for (a, &r) in idx.iter().enumerate() {
                for (b, &c) in idx.iter().enumerate() {
                    let v = block[(a, b)];
                    if v.norm() >= super::operator::DROP_TOL {
                        trip.push((r, c, v));
                    }
                }
            }
        }
        out.push((energy, Operator::from_triplets(h.layout(), trip)?));
    }
    Ok(out)
}

/// Spectral norm (largest singular value). Returns NaN if the iterative
/// solver fails on a large component, so that any threshold test fails.
pub fn operator_norm(a: &Operator) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let hermitian = a.hermiticity_defect() <= 1e-14 * a.max_abs();
    let (target, take_sqrt) = if hermitian {
        (a.clone(), false)
    } else {
        match a.adjoint().mul(a) {
            Ok(b) => (b, true),
            Err(_) => unreachable!("adjoint shares the layout"),
        }
    };
    let mut best: f64 = 0.0;
    for comp in target.connected_components() {
        let extreme = if comp.len() <= 512 {
            let (vals, _) = hermitian_eigen(&target.submatrix(&comp));
            vals.first().map(|x| x.abs()).unwrap_or(0.0).max(vals.last().map(|x| x.abs()).unwrap_or(0.0))
        } else {
            let block = Block::new(&target, &comp);
            let hi = krylov_lowest(&block, 1, -1.0).map(|r| r.0[0].abs()).unwrap_or(f64::NAN);
            let lo = if take_sqrt {
                0.0
            } else {
                krylov_lowest(&block, 1, 1.0).map(|r| r.0[0].abs()).unwrap_or(f64::NAN)
            };
            if hi.is_nan() || lo.is_nan() {
                return f64::NAN;
            }
            hi.max(lo)
        };
        best = best.max(extreme);
    }
    if take_sqrt {
        best.max(0.0).sqrt()
    } else {
        best
    }
}
