use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::tuples::enumerate_pm;
use crate::error::{QdError, Result};
use crate::linop::{eigenspaces, Operator};

/// Eigenvalues of a shifted unperturbed Hamiltonian closer than this are merged.
pub const LEVEL_TOL: f64 = 1e-10;

/// Spectral decomposition of a shifted `H0` (ground energy 0).
#[derive(Debug, Clone)]
pub struct Levels {
    /// `(E, P_E)`, ascending, first entry `E = 0`
    levels: Vec<(f64, Operator)>,
}

impl Levels {
    /// Fails unless the lowest eigenvalue is 0 and `p0` is its eigenprojector.
    pub fn new(h0: &Operator, p0: &Operator) -> Result<Self> {
        let levels = eigenspaces(h0, LEVEL_TOL)?;
        let (e0, ground) = levels.first().ok_or_else(|| QdError::invalid("empty Hamiltonian"))?;
        if e0.abs() > LEVEL_TOL {
            return Err(QdError::invalid(format!(
                "unperturbed Hamiltonian is not shifted: ground energy {e0:.3e}"
            )));
        }
        let diff = ground.max_abs_diff(p0)?;
        if diff > LEVEL_TOL {
            return Err(QdError::invalid(format!(
                "given ground projector differs from the zero eigenspace by {diff:.3e}"
            )));
        }
        Ok(Levels { levels })
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.0).collect()
    }

    /// Smallest nonzero energy, if any.
    pub fn first_excitation(&self) -> Option<f64> {
        self.levels.get(1).map(|l| l.0)
    }

    /// Projector onto energy `e`, zero if `e` is not a level.
    pub fn projector(&self, e: f64) -> Operator {
        let layout = self.levels[0].1.layout();
        self.levels
            .iter()
            .find(|l| (l.0 - e).abs() <= LEVEL_TOL)
            .map(|l| l.1.clone())
            .unwrap_or_else(|| Operator::zero(layout))
    }

    /// `S^0 = -P0`, `S^l = sum_{E != 0} (-E)^(-l) P_E`.
    pub fn resolvent(&self, l: usize) -> Operator {
        let layout = self.levels[0].1.layout();
        if l == 0 {
            return self.levels[0].1.scale_re(-1.0);
        }
        let mut acc = Operator::zero(layout);
        for (e, p) in &self.levels[1..] {
            let w = (-e).powi(-(l as i32));
            acc = acc.add(&p.scale_re(w)).expect("same layout");
        }
        acc
    }
}

/// Reduced resolvent of a shifted `H0`.
pub fn reduced_resolvent(h0: &Operator, l: usize, p0: &Operator) -> Result<Operator> {
    Ok(Levels::new(h0, p0)?.resolvent(l))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TermKind {
    A,
    U,
}

#[derive(Debug, Clone)]
pub struct BlochTerm {
    pub order: usize,
    pub kind: TermKind,
    pub operator: Operator,
    /// Number of index tuples summed over.
    pub tuples: usize,
}

/// Term-by-term Bloch expansion for `H0 + lambda V` with shifted `H0`.
#[derive(Debug, Clone)]
pub struct BlochSeries {
    v: Operator,
    p0: Operator,
    levels: Levels,
    resolvents: Vec<Operator>,
    u_cache: BTreeMap<usize, Operator>,
}

impl BlochSeries {
    pub fn new(h0: &Operator, v: &Operator, p0: &Operator) -> Result<Self> {
        if v.layout() != h0.layout() || p0.layout() != h0.layout() {
            return Err(QdError::invalid("H0, V and P0 live on different layouts"));
        }
        let levels = Levels::new(h0, p0)?;
        Ok(BlochSeries {
            v: v.clone(),
            p0: p0.clone(),
            levels,
            resolvents: Vec::new(),
            u_cache: BTreeMap::new(),
        })
    }

    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    pub fn v(&self) -> &Operator {
        &self.v
    }

    pub fn p0(&self) -> &Operator {
        &self.p0
    }

    pub fn resolvent(&mut self, l: usize) -> &Operator {
        while self.resolvents.len() <= l {
            let next = self.levels.resolvent(self.resolvents.len());
            self.resolvents.push(next);
        }
        &self.resolvents[l]
    }

    /// `A^(m)` summed tuple by tuple, left to right:
    /// `sum_{P_{m-1}} P0 V S^l1 V ... S^l(m-1) V P0`.
    pub fn a_term(&mut self, m: usize) -> Result<BlochTerm> {
        let layout = self.p0.layout().clone();
        if m == 0 {
            return Ok(BlochTerm {
                order: 0,
                kind: TermKind::A,
                operator: Operator::zero(&layout),
                tuples: 0,
            });
        }
        let tuples = enumerate_pm(m - 1);
        let head = self.p0.mul(&self.v)?;
        let mut acc = Operator::zero(&layout);
        for t in &tuples {
            let mut prod = head.clone();
            for &l in t.entries() {
                let s = self.resolvent(l).clone();
                prod = prod.mul(&s)?.mul(&self.v)?;
            }
            acc = acc.add(&prod.mul(&self.p0)?)?;
        }
        Ok(BlochTerm {
            order: m,
            kind: TermKind::A,
            operator: acc,
            tuples: tuples.len(),
        })
    }

    /// `U^(m) = sum_{P_m} S^l1 V ... S^lm V P0`, `U^(0) = P0`, accumulated
    /// right to left over (steps taken, suffix sum).
    pub fn u_term(&mut self, m: usize) -> Result<BlochTerm> {
        if let Some(op) = self.u_cache.get(&m) {
            return Ok(BlochTerm {
                order: m,
                kind: TermKind::U,
                operator: op.clone(),
                tuples: super::tuples::count_pm(m) as usize,
            });
        }
        let op = if m == 0 {
            self.p0.clone()
        } else {
            let layout = self.p0.layout().clone();
            let vp = self.v.mul(&self.p0)?;
            // states[t] after q steps: suffix sum t <= q (strictly below m until the end)
            let mut states: Vec<Option<Operator>> = vec![None; m + 1];
            states[0] = Some(vp);
            for q in 0..m {
                let mut next: Vec<Option<Operator>> = vec![None; m + 1];
                for t in 0..=m {
                    let Some(z) = states[t].take() else { continue };
                    for l in 0..=(m - t) {
                        let tt = t + l;
                        let ok = if q + 1 < m { tt <= q + 1 } else { tt == m };
                        if !ok {
                            continue;
                        }
                        let s = self.resolvent(l).clone();
                        let mut term = s.mul(&z)?;
                        if q + 1 < m {
                            term = self.v.mul(&term)?;
                        }
                        next[tt] = Some(match next[tt].take() {
                            Some(acc) => acc.add(&term)?,
                            None => term,
                        });
                    }
                }
                states = next;
            }
            states[m].take().unwrap_or_else(|| Operator::zero(&layout))
        };
        self.u_cache.insert(m, op.clone());
        Ok(BlochTerm {
            order: m,
            kind: TermKind::U,
            operator: op,
            tuples: super::tuples::count_pm(m) as usize,
        })
    }

    /// `A^(m)` as `P0 V U^(m-1)`.
    pub fn a_term_from_u(&mut self, m: usize) -> Result<Operator> {
        if m == 0 {
            return Ok(Operator::zero(self.p0.layout()));
        }
        let u = self.u_term(m - 1)?.operator;
        self.p0.mul(&self.v)?.mul(&u)
    }

    /// `sum_{a+b+c <= M} lambda^(a+b+c) U^(a) A^(b) U^(c)^dagger`.
    pub fn effective_hamiltonian(&mut self, lambda: f64, max_order: usize) -> Result<Operator> {
        let layout = self.p0.layout().clone();
        let us: Vec<Operator> = (0..=max_order).map(|m| self.u_term(m).map(|t| t.operator)).collect::<Result<_>>()?;
        let as_: Vec<Operator> = (0..=max_order).map(|m| self.a_term_from_u(m)).collect::<Result<_>>()?;
        let mut acc = Operator::zero(&layout);
        for b in 1..=max_order {
            for a in 0..=(max_order - b) {
                let left = us[a].mul(&as_[b])?;
                for c in 0..=(max_order - a - b) {
                    let w = lambda.powi((a + b + c) as i32);
                    acc = acc.add_scaled(&left.mul(&us[c].adjoint())?, Complex64::new(w, 0.0))?;
                }
            }
        }
        Ok(acc)
    }

    /// `sum_{a+c <= M} lambda^(a+c) U^(a) P0 U^(c)^dagger`.
    pub fn projector_series(&mut self, lambda: f64, max_order: usize) -> Result<Operator> {
        let layout = self.p0.layout().clone();
        let us: Vec<Operator> = (0..=max_order).map(|m| self.u_term(m).map(|t| t.operator)).collect::<Result<_>>()?;
        let mut acc = Operator::zero(&layout);
        for a in 0..=max_order {
            for c in 0..=(max_order - a) {
                let w = lambda.powi((a + c) as i32);
                acc = acc.add_scaled(&us[a].mul(&self.p0)?.mul(&us[c].adjoint())?, Complex64::new(w, 0.0))?;
            }
        }
        Ok(acc)
    }
}

pub fn bloch_a_term(h0: &Operator, v: &Operator, p0: &Operator, m: usize) -> Result<BlochTerm> {
    BlochSeries::new(h0, v, p0)?.a_term(m)
}

pub fn bloch_u_term(h0: &Operator, v: &Operator, p0: &Operator, m: usize) -> Result<BlochTerm> {
    BlochSeries::new(h0, v, p0)?.u_term(m)
}

pub fn effective_hamiltonian_series(
    h0: &Operator,
    v: &Operator,
    p0: &Operator,
    lambda: f64,
    max_order: usize,
) -> Result<Operator> {
    if max_order == 0 {
        return Err(QdError::invalid("series order must be at least 1"));
    }
    BlochSeries::new(h0, v, p0)?.effective_hamiltonian(lambda, max_order)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
