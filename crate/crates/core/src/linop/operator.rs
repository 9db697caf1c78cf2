use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::layout::SystemLayout;
use crate::error::{QdError, Result};

/// Stored entries smaller than this in magnitude are dropped.
pub const DROP_TOL: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sparse complex operator on a [`SystemLayout`], stored row-compressed with
/// sorted column indices.
#[derive(Debug, Clone)]
pub struct Operator {
    layout: Arc<SystemLayout>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout
            && self.row_ptr == other.row_ptr
            && self.cols == other.cols
            && self.vals == other.vals
    }
}

/// Accumulates one output row at a time; shared by products and sums.
struct RowBuilder {
    acc: Vec<Complex64>,
    mark: Vec<bool>,
    touched: Vec<usize>,
}

impl RowBuilder {
    fn new(dim: usize) -> Self {
        RowBuilder {
            acc: vec![ZERO; dim],
            mark: vec![false; dim],
            touched: Vec::new(),
        }
    }

    #[inline]
    fn add(&mut self, col: usize, v: Complex64) {
        if !self.mark[col] {
            self.mark[col] = true;
            self.touched.push(col);
        }
        self.acc[col] += v;
    }

    fn flush(&mut self, cols: &mut Vec<usize>, vals: &mut Vec<Complex64>) {
        self.touched.sort_unstable();
        for &c in &self.touched {
            let v = self.acc[c];
            if v.norm() >= DROP_TOL {
                cols.push(c);
                vals.push(v);
            }
            self.acc[c] = ZERO;
            self.mark[c] = false;
        }
        self.touched.clear();
    }
}

impl Operator {
    pub fn zero(layout: &Arc<SystemLayout>) -> Self {
        Operator {
            layout: layout.clone(),
            row_ptr: vec![0; layout.total_dim() + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(layout: &Arc<SystemLayout>) -> Self {
        Self::diagonal(layout, &vec![Complex64::new(1.0, 0.0); layout.total_dim()])
            .expect("identity diagonal has the layout dimension")
    }

    pub fn diagonal(layout: &Arc<SystemLayout>, diag: &[Complex64]) -> Result<Self> {
        let n = layout.total_dim();
        if diag.len() != n {
            return Err(QdError::invalid(format!(
                "diagonal of length {} on a layout of dimension {n}",
                diag.len()
            )));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, &v) in diag.iter().enumerate() {
            if v.norm() >= DROP_TOL {
                cols.push(i);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Operator {
            layout: layout.clone(),
            row_ptr,
            cols,
            vals,
        })
    }

    /// Builds an operator from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(
        layout: &Arc<SystemLayout>,
        mut triplets: Vec<(usize, usize, Complex64)>,
    ) -> Result<Self> {
        let n = layout.total_dim();
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= n || c >= n) {
            return Err(QdError::invalid(format!(
                "triplet ({r}, {c}) outside dimension {n}"
            )));
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut i = 0;
        while i < triplets.len() {
            let (r, c, mut v) = triplets[i];
            i += 1;
            while i < triplets.len() && triplets[i].0 == r && triplets[i].1 == c {
                v += triplets[i].2;
                i += 1;
            }
            if v.norm() >= DROP_TOL {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Operator {
            layout: layout.clone(),
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn from_dense(layout: &Arc<SystemLayout>, m: &DMatrix<Complex64>) -> Result<Self> {
        let n = layout.total_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(QdError::invalid(format!(
                "dense matrix {}x{} on a layout of dimension {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in 0..n {
            for c in 0..n {
                let v = m[(r, c)];
                if v.norm() >= DROP_TOL {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Operator {
            layout: layout.clone(),
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn layout(&self) -> &Arc<SystemLayout> {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[Complex64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            let (cs, vs) = self.row(r);
            cs.iter().zip(vs).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let (cs, vs) = self.row(r);
        match cs.binary_search(&c) {
            Ok(k) => vs[k],
            Err(_) => ZERO,
        }
    }

    fn check_same(&self, other: &Operator) -> Result<()> {
        if Arc::ptr_eq(&self.layout, &other.layout) || *self.layout == *other.layout {
            Ok(())
        } else {
            Err(QdError::invalid(format!(
                "layout mismatch: {} vs {}",
                self.layout, other.layout
            )))
        }
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        let n = self.dim();
        let mut builder = RowBuilder::new(n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in 0..n {
            let (acs, avs) = self.row(r);
            for (&k, &a) in acs.iter().zip(avs) {
                let (bcs, bvs) = other.row(k);
                for (&c, &b) in bcs.iter().zip(bvs) {
                    builder.add(c, a * b);
                }
            }
            builder.flush(&mut cols, &mut vals);
            row_ptr.push(cols.len());
        }
        Ok(Operator {
            layout: self.layout.clone(),
            row_ptr,
            cols,
            vals,
        })
    }

    /// `self + c * other`
    pub fn add_scaled(&self, other: &Operator, c: Complex64) -> Result<Operator> {
        self.check_same(other)?;
        let n = self.dim();
        let mut builder = RowBuilder::new(n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(self.nnz() + other.nnz());
        let mut vals = Vec::with_capacity(self.nnz() + other.nnz());
        row_ptr.push(0);
        for r in 0..n {
            let (acs, avs) = self.row(r);
            for (&k, &a) in acs.iter().zip(avs) {
                builder.add(k, a);
            }
            let (bcs, bvs) = other.row(r);
            for (&k, &b) in bcs.iter().zip(bvs) {
                builder.add(k, c * b);
            }
            builder.flush(&mut cols, &mut vals);
            row_ptr.push(cols.len());
        }
        Ok(Operator {
            layout: self.layout.clone(),
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.add_scaled(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Operator {
        let mut out = Operator::zero(&self.layout);
        out.row_ptr.clear();
        out.row_ptr.push(0);
        for r in 0..self.dim() {
            let (cs, vs) = self.row(r);
            for (&k, &v) in cs.iter().zip(vs) {
                let w = c * v;
                if w.norm() >= DROP_TOL {
                    out.cols.push(k);
                    out.vals.push(w);
                }
            }
            out.row_ptr.push(out.cols.len());
        }
        out
    }

    pub fn scale_re(&self, c: f64) -> Operator {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> Operator {
        let n = self.dim();
        let mut counts = vec![0usize; n + 1];
        for &c in &self.cols {
            counts[c + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut cols = vec![0; self.nnz()];
        let mut vals = vec![ZERO; self.nnz()];
        for r in 0..n {
            let (cs, vs) = self.row(r);
            for (&c, &v) in cs.iter().zip(vs) {
                let slot = next[c];
                cols[slot] = r;
                vals[slot] = v.conj();
                next[c] += 1;
            }
        }
        Operator {
            layout: self.layout.clone(),
            row_ptr,
            cols,
            vals,
        }
    }

    /// `ab - ba`
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim())
            .map(|r| {
                let (cs, vs) = self.row(r);
                cs.iter().zip(vs).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|r| self.get(r, r)).sum()
    }

    /// Hilbert-Schmidt inner product `tr(self^dagger other)`.
    pub fn inner(&self, other: &Operator) -> Result<Complex64> {
        self.check_same(other)?;
        let mut s = ZERO;
        for r in 0..self.dim() {
            let (acs, avs) = self.row(r);
            let (bcs, bvs) = other.row(r);
            let (mut i, mut j) = (0, 0);
            while i < acs.len() && j < bcs.len() {
                match acs[i].cmp(&bcs[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        s += avs[i].conj() * bvs[j];
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        Ok(s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).fold(0.0, |a, x| a + x).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        self.iter()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    /// Contracts one factor with a state: `<psi|_f self |psi>_f`, returning an
    /// operator on the layout without that factor.
    pub fn partial_expectation(&self, factor: &str, psi: &[Complex64]) -> Result<Operator> {
        let pos = self.layout.position(factor)?;
        let fdim = self.layout.factors()[pos].dim;
        if psi.len() != fdim {
            return Err(QdError::invalid(format!(
                "state of length {} for factor '{factor}' of dimension {fdim}",
                psi.len()
            )));
        }
        let reduced = Arc::new(self.layout.without(factor)?);
        let stride = self.layout.stride(pos);
        let split = |i: usize| {
            let low = i % stride;
            let digit = (i / stride) % fdim;
            let high = i / (stride * fdim);
            (low + high * stride, digit)
        };
        let mut trip = Vec::with_capacity(self.nnz());
        for (r, c, v) in self.iter() {
            let (rr, dr) = split(r);
            let (cc, dc) = split(c);
            let w = psi[dr].conj() * v * psi[dc];
            if w != ZERO {
                trip.push((rr, cc, w));
            }
        }
        Operator::from_triplets(&reduced, trip)
    }

    /// The same operator on a larger layout whose leading factors are this
    /// operator's factors; identity on the trailing ones.
    pub fn lift(&self, target: &Arc<SystemLayout>) -> Result<Operator> {
        let k = self.layout.factors().len();
        if target.factors().len() < k || target.factors()[..k] != *self.layout.factors() {
            return Err(QdError::invalid(format!(
                "layout {} is not a leading part of {target}",
                self.layout
            )));
        }
        let small = self.dim();
        let copies = target.total_dim() / small;
        let mut row_ptr = Vec::with_capacity(target.total_dim() + 1);
        let mut cols = Vec::with_capacity(self.nnz() * copies);
        let mut vals = Vec::with_capacity(self.nnz() * copies);
        row_ptr.push(0);
        for rep in 0..copies {
            let off = rep * small;
            for r in 0..small {
                let (cs, vs) = self.row(r);
                cols.extend(cs.iter().map(|c| c + off));
                vals.extend_from_slice(vs);
                row_ptr.push(cols.len());
            }
        }
        Ok(Operator {
            layout: target.clone(),
            row_ptr,
            cols,
            vals,
        })
    }

    /// Largest entrywise difference between two operators on the same layout.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Sparsity graph components of `self + self^dagger`, each as sorted indices.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.dim();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (r, c, _) in self.iter() {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi] = lo;
            }
        }
        let mut comp_of = vec![usize::MAX; n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            if comp_of[root] == usize::MAX {
                comp_of[root] = comps.len();
                comps.push(Vec::new());
            }
            comps[comp_of[root]].push(i);
        }
        comps
    }

    /// Dense principal submatrix on the given (sorted) indices.
    pub fn submatrix(&self, idx: &[usize]) -> DMatrix<Complex64> {
        let k = idx.len();
        let mut m = DMatrix::zeros(k, k);
        for (a, &r) in idx.iter().enumerate() {
            let (cs, vs) = self.row(r);
            for (&c, &v) in cs.iter().zip(vs) {
                if let Ok(b) = idx.binary_search(&c) {
                    m[(a, b)] = v;
                }
            }
        }
        m
    }
}

/// `op` on the listed factors (first listed factor fastest in `local`'s
/// basis), identity elsewhere.
pub fn embed(layout: &Arc<SystemLayout>, sites: &[&str], local: &DMatrix<Complex64>) -> Result<Operator> {
    let mut positions = Vec::with_capacity(sites.len());
    for s in sites {
        let p = layout.position(s)?;
        if positions.contains(&p) {
            return Err(QdError::invalid(format!("factor '{s}' listed twice")));
        }
        positions.push(p);
    }
    let dims: Vec<usize> = positions.iter().map(|&p| layout.factors()[p].dim).collect();
    let ldim: usize = dims.iter().product();
    if local.nrows() != ldim || local.ncols() != ldim {
        return Err(QdError::invalid(format!(
            "local matrix {}x{} does not match site dimension {ldim}",
            local.nrows(),
            local.ncols()
        )));
    }
    // global offset of each local basis index
    let offsets: Vec<usize> = (0..ldim)
        .map(|mut a| {
            let mut off = 0;
            for (k, &p) in positions.iter().enumerate() {
                off += (a % dims[k]) * layout.stride(p);
                a /= dims[k];
            }
            off
        })
        .collect();
    let mut local_rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); ldim];
    for a in 0..ldim {
        for b in 0..ldim {
            let v = local[(a, b)];
            if v.norm() >= DROP_TOL {
                local_rows[a].push((b, v));
            }
        }
    }
    let n = layout.total_dim();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    let mut scratch: Vec<(usize, Complex64)> = Vec::new();
    for r in 0..n {
        let mut a = 0;
        let mut mult = 1;
        for (k, &p) in positions.iter().enumerate() {
            a += layout.digit(r, p) * mult;
            mult *= dims[k];
        }
        let base = r - offsets[a];
        scratch.clear();
        scratch.extend(local_rows[a].iter().map(|&(b, v)| (base + offsets[b], v)));
        scratch.sort_unstable_by_key(|&(c, _)| c);
        for &(c, v) in &scratch {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(Operator {
        layout: layout.clone(),
        row_ptr,
        cols,
        vals,
    })
}

/// Sum of operators sharing one layout.
pub fn sum(layout: &Arc<SystemLayout>, ops: &[Operator]) -> Result<Operator> {
    let mut trip = Vec::with_capacity(ops.iter().map(Operator::nnz).sum());
    for op in ops {
        if !(Arc::ptr_eq(layout, &op.layout) || **layout == *op.layout) {
            return Err(QdError::invalid("layout mismatch in sum"));
        }
        trip.extend(op.iter());
    }
    Operator::from_triplets(layout, trip)
}

/// Ordered product `ops[0] * ops[1] * ...`; the identity for an empty list.
pub fn product(layout: &Arc<SystemLayout>, ops: &[&Operator]) -> Result<Operator> {
    match ops.split_first() {
        None => Ok(Operator::identity(layout)),
        Some((first, rest)) => rest.iter().try_fold((*first).clone(), |acc, op| acc.mul(op)),
    }
}
