use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// `|i><j|` in dimension `dim`.
pub fn ket_bra(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = re(1.0);
    m
}

pub fn projector(dim: usize, i: usize) -> CMatrix {
    ket_bra(dim, i, i)
}

/// `|psi><psi|`
pub fn outer(psi: &[Complex64]) -> CMatrix {
    let n = psi.len();
    CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj())
}

/// Tensor product with the first factor varying fastest, matching the
/// layout convention used by [`super::embed`].
pub fn tensor(factors: &[&CMatrix]) -> CMatrix {
    let mut iter = factors.iter();
    let first = match iter.next() {
        Some(f) => (*f).clone(),
        None => return identity(1),
    };
    iter.fold(first, |acc, m| m.kronecker(&acc))
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns. Real symmetric input takes a
/// real-arithmetic path.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let (values, vectors): (Vec<f64>, CMatrix) = if m.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::<f64>::from_fn(n, n, |i, j| 0.5 * (m[(i, j)].re + m[(j, i)].re));
        let eig = SymmetricEigen::new(real);
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(re),
        )
    } else {
        let herm = CMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
        let eig = SymmetricEigen::new(herm);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let sorted_vals = order.iter().map(|&k| values[k]).collect();
    let sorted_vecs = CMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    (sorted_vals, sorted_vecs)
}
