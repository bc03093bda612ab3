//! Dense complex linear algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// |v><v|
pub fn projector(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn basis_vec(n: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[k] = ONE;
    v
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    let mut m = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        m = m.max((x - y).norm());
    }
    m
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    max_abs_diff(m, &m.adjoint()) <= tol
}

pub fn is_unitary(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_abs_diff(&(m.adjoint() * m), &identity(m.nrows())) <= tol
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
/// Returns (eigenvalues, eigenvectors as columns, in matching order).
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].partial_cmp(&se.eigenvalues[i]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// f applied to a Hermitian matrix through its spectral decomposition.
pub fn hermitian_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let d = CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&x| cr(f(x)))));
    &vecs * d * vecs.adjoint()
}

/// Extends k orthonormal columns to a full n x n unitary (Gram-Schmidt
/// against the standard basis).
pub fn complete_basis(cols: &[CVec], n: usize) -> CMat {
    let mut basis: Vec<CVec> = cols.to_vec();
    for v in &basis {
        assert_eq!(v.len(), n);
    }
    let mut cand = 0usize;
    while basis.len() < n {
        assert!(cand < n, "failed to complete orthonormal basis");
        let mut v = basis_vec(n, cand);
        cand += 1;
        for b in &basis {
            let c = b.dotc(&v);
            v -= b * c;
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            basis.push(v / cr(nrm));
        }
    }
    let mut u = CMat::zeros(n, n);
    for (c, v) in basis.iter().enumerate() {
        u.set_column(c, v);
    }
    u
}

/// Discrete Fourier transform unitary, F|m> = (1/sqrt n) sum_k w^{km} |k>.
pub fn dft_unitary(n: usize) -> CMat {
    let s = 1.0 / (n as f64).sqrt();
    CMat::from_fn(n, n, |k, m| {
        let ang = 2.0 * std::f64::consts::PI * (k as f64) * (m as f64) / (n as f64);
        Complex64::from_polar(s, ang)
    })
}
