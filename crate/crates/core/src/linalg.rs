//! Dense complex linear algebra shared by every module.
//!
//! All routines accept empty (0×k) matrices, which arise naturally from
//! zero-dimensional defect spaces.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Builds a matrix from real row-major entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    assert_eq!(entries.len(), rows * cols);
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c64(x, 0.0)))
}

pub fn scalar(z: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, z)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn is_empty(m: &ComplexMatrix) -> bool {
    m.nrows() == 0 || m.ncols() == 0
}

/// Thin singular value decomposition `m = U diag(s) V*`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    /// Nonincreasing.
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Thin SVD computed with `faer`; nalgebra's complex SVD loses accuracy on
/// some rank-deficient and wide inputs.
pub fn svd(m: &ComplexMatrix) -> Svd {
    let (r, c) = m.shape();
    if is_empty(m) {
        return Svd {
            u: zeros(r, 0),
            s: Vec::new(),
            v: zeros(c, 0),
        };
    }
    let fm = faer::Mat::<Complex64>::from_fn(r, c, |i, j| m[(i, j)]);
    let dec = fm
        .thin_svd()
        .expect("SVD of a finite matrix converges");
    let k = r.min(c);
    let (fu, fv, fs) = (dec.U(), dec.V(), dec.S().column_vector());
    Svd {
        u: ComplexMatrix::from_fn(r, k, |i, j| fu[(i, j)]),
        s: (0..k).map(|j| fs[j].re).collect(),
        v: ComplexMatrix::from_fn(c, k, |i, j| fv[(i, j)]),
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if is_empty(m) {
        return Vec::new();
    }
    svd(m).s
}

/// Largest singular value; 0 for empty matrices.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if is_empty(m) {
        return 0.0;
    }
    // Tall or wide matrices: the Gram matrix is much smaller and its top
    // eigenvalue is the squared norm.
    let (r, c) = m.shape();
    if r > 4 * c || c > 4 * r {
        let gram = if r > c { m.adjoint() * m } else { m * m.adjoint() };
        return hermitian_eigenvalues(&gram)
            .first()
            .copied()
            .unwrap_or(0.0)
            .max(0.0)
            .sqrt();
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.norm()
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues sorted in
/// descending order with matching eigenvector columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Square root of a positive semidefinite matrix.
#[derive(Debug, Clone)]
pub struct PsdRoot {
    pub root: ComplexMatrix,
    /// Orthonormal basis of the numerical range of `root`.
    pub basis: ComplexMatrix,
    pub min_eigenvalue: f64,
}

/// Hermitian square root with the clamping policy used for defect operators:
/// eigenvalues in `[-clamp_tol, rank_tol]` are treated as zero, anything
/// below `-clamp_tol` is rejected.
pub fn psd_sqrt(m: &ComplexMatrix, clamp_tol: f64, rank_tol: f64) -> Result<PsdRoot> {
    let n = m.nrows();
    let (values, vectors) = hermitian_eigen(m);
    let min_eigenvalue = values.last().copied().unwrap_or(0.0);
    if min_eigenvalue < -clamp_tol {
        return Err(Error::NotAContraction {
            eigenvalue: min_eigenvalue,
            tolerance: clamp_tol,
        });
    }
    let kept: Vec<usize> = (0..n).filter(|&k| values[k] > rank_tol).collect();
    let mut basis = zeros(n, kept.len());
    let mut scaled = zeros(n, kept.len());
    for (dst, &k) in kept.iter().enumerate() {
        let col = vectors.column(k);
        basis.set_column(dst, &col);
        scaled.set_column(dst, &(col * c64(values[k].sqrt(), 0.0)));
    }
    let root = &scaled * basis.adjoint();
    Ok(PsdRoot {
        root,
        basis,
        min_eigenvalue,
    })
}

/// Orthonormal basis for the column space, keeping singular values above
/// `tol`.
pub fn range_basis(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let r = m.nrows();
    if is_empty(m) {
        return zeros(r, 0);
    }
    let dec = svd(m);
    let keep = dec.s.iter().take_while(|&&s| s > tol).count();
    dec.u.columns(0, keep).into_owned()
}

/// Moore–Penrose pseudo-inverse with singular values at or below `tol`
/// treated as zero.
pub fn pinv(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let (r, c) = m.shape();
    if is_empty(m) {
        return zeros(c, r);
    }
    let dec = svd(m);
    let keep = dec.s.iter().take_while(|&&s| s > tol).count();
    let inv = ComplexMatrix::from_diagonal(&ComplexVector::from_fn(keep, |k, _| c64(1.0 / dec.s[k], 0.0)));
    dec.v.columns(0, keep) * inv * dec.u.columns(0, keep).adjoint()
}

/// Closest unitary in every unitarily invariant norm (polar factor).
pub fn closest_unitary(m: &ComplexMatrix) -> ComplexMatrix {
    if is_empty(m) {
        return m.clone();
    }
    let dec = svd(m);
    dec.u * dec.v.adjoint()
}

/// Complex Schur factorization `m = Q T Q*` with `T` upper triangular.
pub fn schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if m.nrows() == 0 {
        return Ok((zeros(0, 0), zeros(0, 0)));
    }
    Schur::try_new(m.clone(), f64::EPSILON, 100_000)
        .map(|s| s.unpack())
        .ok_or(Error::NoConvergence {
            rounds: 100_000,
            change: f64::NAN,
        })
}

pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let (_, t) = schur(m)?;
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

pub fn spectral_radius(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `max(‖U*U − I‖, ‖UU* − I‖)`.
pub fn unitary_residual(u: &ComplexMatrix) -> f64 {
    let n = u.nrows();
    if n != u.ncols() {
        return f64::INFINITY;
    }
    let i = identity(n);
    op_norm(&(u.adjoint() * u - &i)).max(op_norm(&(u * u.adjoint() - &i)))
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    op_norm(&commutator(a, b))
}

pub fn block_diag(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Stacks matrices with equal column counts on top of each other.
pub fn vstack(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack: column counts differ");
        out.view_mut((r, 0), b.shape()).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Concatenates matrices with equal row counts side by side.
pub fn hstack(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack: row counts differ");
        out.view_mut((0, c), b.shape()).copy_from(b);
        c += b.ncols();
    }
    out
}

pub fn power(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let mut out = identity(m.nrows());
    for _ in 0..k {
        out = &out * m;
    }
    out
}
