//! BCL triples `(ℰ, U, P)`, their symbols `Φ_i(z) = U_i(P_i^⊥ + zP_i)` and
//! finite sections of multiplication operators on the ℰ-valued Hardy space.
//!
//! Elements of the truncated Hardy space of degree `N` are stored as column
//! vectors of length `(N+1)·dim ℰ`: block `k` holds the coefficient of `z^k`.

use num_complex::Complex64;

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::linalg::{self, identity, op_norm, zeros, ComplexMatrix};

/// `(dim ℰ, U₁..Uₙ, P₁..Pₙ)` defining the tuple of multiplication operators
/// by `Φ_i(z) = U_i(P_i^⊥ + zP_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BclTriple {
    dim_e: usize,
    unitaries: Vec<ComplexMatrix>,
    projections: Vec<ComplexMatrix>,
}

impl BclTriple {
    /// Checks shapes and finiteness only; the algebraic conditions are
    /// certified by [`validate_bcl`].
    pub fn new(
        dim_e: usize,
        unitaries: Vec<ComplexMatrix>,
        projections: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(Error::InvalidParameter("a triple needs at least one symbol".into()));
        }
        if unitaries.len() != projections.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} unitaries but {} projections",
                unitaries.len(),
                projections.len()
            )));
        }
        if dim_e == 0 {
            return Err(Error::InvalidParameter("coefficient space must be nonzero".into()));
        }
        for m in unitaries.iter().chain(&projections) {
            if m.shape() != (dim_e, dim_e) {
                return Err(Error::ShapeMismatch(format!(
                    "expected {dim_e}x{dim_e}, found {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            linalg::ensure_finite(m)?;
        }
        Ok(Self {
            dim_e,
            unitaries,
            projections,
        })
    }

    pub fn n(&self) -> usize {
        self.unitaries.len()
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn projections(&self) -> &[ComplexMatrix] {
        &self.projections
    }

    pub fn unitary(&self, i: usize) -> &ComplexMatrix {
        &self.unitaries[i]
    }

    pub fn projection(&self, i: usize) -> &ComplexMatrix {
        &self.projections[i]
    }

    /// Taylor coefficients `(U_iP_i^⊥, U_iP_i)` of `Φ_i`.
    pub fn phi_coefficients(&self, i: usize) -> (ComplexMatrix, ComplexMatrix) {
        let u = &self.unitaries[i];
        let p = &self.projections[i];
        (u * (identity(self.dim_e) - p), u * p)
    }

    /// `Φ_i(z)`.
    pub fn phi(&self, i: usize, z: Complex64) -> ComplexMatrix {
        let (a, b) = self.phi_coefficients(i);
        a + b * z
    }

    /// Finite section of `M_{Φ_i}` on polynomials of degree at most `degree`.
    pub fn mult_op(&self, i: usize, degree: usize) -> TruncatedHardyOp {
        let (a, b) = self.phi_coefficients(i);
        TruncatedHardyOp::from_symbol(vec![a, b], degree)
    }

    /// Taylor coefficients of `Φ₁(z)⋯Φₙ(z)`, a polynomial of degree `n`.
    pub fn symbol_product(&self) -> Vec<ComplexMatrix> {
        let mut acc = vec![identity(self.dim_e)];
        for i in 0..self.n() {
            let (a, b) = self.phi_coefficients(i);
            acc = convolve(&acc, &[a, b], usize::MAX);
        }
        acc
    }
}

/// `Φ_i(z)` together with a flag for evaluation points outside the closed
/// unit disc.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiValue {
    pub value: ComplexMatrix,
    pub outside_closed_disc: bool,
}

pub fn phi_eval(triple: &BclTriple, i: usize, z: Complex64) -> Result<PhiValue> {
    if i >= triple.n() {
        return Err(Error::InvalidParameter(format!(
            "symbol index {i} out of range for {} symbols",
            triple.n()
        )));
    }
    Ok(PhiValue {
        value: triple.phi(i, z),
        outside_closed_disc: z.norm() > 1.0 + crate::tol::UNITARY,
    })
}

/// Residual report for the defining conditions of a BCL triple.
///
/// Entry names (indices are 1-based):
/// `unitary[i]`, `projection[i]`, `cond1[i,j]` (commutation), `cond2`
/// (product is `I`), `cond3.equal[i,j]`, `cond3.bound[i,j]`, `cond4`
/// (telescoped projections sum to `I`), `orthogonality[i,j]`
/// (`P_i U_i* P_j U_i = 0`) and `class[i,j]` (`U_iP_j = P_jU_i`, which is
/// exactly membership of the multiplication tuple in the class).
pub fn validate_bcl(triple: &BclTriple, tol: f64) -> Result<Certificate> {
    let n = triple.n();
    let m = triple.dim_e();
    let id = identity(m);
    let u = triple.unitaries();
    let p = triple.projections();
    for (a, b) in u.iter().zip(p) {
        if a.shape() != (m, m) || b.shape() != (m, m) {
            return Err(Error::ShapeMismatch("inconsistent triple".into()));
        }
    }
    let mut cert = Certificate::new();
    for i in 0..n {
        cert.record(format!("unitary[{}]", i + 1), linalg::unitary_residual(&u[i]), tol);
        let herm = op_norm(&(&p[i] - p[i].adjoint()));
        let idem = op_norm(&(&p[i] * &p[i] - &p[i]));
        cert.record(format!("projection[{}]", i + 1), herm.max(idem), tol);
    }
    for i in 0..n {
        for j in i + 1..n {
            cert.record(
                format!("cond1[{},{}]", i + 1, j + 1),
                linalg::commutator_norm(&u[i], &u[j]),
                tol,
            );
        }
    }
    let prod = u.iter().fold(id.clone(), |acc, x| acc * x);
    cert.record("cond2", op_norm(&(prod - &id)), tol);
    for i in 0..n {
        for j in i + 1..n {
            let lhs = &p[i] + u[i].adjoint() * &p[j] * &u[i];
            let rhs = &p[j] + u[j].adjoint() * &p[i] * &u[j];
            cert.record(
                format!("cond3.equal[{},{}]", i + 1, j + 1),
                op_norm(&(&lhs - &rhs)),
                tol,
            );
            let top = linalg::hermitian_eigenvalues(&lhs)
                .first()
                .copied()
                .unwrap_or(0.0);
            cert.record(
                format!("cond3.bound[{},{}]", i + 1, j + 1),
                (top - 1.0).max(0.0),
                tol,
            );
        }
    }
    let mut sum = zeros(m, m);
    let mut prefix = id.clone();
    for i in 0..n {
        sum += prefix.adjoint() * &p[i] * &prefix;
        prefix = &prefix * &u[i];
    }
    cert.record("cond4", op_norm(&(sum - &id)), tol);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let r = &p[i] * u[i].adjoint() * &p[j] * &u[i];
                cert.record(format!("orthogonality[{},{}]", i + 1, j + 1), op_norm(&r), tol);
            }
        }
    }
    for (i, ui) in u.iter().enumerate() {
        for (j, pj) in p.iter().enumerate() {
            let r = ui * pj - pj * ui;
            cert.record(format!("class[{},{}]", i + 1, j + 1), op_norm(&r), tol);
        }
    }
    Ok(cert)
}

/// True when every defining condition of a BCL triple passed.
pub fn bcl_conditions_hold(cert: &Certificate) -> bool {
    ["unitary", "projection", "cond", "orthogonality"]
        .iter()
        .all(|p| cert.passed_with_prefix(p))
}

/// True when the conditions hold and, in addition, `U_iP_j = P_jU_i`.
pub fn bcl_in_class(cert: &Certificate) -> bool {
    bcl_conditions_hold(cert) && cert.passed_with_prefix("class")
}

/// Finite section of a multiplication operator with a polynomial symbol
/// `Σ_k Φ_k z^k`, acting on coefficient vectors of ℰ-valued polynomials of
/// degree at most `degree`. The section is block lower triangular Toeplitz.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedHardyOp {
    dim_e: usize,
    degree: usize,
    coeffs: Vec<ComplexMatrix>,
}

impl TruncatedHardyOp {
    /// Coefficients beyond `degree` are discarded.
    pub fn from_symbol(mut coeffs: Vec<ComplexMatrix>, degree: usize) -> Self {
        let dim_e = coeffs.first().map_or(0, |c| c.nrows());
        coeffs.truncate(degree + 1);
        if coeffs.is_empty() {
            coeffs.push(zeros(dim_e, dim_e));
        }
        Self {
            dim_e,
            degree,
            coeffs,
        }
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Side length `(N+1)·dim ℰ` of the finite section.
    pub fn size(&self) -> usize {
        (self.degree + 1) * self.dim_e
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    /// Dense matrix of the finite section.
    pub fn matrix(&self) -> ComplexMatrix {
        let m = self.dim_e;
        let mut out = zeros(self.size(), self.size());
        for col in 0..=self.degree {
            for (t, c) in self.coeffs.iter().enumerate() {
                let row = col + t;
                if row > self.degree {
                    break;
                }
                out.view_mut((row * m, col * m), (m, m)).copy_from(c);
            }
        }
        out
    }

    /// Applies the section to the columns of `x`.
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.nrows(), self.size(), "apply: wrong input length");
        let m = self.dim_e;
        let mut out = zeros(x.nrows(), x.ncols());
        for k in 0..=self.degree {
            let mut acc = zeros(m, x.ncols());
            for (t, c) in self.coeffs.iter().enumerate().take(k + 1) {
                acc += c * x.rows((k - t) * m, m);
            }
            out.rows_mut(k * m, m).copy_from(&acc);
        }
        out
    }

    /// Applies the adjoint of the section to the columns of `x`.
    pub fn apply_adjoint(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.nrows(), self.size(), "apply_adjoint: wrong input length");
        let m = self.dim_e;
        let adj: Vec<ComplexMatrix> = self.coeffs.iter().map(|c| c.adjoint()).collect();
        let mut out = zeros(x.nrows(), x.ncols());
        for k in 0..=self.degree {
            let mut acc = zeros(m, x.ncols());
            for (t, c) in adj.iter().enumerate() {
                if k + t > self.degree {
                    break;
                }
                acc += c * x.rows((k + t) * m, m);
            }
            out.rows_mut(k * m, m).copy_from(&acc);
        }
        out
    }

    /// `self ∘ other`; exact because products of lower triangular Toeplitz
    /// sections are again such sections.
    pub fn compose(&self, other: &TruncatedHardyOp) -> TruncatedHardyOp {
        assert_eq!(self.dim_e, other.dim_e);
        assert_eq!(self.degree, other.degree);
        TruncatedHardyOp {
            dim_e: self.dim_e,
            degree: self.degree,
            coeffs: convolve(&self.coeffs, &other.coeffs, self.degree),
        }
    }
}

/// Coefficients of the product of two matrix polynomials, truncated to
/// degree `max_degree`.
pub fn convolve(a: &[ComplexMatrix], b: &[ComplexMatrix], max_degree: usize) -> Vec<ComplexMatrix> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let len = (a.len() + b.len() - 1).min(max_degree.saturating_add(1));
    let (r, c) = (a[0].nrows(), b[0].ncols());
    let mut out = vec![zeros(r, c); len];
    for (s, x) in a.iter().enumerate() {
        for (t, y) in b.iter().enumerate() {
            if s + t < len {
                out[s + t] += x * y;
            }
        }
    }
    out
}

/// Finite section of `M_Φ` for the affine symbol `Φ(z) = Φ₀ + Φ₁z`.
pub fn mult_op_truncated(
    phi0: &ComplexMatrix,
    phi1: &ComplexMatrix,
    degree: usize,
) -> Result<TruncatedHardyOp> {
    if phi0.nrows() != phi0.ncols() || phi0.shape() != phi1.shape() {
        return Err(Error::ShapeMismatch(
            "symbol coefficients must be square of equal size".into(),
        ));
    }
    Ok(TruncatedHardyOp::from_symbol(
        vec![phi0.clone(), phi1.clone()],
        degree,
    ))
}

/// Finite section of the shift `M_z` on ℰ-valued polynomials.
pub fn shift(dim_e: usize, degree: usize) -> TruncatedHardyOp {
    TruncatedHardyOp::from_symbol(vec![zeros(dim_e, dim_e), identity(dim_e)], degree)
}

/// Smallest `N ≥ 1` with `‖P^N‖ ≤ target`, searched up to `max_degree`.
pub fn adaptive_degree(p: &ComplexMatrix, target: f64, max_degree: usize) -> Result<(usize, f64)> {
    let mut pk = p.clone();
    let mut tail = op_norm(&pk);
    for n in 1..=max_degree {
        if tail <= target {
            return Ok((n, tail));
        }
        if n == max_degree {
            break;
        }
        pk = &pk * p;
        tail = op_norm(&pk);
    }
    Err(Error::TruncationInsufficient {
        degree: max_degree,
        tail,
    })
}

/// `‖P^N‖`.
pub fn power_tail(p: &ComplexMatrix, degree: usize) -> f64 {
    op_norm(&linalg::power(p, degree))
}

/// Decomposition `ℰ = ⊕ ran P_i` of a class triple with the restrictions of
/// every unitary to every summand.
#[derive(Debug, Clone)]
pub struct BlockForm {
    /// Orthonormal basis of `ran P_i`, one per index.
    pub bases: Vec<ComplexMatrix>,
    /// `restrictions[i][j]` is `U_j` restricted to `ran P_i`.
    pub restrictions: Vec<Vec<ComplexMatrix>>,
    pub dims: Vec<usize>,
    pub certificate: Certificate,
}

/// Degree of the finite section used for the double-commutation check.
const BLOCK_FORM_DEGREE: usize = 4;

pub fn bcl_block_form(triple: &BclTriple, tol: f64) -> Result<BlockForm> {
    let cert = validate_bcl(triple, tol)?;
    if !cert.passed_with_prefix("class") {
        let worst = cert.max_with_prefix("class");
        return Err(Error::NotInClass(format!(
            "U_i P_j != P_j U_i (residual {worst:e})"
        )));
    }
    let n = triple.n();
    let mut out = Certificate::new();
    let mut bases = Vec::with_capacity(n);
    let mut restrictions = Vec::with_capacity(n);
    for i in 0..n {
        let (vals, vecs) = linalg::hermitian_eigen(triple.projection(i));
        let rank = vals.iter().filter(|&&v| v > 0.5).count();
        let e = vecs.columns(0, rank).into_owned();
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let uj = triple.unitary(j);
            let r = e.adjoint() * uj * &e;
            out.record(
                format!("invariance[{},{}]", i + 1, j + 1),
                op_norm(&(uj * &e - &e * &r)),
                tol,
            );
            row.push(r);
        }
        bases.push(e);
        restrictions.push(row);
    }
    let dims: Vec<usize> = bases.iter().map(|b| b.ncols()).collect();
    out.record(
        "dimension_sum",
        (dims.iter().sum::<usize>() as f64 - triple.dim_e() as f64).abs(),
        0.0,
    );
    let degree = BLOCK_FORM_DEGREE;
    let keep = degree * triple.dim_e();
    let mats: Vec<ComplexMatrix> = (0..n).map(|i| triple.mult_op(i, degree).matrix()).collect();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let lhs = mats[i].adjoint() * &mats[j];
            let rhs = &mats[j] * mats[i].adjoint();
            let diff = (lhs - rhs).columns(0, keep).into_owned();
            out.record(
                format!("double_commutation[{},{}]", i + 1, j + 1),
                op_norm(&diff),
                tol,
            );
        }
    }
    Ok(BlockForm {
        bases,
        restrictions,
        dims,
        certificate: out,
    })
}
