//! Commuting contractive tuples, defect operators, Szegő-type alternating
//! sums and membership tests for the class of tuples with vanishing pairwise
//! Szegő operators and pure product.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, identity, ComplexMatrix};
pub use crate::linalg::op_norm;
use crate::tol;

/// `n` commuting contractions on a common finite-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionTuple {
    dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl ContractionTuple {
    /// Validates shapes, finiteness, contractivity and pairwise commutation
    /// with the default tolerances.
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerances(ops, tol::COMM, tol::NORM)
    }

    pub fn with_tolerances(ops: Vec<ComplexMatrix>, comm_tol: f64, norm_tol: f64) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidParameter("a tuple needs at least one operator".into()))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::InvalidParameter("operators must act on a nonzero space".into()));
        }
        for (i, t) in ops.iter().enumerate() {
            if t.shape() != (dim, dim) {
                return Err(Error::ShapeMismatch(format!(
                    "operator {i} is {}x{}, expected {dim}x{dim}",
                    t.nrows(),
                    t.ncols()
                )));
            }
            linalg::ensure_finite(t)?;
        }
        let norms: Vec<f64> = ops.iter().map(op_norm).collect();
        for &nrm in &norms {
            if nrm > 1.0 + norm_tol {
                return Err(Error::NotAContraction {
                    eigenvalue: 1.0 - nrm * nrm,
                    tolerance: norm_tol,
                });
            }
        }
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                let residual = linalg::commutator_norm(&ops[i], &ops[j]);
                let tolerance = comm_tol * f64::max(1.0, norms[i] * norms[j]);
                if residual > tolerance {
                    return Err(Error::NotCommuting { residual, tolerance });
                }
            }
        }
        Ok(Self { dim, ops })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &ComplexMatrix {
        &self.ops[i]
    }

    /// `P_T = T₁⋯Tₙ`.
    pub fn product(&self) -> ComplexMatrix {
        self.ops.iter().fold(identity(self.dim), |acc, t| acc * t)
    }

    /// Product of the operators with indices in `subset`, in increasing order.
    pub fn product_of(&self, subset: &[usize]) -> ComplexMatrix {
        subset.iter().fold(identity(self.dim), |acc, &i| acc * &self.ops[i])
    }

    pub fn into_ops(self) -> Vec<ComplexMatrix> {
        self.ops
    }
}

/// Defect operator `D_T = (I − TT*)^{1/2}` with an orthonormal basis of its
/// range.
#[derive(Debug, Clone)]
pub struct Defect {
    pub d: ComplexMatrix,
    pub basis: ComplexMatrix,
}

impl Defect {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// `B*D_T`: the defect operator expressed in coordinates of its range.
    pub fn coordinates(&self) -> ComplexMatrix {
        self.basis.adjoint() * &self.d
    }
}

pub fn defect(t: &ComplexMatrix) -> Result<Defect> {
    if t.nrows() != t.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "defect of a {}x{} matrix",
            t.nrows(),
            t.ncols()
        )));
    }
    linalg::ensure_finite(t)?;
    let gap = identity(t.nrows()) - t * t.adjoint();
    let root = linalg::psd_sqrt(&gap, tol::PSD, tol::RANK)?;
    Ok(Defect {
        d: root.root,
        basis: root.basis,
    })
}

/// `Σ_{F ⊆ subset} (−1)^{|F|} T_F T_F*` with `T_∅ = I`; indices are 0-based.
pub fn szego_inverse(tuple: &ContractionTuple, subset: &[usize]) -> Result<ComplexMatrix> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("empty index set".into()));
    }
    if subset.len() > 20 {
        return Err(Error::InvalidParameter("index set too large".into()));
    }
    let mut seen = vec![false; tuple.len()];
    for &i in subset {
        if i >= tuple.len() {
            return Err(Error::InvalidParameter(format!(
                "index {i} out of range for a {}-tuple",
                tuple.len()
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter(format!("index {i} repeated")));
        }
    }
    let mut total = linalg::zeros(tuple.dim(), tuple.dim());
    for mask in 0u32..(1 << subset.len()) {
        let chosen: Vec<usize> = subset
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .map(|(_, &i)| i)
            .collect();
        let tf = tuple.product_of(&chosen);
        let term = &tf * tf.adjoint();
        if chosen.len().is_multiple_of(2) {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

/// Spectral-radius purity decision on a finite-dimensional space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub pure: bool,
    pub spectral_radius: f64,
    /// The spectral radius lies within `tol` of 1; callers must treat the
    /// operator as not pure.
    pub indeterminate: bool,
}

pub fn is_pure(t: &ComplexMatrix, tol: f64) -> Result<PurityReport> {
    if t.nrows() != t.ncols() {
        return Err(Error::ShapeMismatch("purity test needs a square matrix".into()));
    }
    let rho = linalg::spectral_radius(t)?;
    Ok(PurityReport {
        pure: rho < 1.0 - tol,
        spectral_radius: rho,
        indeterminate: (rho - 1.0).abs() <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResidual {
    pub i: usize,
    pub j: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub pairwise_szego_residuals: Vec<PairResidual>,
    pub product_spectral_radius: f64,
    pub is_member: bool,
    pub tolerance_used: f64,
}

impl ClassReport {
    pub fn max_residual(&self) -> f64 {
        self.pairwise_szego_residuals
            .iter()
            .map(|p| p.residual)
            .fold(0.0, f64::max)
    }
}

/// Checks `S₂⁻¹(T_i, T_j) = 0` for every pair and purity of `P_T`.
pub fn class_membership(tuple: &ContractionTuple, tol: f64) -> Result<ClassReport> {
    let mut pairs = Vec::new();
    for i in 0..tuple.len() {
        for j in i + 1..tuple.len() {
            let s = szego_inverse(tuple, &[i, j])?;
            pairs.push(PairResidual {
                i,
                j,
                residual: op_norm(&s),
            });
        }
    }
    let purity = is_pure(&tuple.product(), tol)?;
    let is_member = purity.pure && pairs.iter().all(|p| p.residual <= tol);
    Ok(ClassReport {
        pairwise_szego_residuals: pairs,
        product_spectral_radius: purity.spectral_radius,
        is_member,
        tolerance_used: tol,
    })
}

/// Largest `‖S⁻¹_k‖` over every index subset with at least two elements.
pub fn max_szego_residual(tuple: &ContractionTuple) -> Result<f64> {
    let n = tuple.len();
    let mut worst: f64 = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
        worst = worst.max(op_norm(&szego_inverse(tuple, &subset)?));
    }
    Ok(worst)
}

/// `‖(I − P_T P_T*) − Σ_i (I − T_i T_i*)‖`, which vanishes on the class.
pub fn defect_sum_residual(tuple: &ContractionTuple) -> f64 {
    let id = identity(tuple.dim());
    let p = tuple.product();
    let mut r = &id - &p * p.adjoint();
    for t in tuple.ops() {
        r -= &id - t * t.adjoint();
    }
    op_norm(&r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_matrix, scalar};
    use num_complex::Complex64;

    fn s(x: f64) -> ComplexMatrix {
        scalar(Complex64::new(x, 0.0))
    }

    fn pair(a: f64, b: f64) -> ContractionTuple {
        ContractionTuple::new(vec![s(a), s(b)]).unwrap()
    }

    #[test]
    fn defect_scalars() {
        let d0 = defect(&s(0.0)).unwrap();
        assert_eq!(d0.d[(0, 0)].re, 1.0);
        assert_eq!(d0.rank(), 1);
        assert!((d0.basis[(0, 0)].norm() - 1.0).abs() < 1e-15);

        let d1 = defect(&s(1.0)).unwrap();
        assert_eq!(d1.d[(0, 0)].norm(), 0.0);
        assert_eq!(d1.rank(), 0);

        let dh = defect(&s(0.5)).unwrap();
        assert!((dh.d[(0, 0)].re - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn defect_rejects_expansion() {
        assert!(matches!(defect(&s(1.1)), Err(Error::NotAContraction { .. })));
    }

    #[test]
    fn szego_scalar_examples() {
        let t = pair(0.0, 1.0);
        assert!(szego_inverse(&t, &[0, 1]).unwrap()[(0, 0)].norm() < 1e-15);
        let t = pair(0.0, 0.0);
        assert_eq!(szego_inverse(&t, &[0, 1]).unwrap()[(0, 0)].re, 1.0);
    }

    #[test]
    fn szego_single_index_is_defect_square() {
        let m = real_matrix(2, 2, &[0.3, 0.2, -0.1, 0.4]);
        let t = ContractionTuple::new(vec![m.clone()]).unwrap();
        let s1 = szego_inverse(&t, &[0]).unwrap();
        assert_eq!(s1, identity(2) - &m * m.adjoint());
    }

    #[test]
    fn szego_rejects_bad_subsets() {
        let t = pair(0.0, 1.0);
        assert!(szego_inverse(&t, &[]).is_err());
        assert!(szego_inverse(&t, &[2]).is_err());
        assert!(szego_inverse(&t, &[1, 1]).is_err());
    }

    #[test]
    fn purity_examples() {
        let r = is_pure(&s(0.0), 1e-8).unwrap();
        assert!(r.pure && r.spectral_radius == 0.0);
        let r = is_pure(&s(1.0), 1e-8).unwrap();
        assert!(!r.pure && r.indeterminate);
        assert!((r.spectral_radius - 1.0).abs() < 1e-15);
        let r = is_pure(&real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]), 1e-8).unwrap();
        assert!(r.pure && r.spectral_radius == 0.0);
    }

    #[test]
    fn membership_examples() {
        let r = class_membership(&pair(0.0, 1.0), 1e-10).unwrap();
        assert!(r.is_member);
        assert_eq!(r.max_residual(), 0.0);
        assert_eq!(r.product_spectral_radius, 0.0);

        let r = class_membership(&pair(0.5, 0.5), 1e-10).unwrap();
        assert!(!r.is_member);
        assert!((r.max_residual() - 9.0 / 16.0).abs() < 1e-15);

        let r = class_membership(&pair(1.0, 1.0), 1e-10).unwrap();
        assert!(!r.is_member);
        assert_eq!(r.max_residual(), 0.0);
        assert!((r.product_spectral_radius - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tuple_validation() {
        let a = real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = real_matrix(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        assert!(matches!(
            ContractionTuple::new(vec![a.clone(), b]),
            Err(Error::NotCommuting { .. })
        ));
        assert!(matches!(
            ContractionTuple::new(vec![a, s(0.0)]),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(ContractionTuple::new(vec![]).is_err());
        assert!(matches!(
            ContractionTuple::new(vec![s(f64::NAN)]),
            Err(Error::NonFinite)
        ));
    }
}
