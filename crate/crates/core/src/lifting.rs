//! Commutant lifting through transfer-function realizations.
//!
//! For a class tuple `T` and `X` commuting with it, the defect
//! `I − XX*` splits as `Σ_j G_j` with `G_j` invariant under `Y ↦ T_iYT_i*`
//! (`i ≠ j`). For each `j` the isometry
//! `(D_{T_j}h, G_j^{1/2}P_T*h) ↦ (D_{T_j}X*h, G_j^{1/2}h)` extends by zero to
//! a contraction `R = [[A, B], [C, D]]` on `𝒟_{T_j} ⊕ ran G_j^{1/2}`
//! commuting with the unitaries `W_j^{(i)} ⊕ Ỹ_i`, and
//! `Θ_j(z) = A* + zC*(I − zD*)^{-1}B*` is the `j`-th diagonal block of a
//! contractive multiplier with `ΠX* = M_Θ*Π`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::certificate::Certificate;
use crate::circle;
use crate::dilation::{BclConstruction, DilationResult};
use crate::error::{Error, Result};
use crate::hardy::{self, BclTriple, TruncatedHardyOp};
use crate::linalg::{self, identity, op_norm, zeros, ComplexMatrix};
use crate::opcore::ContractionTuple;
use crate::tol;

/// Block operator `W = [[A, B], [C, D]]` on `𝒦 ⊕ 𝒢` with transfer function
/// `τ_W(z) = A + zB(I − zD)^{-1}C`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferRealization {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
    pub d: ComplexMatrix,
}

impl TransferRealization {
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
    ) -> Result<Self> {
        let k = a.nrows();
        let g = d.nrows();
        if a.ncols() != k
            || d.ncols() != g
            || b.shape() != (k, g)
            || c.shape() != (g, k)
        {
            return Err(Error::ShapeMismatch(format!(
                "realization blocks A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        for m in [&a, &b, &c, &d] {
            linalg::ensure_finite(m)?;
        }
        Ok(Self { a, b, c, d })
    }

    /// Splits a square matrix on `𝒦 ⊕ 𝒢` with `dim 𝒦 = dim_k`.
    pub fn from_matrix(w: &ComplexMatrix, dim_k: usize) -> Result<Self> {
        if w.nrows() != w.ncols() || dim_k > w.nrows() {
            return Err(Error::ShapeMismatch("cannot split realization".into()));
        }
        let g = w.nrows() - dim_k;
        Self::new(
            w.view((0, 0), (dim_k, dim_k)).into_owned(),
            w.view((0, dim_k), (dim_k, g)).into_owned(),
            w.view((dim_k, 0), (g, dim_k)).into_owned(),
            w.view((dim_k, dim_k), (g, g)).into_owned(),
        )
    }

    pub fn dim_k(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim_g(&self) -> usize {
        self.d.nrows()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let k = self.dim_k();
        let g = self.dim_g();
        let mut w = zeros(k + g, k + g);
        w.view_mut((0, 0), (k, k)).copy_from(&self.a);
        w.view_mut((0, k), (k, g)).copy_from(&self.b);
        w.view_mut((k, 0), (g, k)).copy_from(&self.c);
        w.view_mut((k, k), (g, g)).copy_from(&self.d);
        w
    }

    /// Realization of `W*`, i.e. `[[A*, C*], [B*, D*]]`.
    pub fn adjoint(&self) -> Self {
        Self {
            a: self.a.adjoint(),
            b: self.c.adjoint(),
            c: self.b.adjoint(),
            d: self.d.adjoint(),
        }
    }

    pub fn norm(&self) -> f64 {
        op_norm(&self.matrix())
    }

    pub fn unitary_residual(&self) -> f64 {
        linalg::unitary_residual(&self.matrix())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_residual() <= tol
    }

    /// Taylor coefficients `A, BC, BDC, BD²C, …` (`count` of them).
    pub fn coefficients(&self, count: usize) -> Vec<ComplexMatrix> {
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        out.push(self.a.clone());
        let mut dk_c = self.c.clone();
        for _ in 1..count {
            out.push(&self.b * &dk_c);
            dk_c = &self.d * dk_c;
        }
        out
    }

    /// Restriction of the state space to `span{D^k C}`, which is
    /// `D`-invariant and carries the whole transfer function. For
    /// contractive realizations this removes the unimodular spectrum of `D`.
    pub fn reachable(&self) -> Self {
        let q = krylov_basis(&self.d, &self.c, 1e-12);
        Self {
            a: self.a.clone(),
            b: &self.b * &q,
            c: q.adjoint() * &self.c,
            d: q.adjoint() * &self.d * &q,
        }
    }

    /// `τ_W(z)` by a linear solve with the reduced realization.
    pub fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        let r = self.reachable();
        if r.dim_g() == 0 {
            return Ok(r.a);
        }
        let lhs = identity(r.dim_g()) - &r.d * z;
        let sol = lhs
            .lu()
            .solve(&r.c)
            .ok_or_else(|| Error::InvalidParameter(format!("resolvent singular at z = {z}")))?;
        Ok(&r.a + &r.b * sol * z)
    }
}

/// Orthonormal basis of `span{D^k C : k ≥ 0}`.
pub fn krylov_basis(d: &ComplexMatrix, c: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let scale = op_norm(c).max(1.0);
    let mut basis = linalg::range_basis(c, tol * scale);
    loop {
        let grown = linalg::range_basis(&linalg::hstack(&[basis.clone(), d * &basis]), tol);
        if grown.ncols() <= basis.ncols() {
            return basis;
        }
        basis = grown;
    }
}

pub fn commutant_residual(tuple: &ContractionTuple, x: &ComplexMatrix) -> f64 {
    if x.shape() != (tuple.dim(), tuple.dim()) {
        return f64::INFINITY;
    }
    tuple
        .ops()
        .iter()
        .map(|t| linalg::commutator_norm(x, t))
        .fold(0.0, f64::max)
}

/// `‖X‖ ≤ 1 + tol` and `‖XT_i − T_iX‖ ≤ tol` for every `i`.
pub fn commutant_check(tuple: &ContractionTuple, x: &ComplexMatrix, tol: f64) -> bool {
    if x.shape() != (tuple.dim(), tuple.dim()) || !linalg::is_finite(x) {
        return false;
    }
    op_norm(x) <= 1.0 + tol && commutant_residual(tuple, x) <= tol
}

fn require_commutant(tuple: &ContractionTuple, x: &ComplexMatrix, tol: f64) -> Result<()> {
    if x.shape() != (tuple.dim(), tuple.dim()) {
        return Err(Error::ShapeMismatch(format!(
            "X is {}x{}, tuple acts on dimension {}",
            x.nrows(),
            x.ncols(),
            tuple.dim()
        )));
    }
    linalg::ensure_finite(x)?;
    if !commutant_check(tuple, x, tol) {
        let residual = commutant_residual(tuple, x).max(op_norm(x) - 1.0);
        return Err(Error::NotACommutant {
            residual,
            tolerance: tol,
        });
    }
    Ok(())
}

/// `I − XX* = Σ_j G_j` with each `G_j` fixed by `Y ↦ T_iYT_i*` for `i ≠ j`.
#[derive(Debug, Clone)]
pub struct DefectDecomposition {
    pub g: Vec<ComplexMatrix>,
    /// Full cycles used for each `j`.
    pub iterations: Vec<usize>,
    /// `‖(I − XX*) − Σ_j G_j‖`.
    pub residual: f64,
    pub tolerance: f64,
    pub certificate: Certificate,
}

/// Computes `G_j = lim (T̃_j)^α (I − XX*) (T̃_j)^{*α}` by cycling
/// `Y ↦ T_iYT_i*` over `i ≠ j` until one full cycle changes `Y` by at most
/// `tol·1e-3` in Frobenius norm. `max_rounds` defaults to ten times the
/// adaptive truncation degree of `P_T`.
pub fn defect_decomposition(
    tuple: &ContractionTuple,
    x: &ComplexMatrix,
    tol: f64,
    max_rounds: Option<usize>,
) -> Result<DefectDecomposition> {
    require_commutant(tuple, x, tol)?;
    let n = tuple.len();
    let d = tuple.dim();
    let max_rounds = match max_rounds {
        Some(r) => r,
        None => {
            let degree = hardy::adaptive_degree(&tuple.product(), tol::TAIL, tol::MAX_DEGREE)
                .map(|(n, _)| n)
                .unwrap_or(tol::MAX_DEGREE);
            (10 * degree).max(100)
        }
    };
    let base = identity(d) - x * x.adjoint();
    let stop = tol * 1e-3;
    let mut g = Vec::with_capacity(n);
    let mut iterations = Vec::with_capacity(n);
    for j in 0..n {
        let others: Vec<&ComplexMatrix> = (0..n).filter(|&i| i != j).map(|i| tuple.op(i)).collect();
        let mut y = base.clone();
        let mut rounds = 0;
        if !others.is_empty() {
            loop {
                let prev = y.clone();
                for t in &others {
                    y = *t * &y * t.adjoint();
                }
                rounds += 1;
                let change = (&y - &prev).norm();
                if change <= stop {
                    break;
                }
                if rounds >= max_rounds {
                    return Err(Error::NoConvergence { rounds, change });
                }
            }
        }
        g.push(linalg::hermitian_part(&y));
        iterations.push(rounds);
    }
    let mut cert = Certificate::new();
    let sum = g.iter().fold(zeros(d, d), |acc, gj| acc + gj);
    let residual = op_norm(&(&base - sum));
    cert.record("sum", residual, tol);
    for j in 0..n {
        for i in (0..n).filter(|&i| i != j) {
            let t = tuple.op(i);
            cert.record(
                format!("invariance[{},{}]", j + 1, i + 1),
                op_norm(&(&g[j] - t * &g[j] * t.adjoint())),
                tol,
            );
        }
        let low = linalg::hermitian_eigenvalues(&g[j]).last().copied().unwrap_or(0.0);
        cert.record(format!("positivity[{}]", j + 1), (-low).max(0.0), tol);
        cert.note(format!("cycles[{}]", j + 1), iterations[j] as f64);
    }
    Ok(DefectDecomposition {
        g,
        iterations,
        residual,
        tolerance: tol,
        certificate: cert,
    })
}

/// Intertwiner `Y` on the state space with `BY = UB`, `CU = YC`, `DY = YD`.
#[derive(Debug, Clone)]
pub struct Intertwiner {
    pub y: ComplexMatrix,
    /// Orthonormal basis of `span{D^k C}`; `Y` vanishes on its complement.
    pub basis: ComplexMatrix,
    pub certificate: Certificate,
}

/// For a unitary realization whose transfer coefficients commute with the
/// unitary `U`, constructs `Y` by `Y(D^kCη) = D^kCUη` on `span{D^kC}` and
/// zero on the complement.
pub fn intertwiner_y(w: &TransferRealization, u: &ComplexMatrix, tol: f64) -> Result<Intertwiner> {
    let residual = w.unitary_residual();
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    let k = w.dim_k();
    let g = w.dim_g();
    if u.shape() != (k, k) {
        return Err(Error::ShapeMismatch(format!(
            "U is {}x{}, realization input space has dimension {k}",
            u.nrows(),
            u.ncols()
        )));
    }
    let iso = op_norm(&(u.adjoint() * u - identity(k)));
    if iso > tol {
        return Err(Error::InvalidParameter(format!(
            "U is not an isometry (residual {iso:e})"
        )));
    }
    let mut cols = Vec::with_capacity(g + 1);
    let mut cols_u = Vec::with_capacity(g + 1);
    let mut dk_c = w.c.clone();
    for _ in 0..=g {
        cols_u.push(&dk_c * u);
        cols.push(dk_c.clone());
        dk_c = &w.d * dk_c;
    }
    let kry = linalg::hstack(&cols);
    let kry_u = linalg::hstack(&cols_u);
    let scale = op_norm(&kry).max(1.0);
    let y = &kry_u * linalg::pinv(&kry, 1e-10 * scale);
    let basis = krylov_basis(&w.d, &w.c, 1e-10);

    let mut cert = Certificate::new();
    let checks = [
        ("well_defined", op_norm(&(&y * &kry - &kry_u))),
        ("BY=UB", op_norm(&(&w.b * &y - u * &w.b))),
        ("CU=YC", op_norm(&(&w.c * u - &y * &w.c))),
        ("DY=YD", op_norm(&(&w.d * &y - &y * &w.d))),
    ];
    for (name, value) in checks {
        if !cert.record(name, value, tol) {
            return Err(Error::RelationResidualExceeded {
                relation: name.into(),
                residual: value,
                tolerance: tol,
            });
        }
    }
    let count = (2 * g + 2).max(8);
    let coeffs = w.coefficients(count + 1);
    let worst = coeffs
        .iter()
        .map(|c| linalg::commutator_norm(c, u))
        .fold(0.0, f64::max);
    cert.record("coefficients_commute", worst, tol);
    cert.note("pure_part_dim", basis.ncols() as f64);
    Ok(Intertwiner {
        y,
        basis,
        certificate: cert,
    })
}

/// Contractive multiplier `Θ = ⊕_j Θ_j` lifting `X`.
#[derive(Debug, Clone)]
pub struct LiftResult {
    /// `R_j` on `𝒟_{T_j} ⊕ ran G_j^{1/2}`; `Θ_j = τ_{R_j*}`.
    pub realizations: Vec<TransferRealization>,
    /// `theta_blocks[j][k]` is the `k`-th Taylor coefficient of `Θ_j`.
    pub theta_blocks: Vec<Vec<ComplexMatrix>>,
    /// Block-diagonal Taylor coefficients of `Θ` on ℰ, degrees `0..=N`.
    pub theta: Vec<ComplexMatrix>,
    pub offsets: Vec<usize>,
    pub degree: usize,
    pub certificate: Certificate,
}

impl LiftResult {
    /// Assembles a lift from per-summand realizations of `R_j` (so that
    /// `Θ_j = τ_{R_j*}`).
    pub fn from_realizations(realizations: Vec<TransferRealization>, degree: usize) -> Self {
        let theta_blocks: Vec<Vec<ComplexMatrix>> = realizations
            .iter()
            .map(|r| r.adjoint().coefficients(degree + 1))
            .collect();
        let mut offsets = Vec::with_capacity(realizations.len());
        let mut acc = 0;
        for r in &realizations {
            offsets.push(acc);
            acc += r.dim_k();
        }
        let theta = (0..=degree)
            .map(|k| {
                let blocks: Vec<ComplexMatrix> =
                    theta_blocks.iter().map(|b| b[k].clone()).collect();
                linalg::block_diag(&blocks)
            })
            .collect();
        Self {
            realizations,
            theta_blocks,
            theta,
            offsets,
            degree,
            certificate: Certificate::new(),
        }
    }

    pub fn dim_e(&self) -> usize {
        self.realizations.iter().map(|r| r.dim_k()).sum()
    }

    /// Finite section of `M_Θ` from the stored Taylor coefficients.
    pub fn m_theta(&self) -> TruncatedHardyOp {
        TruncatedHardyOp::from_symbol(self.theta.clone(), self.degree)
    }

    /// `Θ(z)` from the realizations.
    pub fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        let blocks = self
            .realizations
            .iter()
            .map(|r| r.adjoint().eval(z))
            .collect::<Result<Vec<_>>>()?;
        Ok(linalg::block_diag(&blocks))
    }

    /// Applies the finite section of `M_Θ` by the state-space recursion of
    /// each realization, which is linear in the degree.
    pub fn apply_m_theta(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let m = self.dim_e();
        assert_eq!(x.nrows(), (self.degree + 1) * m, "apply_m_theta: wrong length");
        let cols = x.ncols();
        let mut out = zeros(x.nrows(), cols);
        for (j, r) in self.realizations.iter().enumerate() {
            let k = r.dim_k();
            if k == 0 {
                continue;
            }
            let s = r.adjoint();
            let off = self.offsets[j];
            let mut state = zeros(s.dim_g(), cols);
            for deg in 0..=self.degree {
                let xk = x.view((deg * m + off, 0), (k, cols)).into_owned();
                let yk = &s.a * &xk + &s.b * &state;
                out.view_mut((deg * m + off, 0), (k, cols)).copy_from(&yk);
                state = &s.d * state + &s.c * xk;
            }
        }
        out
    }

    /// Smallest degree beyond which every Taylor coefficient of every `Θ_j`
    /// stays below `eps·1e-3` for twenty consecutive degrees.
    pub fn decay_degree(&self, eps: f64) -> usize {
        let cap = 4 * tol::MAX_DEGREE;
        let mut worst = 0;
        for r in &self.realizations {
            let s = r.adjoint().reachable();
            if s.dim_g() == 0 {
                continue;
            }
            let mut dk_c = s.c.clone();
            let mut quiet = 0;
            let mut k = 1;
            while k < cap {
                if op_norm(&(&s.b * &dk_c)) <= eps * 1e-3 {
                    quiet += 1;
                    if quiet >= 20 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
                dk_c = &s.d * dk_c;
                k += 1;
            }
            worst = worst.max(k.saturating_sub(20));
        }
        worst
    }
}

/// Constructs the lift of `X` over the dilation built from `construction`.
pub fn build_lift(
    tuple: &ContractionTuple,
    x: &ComplexMatrix,
    construction: &BclConstruction,
    dilation: &DilationResult,
    decomposition: &DefectDecomposition,
) -> Result<LiftResult> {
    let tol = decomposition.tolerance;
    require_commutant(tuple, x, tol)?;
    let n = tuple.len();
    if decomposition.g.len() != n || construction.wij.len() != n {
        return Err(Error::ShapeMismatch("decomposition does not match tuple".into()));
    }
    let degree = dilation.degree;
    let p_adj = tuple.product().adjoint();
    let x_adj = x.adjoint();
    let tail_n2 = hardy::power_tail(&tuple.product(), degree + 2);

    let per_j = (0..n)
        .into_par_iter()
        .map(|j| {
            lift_component(
                tuple,
                &x_adj,
                &p_adj,
                construction,
                &decomposition.g[j],
                j,
                degree,
                tail_n2,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cert = Certificate::new();
    let mut realizations = Vec::with_capacity(n);
    for (j, (r, c)) in per_j.into_iter().enumerate() {
        cert.absorb(&format!("lift{}.", j + 1), &c);
        realizations.push(r);
    }
    let mut lift = LiftResult::from_realizations(realizations, degree);
    for (j, w) in construction.wij.iter().enumerate() {
        let worst = lift.theta_blocks[j]
            .iter()
            .flat_map(|th| w.w.iter().map(move |wi| linalg::commutator_norm(th, wi)))
            .fold(0.0, f64::max);
        cert.record(format!("coefficients_commute[{}]", j + 1), worst, 1e-8);
    }
    cert.note("degree", degree as f64);
    lift.certificate = cert;
    Ok(lift)
}

#[allow(clippy::too_many_arguments)]
fn lift_component(
    tuple: &ContractionTuple,
    x_adj: &ComplexMatrix,
    p_adj: &ComplexMatrix,
    construction: &BclConstruction,
    gj: &ComplexMatrix,
    j: usize,
    degree: usize,
    tail_n2: f64,
) -> Result<(TransferRealization, Certificate)> {
    let n = tuple.len();
    let wset = &construction.wij[j];
    let r = wset.rank();
    let mut cert = Certificate::new();
    if r == 0 {
        let empty = TransferRealization::new(zeros(0, 0), zeros(0, 0), zeros(0, 0), zeros(0, 0))?;
        cert.note("empty", 1.0);
        return Ok((empty, cert));
    }
    let delta = &wset.coords;
    let root = linalg::psd_sqrt(gj, tol::PSD, tol::RANK)?;
    let gamma = root.basis.adjoint() * &root.root;
    let g = gamma.nrows();
    cert.note("dim_k", r as f64);
    cert.note("dim_g", g as f64);

    let m_in = linalg::vstack(&[delta.clone(), &gamma * p_adj]);
    let m_out = linalg::vstack(&[delta * x_adj, gamma.clone()]);
    cert.record(
        "gram",
        op_norm(&(m_in.adjoint() * &m_in - m_out.adjoint() * &m_out)),
        1e-8,
    );

    // Ỹ_i: G^{1/2}h ↦ G^{1/2}T_i*h on ran G^{1/2}, and Y_j = Π_{i≠j} Ỹ_i*.
    let gamma_pinv = linalg::pinv(&gamma, 0.5 * tol::RANK.sqrt());
    let mut ys = vec![identity(g); n];
    for i in (0..n).filter(|&i| i != j) {
        let yi = &gamma * tuple.op(i).adjoint() * &gamma_pinv;
        let iso = op_norm(&(yi.adjoint() * &yi - identity(g)));
        let co = op_norm(&(&yi * yi.adjoint() - identity(g)));
        cert.record(format!("ytilde_unitary[{}]", i + 1), iso.max(co), 1e-8);
        ys[i] = yi;
    }
    let mut yj = identity(g);
    for i in (0..n).filter(|&i| i != j) {
        yj *= ys[i].adjoint();
    }
    ys[j] = yj;
    let vs: Vec<ComplexMatrix> = (0..n)
        .map(|i| linalg::block_diag(&[wset.w[i].clone(), ys[i].clone()]))
        .collect();

    // M̃ = ⋁ V^{*α} ℳ, grown breadth-first; R is extended by R V_i* = V_i* R.
    let scale = op_norm(&m_in).max(1.0);
    let rank_tol = 1e-9 * scale;
    let mut span_in = m_in.clone();
    let mut span_out = m_out.clone();
    let mut frontier = (m_in.clone(), m_out.clone());
    let mut dim = linalg::range_basis(&span_in, rank_tol).ncols();
    let bound = r + g;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut new_in = Vec::new();
        let mut new_out = Vec::new();
        for i in (0..n).filter(|&i| i != j) {
            let va = vs[i].adjoint();
            new_in.push(&va * &frontier.0);
            new_out.push(&va * &frontier.1);
        }
        if new_in.is_empty() {
            break;
        }
        let fin = linalg::hstack(&new_in);
        let fout = linalg::hstack(&new_out);
        span_in = linalg::hstack(&[span_in, fin.clone()]);
        span_out = linalg::hstack(&[span_out, fout.clone()]);
        let grown = linalg::range_basis(&span_in, rank_tol).ncols();
        if grown > bound {
            return Err(Error::SubspaceGrowthDiverged {
                dimension: grown,
                bound,
            });
        }
        if grown == dim {
            break;
        }
        if rounds > bound + 1 {
            return Err(Error::SubspaceGrowthDiverged {
                dimension: grown,
                bound,
            });
        }
        dim = grown;
        frontier = (fin, fout);
    }
    cert.note("mtilde_dim", dim as f64);
    cert.note("mtilde_rounds", rounds as f64);

    cert.record(
        "extended_gram",
        op_norm(&(span_in.adjoint() * &span_in - span_out.adjoint() * &span_out)),
        1e-8,
    );
    let rmat = &span_out * linalg::pinv(&span_in, rank_tol);
    cert.record("reproduce", op_norm(&(&rmat * &m_in - &m_out)), 1e-8);
    cert.record("contraction", (op_norm(&rmat) - 1.0).max(0.0), 1e-8);
    for (i, v) in vs.iter().enumerate() {
        cert.record(
            format!("commute[{}]", i + 1),
            linalg::commutator_norm(&rmat, v),
            1e-8,
        );
    }
    let real = TransferRealization::from_matrix(&rmat, r)?;

    // QX* = AQ + Σ_{k≤N} B D^k C Q P_T^{*(k+1)}, with remainder
    // B D^{N+1} G P_T^{*(N+2)} bounded by ‖P_T^{N+2}‖.
    let mut acc = &real.a * delta;
    let mut dk_c = real.c.clone();
    let mut q_pk = delta * p_adj;
    for _ in 0..=degree {
        acc += &real.b * &dk_c * &q_pk;
        dk_c = &real.d * dk_c;
        q_pk *= p_adj;
    }
    let eq_res = op_norm(&(delta * x_adj - acc));
    cert.record("transfer_identity", eq_res, 1e-8 + tail_n2);
    cert.note(
        "d_power_tail",
        op_norm(&real.d).powi(degree as i32 + 1),
    );
    Ok((real, cert))
}

/// `‖ΠX* − M_Θ*Π‖` over all blocks but the top one, with `M_Θ*` applied
/// through the stored Taylor coefficients.
pub fn intertwining_defect(dilation: &DilationResult, x: &ComplexMatrix, lift: &LiftResult) -> f64 {
    let n = dilation.degree;
    let blocks = (0..=n)
        .map(|k| dilation.block(k))
        .collect::<Vec<_>>();
    let last_nonzero = blocks
        .iter()
        .rposition(|b| b.iter().any(|z| z.norm() > 0.0))
        .unwrap_or(0);
    let adj: Vec<ComplexMatrix> = lift.theta.iter().map(|t| t.adjoint()).collect();
    let x_adj = x.adjoint();
    let rows: Vec<ComplexMatrix> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut r = &blocks[k] * &x_adj;
            let top = last_nonzero.min(n);
            for (a, b) in adj.iter().zip(blocks.get(k..=top).unwrap_or_default()) {
                r -= a * b;
            }
            r
        })
        .collect();
    if rows.is_empty() {
        return 0.0;
    }
    op_norm(&linalg::vstack(&rows))
}

/// `Σ_k ‖(ΘΦ − ΦΘ)_k‖` over degrees `0..=N`: a bound for the norm of the
/// commutator of the finite sections of `M_Θ` and `M_Φ`.
pub fn symbol_commutator_bound(theta: &[ComplexMatrix], phi: &[ComplexMatrix], degree: usize) -> f64 {
    let left = hardy::convolve(theta, phi, degree);
    let right = hardy::convolve(phi, theta, degree);
    left.iter().zip(&right).map(|(a, b)| op_norm(&(a - b))).sum()
}

/// Number of circle samples used for the contractivity check.
const THETA_GRID: usize = 257;

/// Residuals: `intertwining` (`ΠX* = M_Θ*Π`, edge excluded),
/// `commutation[i]` (`M_Θ M_{Φ_i} = M_{Φ_i} M_Θ` on the truncation) and
/// `contractive` (`sup ‖Θ(z)‖ − 1` over a refined circle grid, clipped at 0).
pub fn verify_lift(dilation: &DilationResult, x: &ComplexMatrix, lift: &LiftResult, tol: f64) -> Certificate {
    let mut cert = Certificate::new();
    if lift.dim_e() != dilation.dim_e() || lift.degree != dilation.degree {
        cert.record("shape", f64::INFINITY, tol);
        return cert;
    }
    cert.record("intertwining", intertwining_defect(dilation, x, lift), tol);
    let triple = &dilation.triple;
    for i in 0..triple.n() {
        let (a, b) = triple.phi_coefficients(i);
        cert.record(
            format!("commutation[{}]", i + 1),
            symbol_commutator_bound(&lift.theta, &[a, b], lift.degree),
            tol,
        );
    }
    let (sup, grid_sup) = theta_sup(lift, THETA_GRID);
    cert.record("contractive", (sup - 1.0).max(0.0), tol);
    cert.note("theta_sup", sup);
    cert.note("theta_sup_grid", grid_sup);
    cert
}

/// `(refined, grid)` estimates of `sup_{|z|=1} ‖Θ(z)‖` from the
/// realizations.
pub fn theta_sup(lift: &LiftResult, grid: usize) -> (f64, f64) {
    let reduced: Vec<TransferRealization> = lift
        .realizations
        .iter()
        .map(|r| r.adjoint().reachable())
        .collect();
    let f = |t: f64| {
        let z = Complex64::from_polar(1.0, t);
        reduced
            .iter()
            .map(|r| r.eval(z).map(|m| op_norm(&m)).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    };
    let r = circle::maximize(f, grid, 3);
    (r.refined_max, r.grid_max)
}

/// For a multiplier commuting with a class BCL tuple, checks that every
/// Taylor coefficient is block diagonal with respect to `ℰ = ⊕ ran P_i` and
/// returns the restricted symbols `Θ_i` (coefficients per summand).
pub fn commutant_block_structure(
    triple: &BclTriple,
    theta: &[ComplexMatrix],
    tol: f64,
) -> Result<Vec<Vec<ComplexMatrix>>> {
    let form = hardy::bcl_block_form(triple, tol.max(tol::UNITARY))?;
    let m = triple.dim_e();
    for (k, c) in theta.iter().enumerate() {
        if c.shape() != (m, m) {
            return Err(Error::ShapeMismatch(format!("coefficient {k} has wrong shape")));
        }
        for p in triple.projections() {
            let q = identity(m) - p;
            let off = op_norm(&(&q * c * p)).max(op_norm(&(p * c * &q)));
            if off > tol {
                return Err(Error::NotBlockDiagonal {
                    coefficient: k,
                    residual: off,
                });
            }
        }
    }
    let degree = theta.len().saturating_sub(1);
    for i in 0..triple.n() {
        let (a, b) = triple.phi_coefficients(i);
        let r = symbol_commutator_bound(theta, &[a, b], degree);
        if r > tol {
            return Err(Error::NotACommutant {
                residual: r,
                tolerance: tol,
            });
        }
    }
    Ok(form
        .bases
        .iter()
        .map(|e| theta.iter().map(|c| e.adjoint() * c * e).collect())
        .collect())
}

/// Degree of the dense finite sections used by [`commutant_defect_check`].
const DEFECT_CHECK_DEGREE: usize = 12;

/// For a multiplier in the commutant of a class BCL tuple: the truncated
/// `G_i = P̂_i (I − M_Θ M_Θ*) P̂_i` satisfy `I − M_Θ M_Θ* = Σ G_i` and
/// `M_{Φ_j} G_i M_{Φ_j}* = G_i` for `i ≠ j`. Both identities are exact on
/// finite sections, so no edge is excluded.
pub fn commutant_defect_check(triple: &BclTriple, theta: &[ComplexMatrix], tol: f64) -> Certificate {
    let degree = theta.len().saturating_sub(1).min(DEFECT_CHECK_DEGREE);
    let m = triple.dim_e();
    let size = (degree + 1) * m;
    let mt = TruncatedHardyOp::from_symbol(theta.to_vec(), degree).matrix();
    let e = identity(size) - &mt * mt.adjoint();
    let lifted: Vec<ComplexMatrix> = triple
        .projections()
        .iter()
        .map(|p| linalg::block_diag(&vec![p.clone(); degree + 1]))
        .collect();
    let gs: Vec<ComplexMatrix> = lifted.iter().map(|p| p * &e * p).collect();
    let mut cert = Certificate::new();
    let sum = gs.iter().fold(zeros(size, size), |acc, g| acc + g);
    cert.record("sum", op_norm(&(&e - sum)), tol);
    for j in 0..triple.n() {
        let phi = triple.mult_op(j, degree).matrix();
        for (i, g) in gs.iter().enumerate() {
            if i != j {
                let r = &phi * g * phi.adjoint() - g;
                cert.record(format!("invariance[{},{}]", i + 1, j + 1), op_norm(&r), tol);
            }
        }
    }
    cert
}

/// Everything produced by lifting `X` end to end.
#[derive(Debug, Clone)]
pub struct LiftPipeline {
    pub construction: BclConstruction,
    pub dilation: DilationResult,
    pub decomposition: DefectDecomposition,
    pub lift: LiftResult,
    pub verification: Certificate,
}

/// Dilation, defect decomposition, lift and verification in one call.
pub fn lift_commutant(
    tuple: &ContractionTuple,
    x: &ComplexMatrix,
    tol: f64,
    degree: Option<usize>,
) -> Result<LiftPipeline> {
    require_commutant(tuple, x, tol)?;
    let (construction, dilation) = crate::dilation::dilate(tuple, tol, degree)?;
    let decomposition = defect_decomposition(tuple, x, tol, None)?;
    let lift = build_lift(tuple, x, &construction, &dilation, &decomposition)?;
    let verification = verify_lift(&dilation, x, &lift, tol);
    Ok(LiftPipeline {
        construction,
        dilation,
        decomposition,
        lift,
        verification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, real_matrix, scalar};

    fn s(x: f64) -> ComplexMatrix {
        scalar(c64(x, 0.0))
    }

    fn half_one() -> ContractionTuple {
        ContractionTuple::new(vec![s(0.5), s(1.0)]).unwrap()
    }

    #[test]
    fn commutant_examples() {
        let t = half_one();
        assert!(commutant_check(&t, &identity(1), 1e-12));
        assert!(commutant_check(&t, &t.product(), 1e-12));
        assert!(!commutant_check(&t, &s(1.5), 1e-12));
        let a = real_matrix(2, 2, &[0.5, 0.0, 0.0, 0.25]);
        let b = real_matrix(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let t2 = ContractionTuple::new(vec![a, b]).unwrap();
        let x = real_matrix(2, 2, &[0.0, 0.5, 0.0, 0.0]);
        assert!(!commutant_check(&t2, &x, 1e-12));
    }

    #[test]
    fn decomposition_scalar_examples() {
        let c = 0.6;
        for t in [half_one(), ContractionTuple::new(vec![s(0.0), s(1.0)]).unwrap()] {
            let d = defect_decomposition(&t, &s(c), 1e-10, None).unwrap();
            assert!((d.g[0][(0, 0)].re - (1.0 - c * c)).abs() < 1e-12);
            assert!(d.g[1][(0, 0)].norm() < 1e-12);
            assert!(d.certificate.passed());
        }
        let d = defect_decomposition(&half_one(), &identity(1), 1e-10, None).unwrap();
        assert!(d.g.iter().all(|g| g.norm() == 0.0));
    }

    #[test]
    fn decomposition_rejects_non_commutant() {
        let a = real_matrix(2, 2, &[0.5, 0.0, 0.0, 0.25]);
        let t = ContractionTuple::new(vec![a, identity(2)]).unwrap();
        let x = real_matrix(2, 2, &[0.0, 0.5, 0.0, 0.0]);
        assert!(matches!(
            defect_decomposition(&t, &x, 1e-10, None),
            Err(Error::NotACommutant { .. })
        ));
    }

    #[test]
    fn intertwiner_flip() {
        let w = TransferRealization::new(s(0.0), s(1.0), s(1.0), s(0.0)).unwrap();
        let u = scalar(Complex64::from_polar(1.0, 1.1));
        let y = intertwiner_y(&w, &u, 1e-10).unwrap();
        assert!((y.y[(0, 0)] - u[(0, 0)]).norm() < 1e-14);
        // τ_W(z) = z.
        let z = c64(0.3, -0.5);
        assert!((w.eval(z).unwrap()[(0, 0)] - z).norm() < 1e-15);
    }

    #[test]
    fn intertwiner_identity_realization() {
        let w = TransferRealization::new(s(1.0), s(0.0), s(0.0), s(1.0)).unwrap();
        let u = scalar(Complex64::from_polar(1.0, 0.4));
        let y = intertwiner_y(&w, &u, 1e-10).unwrap();
        assert_eq!(y.y[(0, 0)], c64(0.0, 0.0));
        assert_eq!(y.basis.ncols(), 0);
        assert_eq!(w.eval(c64(0.9, 0.0)).unwrap()[(0, 0)], c64(1.0, 0.0));
    }

    #[test]
    fn intertwiner_rejects_non_unitary() {
        let w = TransferRealization::new(s(0.5), s(0.0), s(0.0), s(0.5)).unwrap();
        assert!(matches!(
            intertwiner_y(&w, &s(1.0), 1e-10),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn lift_of_one_third() {
        let t = half_one();
        let x = s(1.0 / 3.0);
        let p = lift_commutant(&t, &x, 1e-10, None).unwrap();
        assert!((p.decomposition.g[0][(0, 0)].re - 8.0 / 9.0).abs() < 1e-12);
        assert!(p.decomposition.g[1][(0, 0)].norm() < 1e-12);
        assert!(p.lift.certificate.passed(), "{:?}", p.lift.certificate.failures().collect::<Vec<_>>());
        assert!(p.verification.passed(), "{:?}", p.verification);
        assert!(p.verification.get("intertwining").unwrap().value <= 1e-6);

        // Oracle: solve ΠX* = M_Θ*Π for the scalar coefficients directly.
        // Π h = c (1, 1/2, 1/4, …) with c = √3/2, so block k reads
        // c 2^{-k} / 3 = Σ_m conj(Θ_m) c 2^{-(k+m)}, i.e. Σ_m conj(Θ_m) 2^{-m}
        // = 1/3, which is Θ(1/2) = 1/3.
        let at_half = p.lift.eval(c64(0.5, 0.0)).unwrap()[(0, 0)];
        assert!((at_half - c64(1.0 / 3.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn lift_of_identity_and_zero() {
        let t = half_one();
        let p = lift_commutant(&t, &identity(1), 1e-10, None).unwrap();
        assert!((p.lift.theta[0][(0, 0)] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!(p.lift.theta[1..].iter().all(|c| c.norm() < 1e-12));
        assert!(p.verification.passed());

        let p = lift_commutant(&t, &s(0.0), 1e-10, None).unwrap();
        assert!(p.lift.theta.iter().all(|c| c.norm() < 1e-12));
        assert!(p.verification.entries.iter().all(|r| r.value < 1e-12));
    }

    #[test]
    fn shift_symbol_lifts_product() {
        let t = half_one();
        let x = t.product();
        let (construction, dilation) = crate::dilation::dilate(&t, 1e-10, None).unwrap();
        assert_eq!(construction.ranks, vec![1, 0]);
        let flip = TransferRealization::new(s(0.0), s(1.0), s(1.0), s(0.0)).unwrap();
        let empty = TransferRealization::new(zeros(0, 0), zeros(0, 0), zeros(0, 0), zeros(0, 0)).unwrap();
        let lift = LiftResult::from_realizations(vec![flip, empty], dilation.degree);
        assert!((lift.theta[1][(0, 0)] - c64(1.0, 0.0)).norm() < 1e-15);
        let cert = verify_lift(&dilation, &x, &lift, 1e-8);
        assert!(cert.passed(), "{cert:?}");
    }

    #[test]
    fn block_structure_examples() {
        let t = half_one();
        let (c, _) = crate::dilation::dilate(&t, 1e-10, None).unwrap();
        let theta = vec![s(0.0), s(1.0)];
        let blocks = commutant_block_structure(&c.triple, &theta, 1e-10).unwrap();
        assert_eq!(blocks[0].len(), 2);
        assert_eq!(blocks[0][1][(0, 0)], c64(1.0, 0.0));
        assert_eq!(blocks[1][0].shape(), (0, 0));
    }
}
