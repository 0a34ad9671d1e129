//! Explicit isometric dilation of a class tuple by a BCL tuple of
//! multiplication operators, and the (n+1)-tuple dilation obtained by
//! adjoining a lifted commutant.
//!
//! For each `j` the unitaries `W_j^{(i)}` on the defect space of `T_j` are
//! fixed by `W_j^{(i)} D_{T_j} = D_{T_j} T_i*` (`i ≠ j`) and
//! `W_j^{(j)} = Π_{i≠j} W_j^{(i)*}`. The coefficient space is
//! `ℰ = ⊕_j 𝒟_{T_j}` with `U_i* = ⊕_j W_j^{(i)}` and `P_i` the coordinate
//! projection onto the `i`-th summand. The dilation map sends `h` to
//! `Σ_k z^k L P_T^{*k} h` where `L h = (D_{T_1}h, D_{T_2}T_1*h, …)`.

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::hardy::{self, BclTriple, TruncatedHardyOp};
use crate::lifting::{self, LiftResult};
use crate::linalg::{self, identity, op_norm, zeros, ComplexMatrix};
use crate::opcore::{self, ContractionTuple, Defect};
use crate::tol;

/// The unitaries `W_j^{(1)}, …, W_j^{(n)}` on `𝒟_{T_j}` for one `j`.
#[derive(Debug, Clone)]
pub struct WijSet {
    pub j: usize,
    pub defect: Defect,
    /// `B_j* D_{T_j}`: the defect operator in coordinates of its range.
    pub coords: ComplexMatrix,
    /// `w[i]` is `W_j^{(i)}` in the basis `B_j`.
    pub w: Vec<ComplexMatrix>,
    pub certificate: Certificate,
}

impl WijSet {
    pub fn rank(&self) -> usize {
        self.defect.rank()
    }
}

/// Builds `W_j^{(i)}` for every `i` (0-based `j`).
///
/// Each off-diagonal map is obtained by least squares on the defect range
/// and polished to the nearest unitary; a least-squares residual above
/// `1e-8` means the input is not in the class.
pub fn build_wij(tuple: &ContractionTuple, j: usize) -> Result<WijSet> {
    let n = tuple.len();
    if j >= n {
        return Err(Error::InvalidParameter(format!("index {j} out of range")));
    }
    let defect = opcore::defect(tuple.op(j))?;
    let coords = defect.coordinates();
    let r = defect.rank();
    let mut cert = Certificate::new();
    cert.note("rank", r as f64);
    let pinv = linalg::pinv(&coords, 0.5 * tol::RANK.sqrt());
    let mut w = vec![zeros(r, r); n];
    for i in (0..n).filter(|&i| i != j) {
        let target = &coords * tuple.op(i).adjoint();
        let raw = &target * &pinv;
        let ls = op_norm(&(&raw * &coords - &target));
        if ls > tol::LEAST_SQUARES {
            return Err(Error::NotInClass(format!(
                "D_T{} T{}* is not an isometric image of D_T{} (residual {ls:e})",
                j + 1,
                i + 1,
                j + 1
            )));
        }
        cert.record(format!("least_squares[{}]", i + 1), ls, tol::LEAST_SQUARES);
        cert.record(
            format!("unitary_before_polish[{}]", i + 1),
            linalg::unitary_residual(&raw),
            tol::LEAST_SQUARES,
        );
        let polished = linalg::closest_unitary(&raw);
        cert.record(
            format!("intertwine[{}]", i + 1),
            op_norm(&(&polished * &coords - &target)),
            tol::LEAST_SQUARES,
        );
        w[i] = polished;
    }
    let mut wjj = identity(r);
    for i in (0..n).filter(|&i| i != j) {
        wjj *= w[i].adjoint();
    }
    w[j] = wjj;

    let product = w.iter().fold(identity(r), |acc, x| acc * x);
    cert.record("product", op_norm(&(product - identity(r))), tol::LEAST_SQUARES);
    let diag = &w[j] * &coords * tuple.product().adjoint() - &coords * tuple.op(j).adjoint();
    cert.record("diagonal", op_norm(&diag), tol::LEAST_SQUARES);
    for a in 0..n {
        for b in a + 1..n {
            cert.record(
                format!("commute[{},{}]", a + 1, b + 1),
                linalg::commutator_norm(&w[a], &w[b]),
                tol::LEAST_SQUARES,
            );
        }
    }
    if !cert.passed() {
        let worst = cert.failures().next().map(|f| f.name.clone()).unwrap_or_default();
        return Err(Error::NotInClass(format!("W_{} check {worst} failed", j + 1)));
    }
    Ok(WijSet {
        j,
        defect,
        coords,
        w,
        certificate: cert,
    })
}

/// The BCL triple built from a class tuple, together with the per-summand
/// data needed by the dilation map and the commutant lift.
#[derive(Debug, Clone)]
pub struct BclConstruction {
    pub triple: BclTriple,
    pub wij: Vec<WijSet>,
    /// Start of summand `j` inside ℰ.
    pub offsets: Vec<usize>,
    pub ranks: Vec<usize>,
    pub certificate: Certificate,
}

pub fn build_bcl_from_tuple(tuple: &ContractionTuple, tol: f64) -> Result<BclConstruction> {
    let report = opcore::class_membership(tuple, tol)?;
    if !report.is_member {
        return Err(Error::NotInClass(format!(
            "max pairwise Szego residual {:e}, spectral radius of product {}",
            report.max_residual(),
            report.product_spectral_radius
        )));
    }
    let n = tuple.len();
    let wij = (0..n)
        .map(|j| build_wij(tuple, j))
        .collect::<Result<Vec<_>>>()?;
    let ranks: Vec<usize> = wij.iter().map(|w| w.rank()).collect();
    let mut offsets = Vec::with_capacity(n);
    let mut acc = 0;
    for &r in &ranks {
        offsets.push(acc);
        acc += r;
    }
    let dim_e = acc;
    if dim_e == 0 {
        return Err(Error::NotInClass("all defect spaces are trivial".into()));
    }
    let unitaries: Vec<ComplexMatrix> = (0..n)
        .map(|i| {
            let blocks: Vec<ComplexMatrix> = wij.iter().map(|w| w.w[i].adjoint()).collect();
            linalg::block_diag(&blocks)
        })
        .collect();
    let projections: Vec<ComplexMatrix> = (0..n)
        .map(|i| {
            let mut p = zeros(dim_e, dim_e);
            for k in offsets[i]..offsets[i] + ranks[i] {
                p[(k, k)] = linalg::ONE;
            }
            p
        })
        .collect();
    let triple = BclTriple::new(dim_e, unitaries, projections)?;
    let mut cert = Certificate::new();
    for w in &wij {
        cert.absorb(&format!("w{}.", w.j + 1), &w.certificate);
        if w.rank() == 0 {
            cert.note(format!("degenerate_defect[{}]", w.j + 1), 1.0);
        }
    }
    let bcl = hardy::validate_bcl(&triple, tol::LEAST_SQUARES)?;
    if !hardy::bcl_in_class(&bcl) {
        return Err(Error::NotInClass(
            "assembled triple fails the BCL class conditions".into(),
        ));
    }
    cert.absorb("bcl.", &bcl);
    Ok(BclConstruction {
        triple,
        wij,
        offsets,
        ranks,
        certificate: cert,
    })
}

/// Truncated dilation map and its certificate.
#[derive(Debug, Clone)]
pub struct DilationResult {
    pub triple: BclTriple,
    /// Isometry of `𝒟_{P_T}` into ℰ with `V D_{P_T} = L`; zero on the
    /// complement of the defect space.
    pub v: ComplexMatrix,
    /// `L h = (D_{T_1}h, D_{T_2}T_1*h, …)` in defect coordinates.
    pub l: ComplexMatrix,
    /// `((N+1)·dim ℰ) × dim ℋ`; block `k` is `L P_T^{*k}`.
    pub pi: ComplexMatrix,
    pub degree: usize,
    /// `‖P_T^N‖`.
    pub tail: f64,
    pub certificate: Certificate,
}

impl DilationResult {
    pub fn dim_e(&self) -> usize {
        self.triple.dim_e()
    }

    pub fn block(&self, k: usize) -> ComplexMatrix {
        let m = self.dim_e();
        self.pi.rows(k * m, m).into_owned()
    }
}

/// Threshold below which the remaining blocks of the dilation map are
/// taken to be zero.
const EARLY_STOP: f64 = 1e-14;

/// Assembles `V`, the truncated dilation map `Π`, and certifies isometry,
/// intertwining and factorization. With `degree = None` the smallest `N`
/// with `‖P_T^N‖ ≤ 1e-10` is used.
pub fn dilation_isometry(
    tuple: &ContractionTuple,
    construction: &BclConstruction,
    degree: Option<usize>,
) -> Result<DilationResult> {
    let p = tuple.product();
    let (degree, tail) = match degree {
        None => hardy::adaptive_degree(&p, tol::TAIL, tol::MAX_DEGREE)?,
        Some(n) => {
            let tail = hardy::power_tail(&p, n);
            if tail > tol::TAIL {
                return Err(Error::TruncationInsufficient { degree: n, tail });
            }
            (n, tail)
        }
    };
    let triple = construction.triple.clone();
    let m = triple.dim_e();
    let d = tuple.dim();

    let mut rows = Vec::with_capacity(tuple.len());
    let mut prefix_adj = identity(d);
    for (j, w) in construction.wij.iter().enumerate() {
        rows.push(&w.coords * &prefix_adj);
        prefix_adj = &prefix_adj * tuple.op(j).adjoint();
    }
    let l = linalg::vstack(&rows);

    let dp = opcore::defect(&p)?;
    let v = &l * linalg::pinv(&dp.d, 0.5 * tol::RANK.sqrt());

    let p_adj = p.adjoint();
    let mut pi = zeros((degree + 1) * m, d);
    let mut block = l.clone();
    let mut stopped_at = degree + 1;
    for k in 0..=degree {
        if op_norm(&block) <= EARLY_STOP {
            stopped_at = k;
            break;
        }
        pi.rows_mut(k * m, m).copy_from(&block);
        block = &block * &p_adj;
    }

    let mut cert = construction.certificate.clone();
    cert.note("degree", degree as f64);
    cert.note("tail", tail);
    cert.note("dim_e", m as f64);
    cert.note("blocks_assembled", stopped_at as f64);

    let gap = identity(d) - &p * &p_adj;
    cert.record("gram", op_norm(&(l.adjoint() * &l - &gap)), 1e-10);
    cert.record("v_reproduces_l", op_norm(&(&v * &dp.d - &l)), tol::LEAST_SQUARES);
    let vb = &v * &dp.basis;
    cert.record(
        "v_isometry",
        op_norm(&(vb.adjoint() * &vb - identity(dp.rank()))),
        tol::LEAST_SQUARES,
    );

    let pipi = pi.adjoint() * &pi;
    cert.record(
        "isometry",
        op_norm(&(pipi - identity(d))),
        tail * tail + 1e-10,
    );
    for i in 0..triple.n() {
        let r = intertwining_residual(&pi, &tuple.op(i).adjoint(), &triple.mult_op(i, degree));
        cert.record(format!("intertwining[{}]", i + 1), r, 1e-6);
    }
    let product = triple.symbol_product();
    let mut fact = 0.0;
    for (k, c) in product.iter().enumerate() {
        let target = if k == 1 { identity(m) } else { zeros(m, m) };
        fact += op_norm(&(c - target));
    }
    cert.record("factorization", fact, 1e-12);

    Ok(DilationResult {
        triple,
        v,
        l,
        pi,
        degree,
        tail,
        certificate: cert,
    })
}

/// `‖Π A − M*Π‖` over all blocks except the top one, where the finite
/// section of `M*` is missing the contribution from degree `N+1`.
pub fn intertwining_residual(pi: &ComplexMatrix, a: &ComplexMatrix, op: &TruncatedHardyOp) -> f64 {
    let m = op.dim_e();
    let keep = op.degree() * m;
    let lhs = pi * a;
    let rhs = op.apply_adjoint(pi);
    op_norm(&(lhs - rhs).rows(0, keep).into_owned())
}

/// Builds the BCL triple and the dilation map in one call.
pub fn dilate(
    tuple: &ContractionTuple,
    tol: f64,
    degree: Option<usize>,
) -> Result<(BclConstruction, DilationResult)> {
    let construction = build_bcl_from_tuple(tuple, tol)?;
    let result = dilation_isometry(tuple, &construction, degree)?;
    Ok((construction, result))
}

/// A vector of the space `H²_ℰ ⊕ ℓ²(𝒟_C)` on which the minimal isometric
/// dilation of `C = M_Θ` acts. Defect components `D_C f_k` are stored through
/// their preimages `f_k`; the inner product of two defect components is
/// `⟨f, g⟩ − ⟨Cf, Cg⟩`. Columns represent independent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedVector {
    pub head: ComplexMatrix,
    pub layers: Vec<ComplexMatrix>,
}

/// The isometric dilation of `(T_1, …, T_n, X)`: the BCL tuple extended to the
/// defect layers of `M_Θ`, together with the minimal isometric dilation `Y`
/// of `M_Θ`.
#[derive(Debug, Clone)]
pub struct NPlusOneDilation {
    pub dilation: DilationResult,
    pub lift: LiftResult,
    phis: Vec<TruncatedHardyOp>,
    pub certificate: Certificate,
}

impl NPlusOneDilation {
    /// `Γh = (Πh, 0, 0, …)`.
    pub fn embed(&self, h: &ComplexMatrix) -> ExtendedVector {
        ExtendedVector {
            head: &self.dilation.pi * h,
            layers: Vec::new(),
        }
    }

    /// `Y(h, d₀, d₁, …) = (Ch, D_C h, d₀, d₁, …)`.
    pub fn apply_y(&self, x: &ExtendedVector) -> ExtendedVector {
        let mut layers = Vec::with_capacity(x.layers.len() + 1);
        layers.push(x.head.clone());
        layers.extend(x.layers.iter().cloned());
        ExtendedVector {
            head: self.lift.apply_m_theta(&x.head),
            layers,
        }
    }

    /// `Ṽ_i(h, D_C f₀, …) = (M_{Φ_i}h, D_C M_{Φ_i}f₀, …)`; well defined since
    /// `‖D_C M_{Φ_i} f‖ = ‖D_C f‖` when `M_{Φ_i}` is an isometry commuting
    /// with `C`.
    pub fn apply_v(&self, i: usize, x: &ExtendedVector) -> ExtendedVector {
        ExtendedVector {
            head: self.phis[i].apply(&x.head),
            layers: x.layers.iter().map(|f| self.phis[i].apply(f)).collect(),
        }
    }

    /// Gram matrix `[⟨x_b, y_a⟩]` between the columns of `y` and `x`.
    pub fn inner(&self, x: &ExtendedVector, y: &ExtendedVector) -> ComplexMatrix {
        let mut g = y.head.adjoint() * &x.head;
        for (fx, fy) in x.layers.iter().zip(&y.layers) {
            let cx = self.lift.apply_m_theta(fx);
            let cy = self.lift.apply_m_theta(fy);
            g += fy.adjoint() * fx - cy.adjoint() * cx;
        }
        g
    }

    /// `Γ*x = Π* head(x)`, since `Γh` has no defect components.
    pub fn compress(&self, x: &ExtendedVector) -> ComplexMatrix {
        self.dilation.pi.adjoint() * &x.head
    }
}

/// Largest power of `Y` and total degree in the `Ṽ_i` used for the
/// compression identities `T^α X^k = Γ* Ṽ^α Y^k Γ`.
const COMPRESSION_DEPTH: usize = 2;

/// Dilates `(T_1, …, T_n, X)` for a commutant `X` of a class tuple.
///
/// Pipeline: BCL dilation, commutant lift `M_Θ`, then the minimal isometric
/// dilation `Y` of `M_Θ` on `H²_ℰ ⊕ ℓ²(𝒟_{M_Θ})` with `Ṽ_i = M_{Φ_i} ⊕ Z_i`,
/// `Z_i D_{M_Θ} = D_{M_Θ} M_{Φ_i}`. The Hardy budget
/// is enlarged so that the shifted test vectors stay clear of the truncation
/// edge.
pub fn dilate_n_plus_one(
    tuple: &ContractionTuple,
    x: &ComplexMatrix,
    tol: f64,
    degree: Option<usize>,
) -> Result<NPlusOneDilation> {
    let (construction, first) = dilate(tuple, tol, degree)?;
    let decomposition = lifting::defect_decomposition(tuple, x, tol, None)?;
    let lift = lifting::build_lift(tuple, x, &construction, &first, &decomposition)?;
    // Room for the Ṽ_i and Y applications made by the certificate, each of
    // which spreads a vector by one degree or by the decay length of Θ.
    let decay = lift.decay_degree(1e-12);
    let needed = (first.degree + (COMPRESSION_DEPTH + 2) * (decay + 1)).min(4 * tol::MAX_DEGREE);
    let (dilation, lift) = if needed > first.degree {
        let wider = dilation_isometry(tuple, &construction, Some(needed))?;
        let lift = lifting::build_lift(tuple, x, &construction, &wider, &decomposition)?;
        (wider, lift)
    } else {
        (first, lift)
    };
    dilate_with_lift(tuple, x, dilation, lift, tol)
}

/// Builds and certifies the (n+1)-tuple dilation for a given lift.
pub fn dilate_with_lift(
    tuple: &ContractionTuple,
    x: &ComplexMatrix,
    dilation: DilationResult,
    lift: LiftResult,
    tol: f64,
) -> Result<NPlusOneDilation> {
    if lift.degree != dilation.degree || lift.dim_e() != dilation.dim_e() {
        return Err(Error::ShapeMismatch(
            "lift and dilation use different truncations".into(),
        ));
    }
    if !lifting::commutant_check(tuple, x, tol) {
        return Err(Error::NotACommutant {
            residual: lifting::commutant_residual(tuple, x),
            tolerance: tol,
        });
    }
    let n = tuple.len();
    let degree = dilation.degree;
    let phis: Vec<TruncatedHardyOp> = (0..n).map(|i| dilation.triple.mult_op(i, degree)).collect();
    let mut out = NPlusOneDilation {
        dilation,
        lift,
        phis,
        certificate: Certificate::new(),
    };
    let mut cert = Certificate::new();
    cert.note("degree", degree as f64);
    let d = tuple.dim();
    let gamma = out.embed(&identity(d));

    // Test family: Y^k Γ h and Ṽ_i Y^k Γ h for small k.
    let mut family = vec![gamma.clone()];
    for _ in 0..COMPRESSION_DEPTH {
        let next = out.apply_y(family.last().expect("nonempty"));
        family.push(next);
    }
    let mut extended = family.clone();
    for f in &family {
        for i in 0..n {
            extended.push(out.apply_v(i, &pad(f, COMPRESSION_DEPTH)));
        }
    }

    let edge = 1e-6;
    let mut y_iso: f64 = 0.0;
    let mut v_iso = vec![0.0f64; n];
    for f in &extended {
        let f = pad(f, COMPRESSION_DEPTH + 1);
        let g0 = out.inner(&f, &f);
        let yf = out.apply_y(&f);
        y_iso = y_iso.max(op_norm(&(out.inner(&yf, &yf) - &g0)));
        for (i, slot) in v_iso.iter_mut().enumerate() {
            let vf = out.apply_v(i, &f);
            *slot = slot.max(op_norm(&(out.inner(&vf, &vf) - &g0)));
        }
    }
    cert.record("y_isometry", y_iso, edge);
    for (i, r) in v_iso.iter().enumerate() {
        cert.record(format!("v_isometry[{}]", i + 1), *r, edge);
    }

    let mut comm_y: f64 = 0.0;
    let mut comm_v: f64 = 0.0;
    for f in &family {
        let f = pad(f, COMPRESSION_DEPTH + 1);
        for i in 0..n {
            let a = out.apply_v(i, &out.apply_y(&f));
            let b = out.apply_y(&out.apply_v(i, &f));
            comm_y = comm_y.max(extended_distance(&out, &a, &b));
            for k in i + 1..n {
                let a = out.apply_v(i, &out.apply_v(k, &f));
                let b = out.apply_v(k, &out.apply_v(i, &f));
                comm_v = comm_v.max(extended_distance(&out, &a, &b));
            }
        }
    }
    cert.record("commute_v_y", comm_y, edge);
    cert.record("commute_v_v", comm_v, edge);

    // Co-invariance of Γ(ℋ): Γ has no defect components, so Ṽ_i*Γ and Y*Γ
    // reduce to the first component.
    for i in 0..n {
        let r = intertwining_residual(
            &out.dilation.pi,
            &tuple.op(i).adjoint(),
            &out.phis[i],
        );
        cert.record(format!("intertwining_v[{}]", i + 1), r, edge);
    }
    cert.record(
        "intertwining_y",
        lifting::intertwining_defect(&out.dilation, x, &out.lift),
        edge,
    );

    // Compression identities T^α X^k = Γ* Ṽ^α Y^k Γ.
    let mut worst: f64 = 0.0;
    for k in 0..=COMPRESSION_DEPTH {
        let mut yk = gamma.clone();
        let mut xk = identity(d);
        for _ in 0..k {
            yk = out.apply_y(&yk);
            xk = &xk * x;
        }
        for alpha in multi_indices(n, COMPRESSION_DEPTH) {
            let mut v = yk.clone();
            let mut t = xk.clone();
            for (i, &a) in alpha.iter().enumerate() {
                for _ in 0..a {
                    v = out.apply_v(i, &v);
                    t = tuple.op(i) * t;
                }
            }
            worst = worst.max(op_norm(&(out.compress(&v) - t)));
        }
    }
    cert.record("compression", worst, edge);
    out.certificate = cert;
    Ok(out)
}

fn pad(x: &ExtendedVector, layers: usize) -> ExtendedVector {
    let mut out = x.clone();
    while out.layers.len() < layers {
        out.layers.push(zeros(x.head.nrows(), x.head.ncols()));
    }
    out
}

fn extended_distance(model: &NPlusOneDilation, a: &ExtendedVector, b: &ExtendedVector) -> f64 {
    let layers = a.layers.len().max(b.layers.len());
    let (a, b) = (pad(a, layers), pad(b, layers));
    let diff = ExtendedVector {
        head: &a.head - &b.head,
        layers: a.layers.iter().zip(&b.layers).map(|(x, y)| x - y).collect(),
    };
    op_norm(&model.inner(&diff, &diff)).sqrt()
}

/// All multi-indices in `n` variables of total degree at most `max`.
pub fn multi_indices(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; n]];
    for _ in 0..max {
        let mut next = Vec::new();
        for a in &out {
            for i in 0..n {
                let mut b = a.clone();
                b[i] += 1;
                next.push(b);
            }
        }
        next.sort();
        next.dedup();
        out.extend(next.into_iter().filter(|b| b.iter().sum::<usize>() <= max));
        out.sort();
        out.dedup();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, scalar};
    use num_complex::Complex64;

    fn s(x: f64) -> ComplexMatrix {
        scalar(c64(x, 0.0))
    }

    fn tuple(a: ComplexMatrix, b: ComplexMatrix) -> ContractionTuple {
        ContractionTuple::new(vec![a, b]).unwrap()
    }

    #[test]
    fn wij_scalar_examples() {
        let t = tuple(s(0.5), s(1.0));
        let w = build_wij(&t, 0).unwrap();
        assert_eq!(w.rank(), 1);
        assert!((w.w[1][(0, 0)] - c64(1.0, 0.0)).norm() < 1e-14);
        assert!((w.w[0][(0, 0)] - c64(1.0, 0.0)).norm() < 1e-14);

        let t = tuple(s(0.0), s(1.0));
        let w = build_wij(&t, 1).unwrap();
        assert_eq!(w.rank(), 0);
        assert!(w.w.iter().all(|m| m.shape() == (0, 0)));
    }

    #[test]
    fn wij_rejects_non_member() {
        let t = tuple(s(0.5), s(0.5));
        assert!(matches!(build_wij(&t, 0), Err(Error::NotInClass(_))));
    }

    #[test]
    fn construction_of_half_and_one() {
        let t = tuple(s(0.5), s(1.0));
        let c = build_bcl_from_tuple(&t, 1e-10).unwrap();
        assert_eq!(c.triple.dim_e(), 1);
        assert_eq!(c.triple.unitary(0)[(0, 0)], c64(1.0, 0.0));
        assert_eq!(c.triple.unitary(1)[(0, 0)], c64(1.0, 0.0));
        assert_eq!(c.triple.projection(0)[(0, 0)], c64(1.0, 0.0));
        assert_eq!(c.triple.projection(1)[(0, 0)], c64(0.0, 0.0));
        let z = c64(0.3, 0.4);
        assert!((c.triple.phi(0, z)[(0, 0)] - z).norm() < 1e-15);
        assert!((c.triple.phi(1, z)[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn construction_of_zero_and_unimodular() {
        let u = Complex64::from_polar(1.0, 0.7);
        let t = tuple(s(0.0), scalar(u));
        let c = build_bcl_from_tuple(&t, 1e-10).unwrap();
        assert_eq!(c.triple.dim_e(), 1);
        // Φ₁(z) = ū z and Φ₂(z) = u; their product is z.
        let z = c64(0.6, -0.2);
        assert!((c.triple.phi(0, z)[(0, 0)] - u.conj() * z).norm() < 1e-14);
        assert!((c.triple.phi(1, z)[(0, 0)] - u).norm() < 1e-14);
    }

    #[test]
    fn dilation_of_half_and_one() {
        let t = tuple(s(0.5), s(1.0));
        let (_, d) = dilate(&t, 1e-10, Some(60)).unwrap();
        assert!(d.certificate.passed(), "{:?}", d.certificate.failures().collect::<Vec<_>>());
        for k in 0..=60 {
            let expected = 3f64.sqrt() / 2.0 * 0.5f64.powi(k as i32);
            assert!((d.pi[(k, 0)].re - expected).abs() < 1e-14);
        }
        assert!(d.certificate.get("isometry").unwrap().value <= 1e-10);
        // V D_{P_T} h = (√3/2 h) and ‖V D_{P_T} h‖ = ‖D_{P_T} h‖.
        let dp = 3f64.sqrt() / 2.0;
        assert!(((d.v[(0, 0)] * dp).re - dp).abs() < 1e-14);
    }

    #[test]
    fn dilation_of_zero_and_one() {
        let t = tuple(s(0.0), s(1.0));
        let (_, d) = dilate(&t, 1e-10, Some(1)).unwrap();
        assert_eq!(d.pi.shape(), (2, 1));
        assert_eq!(d.pi[(0, 0)], c64(1.0, 0.0));
        assert_eq!(d.pi[(1, 0)], c64(0.0, 0.0));
        assert_eq!(d.certificate.get("intertwining[1]").unwrap().value, 0.0);
        assert_eq!(d.certificate.get("intertwining[2]").unwrap().value, 0.0);
    }

    #[test]
    fn insufficient_degree_is_reported() {
        let t = tuple(s(0.5), s(1.0));
        let err = dilate(&t, 1e-10, Some(5)).unwrap_err();
        match err {
            Error::TruncationInsufficient { degree, tail } => {
                assert_eq!(degree, 5);
                assert!((tail - 0.5f64.powi(5)).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn multi_index_enumeration() {
        let m = multi_indices(2, 2);
        assert_eq!(m.len(), 6);
        assert!(m.contains(&vec![1, 1]));
        assert_eq!(multi_indices(3, 0), vec![vec![0, 0, 0]]);
    }
}
