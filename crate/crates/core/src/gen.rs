//! Seeded generators of class members, BCL triples and commutants.
//!
//! Identical inputs give bit-identical outputs: every generator draws from a
//! `ChaCha8Rng` seeded by the caller.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hardy::BclTriple;
use crate::lifting::TransferRealization;
use crate::linalg::{self, identity, op_norm, zeros, ComplexMatrix};
use crate::opcore::ContractionTuple;
use crate::variety::{self, Polynomial};

/// Margin keeping generated strict contractions at norm `≤ 1 − δ`.
pub const DELTA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    /// Blocks where one operator is a strict contraction and the rest are
    /// unitaries sharing its eigenbasis.
    DirectSum,
    /// Compression of a random BCL tuple to a co-invariant subspace of a
    /// truncated Hardy space.
    BclCompression,
    /// A one-dimensional direct sum.
    Scalar,
}

impl std::str::FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct_sum" => Ok(Self::DirectSum),
            "bcl_compression" => Ok(Self::BclCompression),
            "scalar" => Ok(Self::Scalar),
            other => Err(Error::InvalidParameter(format!("unknown generator kind {other:?}"))),
        }
    }
}

/// Generator parameters. For `DirectSum`, `dims` are the block sizes; for
/// `BclCompression`, `dims = [degree, number of seed vectors]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub seed: u64,
    pub n: usize,
    pub dims: Vec<usize>,
    pub kind: GenKind,
}

impl GenSpec {
    pub fn new(seed: u64, n: usize, dims: Vec<usize>, kind: GenKind) -> Self {
        Self { seed, n, dims, kind }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// A generated tuple together with the triple it was compressed from, if any.
#[derive(Debug, Clone)]
pub struct Generated {
    pub tuple: ContractionTuple,
    pub triple: Option<BclTriple>,
}

pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) / std::f64::consts::SQRT_2
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Unitary from the QR factorization of a complex Gaussian matrix, with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    if d == 0 {
        return zeros(0, 0);
    }
    let g = gaussian_matrix(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { linalg::ONE };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

fn random_phase(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// One direct-sum block of size `d`: unitaries `Q diag(e^{iφ}) Q*` on every
/// position except `pure_at`, which holds a polynomial in the first unitary
/// scaled to norm `s ∈ [0.3, 1 − δ]`.
fn direct_sum_block(d: usize, n: usize, pure_at: usize, rng: &mut impl Rng) -> Vec<ComplexMatrix> {
    let q = random_unitary(d, rng);
    let mut ops = Vec::with_capacity(n);
    let mut partner = None;
    for i in 0..n {
        if i == pure_at {
            ops.push(zeros(d, d));
            continue;
        }
        let diag = ComplexMatrix::from_diagonal(&linalg::ComplexVector::from_fn(d, |_, _| random_phase(rng)));
        let u = &q * diag * q.adjoint();
        partner.get_or_insert_with(|| u.clone());
        ops.push(u);
    }
    let base = partner.unwrap_or_else(|| {
        let diag = ComplexMatrix::from_diagonal(&linalg::ComplexVector::from_fn(d, |_, _| random_phase(rng)));
        &q * diag * q.adjoint()
    });
    let degree = rng.random_range(0..=2usize);
    let mut poly = zeros(d, d);
    let mut power = identity(d);
    for _ in 0..=degree {
        poly += &power * complex_gaussian(rng);
        power = &power * &base;
    }
    let norm = op_norm(&poly);
    if norm < 1e-3 {
        poly = base.clone();
    }
    let s = rng.random_range(0.3..=1.0 - DELTA);
    ops[pure_at] = &poly * Complex64::new(s / op_norm(&poly), 0.0);
    ops
}

/// Direct sum of blocks with sizes `spec.dims`; block `b` carries its strict
/// contraction at position `(b + 1) mod n`. Zero-sized blocks are skipped.
pub fn gen_direct_sum(spec: &GenSpec) -> Result<ContractionTuple> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::InvalidParameter("tuple length must be positive".into()));
    }
    if spec.dims.iter().sum::<usize>() == 0 {
        return Err(Error::InvalidParameter("total dimension must be positive".into()));
    }
    let mut rng = spec.rng();
    let mut blocks: Vec<Vec<ComplexMatrix>> = vec![Vec::new(); n];
    for (b, &d) in spec.dims.iter().enumerate() {
        let block = direct_sum_block(d, n, (b + 1) % n, &mut rng);
        if d == 0 {
            continue;
        }
        for (i, m) in block.into_iter().enumerate() {
            blocks[i].push(m);
        }
    }
    let ops = blocks.iter().map(|b| linalg::block_diag(b)).collect();
    ContractionTuple::new(ops)
}

/// `(diag(U₁, T₂), diag(T₁, U₂))` with commuting unitary/strict pairs.
pub fn gen_b20_pair(spec: &GenSpec) -> Result<ContractionTuple> {
    if spec.n != 2 || spec.kind != GenKind::DirectSum {
        return Err(Error::InvalidParameter(
            "pairs need kind direct_sum and n = 2".into(),
        ));
    }
    gen_direct_sum(spec)
}

/// Conjugates every operator by the same unitary.
pub fn conjugate(tuple: &ContractionTuple, u: &ComplexMatrix) -> Result<ContractionTuple> {
    let ops = tuple.ops().iter().map(|t| u * t * u.adjoint()).collect();
    ContractionTuple::new(ops)
}

/// BCL triple on `ℰ = ⊕_k ℰ_k` (`dim ℰ_k = summand_dims[k]`, one summand
/// per index) with `P_k` the projection onto `ℰ_k` and the `U_i`
/// block-diagonal: on each `ℰ_k` they are commuting unitaries whose product
/// is the identity. With `mix`, everything is conjugated by one random
/// unitary of ℰ.
pub fn gen_bcl_triple(seed: u64, summand_dims: &[usize], mix: bool) -> Result<BclTriple> {
    let n = summand_dims.len();
    let m: usize = summand_dims.iter().sum();
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("triple needs a nonzero coefficient space".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_summand: Vec<Vec<ComplexMatrix>> = vec![Vec::new(); n];
    for &d in summand_dims {
        let q = random_unitary(d, &mut rng);
        let mut phases = vec![vec![0.0; d]; n];
        for e in 0..d {
            let mut total = 0.0;
            for row in phases.iter_mut().take(n - 1) {
                let a = rng.random_range(0.0..std::f64::consts::TAU);
                row[e] = a;
                total += a;
            }
            phases[n - 1][e] = -total;
        }
        for (i, ph) in phases.iter().enumerate() {
            let diag = ComplexMatrix::from_diagonal(&linalg::ComplexVector::from_fn(d, |r, _| {
                Complex64::from_polar(1.0, ph[r])
            }));
            per_summand[i].push(&q * diag * q.adjoint());
        }
    }
    let mut unitaries: Vec<ComplexMatrix> = per_summand.iter().map(|b| linalg::block_diag(b)).collect();
    let mut projections = Vec::with_capacity(n);
    let mut offset = 0;
    for &d in summand_dims {
        let mut p = zeros(m, m);
        for k in offset..offset + d {
            p[(k, k)] = linalg::ONE;
        }
        offset += d;
        projections.push(p);
    }
    if mix {
        let v = random_unitary(m, &mut rng);
        for u in unitaries.iter_mut() {
            *u = &v * &*u * v.adjoint();
        }
        for p in projections.iter_mut() {
            *p = &v * &*p * v.adjoint();
        }
    }
    BclTriple::new(m, unitaries, projections)
}

/// Compresses the truncated `M_{Φ_i}` to the smallest subspace of
/// `ℰ`-valued polynomials of degree `≤ degree` that contains the columns of
/// `seeds` and is invariant under every `M_{Φ_i}*`.
pub fn compression_from_vectors(
    triple: &BclTriple,
    degree: usize,
    seeds: &ComplexMatrix,
) -> Result<ContractionTuple> {
    let size = (degree + 1) * triple.dim_e();
    if seeds.nrows() != size {
        return Err(Error::ShapeMismatch(format!(
            "seed vectors have length {}, truncated space has dimension {size}",
            seeds.nrows()
        )));
    }
    let ops: Vec<ComplexMatrix> = (0..triple.n()).map(|i| triple.mult_op(i, degree).matrix()).collect();
    let tol = 1e-10 * op_norm(seeds).max(1.0);
    let mut basis = linalg::range_basis(seeds, tol);
    if basis.ncols() == 0 {
        return Err(Error::DegenerateSubspace);
    }
    loop {
        let mut parts = vec![basis.clone()];
        parts.extend(ops.iter().map(|m| m.adjoint() * &basis));
        let grown = linalg::range_basis(&linalg::hstack(&parts), 1e-10);
        if grown.ncols() <= basis.ncols() {
            break;
        }
        basis = grown;
    }
    let compressed = ops.iter().map(|m| basis.adjoint() * m * &basis).collect();
    ContractionTuple::new(compressed)
}

/// Compression of a random BCL triple: `spec.dims = [degree, seed count]`.
pub fn gen_bn0_compression(triple: &BclTriple, spec: &GenSpec) -> Result<ContractionTuple> {
    let degree = spec.dims.first().copied().unwrap_or(1);
    let count = spec.dims.get(1).copied().unwrap_or(1);
    let mut rng = spec.rng();
    let seeds = gaussian_matrix((degree + 1) * triple.dim_e(), count, &mut rng);
    compression_from_vectors(triple, degree, &seeds)
}

/// `p(T) / max(1, ‖p(T)‖ + δ)`.
pub fn commutant_from_polynomial(tuple: &ContractionTuple, p: &Polynomial) -> Result<ComplexMatrix> {
    let m = variety::poly_eval_matrix(p, tuple)?;
    let scale = (op_norm(&m) + DELTA).max(1.0);
    Ok(m / Complex64::new(scale, 0.0))
}

/// Random polynomial of total degree `≤ max_degree` with complex Gaussian
/// coefficients on every monomial up to a randomly chosen degree.
pub fn random_polynomial(nvars: usize, max_degree: usize, rng: &mut impl Rng) -> Polynomial {
    let degree = rng.random_range(0..=max_degree);
    let mut p = Polynomial::zero(nvars);
    for alpha in monomials(nvars, degree) {
        p.add_term(alpha, complex_gaussian(rng)).expect("valid multi-index");
    }
    p
}

/// All multi-indices in `nvars` variables of total degree `≤ degree`, in
/// lexicographic order.
pub fn monomials(nvars: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, left: usize, budget: usize, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for k in 0..=budget {
            prefix.push(k);
            rec(prefix, left - 1, budget - k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), nvars, degree, &mut out);
    out
}

/// Commutant `p(T)/max(1, ‖p(T)‖ + δ)` for a seeded polynomial of degree ≤ 3.
pub fn gen_commutant(tuple: &ContractionTuple, seed: u64) -> Result<ComplexMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = random_polynomial(tuple.len(), 3, &mut rng);
    commutant_from_polynomial(tuple, &p)
}

/// Dispatches on `spec.kind`. `BclCompression` draws a triple with one
/// summand per index (sizes 1 or 2 for pairs, 1 otherwise) and returns it
/// alongside the compression.
pub fn generate(spec: &GenSpec) -> Result<Generated> {
    match spec.kind {
        GenKind::DirectSum => Ok(Generated {
            tuple: gen_direct_sum(spec)?,
            triple: None,
        }),
        GenKind::Scalar => {
            let scalar = GenSpec::new(spec.seed, spec.n, vec![1], GenKind::DirectSum);
            Ok(Generated {
                tuple: gen_direct_sum(&scalar)?,
                triple: None,
            })
        }
        GenKind::BclCompression => {
            if spec.n == 0 {
                return Err(Error::InvalidParameter("tuple length must be positive".into()));
            }
            let mut rng = spec.rng();
            let summands: Vec<usize> = (0..spec.n)
                .map(|_| if spec.n == 2 { rng.random_range(1..=2) } else { 1 })
                .collect();
            let triple = gen_bcl_triple(rng.random(), &summands, rng.random_bool(0.5))?;
            let inner = GenSpec::new(rng.random(), spec.n, spec.dims.clone(), spec.kind);
            let tuple = gen_bn0_compression(&triple, &inner)?;
            Ok(Generated {
                tuple,
                triple: Some(triple),
            })
        }
    }
}

/// Mixed supply of class members of length `n` and dimension `≤ max_dim`:
/// conjugated direct sums and compressions of BCL tuples.
pub fn random_member(seed: u64, n: usize, max_dim: usize) -> Result<ContractionTuple> {
    if max_dim == 0 || n == 0 {
        return Err(Error::InvalidParameter("need n ≥ 1 and max_dim ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if rng.random_bool(0.5) {
        let degree = if 2 * n <= max_dim { 1 } else { 0 };
        let count = rng.random_range(1..=2);
        let spec = GenSpec::new(rng.random(), n, vec![degree, count], GenKind::BclCompression);
        if let Ok(g) = generate(&spec) {
            if g.tuple.dim() <= max_dim {
                return Ok(g.tuple);
            }
        }
    }
    let blocks = rng.random_range(1..=n.min(max_dim));
    let mut dims = vec![1; blocks];
    let mut total = blocks;
    while total < max_dim && rng.random_bool(0.6) {
        let b = rng.random_range(0..blocks);
        dims[b] += 1;
        total += 1;
    }
    let spec = GenSpec::new(rng.random(), n, dims, GenKind::DirectSum);
    let tuple = gen_direct_sum(&spec)?;
    let u = random_unitary(tuple.dim(), &mut rng);
    conjugate(&tuple, &u)
}

/// Unitary realization commuting with `U ⊕ Y₀` for unitaries `U` on 𝒦 and
/// `Y₀` on 𝒢 that share a few eigenvalues.
#[derive(Debug, Clone)]
pub struct CommutingRealization {
    pub realization: TransferRealization,
    pub u: ComplexMatrix,
    pub y0: ComplexMatrix,
}

/// Assigns every basis vector of `𝒦 ⊕ 𝒢` one of up to three unimodular
/// eigenvalues, places an independent random unitary on each eigenspace and
/// conjugates by a random unitary of `𝒦` and of `𝒢`. Eigenspaces lying
/// entirely in `𝒢` give `D` a unitary part that `C` cannot reach.
pub fn gen_commuting_realization(seed: u64, dim_k: usize, dim_g: usize) -> Result<CommutingRealization> {
    if dim_k == 0 {
        return Err(Error::InvalidParameter("input space must be nonzero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = rng.random_range(1..=3usize);
    let lambdas: Vec<Complex64> = (0..classes).map(|_| random_phase(&mut rng)).collect();
    let total = dim_k + dim_g;
    let labels: Vec<usize> = (0..total).map(|_| rng.random_range(0..classes)).collect();
    let mut w = zeros(total, total);
    let mut diag = linalg::ComplexVector::zeros(total);
    for (c, &lambda) in lambdas.iter().enumerate() {
        let idx: Vec<usize> = (0..total).filter(|&k| labels[k] == c).collect();
        let block = random_unitary(idx.len(), &mut rng);
        for (a, &ra) in idx.iter().enumerate() {
            diag[ra] = lambda;
            for (b, &rb) in idx.iter().enumerate() {
                w[(ra, rb)] = block[(a, b)];
            }
        }
    }
    let vk = random_unitary(dim_k, &mut rng);
    let vg = random_unitary(dim_g, &mut rng);
    let v = linalg::block_diag(&[vk, vg]);
    let w = &v * w * v.adjoint();
    let s = &v * ComplexMatrix::from_diagonal(&diag) * v.adjoint();
    Ok(CommutingRealization {
        realization: TransferRealization::from_matrix(&w, dim_k)?,
        u: s.view((0, 0), (dim_k, dim_k)).into_owned(),
        y0: s.view((dim_k, dim_k), (dim_g, dim_g)).into_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy;
    use crate::opcore;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(5, &mut rng);
        assert!(linalg::unitary_residual(&u) < 1e-13);
    }

    #[test]
    fn pair_shape() {
        let t = gen_b20_pair(&GenSpec::new(11, 2, vec![1, 1], GenKind::DirectSum)).unwrap();
        let (a, b) = (t.op(0), t.op(1));
        assert!((a[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!(a[(1, 1)].norm() <= 1.0 - DELTA + 1e-14);
        assert!(b[(0, 0)].norm() <= 1.0 - DELTA + 1e-14);
        assert!((b[(1, 1)].norm() - 1.0).abs() < 1e-14);
        assert!(opcore::class_membership(&t, 1e-10).unwrap().is_member);
    }

    #[test]
    fn single_block_pair() {
        let t = gen_b20_pair(&GenSpec::new(5, 2, vec![0, 3], GenKind::DirectSum)).unwrap();
        assert_eq!(t.dim(), 3);
        assert!(linalg::unitary_residual(t.op(1)) < 1e-12);
        assert!(opcore::class_membership(&t, 1e-10).unwrap().is_member);
    }

    #[test]
    fn deterministic() {
        let spec = GenSpec::new(99, 3, vec![2, 1, 2], GenKind::DirectSum);
        assert_eq!(gen_direct_sum(&spec).unwrap(), gen_direct_sum(&spec).unwrap());
        let spec = GenSpec::new(4, 3, vec![1, 2], GenKind::BclCompression);
        assert_eq!(generate(&spec).unwrap().tuple, generate(&spec).unwrap().tuple);
    }

    #[test]
    fn triple_is_class_bcl() {
        for seed in 0..5 {
            let triple = gen_bcl_triple(seed, &[2, 1, 1], seed % 2 == 0).unwrap();
            let cert = hardy::validate_bcl(&triple, 1e-10).unwrap();
            assert!(cert.passed(), "{cert:?}");
        }
    }

    #[test]
    fn full_truncated_space_gives_shift() {
        let triple = BclTriple::new(1, vec![identity(1), identity(1)], vec![identity(1), zeros(1, 1)]).unwrap();
        let t = compression_from_vectors(&triple, 3, &identity(4)).unwrap();
        assert!(opcore::class_membership(&t, 1e-10).unwrap().is_member);
        assert!((t.op(1) - identity(4)).norm() < 1e-12);
        assert!(linalg::spectral_radius(t.op(0)).unwrap() < 1e-6);
    }

    #[test]
    fn constants_give_unitary_pieces() {
        let triple = gen_bcl_triple(8, &[1, 1], true).unwrap();
        let t = compression_from_vectors(&triple, 0, &identity(2)).unwrap();
        for i in 0..2 {
            let expected = triple.unitary(i) * (identity(2) - triple.projection(i));
            assert!((t.op(i) - expected).norm() < 1e-12);
        }
        assert!(opcore::class_membership(&t, 1e-10).unwrap().is_member);
    }

    #[test]
    fn zero_seed_is_degenerate() {
        let triple = gen_bcl_triple(1, &[1, 1], false).unwrap();
        assert!(matches!(
            compression_from_vectors(&triple, 1, &zeros(4, 1)),
            Err(Error::DegenerateSubspace)
        ));
    }

    #[test]
    fn commutant_examples() {
        let t = gen_direct_sum(&GenSpec::new(2, 2, vec![2, 1], GenKind::DirectSum)).unwrap();
        let one = Polynomial::constant(2, linalg::ONE);
        let x = commutant_from_polynomial(&t, &one).unwrap();
        assert!((x - identity(3) / Complex64::new(1.0 + DELTA, 0.0)).norm() < 1e-15);
        let z1 = Polynomial::variable(2, 0);
        let x = commutant_from_polynomial(&t, &z1).unwrap();
        let scale = (op_norm(t.op(0)) + DELTA).max(1.0);
        assert!((x - t.op(0) / Complex64::new(scale, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn commuting_realization_commutes() {
        for seed in 0..10 {
            let c = gen_commuting_realization(seed, 2, 3).unwrap();
            let w = c.realization.matrix();
            let s = linalg::block_diag(&[c.u.clone(), c.y0.clone()]);
            assert!(linalg::unitary_residual(&w) < 1e-12);
            assert!(linalg::commutator_norm(&w, &s) < 1e-12);
        }
    }

    #[test]
    fn monomial_count() {
        assert_eq!(monomials(2, 3).len(), 10);
        assert_eq!(monomials(3, 0), vec![vec![0, 0, 0]]);
    }
}
