//! Joint spectra of commuting matrices, the variety swept out by the joint
//! spectra of `Φ_1(z), …, Φ_n(z)` for `|z| = 1`, and von Neumann bounds
//! over that variety.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::circle;
use crate::dilation;
use crate::error::{Error, Result};
use crate::hardy::BclTriple;
use crate::linalg::{self, identity, op_norm, zeros, ComplexMatrix};
use crate::opcore::ContractionTuple;
use crate::tol;

/// Seed of the generic linear combinations used by [`joint_spectrum`].
pub const SPECTRUM_SEED: u64 = 0x5eed_1e55;

const MAX_ATTEMPTS: usize = 5;

/// Joint eigenvalues with multiplicity, each with the residual
/// `max_i ‖(A_i − λ_i)v‖` of a certified unit joint eigenvector `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectrum {
    pub points: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
}

impl JointSpectrum {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Points merged greedily when within `tol` in the max norm, with
    /// multiplicities.
    pub fn clusters(&self, tol: f64) -> Vec<(Vec<Complex64>, usize)> {
        let mut out: Vec<(Vec<Complex64>, usize)> = Vec::new();
        for p in &self.points {
            match out.iter_mut().find(|(q, _)| max_dist(p, q) <= tol) {
                Some(entry) => entry.1 += 1,
                None => out.push((p.clone(), 1)),
            }
        }
        out
    }
}

fn max_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Whether two point multisets can be matched one to one within `tol`.
pub fn same_multiset(a: &[Vec<Complex64>], b: &[Vec<Complex64>], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for p in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, q)| (k, max_dist(p, q)))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match best {
            Some((k, d)) if d <= tol => used[k] = true,
            _ => return false,
        }
    }
    true
}

/// Joint spectrum with the default seed.
pub fn joint_spectrum(mats: &[ComplexMatrix], tol: f64) -> Result<JointSpectrum> {
    joint_spectrum_seeded(mats, tol, SPECTRUM_SEED)
}

/// Triangularizes all matrices simultaneously with the Schur basis of a
/// random combination `Σ c_i A_i` and reads the points off the diagonals.
/// A second independent combination must reproduce the multiset to
/// `tol::CLUSTER`; up to five draws are made before giving up.
pub fn joint_spectrum_seeded(mats: &[ComplexMatrix], tol: f64, seed: u64) -> Result<JointSpectrum> {
    let Some(first) = mats.first() else {
        return Err(Error::InvalidParameter("no matrices given".into()));
    };
    let d = first.nrows();
    for m in mats {
        if m.shape() != (d, d) {
            return Err(Error::ShapeMismatch("joint spectrum needs equal square matrices".into()));
        }
        linalg::ensure_finite(m)?;
    }
    let norms: Vec<f64> = mats.iter().map(op_norm).collect();
    let mut worst: f64 = 0.0;
    for a in 0..mats.len() {
        for b in a + 1..mats.len() {
            let scale = (norms[a] * norms[b]).max(1.0);
            worst = worst.max(linalg::commutator_norm(&mats[a], &mats[b]) / scale);
        }
    }
    if worst > tol {
        return Err(Error::NotCommuting {
            residual: worst,
            tolerance: tol,
        });
    }
    if d == 0 {
        return Ok(JointSpectrum {
            points: Vec::new(),
            residuals: Vec::new(),
        });
    }
    let js_tol = 1e-8 * norms.iter().copied().fold(1.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let Some(primary) = triangularize(mats, &mut rng)? else {
            continue;
        };
        if primary.max_residual() > js_tol {
            continue;
        }
        let Some(check) = triangularize(mats, &mut rng)? else {
            continue;
        };
        if same_multiset(&primary.points, &check.points, tol::CLUSTER) {
            return Ok(primary);
        }
    }
    Err(Error::GenericityFailure {
        attempts: MAX_ATTEMPTS,
    })
}

fn random_combination(mats: &[ComplexMatrix], rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let d = mats[0].nrows();
    let mut m = zeros(d, d);
    for a in mats {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        m += a * Complex64::new(re, im);
    }
    m
}

fn triangularize(mats: &[ComplexMatrix], rng: &mut ChaCha8Rng) -> Result<Option<JointSpectrum>> {
    let combo = random_combination(mats, rng);
    let (q, _) = match linalg::schur(&combo) {
        Ok(s) => s,
        Err(_) => return Ok(None),
    };
    let d = q.nrows();
    let reduced: Vec<ComplexMatrix> = mats.iter().map(|a| q.adjoint() * a * &q).collect();
    let mut points = Vec::with_capacity(d);
    let mut residuals = Vec::with_capacity(d);
    for k in 0..d {
        let point: Vec<Complex64> = reduced.iter().map(|r| r[(k, k)]).collect();
        let schur_vec = q.column(k).into_owned();
        let mut res = eigen_residual(mats, &point, &schur_vec);
        if res > 1e-12 {
            res = res.min(null_vector_residual(mats, &point));
        }
        points.push(point);
        residuals.push(res);
    }
    Ok(Some(JointSpectrum { points, residuals }))
}

fn eigen_residual(mats: &[ComplexMatrix], point: &[Complex64], v: &linalg::ComplexVector) -> f64 {
    mats.iter()
        .zip(point)
        .map(|(a, l)| (a * v - v * *l).norm())
        .fold(0.0, f64::max)
}

/// Residual of the best unit vector for the stacked `[A_i − λ_i I]`.
fn null_vector_residual(mats: &[ComplexMatrix], point: &[Complex64]) -> f64 {
    let d = mats[0].nrows();
    let blocks: Vec<ComplexMatrix> = mats
        .iter()
        .zip(point)
        .map(|(a, l)| a - identity(d) * *l)
        .collect();
    let stacked = linalg::vstack(&blocks);
    let dec = linalg::svd(&stacked);
    let v = dec.v.column(dec.s.len() - 1).into_owned();
    eigen_residual(mats, point, &v)
}

/// Joint spectrum of `(Φ_1(z), …, Φ_n(z))` with every coordinate projected
/// onto the unit circle (the matrices are unitary for `|z| = 1`).
pub fn variety_fiber(triple: &BclTriple, z: Complex64) -> Result<JointSpectrum> {
    let mats: Vec<ComplexMatrix> = (0..triple.n()).map(|i| triple.phi(i, z)).collect();
    let mut js = joint_spectrum(&mats, tol::DEFAULT)?;
    for p in &mut js.points {
        for c in p.iter_mut() {
            let r = c.norm();
            if r > 0.0 {
                *c /= r;
            }
        }
    }
    Ok(js)
}

/// Points of the variety above `M` equispaced `z` on the circle, in grid
/// order and `dim ℰ` points per `z`.
pub fn variety_points(triple: &BclTriple, m: usize) -> Result<Vec<Vec<Complex64>>> {
    if m == 0 {
        return Err(Error::InvalidParameter("grid size must be positive".into()));
    }
    let fibers = circle::grid(m)
        .into_par_iter()
        .map(|z| variety_fiber(triple, z))
        .collect::<Result<Vec<_>>>()?;
    Ok(fibers.into_iter().flat_map(|f| f.points).collect())
}

/// Polynomial in `nvars` commuting variables as a table of multi-index
/// coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<usize>, Complex64>,
}

/// Largest total degree accepted by [`vn_check`].
pub const MAX_POLY_DEGREE: usize = 16;

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c).expect("constant term");
        p
    }

    /// The coordinate function `z_i` (0-based).
    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut alpha = vec![0; nvars];
        alpha[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(alpha, Complex64::new(1.0, 0.0)).expect("valid index");
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<usize>, Complex64)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (alpha, c) in terms {
            p.add_term(alpha, c)?;
        }
        Ok(p)
    }

    /// Adds `c z^α` to the polynomial.
    pub fn add_term(&mut self, alpha: Vec<usize>, c: Complex64) -> Result<()> {
        if alpha.len() != self.nvars {
            return Err(Error::ShapeMismatch(format!(
                "multi-index of length {} for {} variables",
                alpha.len(),
                self.nvars
            )));
        }
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        *self.terms.entry(alpha).or_insert(Complex64::new(0.0, 0.0)) += c;
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, Complex64> {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|a| a.iter().sum::<usize>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.nvars, "point has wrong number of coordinates");
        self.terms
            .iter()
            .map(|(alpha, c)| {
                alpha
                    .iter()
                    .zip(z)
                    .fold(*c, |acc, (&k, zi)| acc * zi.powu(k as u32))
            })
            .sum()
    }

    /// `|p|` at the torus point with the given angles.
    pub fn abs_on_torus(&self, angles: &[f64]) -> f64 {
        let z: Vec<Complex64> = angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        self.eval(&z).norm()
    }
}

/// `Σ_α c_α T^α` with cached operator powers.
pub fn poly_eval_matrix(p: &Polynomial, tuple: &ContractionTuple) -> Result<ComplexMatrix> {
    if p.nvars() != tuple.len() {
        return Err(Error::ShapeMismatch(format!(
            "polynomial in {} variables for a {}-tuple",
            p.nvars(),
            tuple.len()
        )));
    }
    let d = tuple.dim();
    let mut powers: Vec<Vec<ComplexMatrix>> = tuple.ops().iter().map(|_| vec![identity(d)]).collect();
    for alpha in p.terms().keys() {
        for (i, &k) in alpha.iter().enumerate() {
            while powers[i].len() <= k {
                let next = powers[i].last().expect("nonempty") * tuple.op(i);
                powers[i].push(next);
            }
        }
    }
    let mut out = zeros(d, d);
    for (alpha, c) in p.terms() {
        let mut m = identity(d) * *c;
        for (i, &k) in alpha.iter().enumerate() {
            if k > 0 {
                m *= &powers[i][k];
            }
        }
        out += m;
    }
    Ok(out)
}

/// Outcome of a von Neumann check over the variety.
#[derive(Debug, Clone, PartialEq)]
pub struct VnCertificate {
    /// `‖p(T)‖`.
    pub lhs: f64,
    /// Largest `|p|` found on the variety: grid samples plus local
    /// refinement in the circle parameter. Every value is attained at a
    /// genuine variety point.
    pub rhs: f64,
    /// Largest `|p|` over the grid samples alone.
    pub rhs_grid: f64,
    /// Largest `|p|` found on the torus 𝕋ⁿ (classical bound, for comparison).
    pub torus_sup: f64,
    pub grid_size: usize,
    /// `rhs − lhs`.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares `‖p(T)‖` with `sup |p|` over the variety of the BCL triple
/// built from `tuple`, sampled above an `M`-point circle grid.
pub fn vn_check(tuple: &ContractionTuple, p: &Polynomial, m: usize, tol: f64) -> Result<VnCertificate> {
    if m == 0 {
        return Err(Error::InvalidParameter("grid size must be positive".into()));
    }
    if p.degree() > MAX_POLY_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "polynomial degree {} exceeds {MAX_POLY_DEGREE}",
            p.degree()
        )));
    }
    let lhs = op_norm(&poly_eval_matrix(p, tuple)?);
    let construction = dilation::build_bcl_from_tuple(tuple, tol.min(tol::DEFAULT))?;
    let triple = &construction.triple;

    let fiber_max = |t: f64| -> Result<(f64, Vec<Complex64>)> {
        let js = variety_fiber(triple, Complex64::from_polar(1.0, t))?;
        let mut best = (f64::NEG_INFINITY, Vec::new());
        for pt in js.points {
            let v = p.eval(&pt).norm();
            if v > best.0 {
                best = (v, pt);
            }
        }
        Ok(best)
    };
    let samples = (0..m)
        .into_par_iter()
        .map(|k| fiber_max(circle::angle(k, m)))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| samples[b].0.total_cmp(&samples[a].0));
    let rhs_grid = samples[order[0]].0;
    let mut best = samples[order[0]].clone();
    let h = circle::angle(1, m);
    for &k in order.iter().take(3) {
        let t = circle::angle(k, m);
        let f = |s: f64| fiber_max(s).map(|r| r.0).unwrap_or(f64::NEG_INFINITY);
        let (arg, val) = circle::golden_max(&f, t - h, t + h, 60);
        if val > best.0 {
            if let Ok(r) = fiber_max(arg) {
                if r.0 >= best.0 {
                    best = r;
                }
            }
        }
    }
    let rhs = best.0;
    let start: Vec<f64> = best.1.iter().map(|z| z.arg()).collect();
    let torus_sup = torus_sup(p, &[start]);
    let margin = rhs - lhs;
    Ok(VnCertificate {
        lhs,
        rhs,
        rhs_grid,
        torus_sup,
        grid_size: m,
        margin,
        tolerance: tol,
        pass: lhs <= rhs + tol,
    })
}

/// Points per torus dimension for the grid stage of [`torus_sup`].
fn torus_grid_points(n: usize) -> usize {
    match n {
        0 | 1 => tol::GRID,
        2 => tol::GRID,
        3 => 64,
        _ => 20,
    }
}

/// Estimate of `sup_{𝕋ⁿ} |p|`: a product grid followed by coordinate-wise
/// golden-section ascent from the best grid points and from `starts`.
/// The result is always attained at a torus point.
pub fn torus_sup(p: &Polynomial, starts: &[Vec<f64>]) -> f64 {
    let n = p.nvars();
    if n == 0 {
        return p.eval(&[]).norm();
    }
    let g = torus_grid_points(n);
    let total = g.pow(n as u32);
    let step = circle::angle(1, g);
    let decode = |mut idx: usize| -> Vec<f64> {
        let mut a = vec![0.0; n];
        for slot in a.iter_mut() {
            *slot = step * (idx % g) as f64;
            idx /= g;
        }
        a
    };
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| p.abs_on_torus(&decode(idx)))
        .collect();
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut candidates: Vec<Vec<f64>> = order.iter().take(8).map(|&i| decode(i)).collect();
    candidates.extend(starts.iter().filter(|s| s.len() == n).cloned());
    let ascended: Vec<f64> = candidates
        .into_par_iter()
        .map(|s| coordinate_ascent(p, s, step))
        .collect();
    ascended.into_iter().fold(values[order[0]], f64::max)
}

fn coordinate_ascent(p: &Polynomial, mut angles: Vec<f64>, step: f64) -> f64 {
    let mut best = p.abs_on_torus(&angles);
    let mut width = step;
    for _ in 0..30 {
        let before = best;
        for i in 0..angles.len() {
            let center = angles[i];
            let f = |t: f64| {
                let mut a = angles.clone();
                a[i] = t;
                p.abs_on_torus(&a)
            };
            let (arg, val) = circle::golden_max(&f, center - width, center + width, 60);
            if val > best {
                best = val;
                angles[i] = arg;
            }
        }
        if best - before <= 1e-15 * best.max(1.0) {
            width *= 0.5;
            if width < 1e-9 {
                break;
            }
        }
    }
    best
}
