//! Maximization of real functions over the unit circle: an equispaced grid
//! followed by golden-section refinement around the best grid samples.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

/// `m` equispaced points `e^{2πik/m}` starting at 1.
pub fn grid(m: usize) -> Vec<Complex64> {
    (0..m).map(|k| Complex64::from_polar(1.0, angle(k, m))).collect()
}

pub fn angle(k: usize, m: usize) -> f64 {
    2.0 * PI * k as f64 / m as f64
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`. Returns the best
/// `(argument, value)` seen, so the result is always a genuine sample.
pub fn golden_max(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
            if fd > best.1 {
                best = (d, fd);
            }
        }
        if b - a < 1e-13 {
            break;
        }
    }
    best
}

/// Result of maximizing over the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleMax {
    /// Maximum over the grid samples alone.
    pub grid_max: f64,
    /// Maximum after local refinement (never below `grid_max`).
    pub refined_max: f64,
    /// Angle at which `refined_max` was attained.
    pub argmax: f64,
}

/// Maximizes `f(θ)` over `[0, 2π)` on an `m`-point grid, then refines the
/// `starts` best grid samples by golden-section search within one grid cell.
/// Grid samples are evaluated in parallel and merged in grid order.
pub fn maximize(f: impl Fn(f64) -> f64 + Sync, m: usize, starts: usize) -> CircleMax {
    assert!(m > 0, "grid must be nonempty");
    let values: Vec<f64> = (0..m).into_par_iter().map(|k| f(angle(k, m))).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let grid_max = values[order[0]];
    let mut best = (angle(order[0], m), grid_max);
    let h = 2.0 * PI / m as f64;
    for &k in order.iter().take(starts) {
        let t = angle(k, m);
        let (arg, val) = golden_max(&f, t - h, t + h, 80);
        if val > best.1 {
            best = (arg, val);
        }
    }
    CircleMax {
        grid_max,
        refined_max: best.1,
        argmax: best.0.rem_euclid(2.0 * PI),
    }
}
