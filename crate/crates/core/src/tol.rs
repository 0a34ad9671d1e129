//! Default numerical thresholds.

/// Eigenvalues of `I − TT*` at or below this are treated as zero when
/// computing defect ranks.
pub const RANK: f64 = 1e-10;

/// Eigenvalues of `I − TT*` in `[-PSD, 0]` are clamped to zero; anything
/// lower means the input is not a contraction.
pub const PSD: f64 = 1e-10;

/// Relative commutation tolerance, scaled by `max(1, ‖T_i‖‖T_j‖)`.
pub const COMM: f64 = 1e-10;

/// Allowed excess of the operator norm over 1 for contractions.
pub const NORM: f64 = 1e-10;

/// Unitarity / projection tolerance for BCL triples.
pub const UNITARY: f64 = 1e-10;

/// Default margin for spectral-radius purity decisions and the CLI `--tol`.
pub const DEFAULT: f64 = 1e-8;

/// Joint eigenvalues closer than this in the max-norm are merged.
pub const CLUSTER: f64 = 1e-7;

/// Target for `‖P_T^N‖` when choosing a Hardy-space truncation degree.
pub const TAIL: f64 = 1e-10;

/// Largest truncation degree chosen adaptively.
pub const MAX_DEGREE: usize = 512;

/// Default number of equispaced samples on the unit circle.
pub const GRID: usize = 257;

/// Least-squares residual above which a defect-space map is not an isometry.
pub const LEAST_SQUARES: f64 = 1e-8;
