//! Subcommand implementations. Each returns a report; mathematical failures
//! are folded into the report, input problems surface as [`CliError`].

use std::path::{Path, PathBuf};

use dilatrix::dilation;
use dilatrix::gen::{self, GenKind, GenSpec};
use dilatrix::lifting;
use dilatrix::linalg::op_norm;
use dilatrix::opcore;
use dilatrix::variety;
use dilatrix::{Certificate, ContractionTuple};
use serde::Serialize;

use crate::files::{read_json, write_json, MatrixFile, PolyFile, TripleFile, TupleFile};
use crate::report::{digest, Parameters, ReportFile};
use crate::CliError;

/// Coefficients of Θ below this norm at the end of the sequence are not
/// written out.
const THETA_TRIM: f64 = 1e-14;

fn canonical<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("plain data serializes")
}

fn load_tuple(path: &Path) -> Result<(TupleFile, Vec<dilatrix::ComplexMatrix>), CliError> {
    let file: TupleFile = read_json(path)?;
    let mats = file.to_matrices()?;
    Ok((file, mats))
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("tolerance must be positive and finite, got {tol}")))
    }
}

fn prepare_out(out: Option<&Path>) -> Result<(), CliError> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    Ok(())
}

/// Builds the tuple, folding contraction and commutation failures into the
/// report.
fn build_tuple(mats: Vec<dilatrix::ComplexMatrix>, report: &mut ReportFile) -> Option<ContractionTuple> {
    match ContractionTuple::new(mats) {
        Ok(t) => Some(t),
        Err(e) => {
            report.fail(e.to_string());
            None
        }
    }
}

pub fn check(tuple_path: &Path, tol: f64) -> Result<ReportFile, CliError> {
    check_tol(tol)?;
    let (file, mats) = load_tuple(tuple_path)?;
    let key = canonical(&tol);
    let mut report = ReportFile::new(
        "check",
        digest(&[b"check", &canonical(&file), &key]),
        Parameters::default(),
    );
    let Some(tuple) = build_tuple(mats, &mut report) else {
        return Ok(report);
    };
    match opcore::class_membership(&tuple, tol) {
        Ok(cr) => {
            let mut cert = Certificate::new();
            for p in &cr.pairwise_szego_residuals {
                cert.record(format!("szego[{},{}]", p.i + 1, p.j + 1), p.residual, tol);
            }
            cert.record("product_spectral_radius", cr.product_spectral_radius, 1.0 - tol);
            report.absorb("", &cert);
            report.pass = cr.is_member;
            report.details = serde_json::to_value(&cr).ok();
        }
        Err(e) => report.fail(e.to_string()),
    }
    Ok(report)
}

pub fn dilate(
    tuple_path: &Path,
    tol: f64,
    degree: Option<usize>,
    out: Option<&Path>,
) -> Result<ReportFile, CliError> {
    check_tol(tol)?;
    let (file, mats) = load_tuple(tuple_path)?;
    prepare_out(out)?;
    let mut report = ReportFile::new(
        "dilate",
        digest(&[b"dilate", &canonical(&file), &canonical(&(tol, degree))]),
        Parameters {
            degree,
            ..Parameters::default()
        },
    );
    let Some(tuple) = build_tuple(mats, &mut report) else {
        return Ok(report);
    };
    match dilation::dilate(&tuple, tol, degree) {
        Ok((construction, result)) => {
            report.parameters.degree = Some(result.degree);
            report.absorb("construction.", &construction.certificate);
            report.absorb("dilation.", &result.certificate);
            if let Some(dir) = out {
                write_json(&dir.join("triple.json"), &TripleFile::from_triple(&construction.triple))?;
                write_json(&dir.join("pi.json"), &MatrixFile::from_matrix(&result.pi))?;
            }
        }
        Err(e) => report.fail(e.to_string()),
    }
    Ok(report)
}

pub fn vn(tuple_path: &Path, poly_path: &Path, tol: f64, grid: usize) -> Result<ReportFile, CliError> {
    check_tol(tol)?;
    if grid == 0 {
        return Err(CliError::Usage("grid size must be positive".into()));
    }
    let (file, mats) = load_tuple(tuple_path)?;
    let poly_file: PolyFile = read_json(poly_path)?;
    let poly = poly_file.to_polynomial(mats.len())?;
    let mut report = ReportFile::new(
        "vn",
        digest(&[b"vn", &canonical(&file), &canonical(&poly_file), &canonical(&(tol, grid))]),
        Parameters {
            grid: Some(grid),
            ..Parameters::default()
        },
    );
    let Some(tuple) = build_tuple(mats, &mut report) else {
        return Ok(report);
    };
    match variety::vn_check(&tuple, &poly, grid, tol) {
        Ok(vc) => {
            let mut cert = Certificate::new();
            cert.record("excess", (vc.lhs - vc.rhs).max(0.0), vc.tolerance);
            cert.note("lhs", vc.lhs);
            cert.note("rhs", vc.rhs);
            cert.note("rhs_grid", vc.rhs_grid);
            cert.note("torus_sup", vc.torus_sup);
            cert.note("margin", vc.margin);
            report.absorb("", &cert);
            report.pass &= vc.pass;
        }
        Err(e) => report.fail(e.to_string()),
    }
    Ok(report)
}

pub fn lift(
    tuple_path: &Path,
    x_path: &Path,
    tol: f64,
    degree: Option<usize>,
    out: Option<&Path>,
) -> Result<ReportFile, CliError> {
    check_tol(tol)?;
    let (file, mats) = load_tuple(tuple_path)?;
    let x_file: MatrixFile = read_json(x_path)?;
    let x = x_file.to_matrix()?;
    if x.shape() != (file.dim, file.dim) {
        return Err(CliError::Parse(format!(
            "X is {}x{}, the tuple acts on dimension {}",
            x.nrows(),
            x.ncols(),
            file.dim
        )));
    }
    prepare_out(out)?;
    let mut report = ReportFile::new(
        "lift",
        digest(&[b"lift", &canonical(&file), &canonical(&x_file), &canonical(&(tol, degree))]),
        Parameters {
            degree,
            ..Parameters::default()
        },
    );
    let Some(tuple) = build_tuple(mats, &mut report) else {
        return Ok(report);
    };
    match lifting::lift_commutant(&tuple, &x, tol, degree) {
        Ok(pipe) => {
            report.parameters.degree = Some(pipe.dilation.degree);
            report.absorb("dilation.", &pipe.dilation.certificate);
            report.absorb("decomposition.", &pipe.decomposition.certificate);
            report.absorb("lift.", &pipe.lift.certificate);
            report.absorb("verify.", &pipe.verification);
            let theta = &pipe.lift.theta;
            let keep = theta
                .iter()
                .rposition(|c| op_norm(c) > THETA_TRIM)
                .map_or(1, |k| k + 1);
            report.info.insert("theta_coefficients".into(), keep as f64);
            report.info.insert("norm_x".into(), op_norm(&x));
            if let Some(dir) = out {
                let sub = dir.join("theta");
                prepare_out(Some(&sub))?;
                for (k, c) in theta.iter().take(keep).enumerate() {
                    write_json(&sub.join(format!("theta_{k:03}.json")), &MatrixFile::from_matrix(c))?;
                }
            }
        }
        Err(e) => report.fail(e.to_string()),
    }
    Ok(report)
}

pub fn generate(kind: &str, seed: u64, n: usize, dims: &[usize], out: &Path) -> Result<ReportFile, CliError> {
    let kind: GenKind = kind.parse().map_err(|e: dilatrix::Error| CliError::Usage(e.to_string()))?;
    if n == 0 {
        return Err(CliError::Usage("tuple length must be positive".into()));
    }
    prepare_out(Some(out))?;
    let spec = GenSpec::new(seed, n, dims.to_vec(), kind);
    let mut report = ReportFile::new(
        "gen",
        digest(&[b"gen", &canonical(&(format!("{kind:?}"), seed, n, dims))]),
        Parameters {
            seed: Some(seed),
            ..Parameters::default()
        },
    );
    match gen::generate(&spec) {
        Ok(g) => {
            write_json(&out.join("tuple.json"), &TupleFile::from_tuple(&g.tuple))?;
            if let Some(triple) = &g.triple {
                write_json(&out.join("triple.json"), &TripleFile::from_triple(triple))?;
            }
            match opcore::class_membership(&g.tuple, dilatrix::tol::DEFAULT) {
                Ok(cr) => {
                    let mut cert = Certificate::new();
                    cert.record("max_szego", cr.max_residual(), cr.tolerance_used);
                    cert.note("product_spectral_radius", cr.product_spectral_radius);
                    cert.note("dim", g.tuple.dim() as f64);
                    report.absorb("", &cert);
                    report.pass &= cr.is_member;
                }
                Err(e) => report.fail(e.to_string()),
            }
        }
        Err(dilatrix::Error::InvalidParameter(m)) => return Err(CliError::Usage(m)),
        Err(e) => report.fail(e.to_string()),
    }
    Ok(report)
}

/// Where a report goes besides stdout.
pub fn report_path(out: Option<&Path>) -> Option<PathBuf> {
    out.map(|d| d.join("report.json"))
}
