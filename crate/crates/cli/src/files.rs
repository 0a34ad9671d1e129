//! JSON file formats. Complex entries are `[re, im]` pairs.

use std::collections::BTreeMap;
use std::path::Path;

use dilatrix::hardy::BclTriple;
use dilatrix::variety::Polynomial;
use dilatrix::{Complex64, ComplexMatrix, ContractionTuple};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::CliError;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                data.push([z.re, z.im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, CliError> {
        let expected = self.rows.checked_mul(self.cols).ok_or_else(|| {
            CliError::Parse(format!("matrix shape {}x{} overflows", self.rows, self.cols))
        })?;
        if self.data.len() != expected {
            return Err(CliError::Parse(format!(
                "matrix declares {}x{} but holds {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(CliError::Parse("matrix has non-finite entries".into()));
        }
        Ok(ComplexMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.iter().map(|[re, im]| Complex64::new(*re, *im)),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleFile {
    pub dim: usize,
    pub matrices: Vec<MatrixFile>,
}

impl TupleFile {
    pub fn from_tuple(t: &ContractionTuple) -> Self {
        Self {
            dim: t.dim(),
            matrices: t.ops().iter().map(MatrixFile::from_matrix).collect(),
        }
    }

    pub fn to_matrices(&self) -> Result<Vec<ComplexMatrix>, CliError> {
        if self.matrices.is_empty() {
            return Err(CliError::Parse("tuple has no matrices".into()));
        }
        self.matrices
            .iter()
            .map(|m| {
                if m.rows != self.dim || m.cols != self.dim {
                    return Err(CliError::Parse(format!(
                        "tuple of dimension {} contains a {}x{} matrix",
                        self.dim, m.rows, m.cols
                    )));
                }
                m.to_matrix()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleFile {
    #[serde(rename = "dimE")]
    pub dim_e: usize,
    #[serde(rename = "U")]
    pub u: Vec<MatrixFile>,
    #[serde(rename = "P")]
    pub p: Vec<MatrixFile>,
}

impl TripleFile {
    pub fn from_triple(t: &BclTriple) -> Self {
        Self {
            dim_e: t.dim_e(),
            u: t.unitaries().iter().map(MatrixFile::from_matrix).collect(),
            p: t.projections().iter().map(MatrixFile::from_matrix).collect(),
        }
    }
}

/// Polynomial with multi-index keys such as `"2,0,1"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFile {
    pub coeffs: BTreeMap<String, [f64; 2]>,
}

impl PolyFile {
    pub fn to_polynomial(&self, nvars: usize) -> Result<Polynomial, CliError> {
        let mut p = Polynomial::zero(nvars);
        for (key, [re, im]) in &self.coeffs {
            if !re.is_finite() || !im.is_finite() {
                return Err(CliError::Parse(format!("coefficient {key:?} is not finite")));
            }
            let alpha = key
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Parse(format!("bad multi-index {key:?}")))?;
            if alpha.len() != nvars {
                return Err(CliError::Parse(format!(
                    "multi-index {key:?} has {} entries, the tuple has {nvars} operators",
                    alpha.len()
                )));
            }
            p.add_term(alpha, Complex64::new(*re, *im))
                .map_err(|e| CliError::Parse(e.to_string()))?;
        }
        if p.degree() > dilatrix::variety::MAX_POLY_DEGREE {
            return Err(CliError::Usage(format!(
                "polynomial degree {} exceeds {}",
                p.degree(),
                dilatrix::variety::MAX_POLY_DEGREE
            )));
        }
        Ok(p)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_mismatch_is_a_parse_error() {
        let m = MatrixFile {
            rows: 2,
            cols: 2,
            data: vec![[0.0, 0.0]; 3],
        };
        assert!(matches!(m.to_matrix(), Err(CliError::Parse(_))));
    }

    #[test]
    fn poly_keys_are_checked() {
        let mut coeffs = BTreeMap::new();
        coeffs.insert("1,x".to_string(), [1.0, 0.0]);
        assert!(PolyFile { coeffs }.to_polynomial(2).is_err());
        let mut coeffs = BTreeMap::new();
        coeffs.insert("1,0,0".to_string(), [1.0, 0.0]);
        assert!(PolyFile { coeffs }.to_polynomial(2).is_err());
        let mut coeffs = BTreeMap::new();
        coeffs.insert("1, 2".to_string(), [1.0, -1.0]);
        let p = PolyFile { coeffs }.to_polynomial(2).unwrap();
        assert_eq!(p.degree(), 3);
    }
}
