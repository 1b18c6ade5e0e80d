//! JSON encoding of matrices: `{"dim": n, "re": [[...]], "im": [[...]]}`.
//!
//! Rectangular matrices carry `rows`/`cols` instead of `dim`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::state::DensityMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let (re, im) = m.to_re_im();
        let square = m.is_square();
        Self {
            dim: square.then_some(m.rows()),
            rows: (!square).then_some(m.rows()),
            cols: (!square).then_some(m.cols()),
            re,
            im: Some(im),
        }
    }
}

impl MatrixJson {
    /// Decodes and checks the declared shape.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let im = match &self.im {
            Some(im) => im.clone(),
            None => self.re.iter().map(|r| vec![0.0; r.len()]).collect(),
        };
        let m = ComplexMatrix::from_re_im(&self.re, &im)?;
        if let Some(d) = self.dim {
            if m.rows() != d || m.cols() != d {
                return Err(Error::Parse(format!(
                    "declared dim {d} but entries are {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if let Some(r) = self.rows {
            if m.rows() != r {
                return Err(Error::Parse(format!("declared {r} rows, found {}", m.rows())));
            }
        }
        if let Some(c) = self.cols {
            if m.cols() != c {
                return Err(Error::Parse(format!("declared {c} cols, found {}", m.cols())));
            }
        }
        if m.rows() == 0 {
            return Err(Error::Parse("empty matrix".into()));
        }
        Ok(m)
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> serde_json::Value {
    serde_json::to_value(MatrixJson::from(m)).expect("matrix json is always encodable")
}

pub fn matrix_from_json_str(s: &str) -> Result<ComplexMatrix> {
    let j: MatrixJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    j.to_matrix()
}

/// Reads a density matrix and validates every state invariant.
pub fn density_from_json_str(s: &str) -> Result<DensityMatrix> {
    DensityMatrix::new(matrix_from_json_str(s)?)
}
