//! On-disk system description format.
//!
//! A system file is a single JSON document:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "dims": { "n": 1, "m": 1, "r": 1 },
//!   "horizon": 1,
//!   "matrices": {
//!     "constant": { "A": [[0.5]], "B": [[1.0]], "C": [[1.0]], "D": [[0.0]] }
//!   }
//! }
//! ```
//!
//! `matrices` is either `constant` (one quadruple expanded over the
//! horizon) or `sequence` (a list of exactly `horizon + 1` quadruples).
//! Matrices are row-major nested arrays. Unknown keys are rejected, and
//! numbers round-trip losslessly at double precision.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::LdtvSystem;

/// Current schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Serialized form of an LDTV system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub schema_version: u32,
    pub dims: Dims,
    pub horizon: usize,
    pub matrices: Matrices,
}

/// Declared dimensions of the realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    pub r: usize,
}

/// Either one constant quadruple or an explicit per-step sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Matrices {
    Constant(Quadruple),
    Sequence(Vec<Quadruple>),
}

/// One `(A, B, C, D)` quadruple as row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadruple {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
}

fn rows_to_matrix(name: &'static str, index: usize, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::DimensionMismatch {
            matrix: name,
            index,
            expected: (1, 1),
            found: (nrows, ncols),
        });
    }
    for row in rows {
        if row.len() != ncols {
            return Err(Error::InvalidArgument {
                arg: name,
                reason: format!("ragged rows in matrix at step {index}"),
            });
        }
    }
    Ok(DMatrix::from_row_iterator(
        nrows,
        ncols,
        rows.iter().flatten().copied(),
    ))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl Quadruple {
    fn to_matrices(&self, index: usize) -> Result<[DMatrix<f64>; 4]> {
        Ok([
            rows_to_matrix("A", index, &self.a)?,
            rows_to_matrix("B", index, &self.b)?,
            rows_to_matrix("C", index, &self.c)?,
            rows_to_matrix("D", index, &self.d)?,
        ])
    }
}

impl SystemFile {
    /// Parses a JSON document.
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Serializes to pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("system file serializes");
        text.push('\n');
        text
    }

    /// Validates the document and builds the system it describes.
    pub fn to_system(&self) -> Result<LdtvSystem<f64>> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument {
                arg: "schema_version",
                reason: format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            });
        }
        let steps = self.horizon + 1;
        let quads: Vec<&Quadruple> = match &self.matrices {
            Matrices::Constant(q) => vec![q; steps],
            Matrices::Sequence(list) => {
                if list.len() != steps {
                    return Err(Error::LengthMismatch {
                        what: "matrix sequence",
                        expected: steps,
                        found: list.len(),
                    });
                }
                list.iter().collect()
            }
        };
        let mut a = Vec::with_capacity(steps);
        let mut b = Vec::with_capacity(steps);
        let mut c = Vec::with_capacity(steps);
        let mut d = Vec::with_capacity(steps);
        for (k, quad) in quads.iter().enumerate() {
            let [ak, bk, ck, dk] = quad.to_matrices(k)?;
            a.push(ak);
            b.push(bk);
            c.push(ck);
            d.push(dk);
        }
        let sys = LdtvSystem::new(a, b, c, d)?;
        let declared = (self.dims.n, self.dims.m, self.dims.r);
        let actual = (sys.state_dim(), sys.input_dim(), sys.output_dim());
        if declared != actual {
            return Err(Error::InvalidArgument {
                arg: "dims",
                reason: format!("declared {declared:?} but matrices have (n, m, r) = {actual:?}"),
            });
        }
        Ok(sys)
    }

    /// Describes a system as an explicit per-step sequence.
    pub fn from_system(sys: &LdtvSystem<f64>) -> Self {
        let quads = (0..=sys.horizon())
            .map(|k| Quadruple {
                a: matrix_to_rows(sys.a(k)),
                b: matrix_to_rows(sys.b(k)),
                c: matrix_to_rows(sys.c(k)),
                d: matrix_to_rows(sys.d(k)),
            })
            .collect();
        SystemFile {
            schema_version: SCHEMA_VERSION,
            dims: Dims {
                n: sys.state_dim(),
                m: sys.input_dim(),
                r: sys.output_dim(),
            },
            horizon: sys.horizon(),
            matrices: Matrices::Sequence(quads),
        }
    }
}
