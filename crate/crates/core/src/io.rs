//! File formats: the correlation-matrix JSON schema, JSON output with fixed
//! 17-significant-digit floats, and CSV helpers.

use std::io;

use serde::{Deserialize, Serialize};

use crate::cm::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::linalg::RMat;

pub const ORDERING_XPXP: &str = "xpxp";

/// On-disk form of a correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmFile {
    pub modes: usize,
    pub ordering: String,
    pub matrix: Vec<Vec<f64>>,
}

impl CmFile {
    pub fn from_matrix(m: &RMat) -> Self {
        Self {
            modes: m.nrows() / 2,
            ordering: ORDERING_XPXP.to_string(),
            matrix: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }

    /// Checks shape and ordering and returns the matrix without any
    /// symmetry or validity test.
    pub fn to_matrix(&self) -> Result<RMat> {
        if self.ordering != ORDERING_XPXP {
            return Err(Error::InvalidArgument(format!(
                "unsupported ordering {:?}, expected {ORDERING_XPXP:?}",
                self.ordering
            )));
        }
        if self.modes == 0 {
            return Err(Error::InvalidArgument("modes must be positive".into()));
        }
        let dim = 2 * self.modes;
        if self.matrix.len() != dim || self.matrix.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument(format!(
                "matrix must be {dim}x{dim} for {} modes",
                self.modes
            )));
        }
        if self.matrix.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(RMat::from_fn(dim, dim, |i, j| self.matrix[i][j]))
    }
}

pub fn parse_matrix_json(text: &str) -> Result<RMat> {
    let file: CmFile = serde_json::from_str(text)
        .map_err(|e| Error::InvalidArgument(format!("malformed JSON: {e}")))?;
    file.to_matrix()
}

/// Parses a correlation matrix, rejecting asymmetry above `sym_tol * (1 + ||γ||)`.
pub fn parse_cm_json(text: &str, sym_tol: f64) -> Result<CorrelationMatrix> {
    CorrelationMatrix::with_tolerance(parse_matrix_json(text)?, sym_tol)
}

pub fn cm_to_json(cm: &CorrelationMatrix) -> String {
    to_json_string(&CmFile::from_matrix(cm.matrix()))
}

/// Formats a float like C's `%.17g` without trimming trailing zeros.
pub fn format_f64(v: f64) -> String {
    if !v.is_finite() {
        return "null".to_string();
    }
    if v == 0.0 {
        return "0.0".to_string();
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci
        .split_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-5..17).contains(&exp) {
        format!("{v:.prec$}", prec = (16 - exp) as usize)
    } else {
        sci
    }
}

struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with every float written to 17 significant digits.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
