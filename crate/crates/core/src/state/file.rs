//! On-disk state format and spectrum export.
//!
//! ```json
//! {"dims":[2,2],"matrix":[[[re,im],...],...]}
//! ```
//! Numbers are written with 17 significant digits so every `f64` survives a
//! write/read cycle bit for bit.

use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{CompactFormatter, Formatter};

use super::{BipartiteDims, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_state(state: &DensityMatrix) -> Self {
        let n = state.dim();
        let m = state.matrix();
        let matrix = (0..n).map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        Self { dims: state.dims().into(), matrix }
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        let dims = BipartiteDims::try_from(self.dims)?;
        let n = dims.total();
        if self.matrix.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.matrix.len() });
        }
        let mut data = Vec::with_capacity(n * n);
        for row in &self.matrix {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            data.extend(row.iter().map(|[re, im]| Complex64::new(*re, *im)));
        }
        DensityMatrix::from_matrix(CMatrix::from_row_major(data)?, dims)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Compact JSON with every float in `{:.16e}` form (17 significant digits).
#[derive(Debug, Default, Clone, Copy)]
pub struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            // JSON has no infinities; mirror serde_json's default.
            CompactFormatter.write_null(writer)
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes any value with [`FullPrecision`] floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_state_file(path: impl AsRef<Path>, state: &DensityMatrix) -> Result<()> {
    let text = to_json_string(&StateFile::from_state(state))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_state_file(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    let text = std::fs::read_to_string(path)?;
    StateFile::parse(&text)?.to_state()
}

/// One eigenvalue per line, ascending.
pub fn spectrum_csv(state: &DensityMatrix) -> String {
    state.eigenvalues().iter().map(|l| format!("{l:.16e}\n")).collect()
}

/// Serde adapter writing a [`DensityMatrix`] in the [`StateFile`] layout.
pub mod density_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::StateFile;
    use crate::state::DensityMatrix;

    pub fn serialize<S: Serializer>(state: &DensityMatrix, s: S) -> Result<S::Ok, S::Error> {
        StateFile::from_state(state).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DensityMatrix, D::Error> {
        StateFile::deserialize(d)?.to_state().map_err(serde::de::Error::custom)
    }
}
