//! JSON exchange format for covariance, coupling and rotation matrices:
//! `{"dim": 2L, "kind": "covariance"|"coupling"|"rotation", "entries": [...]}`
//! with `entries` in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flo::{CovarianceMatrix, ModeRotation, SkewMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Covariance,
    Coupling,
    Rotation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub kind: MatrixKind,
    pub entries: Vec<f64>,
}

/// A validated matrix read from disk.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixData {
    Covariance(CovarianceMatrix),
    Coupling(SkewMatrix),
    Rotation(ModeRotation),
}

impl MatrixFile {
    fn from_dense(kind: MatrixKind, m: &DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let entries = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| m[(r, c)]))
            .collect();
        Self { dim, kind, entries }
    }

    pub fn covariance(m: &CovarianceMatrix) -> Self {
        Self::from_dense(MatrixKind::Covariance, m.matrix())
    }

    pub fn coupling(a: &SkewMatrix) -> Self {
        Self::from_dense(MatrixKind::Coupling, a.matrix())
    }

    pub fn rotation(q: &ModeRotation) -> Self {
        Self::from_dense(MatrixKind::Rotation, q.matrix())
    }

    /// Check shape and the invariants of the declared kind.
    pub fn validate(&self) -> Result<MatrixData> {
        if self.dim == 0 || !self.dim.is_multiple_of(2) {
            return Err(Error::InvalidDimension(format!(
                "dim {} must be even and positive",
                self.dim
            )));
        }
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::InvalidDimension(format!(
                "{} entries for dim {}",
                self.entries.len(),
                self.dim
            )));
        }
        Ok(match self.kind {
            MatrixKind::Covariance => MatrixData::Covariance(CovarianceMatrix::new(
                SkewMatrix::from_row_major(self.dim, &self.entries)?,
            )?),
            MatrixKind::Coupling => {
                MatrixData::Coupling(SkewMatrix::from_row_major(self.dim, &self.entries)?)
            }
            MatrixKind::Rotation => MatrixData::Rotation(ModeRotation::new(
                DMatrix::from_row_slice(self.dim, self.dim, &self.entries),
            )?),
        })
    }

    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)?;
        Ok(())
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }
}

pub fn save_matrix(path: impl AsRef<Path>, file: &MatrixFile) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    file.to_writer(&mut w)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<MatrixData> {
    MatrixFile::from_reader(BufReader::new(File::open(path)?))?.validate()
}

pub fn load_covariance(path: impl AsRef<Path>) -> Result<CovarianceMatrix> {
    match load_matrix(path)? {
        MatrixData::Covariance(m) => Ok(m),
        other => Err(Error::InvalidData(format!(
            "expected a covariance matrix, found {}",
            kind_name(&other)
        ))),
    }
}

pub fn load_coupling(path: impl AsRef<Path>) -> Result<SkewMatrix> {
    match load_matrix(path)? {
        MatrixData::Coupling(a) => Ok(a),
        other => Err(Error::InvalidData(format!(
            "expected a coupling matrix, found {}",
            kind_name(&other)
        ))),
    }
}

fn kind_name(d: &MatrixData) -> &'static str {
    match d {
        MatrixData::Covariance(_) => "covariance",
        MatrixData::Coupling(_) => "coupling",
        MatrixData::Rotation(_) => "rotation",
    }
}
