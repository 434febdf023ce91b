use std::ops::Deref;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance on `|X + Xᵀ|` accepted when building a [`SkewMatrix`].
pub const ANTISYMMETRY_TOL: f64 = 1e-12;
/// Purity tolerance applied to freshly constructed pure covariance matrices.
pub const PURITY_TOL_STRICT: f64 = 1e-10;
/// Purity tolerance applied to covariance matrices produced by long
/// chains of conjugations.
pub const PURITY_TOL: f64 = 1e-9;
/// Tolerance on entry and spectral-norm bounds of covariance matrices.
pub const BOUND_TOL: f64 = 1e-10;
/// Orthogonality tolerance of [`ModeRotation`].
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Tolerance on `det(Q) = +1` of [`ModeRotation`].
pub const DETERMINANT_TOL: f64 = 1e-8;

/// Real `2L × 2L` antisymmetric matrix.
///
/// Coupling matrices of quadratic Hamiltonians and covariance matrices both
/// live here. Storage is dense; the antisymmetry is exact after
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix {
    m: DMatrix<f64>,
}

impl SkewMatrix {
    /// Validates `entries` (a `dim × dim` list of rows) and returns the
    /// antisymmetrized matrix `(X - Xᵀ)/2`.
    pub fn new(dim: usize, entries: &[Vec<f64>]) -> Result<Self> {
        if entries.len() != dim || entries.iter().any(|row| row.len() != dim) {
            return Err(Error::InvalidDimension(format!(
                "expected {dim}×{dim} entries"
            )));
        }
        let flat: Vec<f64> = entries.iter().flatten().copied().collect();
        Self::from_row_major(dim, &flat)
    }

    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidDimension(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        check_even_square(&m)?;
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure("non-finite matrix entry".into()));
        }
        let asym = max_abs(&(&m + m.transpose()));
        if asym > ANTISYMMETRY_TOL {
            return Err(Error::NotAntisymmetric {
                max_asymmetry: asym,
            });
        }
        Ok(Self::antisymmetrized(m))
    }

    /// Projects an arbitrary square matrix onto its antisymmetric part without
    /// checking how far it was from antisymmetric.
    pub(crate) fn antisymmetrized(m: DMatrix<f64>) -> Self {
        let m = (&m - m.transpose()) * 0.5;
        Self { m }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    /// Random skew matrix with independent standard-normal upper-triangle
    /// entries.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for k in (j + 1)..dim {
                let x: f64 = rng.sample(StandardNormal);
                m[(j, k)] = x;
                m[(k, j)] = -x;
            }
        }
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Number of fermionic modes `L = dim / 2`.
    pub fn modes(&self) -> usize {
        self.m.nrows() / 2
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.m[(j, k)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                out.push(self.m[(j, k)]);
            }
        }
        out
    }

    /// Leading `2n × 2n` principal block.
    pub fn leading_block(&self, n: usize) -> SkewMatrix {
        Self {
            m: self.m.view((0, 0), (2 * n, 2 * n)).into_owned(),
        }
    }

    pub fn scaled(&self, factor: f64) -> SkewMatrix {
        Self {
            m: &self.m * factor,
        }
    }

    /// `‖self - other‖_max`.
    pub fn max_abs_diff(&self, other: &SkewMatrix) -> f64 {
        max_abs(&(&self.m - &other.m))
    }

    /// `tr[selfᵀ · other] = Σ_jk self[j,k] other[j,k]`.
    pub fn frobenius_dot(&self, other: &SkewMatrix) -> f64 {
        self.m.dot(&other.m)
    }
}

/// Special-orthogonal `2L × 2L` matrix: the mode-space action of a Gaussian
/// unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeRotation {
    q: DMatrix<f64>,
}

impl ModeRotation {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        check_even_square(&q)?;
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure("non-finite rotation entry".into()));
        }
        let defect = orthogonality_defect(&q);
        if defect > ORTHOGONALITY_TOL {
            return Err(Error::NotRotation(format!("max |QᵀQ - I| = {defect:e}")));
        }
        let det = q.clone().determinant();
        if (det - 1.0).abs() > DETERMINANT_TOL {
            return Err(Error::NotRotation(format!("det(Q) = {det}")));
        }
        Ok(Self { q })
    }

    pub(crate) fn new_unchecked(q: DMatrix<f64>) -> Self {
        Self { q }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            q: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.q
    }

    /// `self · other`.
    pub fn compose(&self, other: &ModeRotation) -> Result<ModeRotation> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidDimension(format!(
                "cannot compose rotations of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self {
            q: &self.q * &other.q,
        })
    }

    /// `selfᵀ`, the inverse rotation.
    pub fn transpose(&self) -> ModeRotation {
        Self {
            q: self.q.transpose(),
        }
    }

    /// `self^power` by binary exponentiation.
    pub fn pow(&self, mut power: u64) -> ModeRotation {
        let mut result = DMatrix::identity(self.dim(), self.dim());
        let mut base = self.q.clone();
        while power > 0 {
            if power & 1 == 1 {
                result = &result * &base;
            }
            power >>= 1;
            if power > 0 {
                base = &base * &base;
            }
        }
        Self { q: result }
    }

    pub fn orthogonality_defect(&self) -> f64 {
        orthogonality_defect(&self.q)
    }

    pub fn max_abs_diff(&self, other: &ModeRotation) -> f64 {
        max_abs(&(&self.q - &other.q))
    }
}

/// Covariance matrix `M_jk = (i/2) tr([m_j, m_k] ρ)` of an `L`-mode state.
///
/// Entries lie in `[-1, 1]` and the spectral norm is at most one. Pure
/// Gaussian states additionally satisfy `MᵀM = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    base: SkewMatrix,
}

impl CovarianceMatrix {
    /// Validates entry bounds and the spectral-norm bound.
    pub fn new(base: SkewMatrix) -> Result<Self> {
        let max_entry = max_abs(base.matrix());
        if max_entry > 1.0 + BOUND_TOL {
            return Err(Error::InvalidCovariance(format!(
                "entry magnitude {max_entry} exceeds 1"
            )));
        }
        let norm = spectral_norm(base.matrix());
        if norm > 1.0 + BOUND_TOL {
            return Err(Error::InvalidCovariance(format!(
                "spectral norm {norm} exceeds 1"
            )));
        }
        Ok(Self { base })
    }

    /// Validates the matrix as the covariance of a pure Gaussian state.
    pub fn new_pure(base: SkewMatrix) -> Result<Self> {
        let defect = orthogonality_defect(base.matrix());
        if defect > PURITY_TOL_STRICT {
            return Err(Error::NotPure { defect });
        }
        Self::new(base)
    }

    pub(crate) fn new_unchecked(base: SkewMatrix) -> Self {
        Self { base }
    }

    pub fn skew(&self) -> &SkewMatrix {
        &self.base
    }

    pub fn into_skew(self) -> SkewMatrix {
        self.base
    }

    /// `‖MᵀM - I‖_max`.
    pub fn purity_defect(&self) -> f64 {
        orthogonality_defect(self.base.matrix())
    }

    pub fn is_pure(&self) -> bool {
        self.purity_defect() <= PURITY_TOL
    }

    pub(crate) fn require_pure(&self) -> Result<()> {
        let defect = self.purity_defect();
        if defect > PURITY_TOL {
            return Err(Error::NotPure { defect });
        }
        Ok(())
    }
}

impl Deref for CovarianceMatrix {
    type Target = SkewMatrix;

    fn deref(&self) -> &SkewMatrix {
        &self.base
    }
}

impl AsRef<SkewMatrix> for CovarianceMatrix {
    fn as_ref(&self) -> &SkewMatrix {
        &self.base
    }
}

impl AsRef<SkewMatrix> for SkewMatrix {
    fn as_ref(&self) -> &SkewMatrix {
        self
    }
}

/// Occupation pattern `ω ∈ {0,1}^L` of a Fock basis state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FockString {
    bits: Vec<u8>,
}

impl FockString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidDimension(
                "Fock string must have at least one mode".into(),
            ));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidData(format!(
                "Fock string bit {b} is not 0 or 1"
            )));
        }
        Ok(Self { bits })
    }

    pub fn zeros(modes: usize) -> Self {
        assert!(modes > 0, "Fock string must have at least one mode");
        Self {
            bits: vec![0; modes],
        }
    }

    pub fn ones(modes: usize) -> Self {
        assert!(modes > 0, "Fock string must have at least one mode");
        Self {
            bits: vec![1; modes],
        }
    }

    /// Fock string whose bits are the binary digits of `index`, mode 0 being
    /// the most significant.
    pub fn from_index(index: usize, modes: usize) -> Self {
        assert!(modes > 0, "Fock string must have at least one mode");
        let bits = (0..modes)
            .map(|k| ((index >> (modes - 1 - k)) & 1) as u8)
            .collect();
        Self { bits }
    }

    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn hamming(&self, other: &FockString) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }
}

fn check_even_square(m: &DMatrix<f64>) -> Result<()> {
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::InvalidDimension(format!(
            "matrix is {r}×{c}, not square"
        )));
    }
    if r == 0 || r % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "dimension {r} is not even and positive"
        )));
    }
    Ok(())
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub(crate) fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let gram = m.transpose() * m;
    max_abs(&(gram - DMatrix::<f64>::identity(n, n)))
}

pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0, |acc: f64, &s| acc.max(s))
}
