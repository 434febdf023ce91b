//! Functions of real skew-symmetric matrices through the Hermitian matrix `iA`.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::{CovarianceMatrix, ModeRotation, SkewMatrix};
use crate::error::{Error, Result};

/// Above this dimension [`skew_exp`] switches from the spectral method to
/// scaling-and-squaring Padé.
pub const SPECTRAL_DIM_LIMIT: usize = 2000;

/// Single-particle energies below this magnitude make the ground state
/// ambiguous.
pub const ZERO_MODE_TOL: f64 = 1e-10;

/// Eigendecomposition `iA = V diag(λ) V†` of a real skew matrix.
pub(crate) struct SkewSpectrum {
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl SkewSpectrum {
    pub(crate) fn new(a: &SkewMatrix) -> Result<Self> {
        let h = a.matrix().map(|x| Complex64::new(0.0, x));
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or_else(|| {
            Error::NumericalFailure("Hermitian eigensolver did not converge".into())
        })?;
        let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
        }
        Ok(Self {
            values,
            vectors: eig.eigenvectors,
        })
    }

    /// Real part of `V diag(f(λ)) V†`.
    fn real_function<F: Fn(f64) -> Complex64>(&self, f: F) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (mut col, &lambda) in scaled.column_iter_mut().zip(&self.values) {
            col *= f(lambda);
        }
        (scaled * self.vectors.adjoint()).map(|z| z.re)
    }

    pub(crate) fn min_abs_value(&self) -> f64 {
        self.values
            .iter()
            .fold(f64::INFINITY, |acc, v| acc.min(v.abs()))
    }
}

/// Mode-space propagator `Q = exp(tA)`.
pub fn skew_exp(a: &SkewMatrix, t: f64) -> Result<ModeRotation> {
    if !t.is_finite() {
        return Err(Error::NumericalFailure(format!("time {t} is not finite")));
    }
    if t == 0.0 {
        return Ok(ModeRotation::identity(a.dim()));
    }
    if a.dim() > SPECTRAL_DIM_LIMIT {
        return skew_exp_pade(a, t);
    }
    let spectrum = SkewSpectrum::new(a)?;
    // tA = -i t (iA), so exp(tA) = V exp(-i t Λ) V†.
    let q = spectrum.real_function(|lambda| Complex64::from_polar(1.0, -t * lambda));
    finish_rotation(q)
}

/// Scaling-and-squaring Padé evaluation of `exp(tA)`.
pub fn skew_exp_pade(a: &SkewMatrix, t: f64) -> Result<ModeRotation> {
    if !t.is_finite() {
        return Err(Error::NumericalFailure(format!("time {t} is not finite")));
    }
    let q = (a.matrix() * t).exp();
    finish_rotation(q)
}

fn finish_rotation(q: DMatrix<f64>) -> Result<ModeRotation> {
    if q.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure(
            "matrix exponential overflowed".into(),
        ));
    }
    Ok(ModeRotation::new_unchecked(q))
}

/// Covariance matrix of the ground state of `H(A) = (i/4) Σ A_jk m_j m_k`.
///
/// With `A = R (⊕ ε_k [[0,1],[-1,0]]) Rᵀ`, `ε_k > 0`, the ground state
/// empties every normal mode, giving `M = R (⊕ [[0,-1],[1,0]]) Rᵀ`. This
/// equals `-A (AᵀA)^{-1/2} = i·sign(iA)`, which is what is evaluated here.
pub fn ground_state_covariance(a: &SkewMatrix) -> Result<CovarianceMatrix> {
    let spectrum = SkewSpectrum::new(a)?;
    let gap = spectrum.min_abs_value();
    if gap < ZERO_MODE_TOL {
        return Err(Error::DegenerateGroundState { energy: gap });
    }
    // i·sign(iA) is real because sign(iA) is purely imaginary.
    let m = spectrum.real_function(|lambda| Complex64::new(0.0, lambda.signum()));
    Ok(CovarianceMatrix::new_unchecked(
        SkewMatrix::antisymmetrized(m),
    ))
}
