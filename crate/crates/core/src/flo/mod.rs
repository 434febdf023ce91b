//! Real skew-symmetric linear algebra and fermionic-linear-optics state
//! mechanics.

mod matrix;
mod pfaffian;
mod spectral;
mod state;

pub use matrix::{
    CovarianceMatrix, FockString, ModeRotation, SkewMatrix, ANTISYMMETRY_TOL, BOUND_TOL,
    DETERMINANT_TOL, ORTHOGONALITY_TOL, PURITY_TOL, PURITY_TOL_STRICT,
};
pub use pfaffian::{pfaffian, PIVOT_TOL};
pub use spectral::{
    ground_state_covariance, skew_exp, skew_exp_pade, SPECTRAL_DIM_LIMIT, ZERO_MODE_TOL,
};
pub use state::{conjugate, fock_covariance, gaussian_overlap, zstring_expectation};

/// Validating constructor for [`SkewMatrix`] from a list of rows.
pub fn make_skew(dim: usize, entries: &[Vec<f64>]) -> crate::Result<SkewMatrix> {
    SkewMatrix::new(dim, entries)
}
