#![allow(dead_code)]

use fermion_witness::flo::{
    conjugate, fock_covariance, skew_exp, CovarianceMatrix, FockString, ModeRotation, SkewMatrix,
};
use fermion_witness::oracle::{DenseOperator, DenseState, ExactOracle};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// A pure Gaussian state `U|ω⟩` in both representations.
pub struct GaussianPair {
    pub cov: CovarianceMatrix,
    pub dense: DenseState,
    pub q: ModeRotation,
    pub omega: FockString,
    pub u: DenseOperator,
}

pub fn random_gaussian<R: Rng>(oracle: &ExactOracle, rng: &mut R) -> GaussianPair {
    let modes = oracle.modes();
    let a = SkewMatrix::random(2 * modes, rng);
    let omega = FockString::from_index(rng.random_range(0..1usize << modes), modes);
    let q = skew_exp(&a, 1.0).unwrap();
    let cov = conjugate(&fock_covariance(&omega), &q).unwrap();
    let u = oracle.gaussian_unitary(&a, 1.0).unwrap();
    let dense = DenseState::fock(&omega).evolve(&u);
    GaussianPair {
        cov,
        dense,
        q,
        omega,
        u,
    }
}

/// Random full-rank mixed state `GG†/tr(GG†)`.
pub fn random_mixed<R: Rng>(modes: usize, rng: &mut R) -> DenseState {
    let dim = 1usize << modes;
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    let mut rho = rho / tr;
    // Remove rounding asymmetry so the state validates at 1e-12.
    rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    DenseState::from_density(DenseOperator::new(modes, rho).unwrap()).unwrap()
}

/// Random normalized state vector.
pub fn random_vector<R: Rng>(modes: usize, rng: &mut R) -> Vec<Complex64> {
    (0..1usize << modes)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Column `c` of a dense operator as a vector.
pub fn column(op: &DenseOperator, c: usize) -> Vec<Complex64> {
    op.matrix().column(c).iter().copied().collect()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}
