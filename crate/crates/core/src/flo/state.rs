use nalgebra::DMatrix;

use super::matrix::{CovarianceMatrix, FockString, ModeRotation, SkewMatrix};
use super::pfaffian::pfaffian;
use crate::error::{Error, Result};

/// Covariance matrix of the Fock state `|ω⟩`: `⊕_k (1 - 2ω_k) [[0,-1],[1,0]]`.
pub fn fock_covariance(omega: &FockString) -> CovarianceMatrix {
    let modes = omega.len();
    let mut m = DMatrix::zeros(2 * modes, 2 * modes);
    for (k, &w) in omega.bits().iter().enumerate() {
        let s = 1.0 - 2.0 * f64::from(w);
        m[(2 * k, 2 * k + 1)] = -s;
        m[(2 * k + 1, 2 * k)] = s;
    }
    CovarianceMatrix::new_unchecked(SkewMatrix::antisymmetrized(m))
}

/// `Q M Qᵀ`: the covariance matrix after the Gaussian unitary represented by `Q`.
pub fn conjugate(m: &CovarianceMatrix, q: &ModeRotation) -> Result<CovarianceMatrix> {
    if m.dim() != q.dim() {
        return Err(Error::InvalidDimension(format!(
            "covariance dimension {} does not match rotation dimension {}",
            m.dim(),
            q.dim()
        )));
    }
    let out = q.matrix() * m.matrix() * q.matrix().transpose();
    Ok(CovarianceMatrix::new_unchecked(
        SkewMatrix::antisymmetrized(out),
    ))
}

/// `|⟨σ^z_1 ⋯ σ^z_n⟩| = |Pf(M[1..2n, 1..2n])|` by Wick's theorem.
pub fn zstring_expectation(m: &CovarianceMatrix, n: usize) -> Result<f64> {
    if n == 0 || n > m.modes() {
        return Err(Error::InvalidDimension(format!(
            "string length {n} outside 1..={}",
            m.modes()
        )));
    }
    Ok(pfaffian(&m.leading_block(n))?.abs())
}

/// Overlap `tr[ρ₁ρ₂] = 2^{-L} |det(I - M₁M₂)|^{1/2}` of two pure Gaussian states.
///
/// The determinant is accumulated in log space so large `L` does not
/// overflow.
pub fn gaussian_overlap(m1: &CovarianceMatrix, m2: &CovarianceMatrix) -> Result<f64> {
    if m1.dim() != m2.dim() {
        return Err(Error::InvalidDimension(format!(
            "covariance dimensions {} and {} differ",
            m1.dim(),
            m2.dim()
        )));
    }
    m1.require_pure()?;
    m2.require_pure()?;
    let n = m1.dim();
    let a = DMatrix::<f64>::identity(n, n) - m1.matrix() * m2.matrix();
    let lu = a.lu();
    let u = lu.u();
    let mut log_det = 0.0;
    for i in 0..n {
        let d = u[(i, i)].abs();
        if d == 0.0 {
            return Ok(0.0);
        }
        log_det += d.ln();
    }
    let log_f = 0.5 * log_det - m1.modes() as f64 * std::f64::consts::LN_2;
    Ok(log_f.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flo::skew_exp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vacuum_blocks() {
        let m = fock_covariance(&FockString::zeros(2));
        let expected = [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ];
        for (j, row) in expected.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                assert_eq!(m.get(j, k), v);
            }
        }
    }

    #[test]
    fn occupied_mode_flips_the_block() {
        let m = fock_covariance(&FockString::ones(1));
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 0), -1.0);
    }

    #[test]
    fn fock_covariance_has_2l_unit_entries() {
        let w = FockString::new(vec![0, 1, 1, 0, 1]).unwrap();
        let m = fock_covariance(&w);
        let nonzero: Vec<f64> = m.matrix().iter().copied().filter(|x| *x != 0.0).collect();
        assert_eq!(nonzero.len(), 10);
        assert!(nonzero.iter().all(|x| x.abs() == 1.0));
        assert_eq!(m.purity_defect(), 0.0);
    }

    #[test]
    fn identity_rotation_is_a_no_op() {
        let m = fock_covariance(&FockString::new(vec![1, 0, 1]).unwrap());
        let out = conjugate(&m, &ModeRotation::identity(6)).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn conjugation_preserves_purity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = SkewMatrix::random(10, &mut rng);
        let q = skew_exp(&a, 1.7).unwrap();
        let out = conjugate(&fock_covariance(&FockString::zeros(5)), &q).unwrap();
        assert!(out.purity_defect() < 1e-9);
        assert!(out.matrix().iter().all(|x| x.abs() <= 1.0 + 1e-10));
    }

    #[test]
    fn conjugation_dimension_mismatch() {
        let m = fock_covariance(&FockString::zeros(2));
        assert!(matches!(
            conjugate(&m, &ModeRotation::identity(6)),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn zstring_on_product_state() {
        let m = fock_covariance(&FockString::zeros(4));
        for n in 1..=4 {
            assert!((zstring_expectation(&m, n).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(zstring_expectation(&m, 0).is_err());
        assert!(zstring_expectation(&m, 5).is_err());
    }

    #[test]
    fn overlap_identities() {
        let v = fock_covariance(&FockString::zeros(3));
        let f = fock_covariance(&FockString::ones(3));
        assert!((gaussian_overlap(&v, &v).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(gaussian_overlap(&v, &f).unwrap(), 0.0);
        let mixed = CovarianceMatrix::new(v.skew().scaled(0.5)).unwrap();
        assert!(matches!(
            gaussian_overlap(&mixed, &v),
            Err(Error::NotPure { .. })
        ));
    }
}
