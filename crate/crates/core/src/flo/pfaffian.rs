use super::matrix::SkewMatrix;
use crate::error::{Error, Result};

/// Pivots smaller than this (relative to the largest entry) are treated as
/// exact zeros: the matrix is singular and its Pfaffian vanishes.
pub const PIVOT_TOL: f64 = 1e-14;

/// Pfaffian of a real skew matrix, normalized so that `Pf([[0,a],[-a,0]]) = a`.
///
/// Parlett–Reid reduction to tridiagonal form with partial pivoting. Each
/// step pivots the largest remaining entry of column `k` into position
/// `k+1` (flipping the sign for every swap), then eliminates the rest of
/// the column with a congruence, which leaves the Pfaffian unchanged.
pub fn pfaffian(a: &SkewMatrix) -> Result<f64> {
    let n = a.dim();
    let mut m = a.to_row_major();
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure(
            "non-finite entry in Pfaffian input".into(),
        ));
    }
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let idx = |r: usize, c: usize| r * n + c;
    let mut pf = 1.0;

    for k in (0..n - 1).step_by(2) {
        let mut pivot_row = k + 1;
        let mut pivot_abs = m[idx(k + 1, k)].abs();
        for r in (k + 2)..n {
            let v = m[idx(r, k)].abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = r;
            }
        }
        if pivot_abs <= PIVOT_TOL * scale {
            return Ok(0.0);
        }
        if pivot_row != k + 1 {
            swap_rows_and_cols(&mut m, n, k + 1, pivot_row);
            pf = -pf;
        }
        let pivot = m[idx(k, k + 1)];
        pf *= pivot;

        if k + 2 < n {
            // tau = A[k, k+2..] / A[k, k+1]; A[k+2.., k+2..] += tau ⊗ A[k+2.., k+1] - A[k+2.., k+1] ⊗ tau
            let tau: Vec<f64> = ((k + 2)..n).map(|c| m[idx(k, c)] / pivot).collect();
            let col: Vec<f64> = ((k + 2)..n).map(|r| m[idx(r, k + 1)]).collect();
            for (ri, r) in ((k + 2)..n).enumerate() {
                let row = &mut m[idx(r, k + 2)..idx(r, n)];
                let (tr, cr) = (tau[ri], col[ri]);
                for (ci, x) in row.iter_mut().enumerate() {
                    *x += tr * col[ci] - cr * tau[ci];
                }
            }
        }
    }
    if !pf.is_finite() {
        return Err(Error::NumericalFailure("Pfaffian overflowed".into()));
    }
    Ok(pf)
}

fn swap_rows_and_cols(m: &mut [f64], n: usize, a: usize, b: usize) {
    for c in 0..n {
        m.swap(a * n + c, b * n + c);
    }
    for r in 0..n {
        m.swap(r * n + a, r * n + b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Pfaffian by expansion along the first row; exponential cost.
    fn pfaffian_by_expansion(m: &DMatrix<f64>) -> f64 {
        let n = m.nrows();
        if n == 0 {
            return 1.0;
        }
        let mut total = 0.0;
        for j in 1..n {
            let keep: Vec<usize> = (1..n).filter(|&r| r != j).collect();
            let minor = DMatrix::from_fn(n - 2, n - 2, |r, c| m[(keep[r], keep[c])]);
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            total += sign * m[(0, j)] * pfaffian_by_expansion(&minor);
        }
        total
    }

    #[test]
    fn two_by_two_definition() {
        for a in [1.0, -2.5, 1e-3] {
            let s = SkewMatrix::from_row_major(2, &[0.0, a, -a, 0.0]).unwrap();
            assert_eq!(pfaffian(&s).unwrap(), a);
        }
    }

    #[test]
    fn direct_sum_of_canonical_blocks() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = 1.0;
        m[(1, 0)] = -1.0;
        m[(2, 3)] = 1.0;
        m[(3, 2)] = -1.0;
        let s = SkewMatrix::from_matrix(m).unwrap();
        assert_eq!(pfaffian(&s).unwrap(), 1.0);
    }

    #[test]
    fn matches_expansion_on_small_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 4, 6, 8] {
            for _ in 0..5 {
                let s = SkewMatrix::random(dim, &mut rng);
                let expected = pfaffian_by_expansion(s.matrix());
                let got = pfaffian(&s).unwrap();
                assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0));
            }
        }
    }

    #[test]
    fn singular_matrix_has_zero_pfaffian() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = 1.0;
        m[(1, 0)] = -1.0;
        let s = SkewMatrix::from_matrix(m).unwrap();
        assert_eq!(pfaffian(&s).unwrap(), 0.0);
        assert_eq!(pfaffian(&SkewMatrix::zeros(6)).unwrap(), 0.0);
    }

    #[test]
    fn pivoting_permutation_sign() {
        // Zero at (0,1) forces a swap on the first step.
        let mut m = DMatrix::zeros(4, 4);
        let entries = [(0, 2, 2.0), (1, 3, 3.0), (0, 3, 0.5), (1, 2, -1.0)];
        for &(r, c, v) in &entries {
            m[(r, c)] = v;
            m[(c, r)] = -v;
        }
        let expected = pfaffian_by_expansion(&m);
        let s = SkewMatrix::from_matrix(m).unwrap();
        assert!((pfaffian(&s).unwrap() - expected).abs() < 1e-14);
    }
}
