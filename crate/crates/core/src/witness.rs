//! Fidelity witness evaluated from covariance matrices.
//!
//! For a pure Gaussian target `M_t` and any preparation `M_p` the witness
//! value is `F_W = 1 - L/2 + tr[M_pᵀ M_t] / 4`, a lower bound on the
//! fidelity that equals one exactly at the target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flo::{CovarianceMatrix, FockString, ModeRotation, SkewMatrix};

/// Default cutoff below which target entries count as zero.
pub const DEFAULT_TAU: f64 = 1e-12;

/// Nonzero upper-triangle entries `(j, k)`, `j < k`, of a target covariance
/// matrix (0-based, sorted lexicographically).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    pub pairs: Vec<(usize, usize)>,
    pub tau: f64,
}

impl SupportSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, j: usize, k: usize) -> bool {
        self.pairs.binary_search(&(j, k)).is_ok()
    }
}

/// All upper-triangle pairs with `|M_t[j,k]| > τ`.
pub fn support_set(target: &SkewMatrix, tau: f64) -> SupportSet {
    let n = target.dim();
    let mut pairs = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            if target.get(j, k).abs() > tau {
                pairs.push((j, k));
            }
        }
    }
    SupportSet { pairs, tau }
}

/// `|M_t| = Σ_{(j,k)∈Ω} |M_t[j,k]|`.
pub fn abs_sum(target: &SkewMatrix, omega: &SupportSet) -> f64 {
    omega
        .pairs
        .iter()
        .map(|&(j, k)| target.get(j, k).abs())
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub f_w: f64,
    pub overlap_x: f64,
    pub abs_sum: f64,
    pub l: usize,
    pub omega_size: usize,
    pub tau: f64,
    /// Largest possible shift of `F_W*` caused by entries dropped below `τ`.
    pub truncation_bound: f64,
}

/// Witness value with the default zero cutoff.
pub fn witness_value<P: AsRef<SkewMatrix> + ?Sized>(
    prep: &P,
    target: &CovarianceMatrix,
) -> Result<WitnessReport> {
    witness_value_with_tau(prep, target, DEFAULT_TAU)
}

/// `F_W = 1 - L/2 + tr[M_pᵀ M_t]/4`.
///
/// `prep` need not be a valid covariance matrix; estimated matrices from
/// finite statistics are accepted as they are.
pub fn witness_value_with_tau<P: AsRef<SkewMatrix> + ?Sized>(
    prep: &P,
    target: &CovarianceMatrix,
    tau: f64,
) -> Result<WitnessReport> {
    let prep = prep.as_ref();
    if prep.dim() != target.dim() {
        return Err(Error::InvalidDimension(format!(
            "preparation dimension {} does not match target dimension {}",
            prep.dim(),
            target.dim()
        )));
    }
    if !(tau >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "zero cutoff {tau} must be nonnegative"
        )));
    }
    target.require_pure()?;
    let l = target.modes();
    let overlap_x = prep.frobenius_dot(target.skew());
    let omega = support_set(target, tau);
    Ok(WitnessReport {
        f_w: 1.0 - l as f64 / 2.0 + overlap_x / 4.0,
        overlap_x,
        abs_sum: abs_sum(target, &omega),
        l,
        omega_size: omega.len(),
        tau,
        truncation_bound: 2.0 * (l * l) as f64 * tau,
    })
}

fn check_eps_delta(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "epsilon {epsilon} must be positive"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParams(format!(
            "delta {delta} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Ceiling that ignores relative rounding noise just above an integer.
fn ceil_clean(x: f64) -> u64 {
    (x - x.abs() * 1e-12).ceil().max(0.0) as u64
}

/// `N = ⌈ln(2/δ) |M_t|² / (2ε²)⌉` draws for the importance-sampling estimator.
pub fn sample_complexity(epsilon: f64, delta: f64, abs_sum: f64) -> Result<u64> {
    check_eps_delta(epsilon, delta)?;
    if !(abs_sum >= 0.0 && abs_sum.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "abs_sum {abs_sum} must be nonnegative"
        )));
    }
    Ok(ceil_clean(
        (2.0 / delta).ln() * abs_sum * abs_sum / (2.0 * epsilon * epsilon),
    ))
}

/// `(η, N)` for the entrywise scheme: every pair of `Ω` is measured
/// `η = ⌈ε⁻² L³ ln(2|Ω|/δ)⌉` times, using `N = 4Lη` preparations in total.
pub fn entrywise_sample_complexity(
    epsilon: f64,
    delta: f64,
    modes: usize,
    omega_size: usize,
) -> Result<(u64, u64)> {
    check_eps_delta(epsilon, delta)?;
    if modes == 0 || omega_size == 0 {
        return Err(Error::InvalidParams(
            "need L ≥ 1 and a nonempty support".into(),
        ));
    }
    let l = modes as f64;
    let eta =
        ceil_clean(l.powi(3) * (2.0 * omega_size as f64 / delta).ln() / (epsilon * epsilon)).max(1);
    Ok((eta, 4 * modes as u64 * eta))
}

/// Lipschitz bound `2^{-1/2} L^{3/2} ‖M - M*‖_max` on `|F_W - F_W*|`.
pub fn stability_bound(maxnorm_error: f64, modes: usize) -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 * (modes as f64).powf(1.5) * maxnorm_error
}

/// Mismatch content `n_⊥ = Σ_k [(1-ω_k)⟨n_k⟩ + ω_k(1-⟨n_k⟩)]` of a
/// preparation relative to the target `U|ω⟩`, where `U` has mode rotation
/// `Q` and `⟨n_k⟩` is read off `Qᵀ M_p Q`.
pub fn mismatch<P: AsRef<SkewMatrix> + ?Sized>(
    prep: &P,
    q: &ModeRotation,
    omega: &FockString,
) -> Result<f64> {
    let prep = prep.as_ref();
    if prep.dim() != q.dim() || prep.modes() != omega.len() {
        return Err(Error::InvalidDimension(format!(
            "preparation dimension {}, rotation dimension {}, {} modes in ω",
            prep.dim(),
            q.dim(),
            omega.len()
        )));
    }
    let back = q.matrix().transpose() * prep.matrix() * q.matrix();
    let mut n = 0.0;
    for (k, &w) in omega.bits().iter().enumerate() {
        let s = 1.0 - 2.0 * f64::from(w);
        n += 0.5 + 0.5 * s * back[(2 * k, 2 * k + 1)];
    }
    Ok(n)
}

/// Parameters of the robust certification test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationParams {
    pub threshold: f64,
    pub gap: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl CertificationParams {
    pub fn new(threshold: f64, gap: f64, epsilon: f64, delta: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidParams(format!(
                "F_T = {threshold} must lie in (0, 1)"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParams(format!(
                "delta {delta} must lie in (0, 1)"
            )));
        }
        let room = 1.0 - threshold;
        if !(epsilon > 0.0 && epsilon < room / 2.0) {
            return Err(Error::InvalidParams(format!(
                "epsilon {epsilon} must lie in (0, (1 - F_T)/2)"
            )));
        }
        if !(gap > 2.0 * epsilon && gap < room) {
            return Err(Error::InvalidParams(format!(
                "gap {gap} must lie in (2ε, 1 - F_T)"
            )));
        }
        Ok(Self {
            threshold,
            gap,
            epsilon,
            delta,
        })
    }

    /// `(1 - F_T - 2ε) / (1 - F_T - Δ)`: states whose mismatch does not
    /// exceed this are in the class the test is guaranteed to accept.
    pub fn mismatch_threshold(&self) -> f64 {
        (1.0 - self.threshold - 2.0 * self.epsilon) / (1.0 - self.threshold - self.gap)
    }

    /// Smallest estimate that is accepted.
    pub fn acceptance_level(&self) -> f64 {
        self.threshold + self.epsilon
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Accept,
    Reject,
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Decision::Accept => "Accept",
            Decision::Reject => "Reject",
        })
    }
}

/// Accept iff `F_W* ≥ F_T + ε`.
pub fn robust_test(estimate: f64, params: &CertificationParams) -> Decision {
    if estimate >= params.acceptance_level() {
        Decision::Accept
    } else {
        Decision::Reject
    }
}
