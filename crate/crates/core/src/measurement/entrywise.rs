use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{plus_probability, EstimatorResult, MeasurementRecord, PairTally, Scheme};
use crate::error::{Error, Result};
use crate::flo::{CovarianceMatrix, SkewMatrix};
use crate::witness::{
    entrywise_sample_complexity, support_set, witness_value, SupportSet, DEFAULT_TAU,
};

/// Split `Ω` into groups of index-disjoint pairs.
///
/// Pairs are grouped by their distance `d = k - j` from the diagonal, and each
/// band is split by the parity of `⌊j/d⌋`. Two pairs of one group either
/// start in the same length-`d` block, or in blocks at least two apart, so
/// they never share an index. At most `2(2L-1)` groups arise.
pub fn commuting_partition(omega: &SupportSet, modes: usize) -> Vec<Vec<(usize, usize)>> {
    let mut groups: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for &(j, k) in &omega.pairs {
        debug_assert!(j < k && k < 2 * modes);
        let d = k - j;
        groups.entry((d, (j / d) % 2)).or_default().push((j, k));
    }
    groups.into_values().collect()
}

fn pair_rng(seed: u64, pair: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pair as u64);
    rng
}

fn check_inputs(target: &CovarianceMatrix, prep: &SkewMatrix, tau: f64) -> Result<SupportSet> {
    if prep.dim() != target.dim() {
        return Err(Error::InvalidDimension(format!(
            "preparation dimension {} does not match target dimension {}",
            prep.dim(),
            target.dim()
        )));
    }
    target.require_pure()?;
    let omega = support_set(target, tau);
    if omega.is_empty() {
        return Err(Error::EmptySupport);
    }
    Ok(omega)
}

/// Estimate from per-pair tallies: `M*[j,k]` is the mean outcome.
pub(crate) fn estimate_from_tallies(
    target: &CovarianceMatrix,
    tallies: Vec<PairTally>,
    runs: u64,
) -> Result<EstimatorResult> {
    let dim = target.dim();
    let mut m = nalgebra::DMatrix::zeros(dim, dim);
    for t in &tallies {
        let v = t.mean();
        m[(t.j, t.k)] = v;
        m[(t.k, t.j)] = -v;
    }
    let m_star = SkewMatrix::from_matrix(m)?;
    let report = witness_value(&m_star, target)?;
    let mut r =
        EstimatorResult::from_overlap(Scheme::Entrywise, target.modes(), report.overlap_x, runs);
    r.f_w_star = report.f_w;
    r.tallies = Some(tallies);
    r.m_star = Some(m_star);
    Ok(r)
}

fn simulate(
    target: &CovarianceMatrix,
    prep: &SkewMatrix,
    eta: u64,
    seed: u64,
    tau: f64,
    keep_records: bool,
) -> Result<(EstimatorResult, Vec<MeasurementRecord>)> {
    if eta == 0 {
        return Err(Error::InvalidParams("η must be positive".into()));
    }
    let omega = check_inputs(target, prep, tau)?;
    let groups = commuting_partition(&omega, target.modes());
    // Group id and position in Ω for every pair, in Ω order.
    let mut setting_of = vec![0usize; omega.len()];
    for (g, group) in groups.iter().enumerate() {
        for pair in group {
            let idx = omega.pairs.binary_search(pair).expect("partition covers Ω");
            setting_of[idx] = g;
        }
    }
    // Each pair draws its η outcomes from its own stream; pairs of one group
    // are measured in the same runs, with independent marginals.
    let per_pair: Vec<(PairTally, Vec<i8>)> = omega
        .pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(j, k))| {
            let p = plus_probability(prep, j, k);
            let mut rng = pair_rng(seed, idx);
            let mut sum = 0i64;
            let mut outcomes = Vec::with_capacity(if keep_records { eta as usize } else { 0 });
            for _ in 0..eta {
                let beta: i8 = if rng.random::<f64>() < p { 1 } else { -1 };
                sum += i64::from(beta);
                if keep_records {
                    outcomes.push(beta);
                }
            }
            (
                PairTally {
                    j,
                    k,
                    count: eta,
                    sum,
                },
                outcomes,
            )
        })
        .collect();

    let mut records = Vec::new();
    if keep_records {
        for (g, group) in groups.iter().enumerate() {
            for r in 0..eta {
                for pair in group {
                    let idx = omega.pairs.binary_search(pair).expect("partition covers Ω");
                    records.push(MeasurementRecord {
                        run: g as u64 * eta + r,
                        j: pair.0,
                        k: pair.1,
                        beta: per_pair[idx].1[r as usize],
                        setting: setting_of[idx] as i64,
                    });
                }
            }
        }
    }
    let tallies = per_pair.into_iter().map(|(t, _)| t).collect();
    let mut result = estimate_from_tallies(target, tallies, groups.len() as u64 * eta)?;
    result.seed = Some(seed);
    Ok((result, records))
}

/// `η` for the entrywise scheme at this target.
pub fn entrywise_eta(target: &CovarianceMatrix, epsilon: f64, delta: f64) -> Result<u64> {
    let omega = support_set(target, DEFAULT_TAU);
    if omega.is_empty() {
        return Err(Error::EmptySupport);
    }
    Ok(entrywise_sample_complexity(epsilon, delta, target.modes(), omega.len())?.0)
}

/// Entrywise estimate: every pair of `Ω` is measured `η` times, one
/// commuting group per run, and `F_W*` is evaluated on the empirical `M*`.
pub fn entrywise_estimate<P: AsRef<SkewMatrix> + ?Sized>(
    target: &CovarianceMatrix,
    prep: &P,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<EstimatorResult> {
    let eta = entrywise_eta(target, epsilon, delta)?;
    let (r, _) = simulate(target, prep.as_ref(), eta, seed, DEFAULT_TAU, false)?;
    Ok(r.with_parameters(epsilon, delta, Some(seed)))
}

/// Entrywise estimate with an explicit `η`, also returning the records.
pub fn entrywise_estimate_with_records<P: AsRef<SkewMatrix> + ?Sized>(
    target: &CovarianceMatrix,
    prep: &P,
    eta: u64,
    seed: u64,
    keep_records: bool,
) -> Result<(EstimatorResult, Vec<MeasurementRecord>)> {
    simulate(target, prep.as_ref(), eta, seed, DEFAULT_TAU, keep_records)
}

/// Entrywise scheme over the support `Ω_τ` of the target.
pub fn sample_entrywise<P: AsRef<SkewMatrix> + ?Sized>(
    target: &CovarianceMatrix,
    prep: &P,
    eta: u64,
    seed: u64,
    tau: f64,
    keep_records: bool,
) -> Result<(EstimatorResult, Vec<MeasurementRecord>)> {
    simulate(target, prep.as_ref(), eta, seed, tau, keep_records)
}
