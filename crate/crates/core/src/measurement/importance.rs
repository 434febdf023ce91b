use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{plus_probability, EstimatorResult, MeasurementRecord, Scheme};
use crate::error::{Error, Result};
use crate::flo::{CovarianceMatrix, SkewMatrix};
use crate::witness::{abs_sum, sample_complexity, support_set, SupportSet, DEFAULT_TAU};

/// Draws per independently seeded chunk. Chunk `c` uses ChaCha8 stream `c`
/// of the run seed, so results do not depend on the worker count.
pub const CHUNK_SIZE: u64 = 1 << 16;

/// `P_{j,k} = |M_t[j,k]| / |M_t|` over the support of the target.
#[derive(Clone, Debug)]
pub struct ImportanceDistribution {
    pub pairs: Vec<(usize, usize)>,
    pub signs: Vec<i8>,
    pub weights: Vec<f64>,
    cumulative: Vec<f64>,
    pub abs_sum: f64,
}

impl ImportanceDistribution {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pair index for a uniform variate `u ∈ [0, 1)`.
    pub fn index_for(&self, u: f64) -> usize {
        let x = u * self.abs_sum;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.pairs.len() - 1)
    }
}

pub fn importance_distribution(
    target: &SkewMatrix,
    omega: &SupportSet,
) -> Result<ImportanceDistribution> {
    if omega.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut signs = Vec::with_capacity(omega.len());
    let mut cumulative = Vec::with_capacity(omega.len());
    let mut total = 0.0;
    for &(j, k) in &omega.pairs {
        let v = target.get(j, k);
        assert!(v != 0.0, "support contains a zero entry at ({j},{k})");
        signs.push(if v > 0.0 { 1 } else { -1 });
        total += v.abs();
        cumulative.push(total);
    }
    let s = abs_sum(target, omega);
    let weights = omega
        .pairs
        .iter()
        .map(|&(j, k)| target.get(j, k).abs() / s)
        .collect();
    Ok(ImportanceDistribution {
        pairs: omega.pairs.clone(),
        signs,
        weights,
        cumulative,
        abs_sum: total,
    })
}

/// Per-pair data needed while drawing.
struct Sampler {
    dist: ImportanceDistribution,
    p_plus: Vec<f64>,
}

impl Sampler {
    fn new(target: &CovarianceMatrix, prep: &SkewMatrix, tau: f64) -> Result<Self> {
        if prep.dim() != target.dim() {
            return Err(Error::InvalidDimension(format!(
                "preparation dimension {} does not match target dimension {}",
                prep.dim(),
                target.dim()
            )));
        }
        target.require_pure()?;
        let dist = importance_distribution(target, &support_set(target, tau))?;
        let p_plus = dist
            .pairs
            .iter()
            .map(|&(j, k)| plus_probability(prep, j, k))
            .collect();
        Ok(Self { dist, p_plus })
    }

    /// `Σ β·sgn(M_t[j,k])` over draws `start..end` of chunk `chunk`.
    fn run_chunk(
        &self,
        seed: u64,
        chunk: u64,
        start: u64,
        end: u64,
        mut records: Option<&mut Vec<MeasurementRecord>>,
    ) -> i64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let mut sum = 0i64;
        for run in start..end {
            let idx = self.dist.index_for(rng.random::<f64>());
            let beta: i8 = if rng.random::<f64>() < self.p_plus[idx] {
                1
            } else {
                -1
            };
            sum += i64::from(beta * self.dist.signs[idx]);
            if let Some(out) = records.as_deref_mut() {
                let (j, k) = self.dist.pairs[idx];
                out.push(MeasurementRecord {
                    run,
                    j,
                    k,
                    beta,
                    setting: -1,
                });
            }
        }
        sum
    }

    fn chunks(n: u64) -> impl ParallelIterator<Item = (u64, u64, u64)> {
        let count = n.div_ceil(CHUNK_SIZE);
        (0..count)
            .into_par_iter()
            .map(move |c| (c, c * CHUNK_SIZE, ((c + 1) * CHUNK_SIZE).min(n)))
    }

    fn result(&self, l: usize, sum: i64, n: u64) -> EstimatorResult {
        let x_star = 2.0 * self.dist.abs_sum * sum as f64 / n as f64;
        EstimatorResult::from_overlap(Scheme::Importance, l, x_star, n)
    }
}

/// Importance-sampling estimate with `n` draws.
pub fn sample_witness_n<P: AsRef<SkewMatrix> + ?Sized>(
    target: &CovarianceMatrix,
    prep: &P,
    n: u64,
    seed: u64,
) -> Result<EstimatorResult> {
    Ok(sample_importance(target, prep, n, seed, DEFAULT_TAU, false)?.0)
}

/// Importance-sampling estimate with the number of draws that guarantees
/// `|F_W* - F_W| ≤ ε` with probability at least `1 - δ`.
pub fn sample_witness<P: AsRef<SkewMatrix> + ?Sized>(
    target: &CovarianceMatrix,
    prep: &P,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<EstimatorResult> {
    let s = abs_sum(target, &support_set(target, DEFAULT_TAU));
    let n = sample_complexity(epsilon, delta, s)?.max(1);
    Ok(sample_witness_n(target, prep, n, seed)?.with_parameters(epsilon, delta, Some(seed)))
}

/// Same draws as [`sample_witness_n`], also returning every record.
pub fn sample_witness_records<P: AsRef<SkewMatrix> + ?Sized>(
    target: &CovarianceMatrix,
    prep: &P,
    n: u64,
    seed: u64,
) -> Result<(EstimatorResult, Vec<MeasurementRecord>)> {
    sample_importance(target, prep, n, seed, DEFAULT_TAU, true)
}

/// Importance sampling over the support `Ω_τ` of the target. Records are
/// collected only when `keep_records` is set; the estimate is the same
/// either way.
pub fn sample_importance<P: AsRef<SkewMatrix> + ?Sized>(
    target: &CovarianceMatrix,
    prep: &P,
    n: u64,
    seed: u64,
    tau: f64,
    keep_records: bool,
) -> Result<(EstimatorResult, Vec<MeasurementRecord>)> {
    if n == 0 {
        return Err(Error::InvalidParams("sample count must be positive".into()));
    }
    let sampler = Sampler::new(target, prep.as_ref(), tau)?;
    // Integer partial sums make the reduction order irrelevant.
    let parts: Vec<(i64, Vec<MeasurementRecord>)> = Sampler::chunks(n)
        .map(|(c, a, b)| {
            let mut recs = Vec::new();
            let s = if keep_records {
                recs.reserve((b - a) as usize);
                sampler.run_chunk(seed, c, a, b, Some(&mut recs))
            } else {
                sampler.run_chunk(seed, c, a, b, None)
            };
            (s, recs)
        })
        .collect();
    let sum = parts.iter().map(|(s, _)| s).sum();
    let records = parts.into_iter().flat_map(|(_, r)| r).collect();
    Ok((
        sampler.result(target.modes(), sum, n).with_seed(seed),
        records,
    ))
}

impl EstimatorResult {
    fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}
