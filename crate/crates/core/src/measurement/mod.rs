//! Simulated single-shot Majorana-pair measurements and the two finite-sample
//! witness estimators built on them.
//!
//! Measuring `i m_j m_k` on a state with covariance matrix `M_p` returns
//! `β = ±1` with probability `(1 + β M_p[j,k]) / 2`.

mod entrywise;
mod importance;
mod records;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flo::SkewMatrix;

pub use entrywise::{
    commuting_partition, entrywise_estimate, entrywise_estimate_with_records, entrywise_eta,
    sample_entrywise,
};
pub use importance::{
    importance_distribution, sample_importance, sample_witness, sample_witness_n,
    sample_witness_records, ImportanceDistribution, CHUNK_SIZE,
};
pub use records::{ingest_records, read_records, write_records};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Importance,
    Entrywise,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Importance => "importance",
            Scheme::Entrywise => "entrywise",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "importance" => Ok(Scheme::Importance),
            "entrywise" => Ok(Scheme::Entrywise),
            other => Err(Error::InvalidData(format!("unknown scheme '{other}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One single-shot outcome. Indices are 0-based; `setting` is the commuting
/// group for the entrywise scheme and `-1` for importance sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub run: u64,
    pub j: usize,
    pub k: usize,
    pub beta: i8,
    pub setting: i64,
}

/// Outcome count and `Σβ` for one measured pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTally {
    pub j: usize,
    pub k: usize,
    pub count: u64,
    pub sum: i64,
}

impl PairTally {
    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatorResult {
    pub f_w_star: f64,
    pub x_star: f64,
    pub n: u64,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub scheme: Scheme,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub l: usize,
    #[serde(skip)]
    pub tallies: Option<Vec<PairTally>>,
    #[serde(skip)]
    pub m_star: Option<SkewMatrix>,
}

impl EstimatorResult {
    pub(crate) fn from_overlap(scheme: Scheme, l: usize, x_star: f64, n: u64) -> Self {
        Self {
            f_w_star: 1.0 - l as f64 / 2.0 + x_star / 4.0,
            x_star,
            n,
            epsilon: None,
            delta: None,
            scheme,
            seed: None,
            l,
            tallies: None,
            m_star: None,
        }
    }

    /// Echo the error and confidence parameters the run was planned for.
    pub fn with_parameters(mut self, epsilon: f64, delta: f64, seed: Option<u64>) -> Self {
        self.epsilon = Some(epsilon);
        self.delta = Some(delta);
        self.seed = seed;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_pair(dim: usize, j: usize, k: usize) -> Result<()> {
    if j >= k {
        return Err(Error::InvalidIndexOrder { j, k });
    }
    if k >= dim {
        return Err(Error::IndexOutOfRange {
            index: k,
            modes: dim / 2,
        });
    }
    Ok(())
}

/// Probability of `β = +1` when measuring `i m_j m_k`.
fn plus_probability(prep: &SkewMatrix, j: usize, k: usize) -> f64 {
    (0.5 * (1.0 + prep.get(j, k))).clamp(0.0, 1.0)
}

/// `P(β | j, k) = (1 + β M_p[j,k]) / 2`.
pub fn outcome_probability<P: AsRef<SkewMatrix> + ?Sized>(
    prep: &P,
    j: usize,
    k: usize,
    beta: i8,
) -> Result<f64> {
    let prep = prep.as_ref();
    check_pair(prep.dim(), j, k)?;
    let p_plus = plus_probability(prep, j, k);
    match beta {
        1 => Ok(p_plus),
        -1 => Ok(1.0 - p_plus),
        _ => Err(Error::InvalidParams(format!("outcome {beta} is not ±1"))),
    }
}
