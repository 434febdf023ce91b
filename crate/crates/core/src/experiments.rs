//! Sweeps behind the command-line experiments: quench targets over a range
//! of chain lengths, Trotter-error sweeps, power-law fits and CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flo::{ground_state_covariance, zstring_expectation, CovarianceMatrix};
use crate::measurement::sample_witness_n;
use crate::spin::{quench_target, xy_coupling_matrix, ChainParams, QuenchSpec};
use crate::witness::{abs_sum, sample_complexity, support_set, witness_value};

/// `value ≈ prefactor · L^exponent`, fitted by least squares in log-log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub prefactor: f64,
    pub exponent: f64,
    /// RMS residual of `log value`.
    pub residual: f64,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.len() < 4 {
        return Err(Error::InvalidData(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points
        .iter()
        .find(|&&(x, y)| !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite())
    {
        return Err(Error::InvalidData(format!(
            "point ({x}, {y}) is not positive"
        )));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidData("all abscissae are equal".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = (logs
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(PowerFit {
        prefactor: intercept.exp(),
        exponent,
        residual,
    })
}

/// Seed for one grid point, mixed with SplitMix64.
pub fn grid_seed(seed: u64, l: usize, t: u64) -> u64 {
    let mut z = seed;
    for v in [l as u64, t] {
        z = z.wrapping_add(v).wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Float formatting used in every CSV: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Quench from the all-up state under a uniform transverse-field Ising chain.
pub fn tfim_quench(l: usize, j: f64, b: f64, t: f64, trotter_steps: u64) -> Result<QuenchSpec> {
    QuenchSpec::from_all_up(ChainParams::tfim(l, j, b)?, t, trotter_steps)
}

/// `|M_t|` of the target with the default zero cutoff.
pub fn target_abs_sum(m: &CovarianceMatrix) -> f64 {
    abs_sum(m, &support_set(m, crate::witness::DEFAULT_TAU))
}

/// Ground state of the uniform transverse-field Ising chain.
pub fn tfim_ground_state(l: usize, j: f64, b: f64) -> Result<CovarianceMatrix> {
    ground_state_covariance(&xy_coupling_matrix(&ChainParams::tfim(l, j, b)?))
}

/// `F_W` of Trotterized preparations against the continuous quench target.
pub fn trotter_sweep(spec: &QuenchSpec, steps: &[u64]) -> Result<Vec<(u64, f64)>> {
    let target = quench_target(&spec.with_trotter_steps(0))?;
    steps
        .par_iter()
        .map(|&t| {
            if t == 0 {
                return Err(Error::InvalidParams(
                    "Trotter step counts must be positive".into(),
                ));
            }
            let prep = quench_target(&spec.with_trotter_steps(t))?;
            Ok((t, witness_value(&prep, &target)?.f_w))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Fig2Config {
    /// Chain lengths for the scaling fit. The largest one is also used for
    /// the heatmap and the string-decay panel.
    pub ls: Vec<usize>,
    /// Chain lengths for the Trotter panel.
    pub trotter_ls: Vec<usize>,
    pub trotter_steps: Vec<u64>,
    pub j: f64,
    pub b: f64,
    /// Evolution time is `t_over_l · L`.
    pub t_over_l: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Cap on Monte Carlo draws per Trotter grid point.
    pub max_draws: u64,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            ls: vec![8, 16, 32, 64, 128],
            trotter_ls: vec![8, 16, 32, 64, 128],
            trotter_steps: (1..=8).map(|p| 1u64 << p).collect(),
            j: 1.0,
            b: 1.0,
            t_over_l: 0.125,
            epsilon: 0.05,
            delta: 0.1,
            seed: 0,
            max_draws: 100_000,
        }
    }
}

impl Fig2Config {
    pub fn validate(&self) -> Result<()> {
        if self.ls.is_empty() || self.ls.contains(&0) {
            return Err(Error::InvalidParams(
                "chain lengths must be a nonempty list of positive sizes".into(),
            ));
        }
        if self.trotter_ls.contains(&0) || self.trotter_steps.contains(&0) {
            return Err(Error::InvalidParams(
                "Trotter grid values must be positive".into(),
            ));
        }
        if !(self.t_over_l >= 0.0 && self.t_over_l.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "time rule {} must be nonnegative",
                self.t_over_l
            )));
        }
        if self.max_draws == 0 {
            return Err(Error::InvalidParams("max_draws must be positive".into()));
        }
        sample_complexity(self.epsilon, self.delta, 1.0).map(|_| ())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrotterRow {
    pub l: usize,
    pub trotter_steps: u64,
    pub f_w: f64,
    pub n_bound: u64,
    pub n_used: u64,
    pub f_w_star: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig2Data {
    pub heatmap_l: usize,
    /// `(j, k, |M_t[j,k]|)`, 0-based.
    pub heatmap: Vec<(usize, usize, f64)>,
    /// `(n, |⟨σ^z_1 ⋯ σ^z_n⟩|)` at the largest chain length.
    pub zstring: Vec<(usize, f64)>,
    /// `(L, |M_t|, Σ_{j,k} |M_t[j,k]|)`: the upper-triangle sum over the
    /// support and the sum over all `4L²` entries, which is twice as large.
    pub scaling: Vec<(usize, f64, f64)>,
    /// Fit of the upper-triangle sum `|M_t|`.
    pub fit_abs_sum: PowerFit,
    /// Fit of the sum over all entries.
    pub fit_full_sum: PowerFit,
    pub trotter: Vec<TrotterRow>,
}

pub fn run_fig2(config: &Fig2Config) -> Result<Fig2Data> {
    config.validate()?;
    let targets: Vec<(usize, CovarianceMatrix)> = config
        .ls
        .par_iter()
        .map(|&l| {
            let spec = tfim_quench(l, config.j, config.b, config.t_over_l * l as f64, 0)?;
            Ok((l, quench_target(&spec)?))
        })
        .collect::<Result<_>>()?;
    let scaling: Vec<(usize, f64, f64)> = targets
        .iter()
        .map(|(l, m)| {
            (
                *l,
                target_abs_sum(m),
                m.matrix().iter().map(|x| x.abs()).sum(),
            )
        })
        .collect();
    let fit_abs_sum = fit_power_law(
        &scaling
            .iter()
            .map(|&(l, s, _)| (l as f64, s))
            .collect::<Vec<_>>(),
    )?;
    let fit_full_sum = fit_power_law(
        &scaling
            .iter()
            .map(|&(l, _, s)| (l as f64, s))
            .collect::<Vec<_>>(),
    )?;

    let (heatmap_l, largest) = targets
        .iter()
        .max_by_key(|(l, _)| *l)
        .expect("validated nonempty");
    let dim = largest.dim();
    let heatmap = (0..dim)
        .flat_map(|j| (0..dim).map(move |k| (j, k)))
        .map(|(j, k)| (j, k, largest.get(j, k).abs()))
        .collect();
    let zstring = (1..=largest.modes())
        .into_par_iter()
        .map(|n| Ok((n, zstring_expectation(largest, n)?)))
        .collect::<Result<_>>()?;

    let grid: Vec<(usize, u64)> = config
        .trotter_ls
        .iter()
        .flat_map(|&l| config.trotter_steps.iter().map(move |&t| (l, t)))
        .collect();
    let trotter = grid
        .par_iter()
        .map(|&(l, steps)| {
            let spec = tfim_quench(l, config.j, config.b, config.t_over_l * l as f64, steps)?;
            let target = quench_target(&spec.with_trotter_steps(0))?;
            let prep = quench_target(&spec)?;
            let f_w = witness_value(&prep, &target)?.f_w;
            let n_bound = sample_complexity(config.epsilon, config.delta, target_abs_sum(&target))?;
            let n_used = n_bound.clamp(1, config.max_draws);
            let est = sample_witness_n(&target, &prep, n_used, grid_seed(config.seed, l, steps))?;
            Ok(TrotterRow {
                l,
                trotter_steps: steps,
                f_w,
                n_bound,
                n_used,
                f_w_star: est.f_w_star,
            })
        })
        .collect::<Result<_>>()?;

    Ok(Fig2Data {
        heatmap_l: *heatmap_l,
        heatmap,
        zstring,
        scaling,
        fit_abs_sum,
        fit_full_sum,
        trotter,
    })
}

fn csv_text(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut s = String::new();
    s.push_str(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

impl Fig2Data {
    pub fn heatmap_csv(&self) -> String {
        csv_text(
            "j,k,abs_m",
            self.heatmap
                .iter()
                .map(|&(j, k, v)| format!("{},{},{}", j + 1, k + 1, fmt_f64(v))),
        )
    }

    pub fn zstring_csv(&self) -> String {
        csv_text(
            "n,zstring",
            self.zstring
                .iter()
                .map(|&(n, v)| format!("{n},{}", fmt_f64(v))),
        )
    }

    pub fn abs_sum_csv(&self) -> String {
        csv_text(
            "L,abs_sum,full_sum",
            self.scaling
                .iter()
                .map(|&(l, a, f)| format!("{l},{},{}", fmt_f64(a), fmt_f64(f))),
        )
    }

    pub fn trotter_csv(&self) -> String {
        csv_text(
            "L,T,f_w,n_bound,n_used,f_w_star",
            self.trotter.iter().map(|r| {
                let mut s = String::new();
                let _ = write!(
                    s,
                    "{},{},{},{},{},{}",
                    r.l,
                    r.trotter_steps,
                    fmt_f64(r.f_w),
                    r.n_bound,
                    r.n_used,
                    fmt_f64(r.f_w_star)
                );
                s
            }),
        )
    }

    /// Write `heatmap.csv`, `zstring.csv`, `abs_sum.csv`, `trotter.csv`
    /// and `fit.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("heatmap.csv"), self.heatmap_csv())?;
        fs::write(dir.join("zstring.csv"), self.zstring_csv())?;
        fs::write(dir.join("abs_sum.csv"), self.abs_sum_csv())?;
        fs::write(dir.join("trotter.csv"), self.trotter_csv())?;
        let fits =
            serde_json::json!({ "abs_sum": self.fit_abs_sum, "full_sum": self.fit_full_sum });
        fs::write(
            dir.join("fit.json"),
            serde_json::to_string_pretty(&fits)? + "\n",
        )?;
        Ok(())
    }
}
