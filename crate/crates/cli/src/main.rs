//! `fwit`: build fermionic Gaussian targets, evaluate and estimate fidelity
//! witnesses, reproduce the quench sweeps and run certification decisions.

mod config;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use fermion_witness::experiments::{fit_power_law, fmt_f64, run_fig2, Fig2Config, PowerFit};
use fermion_witness::flo::{ground_state_covariance, CovarianceMatrix};
use fermion_witness::io::{load_covariance, MatrixFile};
use fermion_witness::measurement::{
    ingest_records, read_records, sample_entrywise, sample_importance, write_records,
    EstimatorResult, Scheme,
};
use fermion_witness::spin::{quench_target, xy_coupling_matrix, ChainParams, QuenchSpec};
use fermion_witness::witness::{
    abs_sum, entrywise_sample_complexity, robust_test, sample_complexity, support_set,
    witness_value_with_tau, CertificationParams, Decision, WitnessReport, DEFAULT_TAU,
};

#[derive(Parser)]
#[command(
    name = "fwit",
    version,
    about = "Fidelity witnesses for fermionic Gaussian states"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct Global {
    /// Base seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (a directory for `fig2`). Defaults to stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Cutoff below which target entries are treated as zero.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// JSON file with default values for any of the options.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build a quench target or a ground state and write its covariance matrix.
    Target(TargetArgs),
    /// Evaluate the witness of a preparation against a target.
    Witness(WitnessArgs),
    /// Simulate measurements and estimate the witness.
    Sample(SampleArgs),
    /// Quench sweeps: heatmap, string decay, scaling fit and Trotter table.
    Fig2(Fig2Args),
    /// Accept or reject recorded measurements (exit code 0 accept, 1 reject, 2 error).
    Robust(RobustArgs),
    /// Power-law fit of (L, value) rows from a CSV file.
    Fit(FitArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TargetMode {
    Quench,
    Ground,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct TargetArgs {
    /// Number of sites.
    #[arg(short = 'L', long)]
    sites: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<TargetMode>,
    /// XX coupling (default 1).
    #[arg(long)]
    j: Option<f64>,
    /// YY coupling (default 0).
    #[arg(long)]
    jy: Option<f64>,
    /// Transverse field (default 1).
    #[arg(long)]
    b: Option<f64>,
    /// Evolution time. Defaults to `t_over_l · L`.
    #[arg(long)]
    t: Option<f64>,
    /// Time rule `t = t_over_l · L` (default 1/8).
    #[arg(long)]
    t_over_l: Option<f64>,
    /// Trotter steps, 0 for exact evolution.
    #[arg(long)]
    trotter_steps: Option<u64>,
    /// Quench description file (`{"L", "Jx", "Jy", "B", "t", "T", "omega"}`),
    /// used instead of the chain flags.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct WitnessArgs {
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    prep: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct SampleArgs {
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    prep: Option<PathBuf>,
    /// Target accuracy (default 0.05).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Failure probability (default 0.1).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Override the number of importance-sampling draws.
    #[arg(long)]
    draws: Option<u64>,
    /// Override the per-pair repetition count of the entrywise scheme.
    #[arg(long)]
    eta: Option<u64>,
    /// Also write every single-shot outcome to this file.
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SchemeArg {
    Importance,
    Entrywise,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Importance => Scheme::Importance,
            SchemeArg::Entrywise => Scheme::Entrywise,
        }
    }
}

#[derive(Args, Serialize, Default)]
struct Fig2Args {
    #[arg(long, value_delimiter = ',')]
    ls: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    trotter_ls: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    trotter_steps: Option<Vec<u64>>,
    #[arg(long)]
    j: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    t_over_l: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Cap on Monte Carlo draws per Trotter grid point.
    #[arg(long)]
    max_draws: Option<u64>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct RobustArgs {
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    /// Fidelity threshold F_T.
    #[arg(long)]
    threshold: Option<f64>,
    /// Gap Δ above the threshold that must be accepted.
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Failure probability (default 0.1).
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Default)]
#[serde(default)]
struct FitArgs {
    /// CSV file whose first column is L.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Name of the value column (default: the second column).
    #[arg(long)]
    column: Option<String>,
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.with_context(|| format!("missing --{flag}"))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn csv_block(header: &str, row: &str) -> String {
    format!("{header}\n{row}\n")
}

fn load_target(path: Option<PathBuf>, flag: &str) -> Result<CovarianceMatrix> {
    let path = required(path, flag)?;
    load_covariance(&path).with_context(|| format!("loading {}", path.display()))
}

fn cmd_target(g: &Global, a: TargetArgs) -> Result<()> {
    let m = if let Some(path) = &a.spec {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        quench_target(&QuenchSpec::from_json(&text)?)?
    } else {
        let l = required(a.sites, "sites")?;
        let params = ChainParams::uniform(
            l,
            a.j.unwrap_or(1.0),
            a.jy.unwrap_or(0.0),
            a.b.unwrap_or(1.0),
        )?;
        match a.mode.unwrap_or(TargetMode::Quench) {
            TargetMode::Ground => ground_state_covariance(&xy_coupling_matrix(&params))?,
            TargetMode::Quench => {
                let t = a.t.unwrap_or(a.t_over_l.unwrap_or(0.125) * l as f64);
                quench_target(&QuenchSpec::from_all_up(
                    params,
                    t,
                    a.trotter_steps.unwrap_or(0),
                )?)?
            }
        }
    };
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string(&MatrixFile::covariance(&m))? + "\n",
        Format::Csv => {
            let mut s = String::from("j,k,abs_m\n");
            for j in 0..m.dim() {
                for k in 0..m.dim() {
                    writeln!(s, "{},{},{}", j + 1, k + 1, fmt_f64(m.get(j, k).abs()))?;
                }
            }
            s
        }
    };
    emit(g.output.as_deref(), &text)
}

fn report_csv(r: &WitnessReport) -> String {
    csv_block(
        "f_w,overlap_x,abs_sum,l,omega_size,tau,truncation_bound",
        &format!(
            "{},{},{},{},{},{},{}",
            fmt_f64(r.f_w),
            fmt_f64(r.overlap_x),
            fmt_f64(r.abs_sum),
            r.l,
            r.omega_size,
            fmt_f64(r.tau),
            fmt_f64(r.truncation_bound)
        ),
    )
}

fn cmd_witness(g: &Global, a: WitnessArgs) -> Result<()> {
    let target = load_target(a.target, "target")?;
    let prep = load_target(a.prep, "prep")?;
    let report = witness_value_with_tau(&prep, &target, g.tau.unwrap_or(DEFAULT_TAU))?;
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => report_csv(&report),
    };
    emit(g.output.as_deref(), &text)
}

fn opt_csv(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn estimate_csv(r: &EstimatorResult) -> String {
    csv_block(
        "f_w_star,x_star,n,epsilon,delta,scheme,seed",
        &format!(
            "{},{},{},{},{},{},{}",
            fmt_f64(r.f_w_star),
            fmt_f64(r.x_star),
            r.n,
            opt_csv(r.epsilon),
            opt_csv(r.delta),
            r.scheme,
            r.seed.map(|s| s.to_string()).unwrap_or_default()
        ),
    )
}

fn cmd_sample(g: &Global, a: SampleArgs) -> Result<()> {
    let target = load_target(a.target, "target")?;
    let prep = load_target(a.prep, "prep")?;
    let (eps, delta) = (a.epsilon.unwrap_or(0.05), a.delta.unwrap_or(0.1));
    let tau = g.tau.unwrap_or(DEFAULT_TAU);
    let seed = g.seed.unwrap_or(0);
    let keep = a.records.is_some();
    let omega = support_set(&target, tau);
    let scheme: Scheme = a.scheme.unwrap_or(SchemeArg::Importance).into();
    let (result, records) = match scheme {
        Scheme::Importance => {
            let n = match a.draws {
                Some(n) => n,
                None => sample_complexity(eps, delta, abs_sum(&target, &omega))?.max(1),
            };
            sample_importance(&target, &prep, n, seed, tau, keep)?
        }
        Scheme::Entrywise => {
            let eta = match a.eta {
                Some(eta) => eta,
                None => entrywise_sample_complexity(eps, delta, target.modes(), omega.len())?.0,
            };
            sample_entrywise(&target, &prep, eta, seed, tau, keep)?
        }
    };
    let result = result.with_parameters(eps, delta, Some(seed));
    if let Some(path) = &a.records {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_records(BufWriter::new(file), scheme, &records)?;
    }
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => result.to_json()? + "\n",
        Format::Csv => estimate_csv(&result),
    };
    emit(g.output.as_deref(), &text)
}

fn cmd_fig2(
    g: &Global,
    base: &serde_json::Map<String, serde_json::Value>,
    a: Fig2Args,
) -> Result<()> {
    let mut config: Fig2Config = config::resolve(base, &a)?;
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    let dir = g.output.clone().unwrap_or_else(|| PathBuf::from("fig2"));
    let data = run_fig2(&config)?;
    data.write(&dir)?;
    let summary = serde_json::json!({
        "output": dir,
        "largest_l": data.heatmap_l,
        "fit_abs_sum": data.fit_abs_sum,
        "fit_full_sum": data.fit_full_sum,
        "trotter_rows": data.trotter.len(),
    });
    emit(None, &(serde_json::to_string_pretty(&summary)? + "\n"))
}

#[derive(Serialize)]
struct RobustReport {
    decision: Decision,
    f_w_star: f64,
    acceptance_level: f64,
    mismatch_threshold: f64,
    threshold: f64,
    gap: f64,
    epsilon: f64,
    delta: f64,
    scheme: Scheme,
    n: u64,
    /// Preparations the guarantee asks for at these parameters.
    n_required: u64,
}

fn cmd_robust(g: &Global, a: RobustArgs) -> Result<Decision> {
    let params = CertificationParams::new(
        required(a.threshold, "threshold")?,
        required(a.gap, "gap")?,
        required(a.epsilon, "epsilon")?,
        a.delta.unwrap_or(0.1),
    )?;
    let target = load_target(a.target, "target")?;
    let path = required(a.records, "records")?;
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let (scheme, records) = read_records(BufReader::new(file))?;
    let omega = support_set(&target, g.tau.unwrap_or(DEFAULT_TAU));
    let est = ingest_records(&records, scheme, &target, &omega)?;
    let decision = robust_test(est.f_w_star, &params);
    let n_required = match scheme {
        Scheme::Importance => {
            sample_complexity(params.epsilon, params.delta, abs_sum(&target, &omega))?
        }
        Scheme::Entrywise => {
            entrywise_sample_complexity(params.epsilon, params.delta, target.modes(), omega.len())?
                .1
        }
    };
    let report = RobustReport {
        decision,
        f_w_star: est.f_w_star,
        acceptance_level: params.acceptance_level(),
        mismatch_threshold: params.mismatch_threshold(),
        threshold: params.threshold,
        gap: params.gap,
        epsilon: params.epsilon,
        delta: params.delta,
        scheme,
        n: est.n,
        n_required,
    };
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => csv_block(
            "decision,f_w_star,acceptance_level,mismatch_threshold,threshold,gap,epsilon,delta,scheme,n,n_required",
            &format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                decision,
                fmt_f64(report.f_w_star),
                fmt_f64(report.acceptance_level),
                fmt_f64(report.mismatch_threshold),
                fmt_f64(report.threshold),
                fmt_f64(report.gap),
                fmt_f64(report.epsilon),
                fmt_f64(report.delta),
                scheme,
                report.n,
                n_required
            ),
        ),
    };
    emit(g.output.as_deref(), &text)?;
    if est.n < n_required {
        eprintln!(
            "warning: {} records, the guarantee needs {n_required}",
            est.n
        );
    }
    Ok(decision)
}

fn read_points(path: &Path, column: Option<&str>) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows = rdr.records();
    let first = rows.next().context("empty input")??;
    let header = first
        .get(0)
        .is_some_and(|c| c.trim().parse::<f64>().is_err());
    let col = match (column, header) {
        (Some(name), true) => first
            .iter()
            .position(|c| c.trim() == name)
            .with_context(|| format!("no column named '{name}'"))?,
        (Some(name), false) => bail!("--column {name} needs a header row"),
        (None, _) => 1,
    };
    let parse = |row: &csv::StringRecord, line: usize| -> Result<(f64, f64)> {
        let get = |i: usize| -> Result<f64> {
            let raw = row
                .get(i)
                .with_context(|| format!("line {line}: missing column {}", i + 1))?;
            raw.trim()
                .parse()
                .with_context(|| format!("line {line}: bad number '{raw}'"))
        };
        Ok((get(0)?, get(col)?))
    };
    let mut points = Vec::new();
    if !header {
        points.push(parse(&first, 1)?);
    }
    for (i, row) in rows.enumerate() {
        points.push(parse(&row?, i + 2)?);
    }
    Ok(points)
}

fn cmd_fit(g: &Global, a: FitArgs) -> Result<()> {
    let path = required(a.input, "input")?;
    let fit: PowerFit = fit_power_law(&read_points(&path, a.column.as_deref())?)?;
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&fit)? + "\n",
        Format::Csv => csv_block(
            "prefactor,exponent,residual",
            &format!(
                "{},{},{}",
                fmt_f64(fit.prefactor),
                fmt_f64(fit.exponent),
                fmt_f64(fit.residual)
            ),
        ),
    };
    emit(g.output.as_deref(), &text)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file = config::load(cli.global.config.as_deref())?;
    let name = match &cli.command {
        Command::Target(_) => "target",
        Command::Witness(_) => "witness",
        Command::Sample(_) => "sample",
        Command::Fig2(_) => "fig2",
        Command::Robust(_) => "robust",
        Command::Fit(_) => "fit",
    };
    let base = config::section(&file, name);
    let g: Global = config::resolve(&base, &cli.global)?;
    match cli.command {
        Command::Target(a) => cmd_target(&g, config::resolve(&base, &a)?)?,
        Command::Witness(a) => cmd_witness(&g, config::resolve(&base, &a)?)?,
        Command::Sample(a) => cmd_sample(&g, config::resolve(&base, &a)?)?,
        Command::Fig2(a) => cmd_fig2(&g, &base, a)?,
        Command::Robust(a) => {
            return Ok(match cmd_robust(&g, config::resolve(&base, &a)?)? {
                Decision::Accept => ExitCode::SUCCESS,
                Decision::Reject => ExitCode::from(1),
            });
        }
        Command::Fit(a) => cmd_fit(&g, config::resolve(&base, &a)?)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
