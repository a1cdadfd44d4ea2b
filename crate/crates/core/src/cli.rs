//! Command-line front end. Every subcommand forwards to library calls.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::algorithms::PolicyKind;
use crate::allocation::{lower_bound_from_gamma, solve_allocation};
use crate::error::{Error, Result};
use crate::expfam::{BanditInstance, RewardFamily};
use crate::harness::{
    fmt_f64, run_experiment, sweep_beta, ttts_cost_sweep, ttts_gap_sweep, write_cost_csv, write_reports_csv,
    write_trials_csv, CostSweepOptions, ExperimentConfig,
};
use crate::thresholds::{ThresholdKind, ThresholdSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_ALL_CENSORED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ttsprt", version, about = "Fixed-confidence best-arm identification experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the β-optimal allocation of an instance.
    Allocation(AllocationArgs),
    /// Evaluate a stopping threshold c_{n,δ}.
    Threshold(ThresholdArgs),
    /// Run a Monte Carlo experiment.
    Run(RunArgs),
    /// Run one experiment per β value.
    SweepBeta(SweepBetaArgs),
    /// Measure the TTTS challenger cost on idealized histories.
    TttsCost(TttsCostArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// gaussian, bernoulli or exponential.
    #[arg(long)]
    pub family: String,
    /// Standard deviation, gaussian family only.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Comma-separated arm means.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub means: Vec<f64>,
}

impl InstanceArgs {
    fn instance(&self) -> Result<BanditInstance> {
        BanditInstance::new(RewardFamily::from_name(&self.family, self.sigma)?, self.means.clone())
    }
}

#[derive(Debug, Args)]
pub struct AllocationArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Also print the sample-complexity lower bound at this δ.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// gaussian or exponential-family.
    #[arg(long)]
    pub kind: ThresholdKind,
    /// Number of arms K.
    #[arg(long)]
    pub arms: usize,
    #[arg(long)]
    pub delta: f64,
    /// Round n.
    #[arg(long)]
    pub n: u64,
}

/// Inline overrides applied on top of the config file.
#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML experiment manifest.
    #[arg(long)]
    pub config: PathBuf,
    /// Base seed; required, there is no time-based default.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub threshold: Option<ThresholdKind>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub stop_disabled_horizon: Option<u64>,
    #[arg(long)]
    pub resample_cap: Option<u64>,
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::from_toml_file(&self.config, Some(self.seed))?;
        if let Some(p) = &self.policy {
            cfg.policy = p.parse::<PolicyKind>()?;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(d) = self.delta {
            cfg.delta = d;
        }
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        if let Some(t) = self.threshold {
            cfg.threshold = Some(t);
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        if let Some(h) = self.stop_disabled_horizon {
            cfg.stop_disabled_horizon = Some(h);
        }
        if let Some(c) = self.resample_cap {
            cfg.resample_cap = c;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Aggregate report CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional per-trial CSV.
    #[arg(long)]
    pub trials_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepBetaArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Comma-separated β grid.
    #[arg(long, value_delimiter = ',', required = true)]
    pub betas: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TttsCostArgs {
    #[arg(long)]
    pub sigma: f64,
    /// Comma-separated means for the n sweep.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0")]
    pub means: Vec<f64>,
    /// Comma-separated rounds n.
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,600,800,1000,1200,1400,1600,1800,2000")]
    pub n_grid: Vec<u64>,
    /// Comma-separated gaps; switches to a gap sweep on two-arm instances.
    #[arg(long, value_delimiter = ',')]
    pub gaps: Option<Vec<f64>>,
    /// Round used by the gap sweep.
    #[arg(long, default_value_t = 500)]
    pub gap_n: u64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 2000)]
    pub draws: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::algorithms::DEFAULT_RESAMPLE_CAP)]
    pub resample_cap: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn fmt_vec(xs: &[f64]) -> String {
    let cells: Vec<String> = xs.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", cells.join(", "))
}

fn cmd_allocation(args: &AllocationArgs, out: &mut dyn Write) -> Result<i32> {
    let inst = args.instance.instance()?;
    let res = solve_allocation(&inst, args.beta)?;
    let _ = writeln!(out, "weights = {}", fmt_vec(&res.weights));
    let _ = writeln!(out, "gamma = {}", fmt_f64(res.gamma));
    let _ = writeln!(out, "residual = {}", fmt_f64(res.residual));
    let _ = writeln!(out, "iterations = {}", res.solver_iterations);
    if let Some(delta) = args.delta {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0,1], got {delta}")));
        }
        let _ = writeln!(out, "lower_bound = {}", fmt_f64(lower_bound_from_gamma(res.gamma, delta)));
    }
    Ok(EXIT_OK)
}

fn cmd_threshold(args: &ThresholdArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = ThresholdSpec::new(args.kind, args.delta, args.arms)?;
    let _ = writeln!(out, "{}", fmt_f64(spec.value(args.n)?));
    Ok(EXIT_OK)
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = args.experiment.config()?;
    let (report, records) = run_experiment(&cfg, args.experiment.threads)?;
    write_reports_csv(create(&args.out)?, std::slice::from_ref(&report))?;
    if let Some(path) = &args.trials_out {
        write_trials_csv(create(path)?, &records)?;
    }
    let _ = writeln!(
        out,
        "policy={} trials={} mean_tau={} se={} error_rate={} censored={} lower_bound={}",
        report.policy,
        report.trials,
        fmt_f64(report.tau_mean),
        fmt_f64(report.tau_se),
        fmt_f64(report.error_rate),
        report.censored,
        fmt_f64(report.lower_bound)
    );
    Ok(if report.censored == report.trials { EXIT_ALL_CENSORED } else { EXIT_OK })
}

fn cmd_sweep_beta(args: &SweepBetaArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = args.experiment.config()?;
    let reports = sweep_beta(&cfg, &args.betas, args.experiment.threads)?;
    write_reports_csv(create(&args.out)?, &reports)?;
    for r in &reports {
        let _ = writeln!(out, "beta={} mean_tau={} censored={}", fmt_f64(r.beta), fmt_f64(r.tau_mean), r.censored);
    }
    let all_censored = reports.iter().all(|r| r.censored == r.trials);
    Ok(if all_censored { EXIT_ALL_CENSORED } else { EXIT_OK })
}

fn cmd_ttts_cost(args: &TttsCostArgs, out: &mut dyn Write) -> Result<i32> {
    let opts = CostSweepOptions {
        beta: args.beta,
        draws: args.draws,
        seed: args.seed,
        resample_cap: args.resample_cap,
        ..CostSweepOptions::default()
    };
    let rows = match &args.gaps {
        Some(gaps) => ttts_gap_sweep(args.sigma, gaps, args.gap_n, &opts)?,
        None => {
            let inst = BanditInstance::new(RewardFamily::gaussian(args.sigma)?, args.means.clone())?;
            ttts_cost_sweep(&inst, &args.n_grid, &opts)?
        }
    };
    write_cost_csv(create(&args.out)?, &rows)?;
    for r in &rows {
        let _ = writeln!(
            out,
            "n={} gap={} mean_resamples={} lower={} censored={}",
            r.n,
            fmt_f64(r.gap),
            fmt_f64(r.mean_resamples),
            fmt_f64(r.lower),
            r.censored
        );
    }
    let all_censored = rows.iter().all(|r| r.censored == r.draws);
    Ok(if all_censored { EXIT_ALL_CENSORED } else { EXIT_OK })
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Allocation(a) => cmd_allocation(a, out),
        Command::Threshold(a) => cmd_threshold(a, out),
        Command::Run(a) => cmd_run(a, out),
        Command::SweepBeta(a) => cmd_sweep_beta(a, out),
        Command::TttsCost(a) => cmd_ttts_cost(a, out),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
