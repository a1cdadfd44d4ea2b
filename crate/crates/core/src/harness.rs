//! Monte Carlo experiment engine.
//!
//! Trials are independent and seeded as a pure function of
//! (base seed, trial index), so reports do not depend on the thread count.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::algorithms::{
    sample_top_two, ttts_bound_curves, GaussianPosterior, PolicyKind, PolicyState, PolicyStreams,
    StepOutcome, DEFAULT_LITERAL_DRAWS, DEFAULT_RESAMPLE_CAP,
};
use crate::allocation::{lower_bound_from_gamma, solve_allocation};
use crate::error::{Error, Result};
use crate::expfam::{BanditInstance, RewardFamily};
use crate::stats::SufficientStats;
use crate::thresholds::{ThresholdKind, ThresholdSpec};

/// Hard cap on the number of rounds of a single trial.
pub const DEFAULT_HORIZON: u64 = 10_000_000;

const STREAM_REWARDS: u64 = 0;
const STREAM_COIN: u64 = 1;
const STREAM_POSTERIOR: u64 = 2;

/// SplitMix64 finalizer applied to (seed, index).
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn substream(trial_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: BanditInstance,
    pub policy: PolicyKind,
    pub delta: f64,
    pub beta: f64,
    pub trials: usize,
    pub seed: u64,
    pub resample_cap: u64,
    pub literal_draws: u64,
    /// Rounds after which a trial that has not stopped is censored.
    pub horizon: u64,
    /// Run exactly this many rounds with stopping disabled.
    pub stop_disabled_horizon: Option<u64>,
    /// Threshold override; the policy default otherwise.
    pub threshold: Option<ThresholdKind>,
}

impl ExperimentConfig {
    pub fn new(instance: BanditInstance, policy: PolicyKind, delta: f64, beta: f64, trials: usize, seed: u64) -> Self {
        Self {
            instance,
            policy,
            delta,
            beta,
            trials,
            seed,
            resample_cap: DEFAULT_RESAMPLE_CAP,
            literal_draws: DEFAULT_LITERAL_DRAWS,
            horizon: DEFAULT_HORIZON,
            stop_disabled_horizon: None,
            threshold: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("beta must lie in (0,1), got {}", self.beta)));
        }
        if self.horizon == 0 || self.stop_disabled_horizon == Some(0) {
            return Err(Error::Config("horizons must be positive".into()));
        }
        if self.policy == PolicyKind::TtSprtGaussian
            && !matches!(self.instance.family(), RewardFamily::Gaussian { .. })
        {
            return Err(Error::Config("ttsprt-gaussian requires a gaussian instance".into()));
        }
        Ok(())
    }

    pub fn threshold_kind(&self) -> ThresholdKind {
        self.threshold
            .unwrap_or_else(|| self.policy.default_threshold(&self.instance.family()))
    }

    pub fn threshold_spec(&self) -> Result<ThresholdSpec> {
        ThresholdSpec::new(self.threshold_kind(), self.delta, self.instance.num_arms())
    }

    /// Parses a TOML experiment manifest.
    ///
    /// ```toml
    /// family = "exponential"     # gaussian | bernoulli | exponential
    /// sigma = 1.0                # gaussian only
    /// means = [0.9, 0.7, 0.5, 0.3, 0.1]
    /// policy = "ttsprt"
    /// delta = 0.1
    /// beta = 0.5
    /// trials = 500
    /// seed = 1                   # optional, the command line may supply it
    /// resample_cap = 10000000
    /// horizon = 10000000
    /// stop_disabled_horizon = 100000
    /// threshold = "gaussian"     # optional override
    /// ```
    pub fn from_toml_str(text: &str, seed_override: Option<u64>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.into_config(seed_override)
    }

    pub fn from_toml_file(path: &Path, seed_override: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, seed_override)
    }
}

/// On-disk manifest; every field optional so command-line flags can fill gaps.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub family: Option<String>,
    pub sigma: Option<f64>,
    pub means: Option<Vec<f64>>,
    pub policy: Option<String>,
    pub delta: Option<f64>,
    pub beta: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub resample_cap: Option<u64>,
    pub literal_draws: Option<u64>,
    pub horizon: Option<u64>,
    pub stop_disabled_horizon: Option<u64>,
    pub threshold: Option<String>,
}

impl RawConfig {
    pub fn into_config(self, seed_override: Option<u64>) -> Result<ExperimentConfig> {
        let missing = |k: &str| Error::Config(format!("missing required key `{k}`"));
        let family_name = self.family.ok_or_else(|| missing("family"))?;
        let family = RewardFamily::from_name(&family_name, self.sigma).map_err(to_config)?;
        let means = self.means.ok_or_else(|| missing("means"))?;
        let instance = BanditInstance::new(family, means).map_err(to_config)?;
        let policy: PolicyKind = match self.policy {
            Some(p) => p.parse()?,
            None => PolicyKind::TtSprt,
        };
        let seed = seed_override.or(self.seed).ok_or_else(|| missing("seed"))?;
        let mut cfg = ExperimentConfig::new(
            instance,
            policy,
            self.delta.unwrap_or(0.1),
            self.beta.unwrap_or(0.5),
            self.trials.ok_or_else(|| missing("trials"))?,
            seed,
        );
        if let Some(c) = self.resample_cap {
            cfg.resample_cap = c;
        }
        if let Some(l) = self.literal_draws {
            cfg.literal_draws = l;
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        cfg.stop_disabled_horizon = self.stop_disabled_horizon;
        if let Some(t) = self.threshold {
            cfg.threshold = Some(t.parse().map_err(to_config)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn to_config(e: Error) -> Error {
    match e {
        Error::Config(_) | Error::NotImplemented(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub index: usize,
    /// Stopping time, or the number of rounds played when censored or when
    /// stopping is disabled.
    pub tau: u64,
    pub recommended: usize,
    pub correct: bool,
    pub counts: Vec<u64>,
    /// Sum of TTTS challenger resamples over the trial.
    pub total_resamples: u64,
    /// Rounds where the TTTS resample cap was hit.
    pub censored_resample_rounds: u64,
    /// The horizon was reached before stopping.
    pub censored: bool,
}

pub fn run_trial(config: &ExperimentConfig, index: usize) -> Result<TrialRecord> {
    run_trial_observed(config, index, |_, _| {})
}

/// Runs one trial, calling `observer` after every round.
pub fn run_trial_observed<F>(config: &ExperimentConfig, index: usize, mut observer: F) -> Result<TrialRecord>
where
    F: FnMut(&PolicyState, &StepOutcome),
{
    let inst = &config.instance;
    let trial_seed = mix_seed(config.seed, index as u64);
    let streams = PolicyStreams {
        coin: substream(trial_seed, STREAM_COIN),
        posterior: substream(trial_seed, STREAM_POSTERIOR),
    };
    let mut rewards = substream(trial_seed, STREAM_REWARDS);
    let mut state = PolicyState::new(config.policy, inst.family(), inst.num_arms(), config.beta, streams)?
        .with_resample_cap(config.resample_cap)
        .with_literal_draws(config.literal_draws);

    let (spec, horizon) = match config.stop_disabled_horizon {
        Some(h) => (None, h),
        None => (Some(config.threshold_spec()?), config.horizon),
    };

    let mut total_resamples = 0u64;
    let mut censored_resample_rounds = 0u64;
    let mut stopped = false;
    while state.stats().rounds() < horizon {
        let out = state.step(inst, &mut rewards, spec.as_ref())?;
        total_resamples = total_resamples.saturating_add(out.challenger_resamples);
        censored_resample_rounds += out.resample_censored as u64;
        observer(&state, &out);
        if out.stopped {
            stopped = true;
            break;
        }
    }

    let recommended = state.leader().unwrap_or(0);
    let censored = spec.is_some() && !stopped;
    Ok(TrialRecord {
        index,
        tau: state.stats().rounds(),
        recommended,
        correct: !censored && recommended == inst.best_arm(),
        counts: state.stats().counts().to_vec(),
        total_resamples,
        censored_resample_rounds,
        censored,
    })
}

/// Runs all trials of `config` on a pool of `threads` workers and returns
/// the records in trial order.
pub fn run_trials(config: &ExperimentConfig, threads: usize) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|i| run_trial(config, i))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub policy: PolicyKind,
    pub family: RewardFamily,
    pub delta: f64,
    pub beta: f64,
    pub threshold: ThresholdKind,
    pub trials: usize,
    /// Trials that hit the horizon; they count as errors.
    pub censored: usize,
    pub tau_mean: f64,
    pub tau_se: f64,
    pub tau_median: f64,
    pub tau_q05: f64,
    pub tau_q25: f64,
    pub tau_q75: f64,
    pub tau_q95: f64,
    pub error_rate: f64,
    pub error_se: f64,
    /// Mean of T_{τ,i}/τ over trials.
    pub mean_allocation: Vec<f64>,
    pub gamma: f64,
    /// log(1/δ)/Γ_μ(β).
    pub lower_bound: f64,
    pub mean_resamples_per_round: f64,
    pub censored_resample_rounds: u64,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregates trial records sequentially, in index order.
pub fn aggregate(config: &ExperimentConfig, records: &[TrialRecord]) -> Result<AggregateReport> {
    if records.is_empty() {
        return Err(Error::Config("no trials to aggregate".into()));
    }
    let k = config.instance.num_arms();
    let taus: Vec<f64> = records.iter().map(|r| r.tau as f64).collect();
    let (tau_mean, tau_se) = mean_and_se(&taus);
    let mut sorted = taus.clone();
    sorted.sort_by(f64::total_cmp);

    let n = records.len() as f64;
    let errors = records.iter().filter(|r| !r.correct).count() as f64;
    let error_rate = errors / n;
    let error_se = (error_rate * (1.0 - error_rate) / n).sqrt();

    let mut mean_allocation = vec![0.0; k];
    for r in records {
        for (m, &c) in mean_allocation.iter_mut().zip(&r.counts) {
            *m += c as f64 / r.tau as f64;
        }
    }
    mean_allocation.iter_mut().for_each(|m| *m /= n);

    let total_rounds: f64 = taus.iter().sum();
    let total_resamples: f64 = records.iter().map(|r| r.total_resamples as f64).sum();
    let gamma = solve_allocation(&config.instance, config.beta)?.gamma;

    Ok(AggregateReport {
        policy: config.policy,
        family: config.instance.family(),
        delta: config.delta,
        beta: config.beta,
        threshold: config.threshold_kind(),
        trials: records.len(),
        censored: records.iter().filter(|r| r.censored).count(),
        tau_mean,
        tau_se,
        tau_median: quantile(&sorted, 0.5),
        tau_q05: quantile(&sorted, 0.05),
        tau_q25: quantile(&sorted, 0.25),
        tau_q75: quantile(&sorted, 0.75),
        tau_q95: quantile(&sorted, 0.95),
        error_rate,
        error_se,
        mean_allocation,
        gamma,
        lower_bound: lower_bound_from_gamma(gamma, config.delta),
        mean_resamples_per_round: total_resamples / total_rounds,
        censored_resample_rounds: records.iter().map(|r| r.censored_resample_rounds).sum(),
    })
}

pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> Result<(AggregateReport, Vec<TrialRecord>)> {
    let records = run_trials(config, threads)?;
    let report = aggregate(config, &records)?;
    Ok((report, records))
}

/// One report per β, sharing the instance and the base seed.
pub fn sweep_beta(config: &ExperimentConfig, betas: &[f64], threads: usize) -> Result<Vec<AggregateReport>> {
    if betas.is_empty() {
        return Err(Error::Config("empty beta grid".into()));
    }
    betas
        .iter()
        .map(|&beta| {
            let cfg = ExperimentConfig { beta, ..config.clone() };
            run_experiment(&cfg, threads).map(|(r, _)| r)
        })
        .collect()
}

/// One cell of a TTTS challenger-cost sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub n: u64,
    pub gap: f64,
    pub draws: usize,
    pub mean_resamples: f64,
    pub se: f64,
    /// Draws whose resample count hit the cap (recorded at the cap).
    pub censored: usize,
    pub lower: f64,
    pub upper: Option<f64>,
    pub upper_valid: bool,
}

/// Idealized converged history: T_i = max(1, round(n·ω*_i(β))) and
/// empirical means equal to the true means.
pub fn idealized_history(instance: &BanditInstance, beta: f64, n: u64) -> Result<SufficientStats> {
    let w = solve_allocation(instance, beta)?.weights;
    let counts: Vec<u64> = w.iter().map(|&x| ((n as f64 * x).round() as u64).max(1)).collect();
    SufficientStats::from_counts_and_means(&counts, instance.means())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSweepOptions {
    pub beta: f64,
    pub draws: usize,
    pub seed: u64,
    pub resample_cap: u64,
    pub literal_draws: u64,
}

impl Default for CostSweepOptions {
    fn default() -> Self {
        Self {
            beta: 0.5,
            draws: 2000,
            seed: 0,
            resample_cap: DEFAULT_RESAMPLE_CAP,
            literal_draws: DEFAULT_LITERAL_DRAWS,
        }
    }
}

fn cost_cell(instance: &BanditInstance, n: u64, cell: u64, opts: &CostSweepOptions) -> Result<CostRow> {
    let sigma = match instance.family() {
        RewardFamily::Gaussian { sigma } => sigma,
        other => return Err(Error::Config(format!("cost sweeps need a gaussian instance, got {other}"))),
    };
    if opts.draws == 0 {
        return Err(Error::Config("draws must be at least 1".into()));
    }
    let stats = idealized_history(instance, opts.beta, n)?;
    let post = GaussianPosterior::from_stats(&instance.family(), &stats)?;
    let mut rng = substream(mix_seed(opts.seed, cell), STREAM_POSTERIOR);
    let mut values = Vec::with_capacity(opts.draws);
    let mut censored = 0;
    for _ in 0..opts.draws {
        let d = sample_top_two(&post, &mut rng, opts.resample_cap, opts.literal_draws);
        censored += d.censored as usize;
        values.push(d.resamples as f64);
    }
    let (mean_resamples, se) = mean_and_se(&values);
    let bounds = ttts_bound_curves(instance, sigma, n)?;
    Ok(CostRow {
        n,
        gap: instance.max_gap(),
        draws: opts.draws,
        mean_resamples,
        se,
        censored,
        lower: bounds.lower,
        upper: bounds.upper,
        upper_valid: bounds.upper_valid,
    })
}

/// Mean challenger cost over an n grid at a fixed instance.
pub fn ttts_cost_sweep(instance: &BanditInstance, n_grid: &[u64], opts: &CostSweepOptions) -> Result<Vec<CostRow>> {
    n_grid
        .iter()
        .enumerate()
        .map(|(c, &n)| cost_cell(instance, n, c as u64, opts))
        .collect()
}

/// Mean challenger cost at fixed n on two-arm instances [Δ, 0].
pub fn ttts_gap_sweep(sigma: f64, gaps: &[f64], n: u64, opts: &CostSweepOptions) -> Result<Vec<CostRow>> {
    gaps.iter()
        .enumerate()
        .map(|(c, &gap)| {
            let inst = BanditInstance::new(RewardFamily::gaussian(sigma)?, vec![gap, 0.0])?;
            cost_cell(&inst, n, c as u64, opts)
        })
        .collect()
}

/// Full-precision float formatting for CSV cells.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("csv output: {e}"))
}

pub const REPORT_HEADER: [&str; 22] = [
    "policy",
    "family",
    "threshold",
    "delta",
    "beta",
    "trials",
    "censored",
    "tau_mean",
    "tau_se",
    "tau_median",
    "tau_q05",
    "tau_q25",
    "tau_q75",
    "tau_q95",
    "error_rate",
    "error_se",
    "gamma",
    "lower_bound",
    "mean_resamples_per_round",
    "censored_resample_rounds",
    "arms",
    "mean_allocation",
];

/// Writes aggregate reports, one row each. The allocation vector is a
/// single `;`-separated cell so the header is the same for every K.
pub fn write_reports_csv<W: Write>(out: W, reports: &[AggregateReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER).map_err(csv_error)?;
    for r in reports {
        let alloc: Vec<String> = r.mean_allocation.iter().map(|&x| fmt_f64(x)).collect();
        w.write_record([
            r.policy.id().to_string(),
            r.family.name().to_string(),
            r.threshold.name().to_string(),
            fmt_f64(r.delta),
            fmt_f64(r.beta),
            r.trials.to_string(),
            r.censored.to_string(),
            fmt_f64(r.tau_mean),
            fmt_f64(r.tau_se),
            fmt_f64(r.tau_median),
            fmt_f64(r.tau_q05),
            fmt_f64(r.tau_q25),
            fmt_f64(r.tau_q75),
            fmt_f64(r.tau_q95),
            fmt_f64(r.error_rate),
            fmt_f64(r.error_se),
            fmt_f64(r.gamma),
            fmt_f64(r.lower_bound),
            fmt_f64(r.mean_resamples_per_round),
            r.censored_resample_rounds.to_string(),
            r.mean_allocation.len().to_string(),
            alloc.join(";"),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(csv_error)
}

pub const TRIALS_HEADER: [&str; 8] =
    ["trial", "tau", "recommended", "correct", "censored", "total_resamples", "censored_resample_rounds", "counts"];

pub fn write_trials_csv<W: Write>(out: W, records: &[TrialRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIALS_HEADER).map_err(csv_error)?;
    for r in records {
        let counts: Vec<String> = r.counts.iter().map(u64::to_string).collect();
        w.write_record([
            r.index.to_string(),
            r.tau.to_string(),
            r.recommended.to_string(),
            r.correct.to_string(),
            r.censored.to_string(),
            r.total_resamples.to_string(),
            r.censored_resample_rounds.to_string(),
            counts.join(";"),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(csv_error)
}

pub const COST_HEADER: [&str; 9] =
    ["n", "gap", "draws", "mean_resamples", "se", "censored", "lower_bound", "upper_bound", "upper_valid"];

/// Writes a cost sweep; an undefined upper bound is an empty cell.
pub fn write_cost_csv<W: Write>(out: W, rows: &[CostRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COST_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            fmt_f64(r.gap),
            r.draws.to_string(),
            fmt_f64(r.mean_resamples),
            fmt_f64(r.se),
            r.censored.to_string(),
            fmt_f64(r.lower),
            r.upper.map(fmt_f64).unwrap_or_default(),
            r.upper_valid.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(csv_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(sigma: f64, means: &[f64]) -> BanditInstance {
        BanditInstance::new(RewardFamily::gaussian(sigma).unwrap(), means.to_vec()).unwrap()
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert_eq!(quantile(&xs, 0.5), 2.5);
    }

    #[test]
    fn seeds_differ_across_indices() {
        let a: Vec<u64> = (0..1000).map(|i| mix_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
        assert_ne!(mix_seed(7, 0), mix_seed(8, 0));
    }

    #[test]
    fn easy_instance_stops_quickly_and_correctly() {
        let cfg = ExperimentConfig::new(gaussian(0.01, &[1.0, 0.0]), PolicyKind::TtSprt, 0.1, 0.5, 100, 3);
        for i in 0..100 {
            let r = run_trial(&cfg, i).unwrap();
            assert!(r.correct && r.tau < 200, "{r:?}");
            assert_eq!(r.counts.iter().sum::<u64>(), r.tau);
        }
    }

    #[test]
    fn tiny_gaussian_instance_always_recommends_best_arm() {
        for kind in [PolicyKind::TtSprt, PolicyKind::TtSprtGaussian] {
            let cfg = ExperimentConfig::new(gaussian(0.05, &[1.0, 0.0]), kind, 0.1, 0.5, 100, 11);
            assert!(run_trials(&cfg, 1).unwrap().iter().all(|r| r.correct && !r.censored));
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = ExperimentConfig::new(gaussian(1.0, &[1.0, 0.5, 0.0]), PolicyKind::Ttts, 0.1, 0.5, 1, 5);
        assert_eq!(run_trial(&cfg, 4).unwrap(), run_trial(&cfg, 4).unwrap());
    }

    #[test]
    fn smaller_delta_takes_longer() {
        let inst = gaussian(1.0, &[1.0, 0.5]);
        let median = |delta| {
            let cfg = ExperimentConfig::new(inst.clone(), PolicyKind::TtSprt, delta, 0.5, 101, 2);
            run_experiment(&cfg, 1).unwrap().0.tau_median
        };
        assert!(median(0.001) > median(0.5));
    }

    #[test]
    fn stop_disabled_runs_full_horizon() {
        let mut cfg = ExperimentConfig::new(gaussian(1.0, &[1.0, 0.0]), PolicyKind::TtSprt, 0.1, 0.5, 1, 1);
        cfg.stop_disabled_horizon = Some(777);
        let r = run_trial(&cfg, 0).unwrap();
        assert_eq!(r.tau, 777);
        assert!(!r.censored);
    }

    #[test]
    fn horizon_censors() {
        let mut cfg = ExperimentConfig::new(gaussian(1.0, &[0.01, 0.0]), PolicyKind::TtSprt, 0.1, 0.5, 3, 1);
        cfg.horizon = 50;
        let (rep, recs) = run_experiment(&cfg, 1).unwrap();
        assert!(recs.iter().all(|r| r.censored && r.tau == 50 && !r.correct));
        assert_eq!(rep.censored, 3);
        assert_eq!(rep.error_rate, 1.0);
    }

    #[test]
    fn single_beta_sweep_matches_run() {
        let cfg = ExperimentConfig::new(gaussian(1.0, &[1.0, 0.5, 0.0]), PolicyKind::TtSprt, 0.1, 0.4, 20, 9);
        let sweep = sweep_beta(&cfg, &[0.4], 1).unwrap();
        assert_eq!(sweep, vec![run_experiment(&cfg, 1).unwrap().0]);
    }

    #[test]
    fn idealized_history_follows_allocation() {
        let s = idealized_history(&gaussian(1.0, &[1.0, 0.0]), 0.5, 1000).unwrap();
        assert_eq!(s.counts(), &[500, 500]);
        assert_eq!(s.means().unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn config_parsing() {
        let text = "family = \"exponential\"\nmeans = [0.9, 0.7, 0.5, 0.3, 0.1]\npolicy = \"ttsprt\"\ntrials = 5\n";
        let cfg = ExperimentConfig::from_toml_str(text, Some(4)).unwrap();
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.threshold_kind(), ThresholdKind::ExponentialFamily);
        assert!(matches!(ExperimentConfig::from_toml_str(text, None), Err(Error::Config(_))));
        let dkm = text.replace("ttsprt", "dkm");
        assert!(matches!(ExperimentConfig::from_toml_str(&dkm, Some(1)), Err(Error::NotImplemented(_))));
        let bad = format!("{text}bogus = 1\n");
        assert!(ExperimentConfig::from_toml_str(&bad, Some(1)).is_err());
        let g = "family = \"gaussian\"\nsigma = 1.0\nmeans = [1.0, 0.0]\ntrials = 5\n";
        let cfg = ExperimentConfig::from_toml_str(g, Some(1)).unwrap();
        assert_eq!(cfg.threshold_kind(), ThresholdKind::Gaussian);
    }

    #[test]
    fn reports_are_thread_count_independent() {
        let cfg = ExperimentConfig::new(gaussian(1.0, &[1.0, 0.6, 0.0]), PolicyKind::T3c, 0.1, 0.5, 24, 21);
        let csv_for = |threads| {
            let (rep, recs) = run_experiment(&cfg, threads).unwrap();
            let mut a = Vec::new();
            write_reports_csv(&mut a, &[rep]).unwrap();
            write_trials_csv(&mut a, &recs).unwrap();
            a
        };
        assert_eq!(csv_for(1), csv_for(3));
    }

    #[test]
    fn cost_sweep_rejects_non_gaussian() {
        let inst = BanditInstance::new(RewardFamily::Bernoulli, vec![0.6, 0.4]).unwrap();
        assert!(ttts_cost_sweep(&inst, &[100], &CostSweepOptions::default()).is_err());
    }
}
