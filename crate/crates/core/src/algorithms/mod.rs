//! Sequential best-arm identification policies.
//!
//! Every policy pulls each arm once in rounds 1..K, then follows its own
//! rule. All of them share the GLLR stopping rule: stop as soon as
//! Λ_n(a¹_n, a²_n) exceeds c_{n,δ}, where a¹_n is the empirical leader and
//! a²_n the arm minimizing Λ_n(a¹_n, ·), and recommend a¹_n.

mod bounds;
mod posterior;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use bounds::{ttts_bound_curves, TttsBounds};
pub use posterior::{sample_top_two, GaussianPosterior, TopTwoDraw};

use crate::error::{Error, Result};
use crate::expfam::{BanditInstance, RewardFamily};
use crate::stats::{argmax_lowest, argmin_lowest, gllr_from_parts, SufficientStats};
use crate::thresholds::{ThresholdKind, ThresholdSpec};

/// Default cap on TTTS posterior resamples per round.
pub const DEFAULT_RESAMPLE_CAP: u64 = 10_000_000;
/// Default number of TTTS resamples drawn one at a time before the
/// thinned search takes over. Both are exact, so zero is the fast default.
pub const DEFAULT_LITERAL_DRAWS: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    /// TT-SPRT with forced exploration of under-sampled arms.
    TtSprt,
    /// TT-SPRT without forced exploration, for Gaussian rewards.
    TtSprtGaussian,
    /// Top-two Thompson sampling with resampled challenger.
    Ttts,
    /// Top-two transportation cost: posterior leader, GLLR challenger.
    T3c,
    /// Round-robin control.
    Uniform,
}

impl PolicyKind {
    pub fn id(&self) -> &'static str {
        match self {
            PolicyKind::TtSprt => "ttsprt",
            PolicyKind::TtSprtGaussian => "ttsprt-gaussian",
            PolicyKind::Ttts => "ttts",
            PolicyKind::T3c => "t3c",
            PolicyKind::Uniform => "uniform",
        }
    }

    /// Threshold paired with this policy when none is configured: the
    /// Gaussian threshold for Gaussian rewards, the exponential-family one
    /// otherwise.
    pub fn default_threshold(&self, family: &RewardFamily) -> ThresholdKind {
        match family {
            RewardFamily::Gaussian { .. } => ThresholdKind::Gaussian,
            _ => ThresholdKind::ExponentialFamily,
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ttsprt" | "tt-sprt" => Ok(PolicyKind::TtSprt),
            "ttsprt-gaussian" | "tt-sprt-gaussian" => Ok(PolicyKind::TtSprtGaussian),
            "ttts" => Ok(PolicyKind::Ttts),
            "t3c" => Ok(PolicyKind::T3c),
            "uniform" => Ok(PolicyKind::Uniform),
            "dkm" | "lucb" | "fw" | "tas" | "track-and-stop" => {
                Err(Error::NotImplemented(s.to_string()))
            }
            other => Err(Error::InvalidParameter(format!("unknown policy `{other}`"))),
        }
    }
}

/// Independent random streams consumed by a policy.
#[derive(Debug, Clone)]
pub struct PolicyStreams {
    /// β-coin D_n.
    pub coin: ChaCha8Rng,
    /// Posterior draws (TTTS, T3C).
    pub posterior: ChaCha8Rng,
}

impl PolicyStreams {
    pub fn from_seeds(coin: u64, posterior: u64) -> Self {
        Self {
            coin: ChaCha8Rng::seed_from_u64(coin),
            posterior: ChaCha8Rng::seed_from_u64(posterior),
        }
    }
}

/// Arm chosen for the next round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub arm: usize,
    /// TTTS posterior resamples used to find the challenger, else 0.
    pub resamples: u64,
    /// TTTS resample cap was hit this round.
    pub resample_censored: bool,
}

impl Selection {
    fn plain(arm: usize) -> Self {
        Self { arm, resamples: 0, resample_censored: false }
    }
}

/// Result of evaluating the stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCheck {
    pub gllr: f64,
    pub threshold: f64,
    pub stopped: bool,
}

/// One round: the arm played and the stopping rule evaluated afterwards.
/// `stopped` implies `gllr_value > threshold_value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub arm: usize,
    pub reward: f64,
    pub stopped: bool,
    pub gllr_value: f64,
    pub threshold_value: f64,
    pub challenger_resamples: u64,
    pub resample_censored: bool,
}

/// Mutable state of one policy run.
#[derive(Debug, Clone)]
pub struct PolicyState {
    kind: PolicyKind,
    family: RewardFamily,
    beta: f64,
    stats: SufficientStats,
    leader: Option<usize>,
    challenger: Option<usize>,
    challenger_gllr: f64,
    under_explored: Vec<usize>,
    streams: PolicyStreams,
    resample_cap: u64,
    literal_draws: u64,
    last_resamples: u64,
}

impl PolicyState {
    pub fn new(
        kind: PolicyKind,
        family: RewardFamily,
        num_arms: usize,
        beta: f64,
        streams: PolicyStreams,
    ) -> Result<Self> {
        if num_arms < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 arms, got {num_arms}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!("beta must lie in (0,1), got {beta}")));
        }
        if kind == PolicyKind::TtSprtGaussian && !matches!(family, RewardFamily::Gaussian { .. }) {
            return Err(Error::InvalidParameter(format!(
                "ttsprt-gaussian drops forced exploration and needs gaussian rewards, got {family}"
            )));
        }
        Ok(Self {
            kind,
            family,
            beta,
            stats: SufficientStats::new(num_arms),
            leader: None,
            challenger: None,
            challenger_gllr: 0.0,
            under_explored: (0..num_arms).collect(),
            streams,
            resample_cap: DEFAULT_RESAMPLE_CAP,
            literal_draws: DEFAULT_LITERAL_DRAWS,
            last_resamples: 0,
        })
    }

    pub fn with_resample_cap(mut self, cap: u64) -> Self {
        self.resample_cap = cap.max(1);
        self
    }

    /// Number of TTTS resamples drawn one by one before switching to the
    /// exact geometric tail. Set it to the cap for a purely literal search.
    pub fn with_literal_draws(mut self, draws: u64) -> Self {
        self.literal_draws = draws;
        self
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn family(&self) -> RewardFamily {
        self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    /// Empirical leader a¹_n, defined once every arm has been pulled.
    pub fn leader(&self) -> Option<usize> {
        self.leader
    }

    /// GLLR challenger a²_n.
    pub fn challenger(&self) -> Option<usize> {
        self.challenger
    }

    /// Λ_n(a¹_n, a²_n), or 0 before initialization completes.
    pub fn challenger_gllr(&self) -> f64 {
        self.challenger_gllr
    }

    /// Under-explored set I_n = {i : T_{n,i} ≤ ⌈√(n/K)⌉}.
    pub fn under_explored(&self) -> &[usize] {
        &self.under_explored
    }

    pub fn last_resamples(&self) -> u64 {
        self.last_resamples
    }

    /// Builds a state from existing statistics, e.g. a synthetic history.
    pub fn with_stats(mut self, stats: SufficientStats) -> Result<Self> {
        if stats.num_arms() != self.stats.num_arms() {
            return Err(Error::InvalidParameter("statistics have the wrong number of arms".into()));
        }
        self.stats = stats;
        self.refresh()?;
        Ok(self)
    }

    /// Records a reward and recomputes leader, challenger and I_n.
    pub fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.stats.update(arm, reward)?;
        self.refresh()
    }

    fn refresh(&mut self) -> Result<()> {
        let k = self.stats.num_arms();
        let n = self.stats.rounds();
        let floor = ceil_sqrt_ratio(n, k as u64);
        self.under_explored.clear();
        self.under_explored
            .extend((0..k).filter(|&i| self.stats.counts()[i] <= floor));

        if !self.stats.all_pulled() {
            self.leader = None;
            self.challenger = None;
            self.challenger_gllr = 0.0;
            return Ok(());
        }
        let means = self.stats.means()?;
        let leader = argmax_lowest(&means).expect("k >= 2");
        let (challenger, value) = self.min_gllr_against(leader, &means);
        self.leader = Some(leader);
        self.challenger = Some(challenger);
        self.challenger_gllr = value;
        Ok(())
    }

    /// argmin_{j ≠ top} Λ_n(top, j) and its value.
    fn min_gllr_against(&self, top: usize, means: &[f64]) -> (usize, f64) {
        let counts = self.stats.counts();
        let tt = counts[top] as f64;
        let values: Vec<(usize, f64)> = (0..means.len())
            .filter(|&j| j != top)
            .map(|j| (j, gllr_from_parts(&self.family, tt, means[top], counts[j] as f64, means[j])))
            .collect();
        let j = argmin_lowest(values.iter().copied()).expect("k >= 2");
        let v = values.iter().find(|&&(i, _)| i == j).expect("present").1;
        (j, v)
    }

    fn first_unpulled(&self) -> Option<usize> {
        self.stats.counts().iter().position(|&t| t == 0)
    }

    fn require_initialized(&self) -> Result<(usize, usize)> {
        match (self.leader, self.challenger) {
            (Some(l), Some(c)) => Ok((l, c)),
            _ => Err(Error::UnpulledArm(self.first_unpulled().unwrap_or(0))),
        }
    }

    fn draw_coin(&mut self) -> bool {
        self.streams.coin.random::<f64>() < self.beta
    }

    /// TT-SPRT arm rule: the least-pulled under-explored arm if I_n ≠ ∅,
    /// else the leader when the β-coin shows 1 and the challenger otherwise.
    /// The coin is drawn every round, whether or not it is used.
    pub fn ttsprt_select(&mut self) -> Result<usize> {
        let (leader, challenger) = self.require_initialized()?;
        let coin = self.draw_coin();
        let counts = self.stats.counts();
        if let Some(i) = argmin_lowest(self.under_explored.iter().map(|&i| (i, counts[i] as f64))) {
            return Ok(i);
        }
        Ok(if coin { leader } else { challenger })
    }

    /// TT-SPRT arm rule for Gaussian rewards: leader or challenger by the
    /// β-coin, with no forced exploration.
    pub fn ttsprt_gaussian_select(&mut self) -> Result<usize> {
        let (leader, challenger) = self.require_initialized()?;
        Ok(if self.draw_coin() { leader } else { challenger })
    }

    /// TTTS: leader from one posterior sample, challenger from resampling
    /// until the argmax changes.
    pub fn ttts_select(&mut self) -> Result<Selection> {
        self.require_initialized()?;
        let coin = self.draw_coin();
        let post = GaussianPosterior::from_stats(&self.family, &self.stats)?;
        let draw =
            sample_top_two(&post, &mut self.streams.posterior, self.resample_cap, self.literal_draws);
        self.last_resamples = draw.resamples;
        let arm = if coin {
            draw.leader
        } else {
            match draw.challenger {
                Some(c) => c,
                // no challenger within the cap: fall back to the smallest GLLR
                None => self.min_gllr_against(draw.leader, &self.stats.means()?).0,
            }
        };
        Ok(Selection { arm, resamples: draw.resamples, resample_censored: draw.censored })
    }

    /// T3C: leader from one posterior sample, challenger minimizing the GLLR
    /// against it.
    pub fn t3c_select(&mut self) -> Result<usize> {
        self.require_initialized()?;
        let coin = self.draw_coin();
        let post = GaussianPosterior::from_stats(&self.family, &self.stats)?;
        let mut buf = Vec::with_capacity(post.num_arms());
        let leader = post.sample_argmax(&mut self.streams.posterior, &mut buf);
        if coin {
            return Ok(leader);
        }
        Ok(self.min_gllr_against(leader, post.means()).0)
    }

    /// Round robin: arm n mod K.
    pub fn uniform_select(&self) -> usize {
        (self.stats.rounds() % self.stats.num_arms() as u64) as usize
    }

    /// Arm for the next round.
    pub fn select(&mut self) -> Result<Selection> {
        if self.kind == PolicyKind::Uniform {
            return Ok(Selection::plain(self.uniform_select()));
        }
        if let Some(arm) = self.first_unpulled() {
            return Ok(Selection::plain(arm));
        }
        match self.kind {
            PolicyKind::TtSprt => self.ttsprt_select().map(Selection::plain),
            PolicyKind::TtSprtGaussian => self.ttsprt_gaussian_select().map(Selection::plain),
            PolicyKind::Ttts => self.ttts_select(),
            PolicyKind::T3c => self.t3c_select().map(Selection::plain),
            PolicyKind::Uniform => unreachable!(),
        }
    }

    /// Stops iff Λ_n(a¹_n, a²_n) > c_{n,δ}.
    pub fn stopping_check(&self, spec: &ThresholdSpec) -> Result<StopCheck> {
        self.require_initialized()?;
        let threshold = spec.value(self.stats.rounds().max(1))?;
        Ok(decide(self.challenger_gllr, threshold))
    }

    /// Plays one round against `instance`: select, sample a reward, update,
    /// then evaluate the stopping rule if `spec` is given.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        instance: &BanditInstance,
        reward_rng: &mut R,
        spec: Option<&ThresholdSpec>,
    ) -> Result<StepOutcome> {
        let sel = self.select()?;
        let reward = self.family.sample_unchecked(instance.means()[sel.arm], reward_rng);
        self.observe(sel.arm, reward)?;
        let check = match (spec, self.leader.is_some()) {
            (Some(spec), true) => self.stopping_check(spec)?,
            (Some(spec), false) => StopCheck {
                gllr: 0.0,
                threshold: spec.value_unchecked(self.stats.rounds()),
                stopped: false,
            },
            (None, _) => StopCheck { gllr: self.challenger_gllr, threshold: f64::INFINITY, stopped: false },
        };
        Ok(StepOutcome {
            arm: sel.arm,
            reward,
            stopped: check.stopped,
            gllr_value: check.gllr,
            threshold_value: check.threshold,
            challenger_resamples: sel.resamples,
            resample_censored: sel.resample_censored,
        })
    }
}

/// Strict comparison; an infinite GLLR beats any finite threshold.
pub fn decide(gllr: f64, threshold: f64) -> StopCheck {
    StopCheck { gllr, threshold, stopped: gllr > threshold }
}

/// ⌈√(n/k)⌉ in integer arithmetic.
pub fn ceil_sqrt_ratio(n: u64, k: u64) -> u64 {
    let mut c = ((n as f64 / k as f64).sqrt()).ceil() as u64;
    while (c as u128) * (c as u128) * (k as u128) < n as u128 {
        c += 1;
    }
    while c > 0 && ((c - 1) as u128) * ((c - 1) as u128) * (k as u128) >= n as u128 {
        c -= 1;
    }
    c
}
