//! Single-parameter exponential-family reward distributions.
//!
//! Every family is identified by its mean. The natural parameter, log-partition
//! function and KL divergence follow the canonical parametrizations:
//!
//! | family      | θ(μ)        | b(θ)            |
//! |-------------|-------------|-----------------|
//! | Gaussian    | μ/σ²        | σ²θ²/2          |
//! | Bernoulli   | logit(μ)    | log(1 + e^θ)    |
//! | Exponential | −1/μ        | −log(−θ)        |

use std::fmt;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardFamily {
    /// Gaussian rewards with known standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// Rewards in {0, 1}.
    Bernoulli,
    /// Exponential rewards parametrized by their mean.
    Exponential,
}

impl fmt::Display for RewardFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewardFamily::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma})"),
            RewardFamily::Bernoulli => f.write_str("bernoulli"),
            RewardFamily::Exponential => f.write_str("exponential"),
        }
    }
}

impl RewardFamily {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gaussian sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(RewardFamily::Gaussian { sigma })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RewardFamily::Gaussian { .. } => "gaussian",
            RewardFamily::Bernoulli => "bernoulli",
            RewardFamily::Exponential => "exponential",
        }
    }

    /// Parses `gaussian`, `bernoulli` or `exponential`; `sigma` is required for
    /// the Gaussian family and rejected otherwise.
    pub fn from_name(name: &str, sigma: Option<f64>) -> Result<Self> {
        match (name.to_ascii_lowercase().as_str(), sigma) {
            ("gaussian" | "normal", Some(s)) => Self::gaussian(s),
            ("gaussian" | "normal", None) => Err(Error::InvalidParameter(
                "gaussian family requires sigma".into(),
            )),
            ("bernoulli", None) => Ok(RewardFamily::Bernoulli),
            ("exponential", None) => Ok(RewardFamily::Exponential),
            ("bernoulli" | "exponential", Some(_)) => Err(Error::InvalidParameter(format!(
                "sigma is only meaningful for the gaussian family, not {name}"
            ))),
            _ => Err(Error::InvalidParameter(format!("unknown reward family `{name}`"))),
        }
    }

    /// Strict membership in the open mean range.
    pub fn is_valid_mean(&self, mean: f64) -> bool {
        match self {
            RewardFamily::Gaussian { .. } => mean.is_finite(),
            RewardFamily::Bernoulli => mean > 0.0 && mean < 1.0,
            RewardFamily::Exponential => mean > 0.0 && mean.is_finite(),
        }
    }

    /// Membership in the closed mean range, which also contains the values an
    /// empirical mean can reach (0 and 1 for Bernoulli, 0 for exponential).
    pub fn is_closed_mean(&self, mean: f64) -> bool {
        match self {
            RewardFamily::Gaussian { .. } => mean.is_finite(),
            RewardFamily::Bernoulli => (0.0..=1.0).contains(&mean),
            RewardFamily::Exponential => mean >= 0.0 && mean.is_finite(),
        }
    }

    fn check_open(&self, mean: f64) -> Result<()> {
        if self.is_valid_mean(mean) {
            Ok(())
        } else {
            Err(self.invalid(mean))
        }
    }

    fn check_closed(&self, mean: f64) -> Result<()> {
        if self.is_closed_mean(mean) {
            Ok(())
        } else {
            Err(self.invalid(mean))
        }
    }

    fn invalid(&self, mean: f64) -> Error {
        Error::InvalidMean { family: self.name(), mean }
    }

    /// KL divergence `d(mu_i ‖ mu_j)` between the members with means `mu_i`
    /// and `mu_j`. Returns `+∞` when the second argument sits on a boundary
    /// the first one does not share.
    pub fn kl(&self, mu_i: f64, mu_j: f64) -> Result<f64> {
        self.check_closed(mu_i)?;
        self.check_closed(mu_j)?;
        Ok(self.kl_unchecked(mu_i, mu_j))
    }

    /// `kl` without range checks. Callers guarantee closed-range arguments.
    pub(crate) fn kl_unchecked(&self, mu_i: f64, mu_j: f64) -> f64 {
        if mu_i == mu_j {
            return 0.0;
        }
        match *self {
            RewardFamily::Gaussian { sigma } => {
                let d = mu_i - mu_j;
                d * d / (2.0 * sigma * sigma)
            }
            RewardFamily::Bernoulli => bernoulli_kl(mu_i, mu_j),
            RewardFamily::Exponential => {
                if mu_i == 0.0 || mu_j == 0.0 {
                    return f64::INFINITY;
                }
                let r = mu_i / mu_j;
                // r - 1 - ln r, written to stay accurate for r near 1
                let v = (r - 1.0) - r.ln();
                v.max(0.0)
            }
        }
    }

    /// θ = ḃ⁻¹(μ).
    pub fn natural_param(&self, mean: f64) -> Result<f64> {
        self.check_open(mean)?;
        Ok(match *self {
            RewardFamily::Gaussian { sigma } => mean / (sigma * sigma),
            RewardFamily::Bernoulli => (mean / (1.0 - mean)).ln(),
            RewardFamily::Exponential => -1.0 / mean,
        })
    }

    /// μ = ḃ(θ).
    pub fn mean_from_natural(&self, theta: f64) -> Result<f64> {
        let mean = match *self {
            RewardFamily::Gaussian { sigma } => sigma * sigma * theta,
            RewardFamily::Bernoulli => 1.0 / (1.0 + (-theta).exp()),
            RewardFamily::Exponential => {
                if !(theta < 0.0) {
                    return Err(Error::Domain(format!(
                        "exponential natural parameter must be negative, got {theta}"
                    )));
                }
                -1.0 / theta
            }
        };
        self.check_open(mean)?;
        Ok(mean)
    }

    /// Log-partition function b(θ).
    pub fn log_partition(&self, theta: f64) -> f64 {
        match *self {
            RewardFamily::Gaussian { sigma } => 0.5 * sigma * sigma * theta * theta,
            RewardFamily::Bernoulli => {
                // log(1 + e^θ) without overflow
                if theta > 0.0 {
                    theta + (-theta).exp().ln_1p()
                } else {
                    theta.exp().ln_1p()
                }
            }
            RewardFamily::Exponential => -(-theta).ln(),
        }
    }

    /// Variance of the member with the given mean, b̈(ḃ⁻¹(μ)).
    pub fn variance(&self, mean: f64) -> f64 {
        match *self {
            RewardFamily::Gaussian { sigma } => sigma * sigma,
            RewardFamily::Bernoulli => mean * (1.0 - mean),
            RewardFamily::Exponential => mean * mean,
        }
    }

    /// One draw from the member with mean `mean`.
    pub fn sample<R: Rng + ?Sized>(&self, mean: f64, rng: &mut R) -> Result<f64> {
        self.check_open(mean)?;
        Ok(self.sample_unchecked(mean, rng))
    }

    pub(crate) fn sample_unchecked<R: Rng + ?Sized>(&self, mean: f64, rng: &mut R) -> f64 {
        match *self {
            RewardFamily::Gaussian { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sigma * z
            }
            RewardFamily::Bernoulli => {
                if rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            RewardFamily::Exponential => {
                let e: f64 = rng.sample(Exp1);
                mean * e
            }
        }
    }
}

/// Bernoulli KL with the convention 0·log 0 = 0.
fn bernoulli_kl(p: f64, q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return f64::INFINITY;
    }
    let mut v = 0.0;
    if p > 0.0 {
        v += p * (p / q).ln();
    }
    if p < 1.0 {
        v += (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
    }
    v.max(0.0)
}

/// A K-armed bandit model: one reward family and a mean per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    family: RewardFamily,
    means: Vec<f64>,
    best: usize,
}

impl BanditInstance {
    pub fn new(family: RewardFamily, means: Vec<f64>) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a bandit instance needs at least 2 arms, got {}",
                means.len()
            )));
        }
        for &m in &means {
            family.check_open(m)?;
        }
        let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut tops = means.iter().enumerate().filter(|(_, &m)| m == max);
        let (best, _) = tops.next().expect("non-empty");
        if tops.next().is_some() {
            return Err(Error::NonUniqueBestArm);
        }
        Ok(Self { family, means, best })
    }

    pub fn family(&self) -> RewardFamily {
        self.family
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    /// Index of the unique best arm a★.
    pub fn best_arm(&self) -> usize {
        self.best
    }

    pub fn best_mean(&self) -> f64 {
        self.means[self.best]
    }

    /// Gap Δ_i = μ_{a★} − μ_i.
    pub fn gap(&self, arm: usize) -> f64 {
        self.best_mean() - self.means[arm]
    }

    /// Smallest gap over all pairs of distinct arms; zero when two suboptimal
    /// arms share a mean.
    pub fn min_pairwise_gap(&self) -> f64 {
        let mut min = f64::INFINITY;
        for i in 0..self.means.len() {
            for j in (i + 1)..self.means.len() {
                min = min.min((self.means[i] - self.means[j]).abs());
            }
        }
        min
    }

    pub fn max_gap(&self) -> f64 {
        (0..self.num_arms()).map(|i| self.gap(i)).fold(0.0, f64::max)
    }
}
