//! Sufficient statistics of the observation stream and the pairwise GLLR.

use crate::error::{Error, Result};
use crate::expfam::RewardFamily;

/// Per-arm pull counts and reward sums. Rewards are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    counts: Vec<u64>,
    sums: Vec<f64>,
    rounds: u64,
}

impl SufficientStats {
    pub fn new(num_arms: usize) -> Self {
        Self { counts: vec![0; num_arms], sums: vec![0.0; num_arms], rounds: 0 }
    }

    /// Builds statistics directly from counts and empirical means.
    pub fn from_counts_and_means(counts: &[u64], means: &[f64]) -> Result<Self> {
        if counts.len() != means.len() {
            return Err(Error::InvalidParameter(format!(
                "{} counts but {} means",
                counts.len(),
                means.len()
            )));
        }
        let sums = counts.iter().zip(means).map(|(&t, &m)| t as f64 * m).collect();
        Ok(Self { counts: counts.to_vec(), sums, rounds: counts.iter().sum() })
    }

    pub fn num_arms(&self) -> usize {
        self.counts.len()
    }

    /// Total number of observations n.
    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, arm: usize) -> Result<u64> {
        self.check_index(arm)?;
        Ok(self.counts[arm])
    }

    pub fn sum(&self, arm: usize) -> Result<f64> {
        self.check_index(arm)?;
        Ok(self.sums[arm])
    }

    pub fn all_pulled(&self) -> bool {
        self.counts.iter().all(|&t| t > 0)
    }

    pub fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.check_index(arm)?;
        self.counts[arm] += 1;
        self.sums[arm] += reward;
        self.rounds += 1;
        Ok(())
    }

    /// Empirical mean μ_{n,i}.
    pub fn mean(&self, arm: usize) -> Result<f64> {
        self.check_index(arm)?;
        match self.counts[arm] {
            0 => Err(Error::UnpulledArm(arm)),
            t => Ok(self.sums[arm] / t as f64),
        }
    }

    /// Empirical means of all arms; fails if any arm is unpulled.
    pub fn means(&self) -> Result<Vec<f64>> {
        (0..self.num_arms()).map(|i| self.mean(i)).collect()
    }

    /// Count-weighted average μ_{n,i,j} of two empirical means.
    pub fn weighted_mean(&self, i: usize, j: usize) -> Result<f64> {
        let (mi, mj) = (self.mean(i)?, self.mean(j)?);
        let (ti, tj) = (self.counts[i] as f64, self.counts[j] as f64);
        Ok(pooled_mean(ti, mi, tj, mj))
    }

    fn check_index(&self, arm: usize) -> Result<()> {
        if arm < self.counts.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: arm, arms: self.counts.len() })
        }
    }
}

fn pooled_mean(ti: f64, mi: f64, tj: f64, mj: f64) -> f64 {
    if mi == mj {
        return mi;
    }
    (ti * mi + tj * mj) / (ti + tj)
}

/// Closed-form GLLR from two (count, mean) pairs; zero unless `mi > mj`.
pub(crate) fn gllr_from_parts(family: &RewardFamily, ti: f64, mi: f64, tj: f64, mj: f64) -> f64 {
    if !(mi > mj) {
        return 0.0;
    }
    if let RewardFamily::Gaussian { sigma } = *family {
        return gaussian_gllr_from_parts(sigma, ti, mi, tj, mj);
    }
    let pooled = pooled_mean(ti, mi, tj, mj).clamp(mj, mi);
    ti * family.kl_unchecked(mi, pooled) + tj * family.kl_unchecked(mj, pooled)
}

fn gaussian_gllr_from_parts(sigma: f64, ti: f64, mi: f64, tj: f64, mj: f64) -> f64 {
    if !(mi > mj) {
        return 0.0;
    }
    let d = mi - mj;
    d * d / (2.0 * sigma * sigma * (1.0 / ti + 1.0 / tj))
}

fn pulled_pair(stats: &SufficientStats, i: usize, j: usize) -> Result<(f64, f64, f64, f64)> {
    let (mi, mj) = (stats.mean(i)?, stats.mean(j)?);
    Ok((stats.counts[i] as f64, mi, stats.counts[j] as f64, mj))
}

/// Generalized log-likelihood ratio Λ_n(i, j) of "μ_i > μ_j" against
/// "μ_j > μ_i":
///
/// `1{μ̂_i > μ̂_j}·[T_i·d(μ̂_i ‖ μ̂_ij) + T_j·d(μ̂_j ‖ μ̂_ij)]`
///
/// where μ̂_ij is the count-weighted pooled mean. Exact ties give zero in both
/// directions.
pub fn gllr(family: &RewardFamily, stats: &SufficientStats, i: usize, j: usize) -> Result<f64> {
    let (ti, mi, tj, mj) = pulled_pair(stats, i, j)?;
    for m in [mi, mj] {
        if !family.is_closed_mean(m) {
            return Err(Error::InvalidMean { family: family.name(), mean: m });
        }
    }
    Ok(gllr_from_parts(family, ti, mi, tj, mj))
}

/// Gaussian GLLR in its quadratic form,
/// `(μ̂_i − μ̂_j)² / (2σ²(1/T_i + 1/T_j))` when μ̂_i > μ̂_j.
pub fn gllr_gaussian(sigma: f64, stats: &SufficientStats, i: usize, j: usize) -> Result<f64> {
    let (ti, mi, tj, mj) = pulled_pair(stats, i, j)?;
    Ok(gaussian_gllr_from_parts(sigma, ti, mi, tj, mj))
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Index of the smallest value over `candidates`; `+∞` orders above every
/// finite value and ties go to the lowest index.
pub fn argmin_lowest(candidates: impl IntoIterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in candidates {
        match best {
            Some((bi, b)) if v > b || (v == b && i > bi) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const GAUSS: RewardFamily = RewardFamily::Gaussian { sigma: 1.0 };

    fn stats_from(counts: &[u64], means: &[f64]) -> SufficientStats {
        SufficientStats::from_counts_and_means(counts, means).unwrap()
    }

    #[test]
    fn update_tracks_counts_and_means() {
        let mut s = SufficientStats::new(3);
        s.update(0, 1.0).unwrap();
        assert_eq!(s.count(0).unwrap(), 1);
        assert_eq!(s.mean(0).unwrap(), 1.0);
        s.update(0, 0.0).unwrap();
        assert_eq!(s.mean(0).unwrap(), 0.5);
        assert_eq!(s.count(1).unwrap(), 0);
        assert_eq!(s.count(2).unwrap(), 0);
        assert_eq!(s.rounds(), 2);
        assert!(matches!(s.mean(1), Err(Error::UnpulledArm(1))));
        assert!(matches!(s.update(3, 1.0), Err(Error::IndexOutOfRange { index: 3, arms: 3 })));
    }

    #[test]
    fn weighted_mean_cases() {
        let s = stats_from(&[2, 2], &[1.0, 0.0]);
        assert_eq!(s.weighted_mean(0, 1).unwrap(), 0.5);
        let s = stats_from(&[3, 1], &[1.0, 0.0]);
        assert_eq!(s.weighted_mean(0, 1).unwrap(), 0.75);
        assert_eq!(s.weighted_mean(0, 0).unwrap(), 1.0);
        let s = stats_from(&[3, 0], &[1.0, 0.0]);
        assert!(matches!(s.weighted_mean(0, 1), Err(Error::UnpulledArm(1))));
    }

    #[test]
    fn gllr_indicator_and_gaussian_value() {
        let s = stats_from(&[4, 4], &[1.0, 0.0]);
        assert_eq!(gllr(&GAUSS, &s, 1, 0).unwrap(), 0.0);
        assert_abs_diff_eq!(gllr(&GAUSS, &s, 0, 1).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gllr_gaussian(1.0, &s, 0, 1).unwrap(), 1.0, epsilon = 1e-15);
        let tied = stats_from(&[4, 7], &[0.5, 0.5]);
        assert_eq!(gllr(&RewardFamily::Bernoulli, &tied, 0, 1).unwrap(), 0.0);
        assert_eq!(gllr(&RewardFamily::Bernoulli, &tied, 1, 0).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_quadratic_form_scales_with_counts() {
        let s1 = stats_from(&[3, 5], &[0.7, 0.1]);
        let s2 = stats_from(&[6, 10], &[0.7, 0.1]);
        let a = gllr_gaussian(2.0, &s1, 0, 1).unwrap();
        let b = gllr_gaussian(2.0, &s2, 0, 1).unwrap();
        assert_abs_diff_eq!(b, 2.0 * a, epsilon = 1e-12);
    }

    #[test]
    fn bernoulli_gllr_with_degenerate_means_is_finite() {
        // pooled mean is interior, so each KL term is finite
        let s = stats_from(&[3, 2], &[1.0, 0.0]);
        let v = gllr(&RewardFamily::Bernoulli, &s, 0, 1).unwrap();
        let expected = 3.0 * (1.0f64 / 0.6).ln() + 2.0 * (1.0f64 / 0.4).ln();
        assert_abs_diff_eq!(v, expected, epsilon = 1e-12);
    }

    #[test]
    fn extended_real_argmin() {
        let vals = [(1, f64::INFINITY), (2, 3.0), (3, 3.0), (4, f64::INFINITY)];
        assert_eq!(argmin_lowest(vals), Some(2));
        assert_eq!(argmin_lowest([(2, f64::INFINITY), (0, f64::INFINITY)]), Some(0));
        assert_eq!(argmax_lowest(&[0.1, 0.4, 0.4]), Some(1));
        assert_eq!(argmax_lowest(&[]), None);
    }

    // Brute-force oracle: maximize the log-likelihood over the constrained mean
    // sets {μi ≥ μj} and {μj ≥ μi} on a grid and take the difference. Only the
    // sufficient statistics enter: Σ log ν(x|μ) = θ(μ)·S − T·b(θ(μ)) + const.
    fn grid_gllr(f: RewardFamily, ti: f64, mi: f64, tj: f64, mj: f64, lo: f64, hi: f64) -> f64 {
        let n = 10_000;
        let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        let ll = |t: f64, m_hat: f64, mu: f64| {
            let th = f.natural_param(mu).unwrap();
            th * t * m_hat - t * f.log_partition(th)
        };
        let li: Vec<f64> = grid.iter().map(|&mu| ll(ti, mi, mu)).collect();
        let lj: Vec<f64> = grid.iter().map(|&mu| ll(tj, mj, mu)).collect();
        // best of arm j below each grid point, then combine
        let mut best_h1 = f64::NEG_INFINITY; // μi ≥ μj
        let mut best_h2 = f64::NEG_INFINITY; // μj ≥ μi
        let mut run_j = f64::NEG_INFINITY;
        let mut run_i = f64::NEG_INFINITY;
        for k in 0..grid.len() {
            run_j = run_j.max(lj[k]);
            run_i = run_i.max(li[k]);
            best_h1 = best_h1.max(li[k] + run_j);
            best_h2 = best_h2.max(lj[k] + run_i);
        }
        (best_h1 - best_h2).max(0.0)
    }

    fn random_history(f: RewardFamily, rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
        let draw = |rng: &mut ChaCha8Rng| match f {
            RewardFamily::Bernoulli => {
                // interior empirical means keep the maximizer on the open grid
                let t = rng.random_range(2..=12u64);
                (t as f64, rng.random_range(1..t) as f64 / t as f64)
            }
            RewardFamily::Exponential => (rng.random_range(1..=12u64) as f64, rng.random_range(0.2..3.0)),
            RewardFamily::Gaussian { .. } => {
                (rng.random_range(1..=12u64) as f64, rng.random_range(-2.0..2.0))
            }
        };
        let (ti, mi) = draw(rng);
        let (tj, mj) = draw(rng);
        (ti, mi, tj, mj)
    }

    #[test]
    fn closed_form_matches_grid_maximization() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let families = [
            (GAUSS, -3.0, 3.0),
            (RewardFamily::Bernoulli, 1e-4, 1.0 - 1e-4),
            (RewardFamily::Exponential, 0.05, 4.0),
        ];
        for (f, lo, hi) in families {
            for _ in 0..60 {
                let (ti, mi, tj, mj) = random_history(f, &mut rng);
                let s = stats_from(&[ti as u64, tj as u64], &[mi, mj]);
                let closed = gllr(&f, &s, 0, 1).unwrap();
                let oracle = grid_gllr(f, ti, mi, tj, mj, lo, hi);
                assert!(
                    (closed - oracle).abs() < 1e-4,
                    "{f}: T=({ti},{tj}) μ̂=({mi},{mj}) closed={closed} grid={oracle}"
                );
            }
        }
    }

    #[test]
    fn bernoulli_example_matches_grid() {
        let s = stats_from(&[5, 5], &[0.8, 0.4]);
        let closed = gllr(&RewardFamily::Bernoulli, &s, 0, 1).unwrap();
        let oracle = grid_gllr(RewardFamily::Bernoulli, 5.0, 0.8, 5.0, 0.4, 1e-4, 1.0 - 1e-4);
        assert_abs_diff_eq!(closed, oracle, epsilon = 1e-4);
        // 5·d(0.8‖0.6) + 5·d(0.4‖0.6), direct evaluation
        assert_abs_diff_eq!(closed, 0.863_046_217_355_342_8, epsilon = 1e-4);
    }

    proptest! {
        #[test]
        fn gaussian_forms_agree(ti in 1u64..500, tj in 1u64..500, mi in -5.0f64..5.0, mj in -5.0f64..5.0, sigma in 0.1f64..4.0) {
            let f = RewardFamily::Gaussian { sigma };
            let s = stats_from(&[ti, tj], &[mi, mj]);
            let general = {
                let (a, b, c, d) = (ti as f64, mi, tj as f64, mj);
                if b > d {
                    let p = pooled_mean(a, b, c, d);
                    a * f.kl_unchecked(b, p) + c * f.kl_unchecked(d, p)
                } else { 0.0 }
            };
            let quad = gllr_gaussian(sigma, &s, 0, 1).unwrap();
            prop_assert!((general - quad).abs() <= 1e-10 * (1.0 + quad));
            prop_assert!((gllr(&f, &s, 0, 1).unwrap() - quad).abs() <= 1e-10 * (1.0 + quad));
        }

        #[test]
        fn at_most_one_direction_active(ti in 1u64..50, tj in 1u64..50, mi in 0.01f64..0.99, mj in 0.01f64..0.99, fam in 0usize..3) {
            let f = [GAUSS, RewardFamily::Bernoulli, RewardFamily::Exponential][fam];
            let s = stats_from(&[ti, tj], &[mi, mj]);
            let a = gllr(&f, &s, 0, 1).unwrap();
            let b = gllr(&f, &s, 1, 0).unwrap();
            prop_assert!(a == 0.0 || b == 0.0);
            prop_assert_eq!(a == 0.0 && b == 0.0, mi == mj);
        }

        #[test]
        fn nondecreasing_in_counts(ti in 1u64..50, tj in 1u64..50, extra in 1u64..50, mi in 0.01f64..0.99, mj in 0.01f64..0.99, fam in 0usize..3) {
            let f = [GAUSS, RewardFamily::Bernoulli, RewardFamily::Exponential][fam];
            let base = gllr(&f, &stats_from(&[ti, tj], &[mi, mj]), 0, 1).unwrap();
            let more_i = gllr(&f, &stats_from(&[ti + extra, tj], &[mi, mj]), 0, 1).unwrap();
            let more_j = gllr(&f, &stats_from(&[ti, tj + extra], &[mi, mj]), 0, 1).unwrap();
            prop_assert!(more_i >= base - 1e-12);
            prop_assert!(more_j >= base - 1e-12);
        }
    }
}
