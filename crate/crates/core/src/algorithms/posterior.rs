//! Gaussian posterior used by TTTS and T3C, and the TTTS challenger search.
//!
//! With an uninformative prior the posterior on arm i is N(μ̂_i, v_i/T_i)
//! where v_i is the reward variance (σ² for Gaussian rewards). For the other
//! families v_i is the family variance at a smoothed empirical mean.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::expfam::RewardFamily;
use crate::stats::{argmax_lowest, SufficientStats};

const MIN_SCALE: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPosterior {
    means: Vec<f64>,
    scales: Vec<f64>,
}

impl GaussianPosterior {
    pub fn new(means: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        if means.len() != scales.len() || means.len() < 2 {
            return Err(Error::InvalidParameter(
                "posterior needs matching means and scales for at least 2 arms".into(),
            ));
        }
        if scales.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParameter("posterior scales must be finite and >= 0".into()));
        }
        let scales = scales.into_iter().map(|s| s.max(MIN_SCALE)).collect();
        Ok(Self { means, scales })
    }

    /// Posterior after the observations in `stats`; every arm must be pulled.
    pub fn from_stats(family: &RewardFamily, stats: &SufficientStats) -> Result<Self> {
        let k = stats.num_arms();
        let mut means = Vec::with_capacity(k);
        let mut scales = Vec::with_capacity(k);
        for i in 0..k {
            let m = stats.mean(i)?;
            let t = stats.count(i)? as f64;
            let v = match *family {
                RewardFamily::Gaussian { sigma } => sigma * sigma,
                // add-half smoothing keeps the variance positive at 0 and 1
                RewardFamily::Bernoulli => {
                    let p = (stats.sum(i)? + 0.5) / (t + 1.0);
                    p * (1.0 - p)
                }
                RewardFamily::Exponential => family.variance(m),
            };
            means.push(m);
            scales.push((v / t).sqrt());
        }
        Self::new(means, scales)
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Draws θ ~ Π and returns argmax θ.
    pub fn sample_argmax<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut Vec<f64>) -> usize {
        buf.clear();
        for (m, s) in self.means.iter().zip(&self.scales) {
            let z: f64 = rng.sample(StandardNormal);
            buf.push(m + s * z);
        }
        argmax_lowest(buf).expect("non-empty posterior")
    }

    /// P(argmax θ = j) under the posterior, as
    ///
    /// ∫ φ(z) Π_{k≠j} Φ((m_j + s_j z − m_k)/s_k) dz.
    ///
    /// The integrand is 1-strongly log-concave, so it is bounded by a unit
    /// Gaussian bump around its mode. The integral is taken over ±8 around
    /// the mode in log-scaled form, which keeps relative accuracy for
    /// probabilities far below the smallest normal double.
    pub fn argmax_probability(&self, j: usize) -> f64 {
        self.log_argmax_probability(j).exp()
    }

    /// Natural log of [`Self::argmax_probability`].
    pub fn log_argmax_probability(&self, j: usize) -> f64 {
        let g = ArgmaxIntegrand::new(self, j);
        let (mode, curvature) = g.mode();
        let peak = g.log_value(mode);
        if peak == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let width = curvature.max(1.0).sqrt().recip();
        let integral = g.kronrod(mode, peak, width);
        peak + integral.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }

    /// Upper bound P(θ_j > θ_b) ≥ P(argmax θ = j), in closed form.
    pub fn pairwise_exceedance(&self, j: usize, b: usize) -> f64 {
        let d = self.means[j] - self.means[b];
        let s = self.scales[j].hypot(self.scales[b]);
        std_normal_cdf(d / s)
    }
}

/// z ↦ φ(z) Π_{k≠j} Φ(a_k + b_k z), up to the constant 1/√(2π).
struct ArgmaxIntegrand {
    terms: Vec<(f64, f64)>,
}

impl ArgmaxIntegrand {
    fn new(post: &GaussianPosterior, j: usize) -> Self {
        let (mj, sj) = (post.means[j], post.scales[j]);
        let terms = (0..post.num_arms())
            .filter(|&k| k != j)
            .map(|k| ((mj - post.means[k]) / post.scales[k], sj / post.scales[k]))
            .collect();
        Self { terms }
    }

    fn log_value(&self, z: f64) -> f64 {
        -0.5 * z * z + log_cdf_product(&self.terms, z)
    }

    /// First and second derivative of the log integrand.
    fn slope(&self, z: f64) -> (f64, f64) {
        let (mut d1, mut d2) = (-z, -1.0);
        for &(a, b) in &self.terms {
            let x = a + b * z;
            let l = mills_ratio(x);
            d1 += b * l;
            d2 -= b * b * l * (x + l);
        }
        (d1, d2)
    }

    /// Mode and curvature −(log g)'' there. The log integrand is strongly
    /// concave, so safeguarded Newton converges from any start.
    fn mode(&self) -> (f64, f64) {
        let (f0, c0) = self.slope(0.0);
        // slope ≤ −1 puts the root within |f(0)| of the origin
        let (mut lo, mut hi) = if f0 > 0.0 { (0.0, f0) } else { (f0, 0.0) };
        let (mut z, mut fz, mut dz) = (0.0f64, f0, c0);
        for _ in 0..100 {
            if fz == 0.0 {
                break;
            }
            if fz > 0.0 {
                lo = z;
            } else {
                hi = z;
            }
            let mut next = z - fz / dz;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let step = (next - z).abs();
            z = next;
            (fz, dz) = self.slope(z);
            if step <= 1e-12 * (1.0 + z.abs()) || hi - lo <= 1e-12 * (1.0 + z.abs()) {
                break;
            }
        }
        (z, -dz)
    }

    /// Adaptive Gauss–Kronrod over ±8 around the mode.
    fn kronrod(&self, mode: f64, peak: f64, width: f64) -> f64 {
        let f = |z: f64| (self.log_value(z) - peak).exp();
        let mut breaks = vec![mode];
        for r in [width, 3.0 * width, MODE_WINDOW] {
            breaks.push(mode - r);
            breaks.push(mode + r);
        }
        for &(a, b) in &self.terms {
            // a steep factor switches on around z = −a/b
            if b > 1.0 {
                let c = -a / b;
                if (mode - MODE_WINDOW..mode + MODE_WINDOW).contains(&c) {
                    breaks.push(c);
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let coarse: Vec<(f64, f64)> = breaks.windows(2).map(|w| gauss_kronrod(&f, w[0], w[1])).collect();
        let total: f64 = coarse.iter().map(|c| c.0).sum();
        let tol = RELATIVE_TOLERANCE * total;
        let span = breaks[breaks.len() - 1] - breaks[0];
        breaks
            .windows(2)
            .zip(&coarse)
            .map(|(w, &(v, err))| {
                let local = tol * (w[1] - w[0]) / span;
                if err <= local {
                    v
                } else {
                    refine(&f, w[0], w[1], local, MAX_DEPTH)
                }
            })
            .sum()
    }
}

/// Relative accuracy of the argmax probabilities.
const RELATIVE_TOLERANCE: f64 = 1e-10;
/// The integrand is below e^{-32} of its peak outside this window.
const MODE_WINDOW: f64 = 8.0;
const MAX_DEPTH: u32 = 40;

pub(crate) fn std_normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

/// Below this point erfc loses range and the asymptotic series takes over.
const TAIL_SWITCH: f64 = -30.0;

/// 1 − 1/x² + 3/x⁴ − 15/x⁶ + 105/x⁸, the Mills-ratio series for x → −∞.
fn tail_series(x: f64) -> f64 {
    let r = 1.0 / (x * x);
    1.0 - r * (1.0 - r * (3.0 - r * (15.0 - 105.0 * r)))
}

pub(crate) fn log_std_normal_cdf(x: f64) -> f64 {
    if x >= TAIL_SWITCH {
        std_normal_cdf(x).ln()
    } else {
        -0.5 * x * x - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + tail_series(x).ln()
    }
}

/// Σ_k log Φ(a_k + b_k z) with a single logarithm in the common case.
fn log_cdf_product(terms: &[(f64, f64)], z: f64) -> f64 {
    let mut prod = 1.0;
    let mut log_acc = 0.0;
    for &(a, b) in terms {
        let x = a + b * z;
        if x >= TAIL_SWITCH {
            prod *= std_normal_cdf(x);
            if prod < 1e-200 {
                log_acc += prod.ln();
                prod = 1.0;
            }
        } else {
            log_acc += log_std_normal_cdf(x);
        }
    }
    log_acc + prod.ln()
}

/// φ(x)/Φ(x).
fn mills_ratio(x: f64) -> f64 {
    if x >= TAIL_SWITCH {
        std_normal_pdf(x) / std_normal_cdf(x)
    } else {
        -x / tail_series(x)
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Weights of the embedded 7-point Gauss rule, on nodes 1, 3, 5, 7.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its distance to the 7-point Gauss rule.
fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (v, err) = gauss_kronrod(f, a, b);
    if depth == 0 || err <= tol {
        return v;
    }
    let c = 0.5 * (a + b);
    refine(f, a, c, 0.5 * tol, depth - 1) + refine(f, c, b, 0.5 * tol, depth - 1)
}

/// Outcome of one TTTS top-two draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopTwoDraw {
    /// b¹: argmax of the first posterior sample.
    pub leader: usize,
    /// b²: argmax of the first later sample that differs from b¹, when found.
    pub challenger: Option<usize>,
    /// Posterior samples drawn after the leader sample, capped at the
    /// resample cap.
    pub resamples: u64,
    /// The number of resamples exceeded the cap.
    pub censored: bool,
}

/// Resample-until-different challenger search.
///
/// The first `literal_draws` resamples are drawn one by one. After that the
/// search continues exactly but without drawing every resample: a resample
/// can only beat the leader b if some θ_k exceeds θ_b, an event of
/// probability at most Q = Σ_k P(θ_k > θ_b). When Q ≤ 1 each resample is
/// split into a Bernoulli(Q) stage and, on success, a draw from the mixture
/// of Π(· | θ_k > θ_b) with weights ∝ P(θ_k > θ_b), kept with probability
/// 1/#{k : θ_k > θ_b}. The two stages succeed with exactly
/// P(argmax ≠ b), so runs of failures are skipped as geometric blocks and
/// the kept draw is a posterior sample conditioned on a new argmax.
///
/// A search that passes `cap` draws returns no challenger, however the cap is
/// reached.
pub fn sample_top_two<R: Rng + ?Sized>(
    posterior: &GaussianPosterior,
    rng: &mut R,
    cap: u64,
    literal_draws: u64,
) -> TopTwoDraw {
    let k = posterior.num_arms();
    let mut buf = Vec::with_capacity(k);
    let leader = posterior.sample_argmax(rng, &mut buf);
    let literal = literal_draws.min(cap);
    let mut used = 0u64;
    let found = |b: usize, used: u64| TopTwoDraw { leader, challenger: Some(b), resamples: used, censored: false };
    while used < literal {
        used += 1;
        let b = posterior.sample_argmax(rng, &mut buf);
        if b != leader {
            return found(b, used);
        }
    }
    let capped = TopTwoDraw { leader, challenger: None, resamples: cap, censored: true };
    if used >= cap {
        return capped;
    }

    let bounds: Vec<f64> = (0..k)
        .map(|j| if j == leader { 0.0 } else { posterior.pairwise_exceedance(j, leader) })
        .collect();
    let q: f64 = bounds.iter().sum();
    if !(q > 0.0) {
        return capped;
    }
    if q > 1.0 {
        // then P(argmax ≠ b) ≥ max_k P(θ_k > θ_b) > 1/(K−1): keep drawing
        while used < cap {
            used += 1;
            let b = posterior.sample_argmax(rng, &mut buf);
            if b != leader {
                return found(b, used);
            }
        }
        return capped;
    }
    loop {
        used = used.saturating_add(sample_geometric(q, rng));
        if used > cap {
            return capped;
        }
        if let Some(b) = exceedance_proposal(posterior, leader, &bounds, q, rng, &mut buf) {
            return found(b, used);
        }
    }
}

/// One draw from Σ_k (q_k/Q) Π(· | θ_k > θ_b), kept with probability
/// 1/#{k : θ_k > θ_b}. Returns the argmax of a kept draw.
fn exceedance_proposal<R: Rng + ?Sized>(
    post: &GaussianPosterior,
    b: usize,
    bounds: &[f64],
    total: f64,
    rng: &mut R,
    buf: &mut Vec<f64>,
) -> Option<usize> {
    let mut u = rng.random::<f64>() * total;
    let mut k = bounds.iter().rposition(|&q| q > 0.0).expect("positive total");
    for (j, &q) in bounds.iter().enumerate() {
        if u < q {
            k = j;
            break;
        }
        u -= q;
    }
    let (mb, sb) = (post.means[b], post.scales[b]);
    let (mk, sk) = (post.means[k], post.scales[k]);
    // D = θ_k − θ_b ~ N(mk − mb, sk² + sb²) truncated to D > 0, then θ_b | D
    let var_d = sk * sk + sb * sb;
    let sd_d = var_d.sqrt();
    let d = (mk - mb) + sd_d * truncated_std_normal((mb - mk) / sd_d, rng);
    let cond_mean = mb - sb * sb / var_d * (d - (mk - mb));
    let z: f64 = rng.sample(StandardNormal);
    let theta_b = cond_mean + (sb * sk / sd_d) * z;

    buf.clear();
    for j in 0..post.num_arms() {
        let v = if j == b {
            theta_b
        } else if j == k {
            theta_b + d
        } else {
            let z: f64 = rng.sample(StandardNormal);
            post.means[j] + post.scales[j] * z
        };
        buf.push(v);
    }
    let above = buf.iter().enumerate().filter(|&(j, &v)| j != b && v > theta_b).count();
    debug_assert!(above >= 1);
    if rng.random::<f64>() * above as f64 >= 1.0 {
        return None;
    }
    argmax_lowest(buf)
}

/// Z ~ N(0, 1) conditioned on Z > alpha.
fn truncated_std_normal<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha <= 0.5 {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if z > alpha {
                return z;
            }
        }
    }
    // exponential proposal with the optimal rate
    let lambda = 0.5 * (alpha + (alpha * alpha + 4.0).sqrt());
    loop {
        let z = alpha - (1.0 - rng.random::<f64>()).ln() / lambda;
        let u = rng.random::<f64>();
        if u <= (-0.5 * (z - lambda) * (z - lambda)).exp() {
            return z;
        }
    }
}

/// Number of Bernoulli(p) trials up to and including the first success.
fn sample_geometric<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let u = 1.0 - rng.random::<f64>(); // (0, 1]
    let g = (u.ln() / (-p).ln_1p()).ceil();
    if g >= u64::MAX as f64 {
        u64::MAX
    } else {
        (g as u64).max(1)
    }
}
