//! Test oracles written independently of the library code paths.
#![allow(dead_code)]

use ttsprt::{BanditInstance, RewardFamily};

pub const BERNOULLI_MEANS: [f64; 5] = [0.3, 0.21, 0.2, 0.19, 0.18];
pub const GAUSSIAN_MEANS: [f64; 4] = [1.0, 0.85, 0.8, 0.7];
pub const EXPONENTIAL_MEANS: [f64; 5] = [0.9, 0.7, 0.5, 0.3, 0.1];

pub fn bernoulli_instance() -> BanditInstance {
    BanditInstance::new(RewardFamily::Bernoulli, BERNOULLI_MEANS.to_vec()).unwrap()
}

pub fn gaussian_instance() -> BanditInstance {
    BanditInstance::new(RewardFamily::Gaussian { sigma: 1.0 }, GAUSSIAN_MEANS.to_vec()).unwrap()
}

pub fn exponential_instance() -> BanditInstance {
    BanditInstance::new(RewardFamily::Exponential, EXPONENTIAL_MEANS.to_vec()).unwrap()
}

/// Per-sample log-likelihood of a reward with sample mean `xbar` under mean
/// `mu`, dropping terms that do not depend on `mu`.
pub fn loglik(family: &RewardFamily, xbar: f64, mu: f64) -> f64 {
    match *family {
        RewardFamily::Gaussian { sigma } => -(xbar - mu).powi(2) / (2.0 * sigma * sigma),
        RewardFamily::Bernoulli => {
            let a = if xbar > 0.0 { xbar * mu.ln() } else { 0.0 };
            let b = if xbar < 1.0 { (1.0 - xbar) * (1.0 - mu).ln() } else { 0.0 };
            a + b
        }
        RewardFamily::Exponential => -mu.ln() - xbar / mu,
    }
}

/// KL divergence between two members of a family, from the densities.
pub fn kl_oracle(family: &RewardFamily, p: f64, q: f64) -> f64 {
    match *family {
        RewardFamily::Gaussian { sigma } => (p - q).powi(2) / (2.0 * sigma * sigma),
        RewardFamily::Bernoulli => {
            let a = if p > 0.0 { p * (p / q).ln() } else { 0.0 };
            let b = if p < 1.0 { (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln() } else { 0.0 };
            a + b
        }
        RewardFamily::Exponential => p / q - 1.0 - (p / q).ln(),
    }
}

/// Constrained likelihood ratio log(sup_{μi ≥ μj} L / sup_{μi ≤ μj} L),
/// maximized over a grid of `points` candidate means. Both optima lie in
/// the interval spanned by the two empirical means, so that is the grid.
pub fn gllr_grid(family: &RewardFamily, ti: f64, xi: f64, tj: f64, xj: f64, points: usize) -> f64 {
    let (lo, hi) = if xi < xj { (xi, xj) } else { (xj, xi) };
    let grid: Vec<f64> = (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .map(|m| match family {
            RewardFamily::Gaussian { .. } => m,
            RewardFamily::Bernoulli => m.clamp(1e-12, 1.0 - 1e-12),
            RewardFamily::Exponential => m.max(1e-12),
        })
        .collect();
    let li: Vec<f64> = grid.iter().map(|&m| ti * loglik(family, xi, m)).collect();
    let lj: Vec<f64> = grid.iter().map(|&m| tj * loglik(family, xj, m)).collect();
    // sup over μi ≤ μj: for each μj = grid[m], the best μi among grid[..=m]
    let mut below = f64::NEG_INFINITY;
    let mut best_le = f64::NEG_INFINITY;
    for m in 0..points {
        below = below.max(li[m]);
        best_le = best_le.max(below + lj[m]);
    }
    let mut above = f64::NEG_INFINITY;
    let mut best_ge = f64::NEG_INFINITY;
    for m in (0..points).rev() {
        above = above.max(li[m]);
        best_ge = best_ge.max(above + lj[m]);
    }
    best_ge - best_le
}

/// C_i(β, w) = min_x β·d(μ★‖x) + w·d(μ_i‖x), minimized by golden section.
pub fn transport_oracle(family: &RewardFamily, mu_star: f64, mu_i: f64, beta: f64, w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let f = |x: f64| beta * kl_oracle(family, mu_star, x) + w * kl_oracle(family, mu_i, x);
    let (mut a, mut b) = (mu_i, mu_star);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

/// Brute-force maximin of min_i C_i over the simplex slice with ω★ = β,
/// stepping the other weights by `step`.
pub fn grid_maximin(instance: &BanditInstance, beta: f64, step: f64) -> Vec<f64> {
    let family = instance.family();
    let best = instance.best_arm();
    let others: Vec<usize> = (0..instance.num_arms()).filter(|&i| i != best).collect();
    let units = ((1.0 - beta) / step).round() as usize;
    let table: Vec<Vec<f64>> = others
        .iter()
        .map(|&i| {
            (0..=units)
                .map(|u| transport_oracle(&family, instance.best_mean(), instance.means()[i], beta, u as f64 * step))
                .collect()
        })
        .collect();
    let mut best_value = f64::NEG_INFINITY;
    let mut best_units = vec![0usize; others.len()];
    let mut current = vec![0usize; others.len()];
    search(&table, units, 0, f64::INFINITY, &mut current, &mut best_value, &mut best_units);

    let mut weights = vec![0.0; instance.num_arms()];
    weights[best] = beta;
    for (slot, &arm) in others.iter().enumerate() {
        weights[arm] = best_units[slot] as f64 * step;
    }
    weights
}

fn search(
    table: &[Vec<f64>],
    left: usize,
    depth: usize,
    running: f64,
    current: &mut [usize],
    best_value: &mut f64,
    best_units: &mut [usize],
) {
    if running <= *best_value {
        return;
    }
    if depth + 1 == table.len() {
        current[depth] = left;
        let v = running.min(table[depth][left]);
        if v > *best_value {
            *best_value = v;
            best_units.copy_from_slice(current);
        }
        return;
    }
    for u in 0..=left {
        current[depth] = u;
        search(table, left - u, depth + 1, running.min(table[depth][u]), current, best_value, best_units);
    }
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Ordinary least squares of y on x; returns (slope, intercept, R²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx, sxy * sxy / (sxx * syy))
}
