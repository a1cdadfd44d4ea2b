//! β-optimal sampling proportions and the problem complexity Γ_μ(β).
//!
//! For a fixed share β on the best arm, the optimal allocation equalizes the
//! transportation costs `C_i(β, ω_i)` of all suboptimal arms. Each cost is
//! strictly increasing in ω_i, so the solver bisects on the common cost value
//! and inverts every `C_i` by an inner bisection until the suboptimal
//! weights sum to 1 − β.

use crate::error::{Error, Result};
use crate::expfam::{BanditInstance, RewardFamily};

/// Tolerance on the mass constraint Σ_{i≠a★} ω_i = 1 − β.
pub const MASS_TOLERANCE: f64 = 1e-10;
/// Maximum number of outer bisection steps.
pub const MAX_OUTER_ITERATIONS: usize = 200;

const INNER_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub beta: f64,
    /// ω★(β), with `weights[a★] == beta`.
    pub weights: Vec<f64>,
    /// Γ_μ(β), the common transportation cost at the optimum.
    pub gamma: f64,
    pub solver_iterations: usize,
    /// Spread max_i C_i − min_i C_i of the suboptimal costs at ω★.
    pub residual: f64,
}

/// `w_star·d(μ★ ‖ m) + w_i·d(μ_i ‖ m)` with `m` the weighted mean of the two.
pub fn transport_cost(
    family: &RewardFamily,
    mu_star: f64,
    mu_i: f64,
    w_star: f64,
    w_i: f64,
) -> Result<f64> {
    if !(mu_star > mu_i) {
        return Err(Error::OrderingViolation(format!(
            "mu_star > mu_i, got {mu_star} <= {mu_i}"
        )));
    }
    if !(w_star > 0.0 && w_i > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "weights must be positive, got ({w_star}, {w_i})"
        )));
    }
    for m in [mu_star, mu_i] {
        if !family.is_closed_mean(m) {
            return Err(Error::InvalidMean { family: family.name(), mean: m });
        }
    }
    Ok(cost(family, mu_star, mu_i, w_star, w_i))
}

fn cost(family: &RewardFamily, mu_star: f64, mu_i: f64, w_star: f64, w_i: f64) -> f64 {
    let m = ((w_star * mu_star + w_i * mu_i) / (w_star + w_i)).clamp(mu_i, mu_star);
    w_star * family.kl_unchecked(mu_star, m) + w_i * family.kl_unchecked(mu_i, m)
}

/// Smallest ω with `C_i(β, ω) >= target`; `target` must lie below the
/// supremum β·d(μ★ ‖ μ_i).
fn invert_cost(family: &RewardFamily, mu_star: f64, mu_i: f64, beta: f64, target: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while cost(family, mu_star, mu_i, beta, hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    for _ in 0..INNER_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cost(family, mu_star, mu_i, beta, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves the maximin problem defining ω★(β) and Γ_μ(β).
pub fn solve_allocation(instance: &BanditInstance, beta: f64) -> Result<AllocationResult> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta must lie in (0,1), got {beta}")));
    }
    let family = instance.family();
    let best = instance.best_arm();
    let mu_star = instance.best_mean();
    let others: Vec<(usize, f64)> = instance
        .means()
        .iter()
        .copied()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .collect();
    let target_mass = 1.0 - beta;

    // C_i(β, ω) → β·d(μ★ ‖ μ_i) as ω → ∞, so the common value lives below the
    // smallest of these suprema.
    let sup = others
        .iter()
        .map(|&(_, m)| beta * family.kl_unchecked(mu_star, m))
        .fold(f64::INFINITY, f64::min);

    let mass_at = |c: f64| -> (f64, Vec<f64>) {
        let ws: Vec<f64> =
            others.iter().map(|&(_, m)| invert_cost(&family, mu_star, m, beta, c)).collect();
        (ws.iter().sum(), ws)
    };

    let (mut lo, mut hi) = (0.0, sup);
    let mut iterations = 0;
    let mut solution = None;
    let mut last_err = f64::INFINITY;
    while iterations < MAX_OUTER_ITERATIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let (mass, ws) = mass_at(mid);
        last_err = (mass - target_mass).abs();
        if last_err <= MASS_TOLERANCE {
            solution = Some(ws);
            break;
        }
        if mass < target_mass {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            // interval exhausted; accept if the mass is already tight
            if last_err <= 1e3 * MASS_TOLERANCE {
                solution = Some(ws);
            }
            break;
        }
    }
    let ws = solution.ok_or(Error::NoConvergence { iterations, residual: last_err })?;

    let mut weights = vec![0.0; instance.num_arms()];
    weights[best] = beta;
    for (&(i, _), &w) in others.iter().zip(&ws) {
        weights[i] = w;
    }
    let costs: Vec<f64> =
        others.iter().map(|&(i, m)| cost(&family, mu_star, m, beta, weights[i])).collect();
    let gamma = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let residual = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - gamma;
    Ok(AllocationResult { beta, weights, gamma, solver_iterations: iterations, residual })
}

/// log(1/δ)/Γ_μ(β), the asymptotic lower-bound scale of E[τ] for algorithms
/// that devote a fraction β of their samples to the best arm.
pub fn lower_bound_samples(instance: &BanditInstance, beta: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0,1), got {delta}")));
    }
    let alloc = solve_allocation(instance, beta)?;
    Ok(lower_bound_from_gamma(alloc.gamma, delta))
}

pub fn lower_bound_from_gamma(gamma: f64, delta: f64) -> f64 {
    (1.0 / delta).ln() / gamma
}
