//! Bounds on the expected number of TTTS posterior resamples needed to
//! find a challenger at round n.

use crate::error::{Error, Result};
use crate::expfam::BanditInstance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TttsBounds {
    /// min_{i≠a★} 2·exp(√(n/K)·C_{i,L}), C_{i,L} = (Δ_i − Δ_min/2)²/(4σ²)
    pub lower: f64,
    /// max_{i≠a★} √(2πe)·exp(n·C_{i,U}), C_{i,U} = (Δ_i + Δ_min/2)²/(2σ²);
    /// `None` when Δ_min = 0.
    pub upper: Option<f64>,
    /// n > 32σ²/(9Δ_min²), the range where the upper bound holds.
    pub upper_valid: bool,
}

impl TttsBounds {
    pub fn upper_bound(&self) -> Result<f64> {
        self.upper
            .ok_or_else(|| Error::Domain("upper bound undefined when the minimum gap is zero".into()))
    }
}

pub fn ttts_bound_curves(instance: &BanditInstance, sigma: f64, n: u64) -> Result<TttsBounds> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let k = instance.num_arms() as f64;
    let n = n as f64;
    let dmin = instance.min_pairwise_gap();
    let s2 = sigma * sigma;
    let best = instance.best_arm();
    let gaps: Vec<f64> =
        (0..instance.num_arms()).filter(|&i| i != best).map(|i| instance.gap(i)).collect();

    let lower = gaps
        .iter()
        .map(|&d| {
            let c = (d - dmin / 2.0).powi(2) / (4.0 * s2);
            2.0 * ((n / k).sqrt() * c).exp()
        })
        .fold(f64::INFINITY, f64::min);

    if dmin == 0.0 {
        return Ok(TttsBounds { lower, upper: None, upper_valid: false });
    }
    let scale = (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt();
    let upper = gaps
        .iter()
        .map(|&d| scale * (n * (d + dmin / 2.0).powi(2) / (2.0 * s2)).exp())
        .fold(f64::NEG_INFINITY, f64::max);
    let upper_valid = n > 32.0 * s2 / (9.0 * dmin * dmin);
    Ok(TttsBounds { lower, upper: Some(upper), upper_valid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expfam::RewardFamily;
    use approx::assert_relative_eq;

    fn two_arm() -> BanditInstance {
        BanditInstance::new(RewardFamily::Gaussian { sigma: 1.0 }, vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn two_arm_values() {
        let b = ttts_bound_curves(&two_arm(), 1.0, 100).unwrap();
        assert_relative_eq!(b.lower, 2.0 * (50f64.sqrt() * 0.0625).exp(), max_relative = 1e-14);
        let scale = (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt();
        assert_relative_eq!(b.upper.unwrap(), scale * (100.0 * 1.125f64).exp(), max_relative = 1e-12);
        assert!(b.upper_valid);
        assert!(!ttts_bound_curves(&two_arm(), 1.0, 3).unwrap().upper_valid);
    }

    #[test]
    fn lower_is_increasing_and_below_upper() {
        let inst = two_arm();
        let mut prev = 0.0;
        for n in 2..300u64 {
            let b = ttts_bound_curves(&inst, 1.0, n).unwrap();
            assert!(b.lower > prev);
            assert!(b.lower <= b.upper.unwrap());
            prev = b.lower;
        }
    }

    #[test]
    fn zero_min_gap_has_no_upper_bound() {
        let inst =
            BanditInstance::new(RewardFamily::Gaussian { sigma: 1.0 }, vec![5.0, 4.5, 1.0, 1.0, 1.0]).unwrap();
        let b = ttts_bound_curves(&inst, 1.0, 500).unwrap();
        assert!(b.lower.is_finite());
        assert!(matches!(b.upper_bound(), Err(Error::Domain(_))));
    }
}
