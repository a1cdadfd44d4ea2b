//! Stopping thresholds c_{n,δ}.
//!
//! Two thresholds are available: the exponential-family threshold built on
//! the calibration function `C_exp` (via `h(u) = u − log u` and the piecewise
//! `h̃_z`), and the tighter Gaussian threshold built on `g(x) = x + log x`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// ζ(2) = π²/6.
pub const ZETA_2: f64 = PI * PI / 6.0;

const NEWTON_TOLERANCE: f64 = 1e-12;

/// h(u) = u − log u, for u ≥ 1.
pub fn h(u: f64) -> Result<f64> {
    if !(u >= 1.0) {
        return Err(Error::Domain(format!("h is defined on [1, ∞), got {u}")));
    }
    Ok(u - u.ln())
}

/// Inverse of `h` on the branch u ≥ 1.
///
/// Newton's method started at max(x, 1 + x/2), safeguarded by the bracket
/// [x, 2x] which always holds the root for x ≥ 1.
pub fn h_inverse(x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::Domain(format!("h_inverse is defined on [1, ∞), got {x}")));
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (x, 2.0 * x);
    let mut u = x.max(1.0 + x / 2.0);
    for _ in 0..200 {
        let f = u - u.ln() - x;
        if f > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let step = f / (1.0 - 1.0 / u);
        let mut next = u - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= NEWTON_TOLERANCE * u || hi - lo <= NEWTON_TOLERANCE * lo {
            return Ok(next);
        }
        u = next;
    }
    Ok(u)
}

/// The piecewise function
///
/// ```text
/// h̃_z(x) = e^{1/h⁻¹(x)}·h⁻¹(x)   if x ≥ h(1/log z)
///          z·(x − log log z)       otherwise
/// ```
///
/// for z ∈ [1, e]. At z = 1 the lower branch diverges and the value is +∞.
pub fn h_tilde(z: f64, x: f64) -> Result<f64> {
    if !(1.0..=std::f64::consts::E).contains(&z) {
        return Err(Error::Domain(format!("h_tilde needs z in [1, e], got {z}")));
    }
    if z == 1.0 {
        return Ok(f64::INFINITY);
    }
    let ln_z = z.ln();
    let branch = h(1.0 / ln_z)?;
    if x >= branch {
        let u = h_inverse(x)?;
        Ok((1.0 / u).exp() * u)
    } else {
        Ok(z * (x - ln_z.ln()))
    }
}

/// C_exp(x) = 2·h̃_{3/2}((h⁻¹(1 + x) + log(2ζ(2)))/2).
pub fn c_exp(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("C_exp is defined on [0, ∞), got {x}")));
    }
    let inner = (h_inverse(1.0 + x)? + (2.0 * ZETA_2).ln()) / 2.0;
    Ok(2.0 * h_tilde(1.5, inner)?)
}

/// g(x) = x + log x.
pub fn g(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("g needs a positive argument, got {x}")));
    }
    Ok(x + x.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThresholdKind {
    /// 2·C_exp(log((K−1)/δ)) + 6·log(log(n/2) + 1)
    ExponentialFamily,
    /// 4·log(4 + log n) + 2·g((log(K−1) − log δ)/2)
    Gaussian,
}

impl ThresholdKind {
    pub fn name(&self) -> &'static str {
        match self {
            ThresholdKind::ExponentialFamily => "exponential-family",
            ThresholdKind::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ThresholdKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exponential-family" | "exp-family" | "exp" | "expfam" => {
                Ok(ThresholdKind::ExponentialFamily)
            }
            "gaussian" => Ok(ThresholdKind::Gaussian),
            other => Err(Error::InvalidParameter(format!("unknown threshold kind `{other}`"))),
        }
    }
}

/// A threshold c_{n,δ} for a fixed kind, confidence and number of arms.
/// The n-independent part is computed once at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    kind: ThresholdKind,
    delta: f64,
    num_arms: usize,
    constant: f64,
}

impl ThresholdSpec {
    pub fn new(kind: ThresholdKind, delta: f64, num_arms: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0,1), got {delta}")));
        }
        if num_arms < 2 {
            return Err(Error::Domain(format!("need at least 2 arms, got {num_arms}")));
        }
        let log_ratio = ((num_arms - 1) as f64).ln() - delta.ln();
        if !(log_ratio > 0.0) {
            return Err(Error::Domain(format!(
                "log((K-1)/delta) must be positive, got {log_ratio}"
            )));
        }
        let constant = match kind {
            ThresholdKind::ExponentialFamily => 2.0 * c_exp(log_ratio)?,
            ThresholdKind::Gaussian => 2.0 * g(log_ratio / 2.0)?,
        };
        Ok(Self { kind, delta, num_arms, constant })
    }

    pub fn kind(&self) -> ThresholdKind {
        self.kind
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    /// c_{n,δ} after `n ≥ 1` rounds.
    pub fn value(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("threshold needs n >= 1".into()));
        }
        Ok(self.value_unchecked(n))
    }

    pub(crate) fn value_unchecked(&self, n: u64) -> f64 {
        let n = n as f64;
        match self.kind {
            // log(n/2) is floored at 0, so the term vanishes for n ≤ 2
            ThresholdKind::ExponentialFamily => {
                self.constant + 6.0 * ((n / 2.0).ln().max(0.0) + 1.0).ln()
            }
            ThresholdKind::Gaussian => self.constant + 4.0 * (4.0 + n.ln()).ln(),
        }
    }
}
