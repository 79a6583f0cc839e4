use super::TrajectoryTrace;
use crate::optim::{FeasibleRegion, HyperParams};
use crate::{Error, Result};

/// How the multiplier `r` was chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RRule {
    /// `max_{t,i} (s_hat_{t,i} + delta/t)^{-1/2}` measured along the trace.
    Measured,
    Supplied,
}

impl RRule {
    pub fn describe(self) -> &'static str {
        match self {
            RRule::Measured => "r = max_{t,i} (s_hat_{t,i} + delta/t)^(-1/2), measured",
            RRule::Supplied => "r supplied by the user",
        }
    }
}

/// Constants entering the closed-form regret bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    /// l-infinity diameter of the region.
    pub d_inf: f64,
    /// Largest observed `|g_{t,i}|`.
    pub g_inf: f64,
    pub r: f64,
    pub r_rule: RRule,
    /// `sum_i |g^2_{1:T,i}|_2`.
    pub sum_g_norms: f64,
    pub n: usize,
    pub horizon: u64,
    pub alpha: f64,
    pub beta1: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl BoundConstants {
    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self.r_rule = RRule::Supplied;
        self
    }
}

pub fn measure_constants(trace: &TrajectoryTrace, region: &FeasibleRegion, hp: &HyperParams) -> Result<BoundConstants> {
    measure_constants_at(trace, region, hp, trace.horizon())
}

/// Constants of the first `t` rounds.
pub fn measure_constants_at(trace: &TrajectoryTrace, region: &FeasibleRegion, hp: &HyperParams, t: u64) -> Result<BoundConstants> {
    let rec = trace
        .record(t)
        .ok_or(Error::CheckpointOutOfRange { checkpoint: t, horizon: trace.horizon() })?;
    Ok(BoundConstants {
        d_inf: region.d_inf(),
        g_inf: rec.g_inf,
        r: rec.r_max,
        r_rule: RRule::Measured,
        sum_g_norms: rec.sum_g_norms,
        n: region.dim(),
        horizon: t,
        alpha: hp.alpha,
        beta1: hp.beta1,
        lambda: hp.lambda,
        delta: hp.delta,
    })
}

/// Closed-form regret bound for `beta1_t = beta1 lambda^t`:
///
/// ```text
/// n delta D^2 / (2 alpha (1 - beta1))
///   + alpha r^2 ln T / (1 - beta1)^2 * S
///   + (2 alpha r^2 + alpha delta^2) / (2 (1 - beta1)^2) * S
///   + n beta1 lambda D^2 (G + delta) / (2 alpha (1 - beta1) (1 - lambda)^2)
/// ```
/// with `S = sum_i |g^2_{1:T,i}|_2`. The last term is dropped when
/// `beta1 = 0` and undefined when `lambda = 1` otherwise.
pub fn theoretical_bound(c: &BoundConstants) -> Result<f64> {
    if c.horizon == 0 {
        return Err(Error::UndefinedBound("horizon is zero".into()));
    }
    evaluate(c, (c.horizon as f64).ln())
}

fn evaluate(c: &BoundConstants, log_t: f64) -> Result<f64> {
    let named = [
        ("D_inf", c.d_inf),
        ("G_inf", c.g_inf),
        ("r", c.r),
        ("sum_g_norms", c.sum_g_norms),
        ("alpha", c.alpha),
        ("beta1", c.beta1),
        ("lambda", c.lambda),
        ("delta", c.delta),
    ];
    if let Some((name, v)) = named.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::UndefinedBound(format!("{name} is {v}")));
    }
    let n = c.n as f64;
    let one_b = 1.0 - c.beta1;
    let d2 = c.d_inf * c.d_inf;
    let r2 = c.r * c.r;
    let lambda_term = if c.beta1 == 0.0 {
        0.0
    } else if c.lambda >= 1.0 {
        return Err(Error::UndefinedBound(
            "the lambda term needs lambda < 1 when beta1 > 0".into(),
        ));
    } else {
        n * c.beta1 * c.lambda * d2 * (c.g_inf + c.delta) / (2.0 * c.alpha * one_b * (1.0 - c.lambda).powi(2))
    };
    Ok(n * c.delta * d2 / (2.0 * c.alpha * one_b)
        + c.alpha * r2 * log_t / (one_b * one_b) * c.sum_g_norms
        + (2.0 * c.alpha * r2 + c.alpha * c.delta * c.delta) / (2.0 * one_b * one_b) * c.sum_g_norms
        + lambda_term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base() -> BoundConstants {
        BoundConstants {
            d_inf: 2.0,
            g_inf: 0.0,
            r: 1.0,
            r_rule: RRule::Supplied,
            sum_g_norms: 1.0,
            n: 1,
            horizon: 1,
            alpha: 1.0,
            beta1: 0.0,
            lambda: 1.0,
            delta: 1.0,
        }
    }

    #[test]
    fn four_term_arithmetic() {
        // T = e
        assert_relative_eq!(evaluate(&base(), 1.0).unwrap(), 4.5, max_relative = 1e-15);
        assert_relative_eq!(theoretical_bound(&base()).unwrap(), 3.5, max_relative = 1e-15);
    }

    #[test]
    fn beta1_zero_reduces() {
        let c = BoundConstants { horizon: 100, sum_g_norms: 3.0, r: 0.5, alpha: 0.2, ..base() };
        let expected = 1.0 * 4.0 / (2.0 * 0.2) + 0.2 * 0.25 * 100f64.ln() * 3.0 + (2.0 * 0.2 * 0.25 + 0.2) / 2.0 * 3.0;
        assert_relative_eq!(theoretical_bound(&c).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn zero_gradients_leave_constant_terms() {
        let c = BoundConstants { horizon: 50, sum_g_norms: 0.0, beta1: 0.9, lambda: 0.5, n: 3, ..base() };
        let first = 3.0 * 4.0 / (2.0 * 0.1);
        let last = 3.0 * 0.9 * 0.5 * 4.0 * 1.0 / (2.0 * 0.1 * 0.25);
        assert_relative_eq!(theoretical_bound(&c).unwrap(), first + last, max_relative = 1e-14);
    }

    #[test]
    fn lambda_one_with_momentum_is_undefined() {
        let c = BoundConstants { beta1: 0.9, ..base() };
        assert!(matches!(theoretical_bound(&c), Err(Error::UndefinedBound(_))));
        let c = BoundConstants { r: f64::INFINITY, ..base() };
        assert!(matches!(theoretical_bound(&c), Err(Error::UndefinedBound(_))));
    }
}
