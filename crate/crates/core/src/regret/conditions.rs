use super::online::zeta_ratio;
use super::TrajectoryTrace;
use crate::optim::HyperParams;
use crate::{Error, Result};

const BAND_SLACK: f64 = 1e-12;

/// Per-round extremes of `(t/alpha) sqrt(s_t) - ((t-1)/alpha) sqrt(s_{t-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition4Report {
    /// `sigma (1 - beta1)`.
    pub upper: f64,
    /// `(t, min_i, max_i)` for every round.
    pub steps: Vec<(u64, f64, f64)>,
    /// First round leaving `[0, upper + 1e-12]`, if any.
    pub first_violation: Option<u64>,
}

impl Condition4Report {
    pub fn pass(&self) -> bool {
        self.first_violation.is_none()
    }

    pub fn min(&self) -> f64 {
        self.steps.iter().map(|s| s.1).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.steps.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Smallest `zeta` for which the accumulated-gradient condition holds at
/// each round.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition3Report {
    pub zeta: Vec<f64>,
}

impl Condition3Report {
    /// The condition holds up to `T` with this `zeta`.
    pub fn zeta_max(&self) -> f64 {
        self.zeta.iter().copied().fold(0.0, f64::max)
    }

    pub fn pass(&self) -> bool {
        self.zeta_max().is_finite()
    }
}

/// All three checks of one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub cond4: Condition4Report,
    pub cond3: Condition3Report,
    pub gamma_min: f64,
}

impl ConditionReport {
    pub fn evaluate(trace: &TrajectoryTrace, hp: &HyperParams, sigma: f64) -> Result<Self> {
        Ok(ConditionReport {
            cond4: check_condition4(trace, hp, sigma)?,
            cond3: check_condition3(trace, hp)?,
            gamma_min: check_gamma_psd(trace, hp)?,
        })
    }

    pub fn gamma_pass(&self) -> bool {
        self.gamma_min >= 0.0
    }

    pub fn pass(&self) -> bool {
        self.cond4.pass() && self.cond3.pass() && self.gamma_pass()
    }
}

fn require_dense(trace: &TrajectoryTrace, series: &'static str) -> Result<()> {
    if trace.is_dense() && trace.horizon() > 0 {
        Ok(())
    } else {
        Err(Error::MissingSeries(series))
    }
}

/// Checks `0 <= (t/alpha) sqrt(s_{t,i}) - ((t-1)/alpha) sqrt(s_{t-1,i}) <= sigma (1 - beta1)`
/// for every round and coordinate, with `1e-12` slack on the upper end.
pub fn check_condition4(trace: &TrajectoryTrace, hp: &HyperParams, sigma: f64) -> Result<Condition4Report> {
    require_dense(trace, "s")?;
    let upper = sigma * (1.0 - hp.beta1);
    let n = trace.x0.len();
    let mut prev = vec![0.0; n];
    let mut steps = Vec::with_capacity(trace.snapshots.len());
    let mut first_violation = None;
    for snap in &trace.snapshots {
        let t = snap.t as f64;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (p, s) in prev.iter_mut().zip(&snap.s) {
            let sq = s.sqrt();
            let v = (t / hp.alpha) * sq - ((t - 1.0) / hp.alpha) * *p;
            lo = lo.min(v);
            hi = hi.max(v);
            *p = sq;
        }
        if first_violation.is_none() && !(lo >= 0.0 && hi <= upper + BAND_SLACK) {
            first_violation = Some(snap.t);
        }
        steps.push((snap.t, lo, hi));
    }
    Ok(Condition4Report { upper, steps, first_violation })
}

/// `zeta*(t) = max_i sqrt(sum_{j<=t} g_{j,i}^2) / ((t/alpha) sqrt(W_{t,i}))`
/// where `W_{t,i} = beta2_t W_{t-1,i} + (1 - beta2_t) g_{t,i}^2` carries the
/// discounted sum forward in `O(n)` per round.
pub fn check_condition3(trace: &TrajectoryTrace, hp: &HyperParams) -> Result<Condition3Report> {
    require_dense(trace, "g")?;
    let n = trace.x0.len();
    let mut weighted = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    let zeta = trace
        .snapshots
        .iter()
        .map(|snap| {
            let b2 = hp.beta2_at(snap.t);
            let scale = snap.t as f64 / hp.alpha;
            let mut z: f64 = 0.0;
            for i in 0..n {
                let g2 = snap.g[i] * snap.g[i];
                weighted[i] = b2 * weighted[i] + (1.0 - b2) * g2;
                sum_sq[i] += g2;
                z = z.max(zeta_ratio(sum_sq[i].sqrt(), scale * weighted[i].sqrt()));
            }
            z
        })
        .collect();
    Ok(Condition3Report { zeta })
}

/// `min_{t,i} s_hat_{t,i} / alpha_t - s_hat_{t-1,i} / alpha_{t-1}`, with the
/// second term zero at `t = 1`.
pub fn check_gamma_psd(trace: &TrajectoryTrace, hp: &HyperParams) -> Result<f64> {
    require_dense(trace, "s_hat")?;
    let n = trace.x0.len();
    let mut prev = vec![0.0; n];
    let mut alpha_prev = f64::NAN;
    let mut min = f64::INFINITY;
    for snap in &trace.snapshots {
        let alpha_t = hp.step_size(snap.t);
        for (p, s) in prev.iter_mut().zip(&snap.s_hat) {
            let before = if snap.t == 1 { 0.0 } else { *p / alpha_prev };
            min = min.min(s / alpha_t - before);
            *p = *s;
        }
        alpha_prev = alpha_t;
    }
    Ok(min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{Beta2Schedule, OptimizerKind, StepSchedule};
    use crate::regret::{Snapshot, StepRecord};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn synthetic(g: &[f64], s: &[f64], s_hat: &[f64]) -> TrajectoryTrace {
        let blank = StepRecord {
            t: 0,
            loss: 0.0,
            cum_loss: 0.0,
            grad_inf_norm: 0.0,
            step_inf_norm: 0.0,
            alpha_t: 0.0,
            beta1_t: 0.0,
            beta2_t: 0.0,
            cond4_min: 0.0,
            cond4_max: 0.0,
            gamma_min: 0.0,
            cond3_zeta: 0.0,
            g_inf: 0.0,
            sum_g_norms: 0.0,
            r_max: 0.0,
        };
        let len = g.len();
        TrajectoryTrace {
            kind: OptimizerKind::FastAdaBelief,
            hp: HyperParams::defaults_for(OptimizerKind::FastAdaBelief),
            seed: 0,
            x0: vec![0.0],
            records: (1..=len as u64).map(|t| StepRecord { t, ..blank }).collect(),
            snapshots: (0..len)
                .map(|i| Snapshot {
                    t: i as u64 + 1,
                    x: vec![0.0],
                    g: vec![g[i]],
                    m: vec![0.0],
                    s: vec![s[i]],
                    s_hat: vec![s_hat[i]],
                })
                .collect(),
            final_x: vec![0.0],
        }
    }

    fn fab_hp(alpha: f64) -> HyperParams {
        HyperParams { alpha, ..HyperParams::defaults_for(OptimizerKind::FastAdaBelief) }
    }

    #[test]
    fn constant_s_telescopes() {
        let c = 0.02;
        let tr = synthetic(&[0.0; 6], &[c * c; 6], &[c * c; 6]);
        let alpha = 0.5;
        let rep = check_condition4(&tr, &fab_hp(alpha), 1.0).unwrap();
        for &(_, lo, hi) in &rep.steps {
            assert_relative_eq!(lo, c / alpha, max_relative = 1e-12);
            assert_relative_eq!(hi, c / alpha, max_relative = 1e-12);
        }
        // c / alpha = 0.04 against sigma (1 - beta1)
        assert!(rep.pass());
        assert!(!check_condition4(&tr, &fab_hp(alpha), 0.3).unwrap().pass());
    }

    #[test]
    fn zero_s_passes() {
        let tr = synthetic(&[0.0; 4], &[0.0; 4], &[0.0; 4]);
        let rep = check_condition4(&tr, &fab_hp(0.1), 0.02).unwrap();
        assert!(rep.pass());
        assert_eq!((rep.min(), rep.max()), (0.0, 0.0));
    }

    #[test]
    fn condition3_first_round() {
        let hp = fab_hp(0.01);
        let tr = synthetic(&[-2.0], &[0.0], &[0.0]);
        let z = check_condition3(&tr, &hp).unwrap().zeta[0];
        assert_relative_eq!(z, 0.01 / (1.0f64 - hp.beta2_at(1)).sqrt(), max_relative = 1e-14);
        let zero = synthetic(&[0.0; 3], &[0.0; 3], &[0.0; 3]);
        assert_eq!(check_condition3(&zero, &hp).unwrap().zeta_max(), 0.0);
    }

    #[test]
    fn condition3_three_rounds_by_hand() {
        // beta2 = 0.1, 0.55, 0.7: discounted sum 0.7*0.55*0.9 + 0.7*0.45 + 0.3
        let alpha = 0.01;
        let tr = synthetic(&[1.0; 3], &[0.0; 3], &[0.0; 3]);
        let rep = check_condition3(&tr, &fab_hp(alpha)).unwrap();
        let w3: f64 = 0.7 * 0.55 * 0.9 + 0.7 * 0.45 + 0.3;
        assert_relative_eq!(w3, 0.9615, max_relative = 1e-15);
        assert_relative_eq!(rep.zeta[2], 3f64.sqrt() / (3.0 / alpha * w3.sqrt()), max_relative = 1e-14);
    }

    #[test]
    fn gamma_examples() {
        let hp = fab_hp(0.1);
        let tr = synthetic(&[0.0; 5], &[0.3; 5], &[0.3; 5]);
        assert_relative_eq!(check_gamma_psd(&tr, &hp).unwrap(), 0.3 / 0.1, max_relative = 1e-12);
        // decreasing second moment with a constant rate
        let adam = HyperParams { schedule: StepSchedule::Constant, ..hp };
        let tr = synthetic(&[0.0; 3], &[0.5, 0.4, 0.3], &[0.5, 0.4, 0.3]);
        assert!(check_gamma_psd(&tr, &adam).unwrap() < 0.0);
    }

    #[test]
    fn thinned_trace_is_rejected() {
        let mut tr = synthetic(&[0.0; 3], &[0.0; 3], &[0.0; 3]);
        tr.snapshots.remove(1);
        let hp = fab_hp(0.1);
        assert_eq!(check_condition4(&tr, &hp, 1.0), Err(Error::MissingSeries("s")));
        assert_eq!(check_condition3(&tr, &hp), Err(Error::MissingSeries("g")));
        assert_eq!(check_gamma_psd(&tr, &hp), Err(Error::MissingSeries("s_hat")));
    }

    /// `sum_j prod_{k=1}^{t-j} beta2_{t-k+1} (1 - beta2_j) g_j^2`, recomputed
    /// from scratch for every `t`.
    fn condition3_direct(g: &[f64], hp: &HyperParams) -> Vec<f64> {
        (1..=g.len())
            .map(|t| {
                let mut lhs = 0.0;
                for j in 1..=t {
                    let mut prod = 1.0;
                    for k in 1..=(t - j) {
                        prod *= hp.beta2_at((t - k + 1) as u64);
                    }
                    lhs += prod * (1.0 - hp.beta2_at(j as u64)) * g[j - 1] * g[j - 1];
                }
                let rhs: f64 = g[..t].iter().map(|v| v * v).sum::<f64>().sqrt();
                zeta_ratio(rhs, t as f64 / hp.alpha * lhs.sqrt())
            })
            .collect()
    }

    proptest! {
        #[test]
        fn recursive_condition3_matches_direct(
            g in prop::collection::vec(-3.0f64..3.0, 1..40),
            constant in any::<bool>(),
        ) {
            let mut hp = fab_hp(0.05);
            if constant {
                hp.beta2 = Beta2Schedule::Constant(0.9);
            }
            let zeros = vec![0.0; g.len()];
            let fast = check_condition3(&synthetic(&g, &zeros, &zeros), &hp).unwrap().zeta;
            let slow = condition3_direct(&g, &hp);
            for (a, b) in fast.iter().zip(&slow) {
                if b.is_finite() {
                    prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300), "{} vs {}", a, b);
                } else {
                    prop_assert_eq!(a, b);
                }
            }
        }

        #[test]
        fn scalar_loop_condition4(mut incs in prop::collection::vec(0.0f64..0.5, 1..30)) {
            // random monotone s-series
            for i in 1..incs.len() {
                incs[i] += incs[i - 1];
            }
            let s = incs.clone();
            let tr = synthetic(&vec![0.0; s.len()], &s, &s);
            let hp = fab_hp(0.7);
            let rep = check_condition4(&tr, &hp, 0.4).unwrap();
            for (k, &(t, lo, hi)) in rep.steps.iter().enumerate() {
                let prev = if k == 0 { 0.0 } else { s[k - 1].sqrt() };
                let v = (t as f64 / 0.7) * s[k].sqrt() - ((t - 1) as f64 / 0.7) * prev;
                prop_assert_eq!(lo, v);
                prop_assert_eq!(hi, v);
            }
        }
    }
}
