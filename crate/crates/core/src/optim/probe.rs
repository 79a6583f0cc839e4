use super::{HyperParams, OptimizerKind};
use crate::{Error, Result};

/// The step `Delta_t` an optimizer would take from the frozen momenta
/// `(m, s)` at step `t`, before projection.
///
/// | kind          | `Delta_t`                         |
/// |---------------|-----------------------------------|
/// | SGD           | `-alpha_t m`                      |
/// | Adam          | `-alpha_t m / (sqrt(v) + eps)`    |
/// | SAdam         | `-alpha_t m / sqrt(v + delta/t)`  |
/// | AdaBelief     | `-alpha_t m / (sqrt(s) + eps)`    |
/// | FastAdaBelief | `-alpha_t m / sqrt(s + delta/t)`  |
///
/// `alpha_t` comes from `hp`'s schedule, so two kinds probed with the same
/// `hp` share it. Yogi and AdaBound have no entry in the comparison and are
/// rejected.
pub fn stepsize_probe(kind: OptimizerKind, m: &[f64], s: &[f64], t: u64, hp: &HyperParams) -> Result<Vec<f64>> {
    Error::check_len(m.len(), s.len())?;
    if t == 0 {
        return Err(Error::InvalidArgument("probe step must be at least 1".into()));
    }
    if let Some(i) = s.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("s[{i}] = {} is negative", s[i])));
    }
    let rate = hp.step_size(t);
    let vanishing = hp.delta / t as f64;
    let divisor: Box<dyn Fn(f64) -> f64> = match kind {
        OptimizerKind::SgdMomentum => Box::new(|_| 1.0),
        OptimizerKind::Adam | OptimizerKind::AdaBelief => Box::new(|s: f64| s.sqrt() + hp.epsilon),
        OptimizerKind::SAdam | OptimizerKind::FastAdaBelief => Box::new(move |s: f64| (s + vanishing).sqrt()),
        OptimizerKind::Yogi | OptimizerKind::AdaBound => {
            return Err(Error::Unsupported(format!("stepsize probe for {kind}")));
        }
    };
    m.iter()
        .zip(s)
        .map(|(&mi, &si)| {
            if mi == 0.0 {
                return Ok(0.0);
            }
            let d = divisor(si);
            let step = -rate * mi / d;
            if step.is_finite() {
                Ok(step)
            } else {
                Err(Error::NumericFailure {
                    step: t,
                    what: format!("{kind} probe divisor is {d}"),
                })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::StepSchedule;
    use approx::assert_relative_eq;

    fn shared(delta: f64) -> HyperParams {
        HyperParams {
            alpha: 0.01,
            delta,
            epsilon: 0.0,
            schedule: StepSchedule::InverseT,
            ..HyperParams::defaults_for(OptimizerKind::FastAdaBelief)
        }
    }

    #[test]
    fn ratio_at_large_t() {
        let hp = shared(0.1);
        let fab = stepsize_probe(OptimizerKind::FastAdaBelief, &[0.3], &[0.01], 10_000, &hp).unwrap();
        let ab = stepsize_probe(OptimizerKind::AdaBelief, &[0.3], &[0.01], 10_000, &hp).unwrap();
        let ratio = fab[0].abs() / ab[0].abs();
        assert_relative_eq!(ratio, (0.01f64 / (0.01 + 1e-5)).sqrt(), max_relative = 1e-14);
        assert!((ratio - 0.9995).abs() < 1e-4);
    }

    #[test]
    fn zero_delta_matches_adabelief() {
        let hp = shared(0.0);
        let m = [0.5, -0.25, 1e-3];
        let s = [0.04, 1.0, 1e-6];
        let fab = stepsize_probe(OptimizerKind::FastAdaBelief, &m, &s, 7, &hp).unwrap();
        let ab = stepsize_probe(OptimizerKind::AdaBelief, &m, &s, 7, &hp).unwrap();
        assert_eq!(fab, ab);
    }

    #[test]
    fn formulas() {
        let hp = HyperParams { epsilon: 1e-8, ..shared(0.1) };
        let (m, s, t) = ([0.2], [0.09], 4u64);
        let rate = 0.01 / 4.0;
        let probe = |k| stepsize_probe(k, &m, &s, t, &hp).unwrap()[0];
        assert_relative_eq!(probe(OptimizerKind::SgdMomentum), -rate * 0.2);
        assert_relative_eq!(probe(OptimizerKind::Adam), -rate * 0.2 / (0.3 + 1e-8));
        assert_relative_eq!(probe(OptimizerKind::SAdam), -rate * 0.2 / (0.09f64 + 0.025).sqrt());
        assert_eq!(probe(OptimizerKind::Adam), probe(OptimizerKind::AdaBelief));
        assert_eq!(probe(OptimizerKind::SAdam), probe(OptimizerKind::FastAdaBelief));
    }

    #[test]
    fn rejects_unprobed_kinds_and_bad_input() {
        let hp = shared(0.1);
        for kind in [OptimizerKind::Yogi, OptimizerKind::AdaBound] {
            assert!(matches!(stepsize_probe(kind, &[1.0], &[1.0], 1, &hp), Err(Error::Unsupported(_))));
        }
        assert!(stepsize_probe(OptimizerKind::Adam, &[1.0], &[-1.0], 1, &hp).is_err());
        assert!(stepsize_probe(OptimizerKind::Adam, &[1.0], &[1.0], 0, &hp).is_err());
        assert!(stepsize_probe(OptimizerKind::Adam, &[1.0, 2.0], &[1.0], 1, &hp).is_err());
        // zero divisor with a nonzero momentum
        assert!(matches!(
            stepsize_probe(OptimizerKind::FastAdaBelief, &[1.0], &[0.0], 1, &shared(0.0)),
            Err(Error::NumericFailure { .. })
        ));
        assert_eq!(stepsize_probe(OptimizerKind::FastAdaBelief, &[0.0], &[0.0], 1, &shared(0.0)).unwrap(), vec![0.0]);
    }
}
