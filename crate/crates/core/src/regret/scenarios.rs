use crate::optim::{stepsize_probe, HyperParams, OptimizerKind};
use crate::Result;

/// A scripted scalar gradient sequence for one curvature region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionScenario {
    /// 1: small gradient, small change; 2: large gradient, large change;
    /// 3: large gradient, small change.
    pub region: u8,
    pub description: &'static str,
    pub gradients: Vec<f64>,
}

/// The three canonical scripts, each `len` rounds long.
pub fn region_scenarios(len: usize) -> [RegionScenario; 3] {
    [
        RegionScenario {
            region: 1,
            description: "small |g|, small |dg|",
            gradients: vec![1e-3; len],
        },
        RegionScenario {
            region: 2,
            description: "large |g|, large |dg|",
            gradients: (0..len).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect(),
        },
        RegionScenario {
            region: 3,
            description: "large |g|, small |dg|",
            gradients: vec![1.0; len],
        },
    ]
}

/// Columns of the probe table: the five compared optimizers, then
/// FastAdaBelief with `delta = 0`.
pub const PROBE_COLUMNS: [&str; 6] = ["sgd_momentum", "adam", "sadam", "adabelief", "fastadabelief", "fastadabelief_delta0"];

/// `|Delta_t|` of every column for one region and step.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub region: u8,
    pub t: u64,
    /// Frozen `(m_t, v_t, s_t)` the columns are evaluated at.
    pub m: f64,
    pub v: f64,
    pub s: f64,
    /// Same order as [`PROBE_COLUMNS`].
    pub steps: [f64; 6],
}

/// Evaluates every stepsize formula at a common frozen state.
///
/// The state after `t` rounds of a script is `m_t = 0.9 m + 0.1 g`,
/// `v_t = 0.999 v + 0.001 g^2` and `s_t = 0.999 s + 0.001 (g - m_t)^2`. Each
/// optimizer uses its default rate schedule with `alpha`; the vanishing-factor
/// methods use `delta`.
pub fn probe_table(scenarios: &[RegionScenario], steps: &[u64], alpha: f64, delta: f64) -> Result<Vec<ProbeRow>> {
    let mut rows = Vec::new();
    for sc in scenarios {
        for &t in steps {
            let (mut m, mut v, mut s) = (0.0f64, 0.0f64, 0.0f64);
            for &g in sc.gradients.iter().cycle().take(t as usize) {
                m = 0.9 * m + 0.1 * g;
                v = 0.999 * v + 0.001 * g * g;
                s = 0.999 * s + 0.001 * (g - m) * (g - m);
            }
            let mut out = [0.0; 6];
            for (slot, kind) in out.iter_mut().zip(OptimizerKind::PROBED) {
                let hp = probe_params(kind, alpha, delta);
                let second = match kind {
                    OptimizerKind::Adam | OptimizerKind::SAdam => v,
                    _ => s,
                };
                *slot = stepsize_probe(kind, &[m], &[second], t, &hp)?[0].abs();
            }
            let hp = HyperParams { epsilon: 0.0, ..probe_params(OptimizerKind::FastAdaBelief, alpha, 0.0) };
            out[5] = stepsize_probe(OptimizerKind::AdaBelief, &[m], &[s], t, &hp)?[0].abs();
            rows.push(ProbeRow { region: sc.region, t, m, v, s, steps: out });
        }
    }
    Ok(rows)
}

fn probe_params(kind: OptimizerKind, alpha: f64, delta: f64) -> HyperParams {
    let hp = HyperParams::defaults_for(kind).with_alpha(alpha);
    if kind.uses_vanishing_factor() {
        HyperParams { delta, ..hp }
    } else {
        hp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn scripts() {
        let [r1, r2, r3] = region_scenarios(4);
        assert_eq!(r1.gradients, vec![1e-3; 4]);
        assert_eq!(r2.gradients, vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(r3.gradients, vec![1.0; 4]);
    }

    #[test]
    fn region3_belief_vanishes_while_v_grows() {
        let sc = region_scenarios(5000);
        let rows = probe_table(&sc[2..], &[1000, 5000], 0.01, 0.1).unwrap();
        assert!(rows[1].s < rows[0].s);
        let row = &rows[1];
        assert!(row.s < 1e-4 * row.v);
        assert_relative_eq!(row.v, 1.0 - 0.999f64.powi(5000), max_relative = 1e-9);
        // AdaBelief's belief denominator collapses, Adam's does not
        assert!(row.steps[3] > row.steps[1]);
    }

    #[test]
    fn delta0_column_is_adabelief_times_inverse_sqrt_t() {
        let sc = region_scenarios(1000);
        for row in probe_table(&sc, &[10, 100, 1000], 0.01, 0.1).unwrap() {
            let expected = 0.01 / row.t as f64 * row.m.abs() / row.s.sqrt();
            assert_relative_eq!(row.steps[5], expected, max_relative = 1e-12);
            // modulo the sqrt(t) schedule factor and epsilon
            let ab_no_eps = row.steps[3] * (row.s.sqrt() + 1e-8) / row.s.sqrt();
            assert_relative_eq!(row.steps[5] * (row.t as f64).sqrt(), ab_no_eps, max_relative = 1e-10);
        }
    }

    #[test]
    fn sgd_scales_linearly_adam_family_invariant() {
        let base = region_scenarios(200)[0].clone();
        let scaled = RegionScenario { gradients: base.gradients.iter().map(|g| g * 7.0).collect(), ..base.clone() };
        let a = probe_table(&[base], &[100], 0.01, 0.0).unwrap().remove(0);
        let b = probe_table(&[scaled], &[100], 0.01, 0.0).unwrap().remove(0);
        assert_relative_eq!(b.steps[0], 7.0 * a.steps[0], max_relative = 1e-12);
        // Adam with epsilon, SAdam with delta = 0
        assert_relative_eq!(b.steps[1], a.steps[1], max_relative = 1e-4);
        assert_relative_eq!(b.steps[2], a.steps[2], max_relative = 1e-12);
    }
}
