use super::{FeasibleRegion, HyperParams, OptimizerKind};
use crate::{Error, Result};

/// Per-trajectory optimizer state.
///
/// `s` holds the belief `s_t` for AdaBelief/FastAdaBelief and the raw second
/// moment `v_t` for the Adam family; `s_hat` is the running elementwise
/// maximum of `s`. SGD leaves both at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub t: u64,
    pub m: Vec<f64>,
    pub s: Vec<f64>,
    pub s_hat: Vec<f64>,
    pub x: Vec<f64>,
}

impl OptimizerState {
    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Result of a single step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// `x_{t+1}`, always inside the region.
    pub x_next: Vec<f64>,
    /// The pre-projection step `Delta_t`.
    pub delta_applied: Vec<f64>,
    /// Elementwise multiplier applied to the momentum, e.g. `alpha_t / S_hat_t`.
    pub stepsize_scale: Vec<f64>,
}

pub fn init_state(kind: OptimizerKind, x0: &[f64], region: &FeasibleRegion) -> Result<OptimizerState> {
    region.check_inside(x0)?;
    let n = x0.len();
    Ok(OptimizerState {
        kind,
        t: 0,
        m: vec![0.0; n],
        s: vec![0.0; n],
        s_hat: vec![0.0; n],
        x: x0.to_vec(),
    })
}

/// Dispatches on `state.kind`.
pub fn step(
    state: &OptimizerState,
    g: &[f64],
    hp: &HyperParams,
    region: &FeasibleRegion,
) -> Result<(OptimizerState, StepOutcome)> {
    match state.kind {
        OptimizerKind::SgdMomentum => sgd_momentum_step(state, g, hp, region),
        OptimizerKind::Adam => adam_step(state, g, hp, region),
        OptimizerKind::Yogi => yogi_step(state, g, hp, region),
        OptimizerKind::AdaBound => adabound_step(state, g, hp, region),
        OptimizerKind::AdaBelief => adabelief_step(state, g, hp, region),
        OptimizerKind::SAdam => sadam_step(state, g, hp, region),
        OptimizerKind::FastAdaBelief => fastadabelief_step(state, g, hp, region),
    }
}

/// Shared preconditions; returns the new step counter `t + 1`.
fn begin(
    state: &OptimizerState,
    kernel: OptimizerKind,
    g: &[f64],
    hp: &HyperParams,
    region: &FeasibleRegion,
) -> Result<u64> {
    if state.kind != kernel {
        return Err(Error::KindMismatch { state: state.kind, kernel });
    }
    let n = state.dim();
    Error::check_len(n, g.len())?;
    Error::check_len(n, region.dim())?;
    for v in [&state.m, &state.s, &state.s_hat] {
        Error::check_len(n, v.len())?;
    }
    hp.validate(kernel)?;
    let t = state.t + 1;
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NumericFailure {
            step: t,
            what: format!("gradient coordinate {i} is {}", g[i]),
        });
    }
    Ok(t)
}

/// Momentum update divided by a positive scale; a zero momentum gives a zero
/// step even if the divisor vanished.
fn scaled_step(scale: f64, m: f64) -> f64 {
    if m == 0.0 {
        0.0
    } else {
        -scale * m
    }
}

/// Assembles the successor state after checking every entry is finite.
fn finish(
    state: &OptimizerState,
    t: u64,
    m: Vec<f64>,
    s: Vec<f64>,
    s_hat: Vec<f64>,
    delta: Vec<f64>,
    scale: Vec<f64>,
    region: &FeasibleRegion,
) -> Result<(OptimizerState, StepOutcome)> {
    let z: Vec<f64> = state.x.iter().zip(&delta).map(|(x, d)| x + d).collect();
    for (name, v) in [("m", &m), ("s", &s), ("s_hat", &s_hat), ("x", &z)] {
        if let Some(i) = v.iter().position(|e| !e.is_finite()) {
            return Err(Error::NumericFailure {
                step: t,
                what: format!("{name}[{i}] became {}", v[i]),
            });
        }
    }
    // The weighted projection onto a box is the coordinate clip for every
    // positive diagonal weight, so the kernels clip directly.
    let x_next = region.clip(&z);
    let next = OptimizerState {
        kind: state.kind,
        t,
        m,
        s,
        s_hat,
        x: x_next.clone(),
    };
    Ok((
        next,
        StepOutcome {
            x_next,
            delta_applied: delta,
            stepsize_scale: scale,
        },
    ))
}

/// FastAdaBelief step.
///
/// With `t' = t + 1`:
/// ```text
/// m     = beta1_t m + (1 - beta1_t) g
/// s     = beta2_t s + (1 - beta2_t) (g - m)^2
/// s_hat = max(s_hat, s)
/// S     = s_hat + delta / t'
/// x'    = Proj_{F, S}(x - (alpha / t') m / S)
/// ```
/// The diagonal enters linearly, without a square root.
pub fn fastadabelief_step(
    state: &OptimizerState,
    g: &[f64],
    hp: &HyperParams,
    region: &FeasibleRegion,
) -> Result<(OptimizerState, StepOutcome)> {
    let t = begin(state, OptimizerKind::FastAdaBelief, g, hp, region)?;
    let n = state.dim();
    let (b1, b2, rate) = (hp.beta1_at(t), hp.beta2_at(t), hp.step_size(t));
    let vanishing = hp.delta / t as f64;

    let mut m = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut s_hat = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let mi = b1 * state.m[i] + (1.0 - b1) * g[i];
        let belief = g[i] - mi;
        let si = b2 * state.s[i] + (1.0 - b2) * belief * belief;
        let shi = state.s_hat[i].max(si);
        let k = rate / (shi + vanishing);
        m.push(mi);
        s.push(si);
        s_hat.push(shi);
        delta.push(scaled_step(k, mi));
        scale.push(k);
    }
    finish(state, t, m, s, s_hat, delta, scale, region)
}

/// AdaBelief step: belief second moment with an AMSGrad-style maximum,
/// divisor `sqrt(s_hat) + epsilon` and no vanishing factor.
pub fn adabelief_step(
    state: &OptimizerState,
    g: &[f64],
    hp: &HyperParams,
    region: &FeasibleRegion,
) -> Result<(OptimizerState, StepOutcome)> {
    let t = begin(state, OptimizerKind::AdaBelief, g, hp, region)?;
    let n = state.dim();
    let (b1, b2, rate) = (hp.beta1, hp.beta2_at(t), hp.step_size(t));

    let mut m = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut s_hat = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let mi = b1 * state.m[i] + (1.0 - b1) * g[i];
        let belief = g[i] - mi;
        let si = b2 * state.s[i] + (1.0 - b2) * belief * belief;
        let shi = state.s_hat[i].max(si);
        let k = rate / (shi.sqrt() + hp.epsilon);
        m.push(mi);
        s.push(si);
        s_hat.push(shi);
        delta.push(scaled_step(k, mi));
        scale.push(k);
    }
    finish(state, t, m, s, s_hat, delta, scale, region)
}

/// SAdam step: raw second moment `v` with divisor `v + delta / t`
/// (linear, strongly convex weighting).
pub fn sadam_step(
    state: &OptimizerState,
    g: &[f64],
    hp: &HyperParams,
    region: &FeasibleRegion,
) -> Result<(OptimizerState, StepOutcome)> {
    let t = begin(state, OptimizerKind::SAdam, g, hp, region)?;
    let n = state.dim();
    let (b1, b2, rate) = (hp.beta1, hp.beta2_at(t), hp.step_size(t));
    let vanishing = hp.delta / t as f64;

    let mut m = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut v_max = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let mi = b1 * state.m[i] + (1.0 - b1) * g[i];
        let vi = b2 * state.s[i] + (1.0 - b2) * g[i] * g[i];
        let k = rate / (vi + vanishing);
        m.push(mi);
        v.push(vi);
        v_max.push(state.s_hat[i].max(vi));
        delta.push(scaled_step(k, mi));
        scale.push(k);
    }
    finish(state, t, m, v, v_max, delta, scale, region)
}

/// Adam step without bias correction: divisor `sqrt(v) + epsilon`.
pub fn adam_step(
    state: &OptimizerState,
    g: &[f64],
    hp: &HyperParams,
    region: &FeasibleRegion,
) -> Result<(OptimizerState, StepOutcome)> {
    let t = begin(state, OptimizerKind::Adam, g, hp, region)?;
    let b2 = hp.beta2_at(t);
    adam_shaped(state, t, g, hp, region, |v, gi| b2 * v + (1.0 - b2) * gi * gi, |_, k| k)
}

/// Yogi step: additive second-moment update
/// `v' = v - (1 - beta2) sign(v - g^2) g^2`, otherwise Adam-shaped.
pub fn yogi_step(
    state: &OptimizerState,
    g: &[f64],
    hp: &HyperParams,
    region: &FeasibleRegion,
) -> Result<(OptimizerState, StepOutcome)> {
    let t = begin(state, OptimizerKind::Yogi, g, hp, region)?;
    let b2 = hp.beta2_at(t);
    let update = |v: f64, gi: f64| {
        let g2 = gi * gi;
        v - (1.0 - b2) * sign(v - g2) * g2
    };
    adam_shaped(state, t, g, hp, region, update, |_, k| k)
}

/// AdaBound step: the Adam rate `alpha_t / (sqrt(v) + epsilon)` is clipped
/// into `[eta_final (1 - 1/(gamma t + 1)), eta_final (1 + 1/(gamma t))]`.
pub fn adabound_step(
    state: &OptimizerState,
    g: &[f64],
    hp: &HyperParams,
    region: &FeasibleRegion,
) -> Result<(OptimizerState, StepOutcome)> {
    let t = begin(state, OptimizerKind::AdaBound, g, hp, region)?;
    let b2 = hp.beta2_at(t);
    let (lower, upper) = adabound_bounds(hp, t);
    adam_shaped(
        state,
        t,
        g,
        hp,
        region,
        |v, gi| b2 * v + (1.0 - b2) * gi * gi,
        |_, k| k.clamp(lower, upper),
    )
}

/// AdaBound's per-coordinate rate interval at step `t`.
pub(crate) fn adabound_bounds(hp: &HyperParams, t: u64) -> (f64, f64) {
    let gt = hp.bound_gamma * t as f64;
    (
        hp.bound_final_lr * (1.0 - 1.0 / (gt + 1.0)),
        hp.bound_final_lr * (1.0 + 1.0 / gt),
    )
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn adam_shaped(
    state: &OptimizerState,
    t: u64,
    g: &[f64],
    hp: &HyperParams,
    region: &FeasibleRegion,
    second_moment: impl Fn(f64, f64) -> f64,
    adjust_rate: impl Fn(usize, f64) -> f64,
) -> Result<(OptimizerState, StepOutcome)> {
    let n = state.dim();
    let (b1, rate) = (hp.beta1, hp.step_size(t));
    let mut m = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut v_max = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let mi = b1 * state.m[i] + (1.0 - b1) * g[i];
        let vi = second_moment(state.s[i], g[i]);
        let k = adjust_rate(i, rate / (vi.sqrt() + hp.epsilon));
        m.push(mi);
        v.push(vi);
        v_max.push(state.s_hat[i].max(vi));
        delta.push(scaled_step(k, mi));
        scale.push(k);
    }
    finish(state, t, m, v, v_max, delta, scale, region)
}

/// Heavy-ball SGD: `m' = beta1 m + g`, `x' = Proj(x - alpha_t m')`.
pub fn sgd_momentum_step(
    state: &OptimizerState,
    g: &[f64],
    hp: &HyperParams,
    region: &FeasibleRegion,
) -> Result<(OptimizerState, StepOutcome)> {
    let t = begin(state, OptimizerKind::SgdMomentum, g, hp, region)?;
    let rate = hp.step_size(t);
    let m: Vec<f64> = state.m.iter().zip(g).map(|(m, g)| hp.beta1 * m + g).collect();
    let delta = m.iter().map(|&mi| scaled_step(rate, mi)).collect();
    let scale = vec![rate; m.len()];
    finish(state, t, m, state.s.clone(), state.s_hat.clone(), delta, scale, region)
}
