use super::hindsight::{solve_hindsight, HindsightOptions};
use super::TrajectoryTrace;
use crate::optim::FeasibleRegion;
use crate::problems::{HindsightAggregate, ProblemInstance};
use crate::{Error, Result};

/// Ordinary least-squares fit `R ~ intercept + slope * phi(T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

/// Regret of a trace against the best fixed decision of each prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub checkpoints: Vec<u64>,
    /// `R(T')` for every checkpoint.
    pub regret: Vec<f64>,
    /// `min_x sum_{t <= T'} f_t(x)` for every checkpoint.
    pub hindsight_values: Vec<f64>,
    /// `R(T') / T'`.
    pub ratio: Vec<f64>,
    /// Minimizer for the last checkpoint.
    pub hindsight_x_star: Vec<f64>,
    pub hindsight_value: f64,
    /// Present when there are at least four checkpoints.
    pub log_fit: Option<GrowthFit>,
    pub sqrt_fit: Option<GrowthFit>,
}

/// `2^7, 2^8, ...` up to `horizon`, plus `horizon` itself when it is not on
/// the grid. Horizons below 128 give the single checkpoint `horizon`.
pub fn checkpoint_grid(horizon: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = (7..64).map(|k| 1u64 << k).take_while(|&c| c <= horizon).collect();
    if grid.last() != Some(&horizon) && horizon > 0 {
        grid.push(horizon);
    }
    grid
}

/// `R(T') = sum_{t <= T'} f_t(x_t) - min_x sum_{t <= T'} f_t(x)` for each
/// checkpoint, replaying the trace's rounds for every prefix minimum.
pub fn compute_regret(
    trace: &TrajectoryTrace,
    problem: &ProblemInstance,
    region: &FeasibleRegion,
    checkpoints: &[u64],
    options: &HindsightOptions,
) -> Result<RegretReport> {
    let horizon = trace.horizon();
    if checkpoints.is_empty() {
        return Err(Error::InvalidArgument("no checkpoints".into()));
    }
    for w in checkpoints.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument("checkpoints must be strictly increasing".into()));
        }
    }
    if let Some(&c) = checkpoints.iter().find(|&&c| c == 0 || c > horizon) {
        return Err(Error::CheckpointOutOfRange { checkpoint: c, horizon });
    }
    let mut agg = HindsightAggregate::new(problem, trace.seed);
    let mut warm = trace.final_x.clone();
    let mut regret = Vec::with_capacity(checkpoints.len());
    let mut values = Vec::with_capacity(checkpoints.len());
    for &c in checkpoints {
        agg.extend_to(c)?;
        let sol = solve_hindsight(&agg, region, &warm, options)?;
        let cum = trace.cum_loss(c).expect("checkpoint within horizon");
        regret.push(cum - sol.value);
        values.push(sol.value);
        warm = sol.x;
    }
    let ratio = checkpoints.iter().zip(&regret).map(|(&c, r)| r / c as f64).collect();
    let (log_fit, sqrt_fit) = match fit_growth(checkpoints, &regret) {
        Ok((l, s)) => (Some(l), Some(s)),
        Err(_) => (None, None),
    };
    Ok(RegretReport {
        checkpoints: checkpoints.to_vec(),
        regret,
        hindsight_value: *values.last().expect("nonempty"),
        hindsight_values: values,
        ratio,
        hindsight_x_star: warm,
        log_fit,
        sqrt_fit,
    })
}

/// Least-squares fits of `R` against `(1, ln T)` and against `(1, sqrt T)`.
pub fn fit_growth(checkpoints: &[u64], regret: &[f64]) -> Result<(GrowthFit, GrowthFit)> {
    Error::check_len(checkpoints.len(), regret.len())?;
    if checkpoints.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "growth fit needs at least 4 checkpoints, got {}",
            checkpoints.len()
        )));
    }
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("checkpoints must be strictly increasing".into()));
    }
    let log: Vec<f64> = checkpoints.iter().map(|&c| (c as f64).ln()).collect();
    let sqrt: Vec<f64> = checkpoints.iter().map(|&c| (c as f64).sqrt()).collect();
    Ok((ols(&log, regret)?, ols(&sqrt, regret)?))
}

fn ols(x: &[f64], y: &[f64]) -> Result<GrowthFit> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("degenerate design matrix".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(GrowthFit { intercept, slope, r_squared })
}
