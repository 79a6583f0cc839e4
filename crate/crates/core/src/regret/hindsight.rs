use super::TrajectoryTrace;
use crate::optim::FeasibleRegion;
use crate::problems::{HindsightAggregate, ProblemInstance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HindsightOptions {
    /// Stop once the projected-gradient step `|Proj(x - grad/L) - x|_inf`
    /// falls to this level.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for HindsightOptions {
    fn default() -> Self {
        HindsightOptions { tolerance: 1e-10, max_iterations: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HindsightSolution {
    pub x: Vec<f64>,
    /// `sum_{t <= T} f_t(x)`.
    pub value: f64,
    pub iterations: usize,
    /// Final projected-gradient step norm.
    pub residual: f64,
}

/// Best fixed decision over all rounds of `trace`, replaying the same
/// rounds (same batches or noise) the learner saw.
pub fn best_in_hindsight(problem: &ProblemInstance, region: &FeasibleRegion, trace: &TrajectoryTrace) -> Result<HindsightSolution> {
    if trace.horizon() == 0 {
        return Err(Error::InvalidArgument("empty trace".into()));
    }
    let agg = HindsightAggregate::with_rounds(problem, trace.seed, trace.horizon())?;
    solve_hindsight(&agg, region, &trace.final_x, &HindsightOptions::default())
}

/// Minimizes the averaged aggregate over the region by accelerated projected
/// gradient descent with fixed step `1/L` and adaptive restart.
pub fn solve_hindsight(
    agg: &HindsightAggregate<'_>,
    region: &FeasibleRegion,
    start: &[f64],
    options: &HindsightOptions,
) -> Result<HindsightSolution> {
    let lipschitz = agg.lipschitz()?;
    let step = 1.0 / lipschitz;
    let mut x = region.clip(start);
    let mut y = x.clone();
    let mut theta = 1.0f64;
    let mut residual = f64::INFINITY;
    for it in 1..=options.max_iterations {
        let (_, grad) = agg.mean_loss_grad(&y)?;
        let x_next = project_step(&y, &grad, step, region);
        let moved = max_diff(&x_next, &y);
        if !moved.is_finite() {
            return Err(Error::NumericFailure { step: it as u64, what: "hindsight iterate diverged".into() });
        }
        if moved <= options.tolerance {
            let (_, g) = agg.mean_loss_grad(&x_next)?;
            residual = max_diff(&project_step(&x_next, &g, step, region), &x_next);
            if residual <= options.tolerance {
                let value = agg.total_loss(&x_next)?;
                return Ok(HindsightSolution { x: x_next, value, iterations: it, residual });
            }
        }
        // Restart the momentum when it points against the latest step.
        let uphill: f64 = y.iter().zip(&x_next).zip(&x).map(|((yi, xn), xo)| (yi - xn) * (xn - xo)).sum();
        if uphill > 0.0 {
            theta = 1.0;
        }
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = (theta - 1.0) / theta_next;
        y = x_next.iter().zip(&x).map(|(xn, xo)| xn + beta * (xn - xo)).collect();
        y = region.clip(&y);
        x = x_next;
        theta = theta_next;
        residual = moved;
    }
    Err(Error::NoConvergence { iterations: options.max_iterations, residual, last: x })
}

fn project_step(x: &[f64], grad: &[f64], step: f64, region: &FeasibleRegion) -> Vec<f64> {
    let z: Vec<f64> = x.iter().zip(grad).map(|(xi, gi)| xi - step * gi).collect();
    region.clip(&z)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadraticProblem;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn interior_closed_form() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5]);
        let b = vec![0.4, -0.7, 0.2];
        let exact = a.clone().lu().solve(&-DVector::from_column_slice(&b)).unwrap();
        let p = ProblemInstance::Quadratic(QuadraticProblem::new(a, b, 0.0).unwrap());
        let agg = HindsightAggregate::with_rounds(&p, 0, 5).unwrap();
        let region = FeasibleRegion::uniform(3, -10.0, 10.0).unwrap();
        let sol = solve_hindsight(&agg, &region, &[0.0; 3], &HindsightOptions::default()).unwrap();
        for (a, b) in sol.x.iter().zip(exact.iter()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn boundary_in_one_dimension() {
        let p = ProblemInstance::Quadratic(QuadraticProblem::new(DMatrix::from_element(1, 1, 2.0), vec![-8.0], 0.0).unwrap());
        let agg = HindsightAggregate::with_rounds(&p, 0, 3).unwrap();
        let region = FeasibleRegion::uniform(1, -1.0, 1.0).unwrap();
        let sol = solve_hindsight(&agg, &region, &[0.0], &HindsightOptions::default()).unwrap();
        assert_eq!(sol.x, vec![1.0]);
        assert!((sol.value - 3.0 * (1.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let p = ProblemInstance::Quadratic(
            QuadraticProblem::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-4]), vec![1.0, 1.0], 0.0).unwrap(),
        );
        let agg = HindsightAggregate::with_rounds(&p, 0, 1).unwrap();
        let region = FeasibleRegion::uniform(2, -1e6, 1e6).unwrap();
        let opts = HindsightOptions { tolerance: 1e-14, max_iterations: 3 };
        assert!(matches!(
            solve_hindsight(&agg, &region, &[0.0, 0.0], &opts),
            Err(Error::NoConvergence { iterations: 3, .. })
        ));
    }
}
