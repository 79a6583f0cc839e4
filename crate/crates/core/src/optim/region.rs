use crate::{Error, Result};

/// Axis-aligned box `{x : lo <= x <= hi}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl FeasibleRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::InvalidRegion("region must have at least one coordinate".into()));
        }
        Error::check_len(lo.len(), hi.len())?;
        for (i, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !l.is_finite() || !h.is_finite() {
                return Err(Error::InvalidRegion(format!("bounds of coordinate {i} are not finite")));
            }
            if l > h {
                return Err(Error::InvalidRegion(format!("lo[{i}] = {l} exceeds hi[{i}] = {h}")));
            }
        }
        let region = FeasibleRegion { lo, hi };
        if region.d_inf() <= 0.0 {
            return Err(Error::InvalidRegion("region has zero diameter".into()));
        }
        Ok(region)
    }

    /// The box `[lo, hi]^n`.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// l-infinity diameter `max_i (hi_i - lo_i)`.
    pub fn d_inf(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| h - l)
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// Checks that `x` has the region's dimension and lies inside it.
    pub fn check_inside(&self, x: &[f64]) -> Result<()> {
        Error::check_len(self.dim(), x.len())?;
        for (index, (&value, (&lo, &hi))) in x.iter().zip(self.lo.iter().zip(&self.hi)).enumerate() {
            if !(lo <= value && value <= hi) {
                return Err(Error::OutsideRegion { index, value, lo, hi });
            }
        }
        Ok(())
    }

    /// Coordinate-wise clipping of `z` into the box.
    pub fn clip(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&l, &h))| v.max(l).min(h))
            .collect()
    }
}

/// `argmin_{y in region} sum_i w_i (y_i - z_i)^2` for a strictly positive
/// diagonal weight `w`.
///
/// The objective separates across coordinates and each term is minimized over
/// an interval, so the minimizer is the coordinate-wise clip of `z` whatever
/// the (positive) weights are.
pub fn project_weighted(z: &[f64], region: &FeasibleRegion, w: &[f64]) -> Result<Vec<f64>> {
    Error::check_len(region.dim(), z.len())?;
    Error::check_len(region.dim(), w.len())?;
    if let Some((index, &value)) = w.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveWeight { index, value });
    }
    Ok(region.clip(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interior_point_is_fixed() {
        let r = FeasibleRegion::uniform(2, -1.0, 1.0).unwrap();
        let z = [0.3, -0.7];
        assert_eq!(project_weighted(&z, &r, &[1.0, 5.0]).unwrap(), z.to_vec());
    }

    #[test]
    fn exterior_point_is_clipped() {
        let r = FeasibleRegion::uniform(2, -1.0, 1.0).unwrap();
        for w in [[1.0, 1.0], [1e-6, 3.0], [42.0, 0.5]] {
            assert_eq!(project_weighted(&[2.0, -3.0], &r, &w).unwrap(), vec![1.0, -1.0]);
        }
    }

    #[test]
    fn rejects_bad_weights_and_dims() {
        let r = FeasibleRegion::uniform(2, -1.0, 1.0).unwrap();
        assert!(matches!(
            project_weighted(&[0.0, 0.0], &r, &[1.0, 0.0]),
            Err(Error::NonPositiveWeight { index: 1, .. })
        ));
        assert!(matches!(
            project_weighted(&[0.0, 0.0], &r, &[1.0, f64::NAN]),
            Err(Error::NonPositiveWeight { index: 1, .. })
        ));
        assert!(matches!(
            project_weighted(&[0.0], &r, &[1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn region_validation() {
        assert!(FeasibleRegion::new(vec![], vec![]).is_err());
        assert!(FeasibleRegion::new(vec![1.0], vec![0.0]).is_err());
        assert!(FeasibleRegion::new(vec![0.0], vec![f64::INFINITY]).is_err());
        assert!(FeasibleRegion::new(vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
        let r = FeasibleRegion::new(vec![0.0, -2.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(r.d_inf(), 5.0);
    }

    /// Minimizes the weighted objective over a grid of step `h` covering the box.
    fn grid_argmin(z: &[f64; 2], lo: &[f64; 2], hi: &[f64; 2], w: &[f64; 2], h: f64) -> [f64; 2] {
        let steps = |i: usize| ((hi[i] - lo[i]) / h).round() as usize;
        let mut best = (f64::INFINITY, [0.0; 2]);
        for a in 0..=steps(0) {
            let y0 = (lo[0] + a as f64 * h).min(hi[0]);
            for b in 0..=steps(1) {
                let y1 = (lo[1] + b as f64 * h).min(hi[1]);
                let v = w[0] * (y0 - z[0]).powi(2) + w[1] * (y1 - z[1]).powi(2);
                if v < best.0 {
                    best = (v, [y0, y1]);
                }
            }
        }
        best.1
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn matches_grid_search(
            z0 in -3.0f64..3.0, z1 in -3.0f64..3.0,
            l0 in -1.5f64..0.0, l1 in -1.5f64..0.0,
            w0 in 0.01f64..10.0, w1 in 0.01f64..10.0,
        ) {
            let (lo, hi) = ([l0, l1], [l0 + 1.0, l1 + 1.0]);
            let r = FeasibleRegion::new(lo.to_vec(), hi.to_vec()).unwrap();
            let y = project_weighted(&[z0, z1], &r, &[w0, w1]).unwrap();
            let g = grid_argmin(&[z0, z1], &lo, &hi, &[w0, w1], 1e-3);
            prop_assert!((y[0] - g[0]).abs() <= 1e-3);
            prop_assert!((y[1] - g[1]).abs() <= 1e-3);
        }

        #[test]
        fn weighted_nonexpansive(
            z1 in proptest::collection::vec(-10.0f64..10.0, 4),
            z2 in proptest::collection::vec(-10.0f64..10.0, 4),
            w in proptest::collection::vec(1e-3f64..1e3, 4),
        ) {
            let r = FeasibleRegion::uniform(4, -1.0, 2.0).unwrap();
            let p1 = project_weighted(&z1, &r, &w).unwrap();
            let p2 = project_weighted(&z2, &r, &w).unwrap();
            let norm = |a: &[f64], b: &[f64]| -> f64 {
                a.iter().zip(b).zip(&w).map(|((x, y), wi)| wi * (x - y).powi(2)).sum::<f64>().sqrt()
            };
            prop_assert!(norm(&p1, &p2) <= norm(&z1, &z2) + 1e-12);
        }
    }
}
