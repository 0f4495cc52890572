use crate::error::{Error, Result};

/// Gaussian radial basis features on a regular `n_grid x n_grid` grid over a
/// 2-d box, `phi_ij(s) = exp(-|s - u_ij|^2 / width)`.
///
/// With `grid_normalized` set, the kernel width is `sigma_sq / n_grid`,
/// otherwise it is `sigma_sq` itself.
#[derive(Clone, Debug, PartialEq)]
pub struct RbfSpec {
    pub n_grid: usize,
    pub sigma_sq: f64,
    /// `[[lo_0, hi_0], [lo_1, hi_1]]`
    pub bounds: [[f64; 2]; 2],
    pub grid_normalized: bool,
    centers: Vec<[f64; 2]>,
}

impl RbfSpec {
    pub fn new(
        n_grid: usize,
        sigma_sq: f64,
        bounds: [[f64; 2]; 2],
        grid_normalized: bool,
    ) -> Result<Self> {
        if n_grid == 0 {
            return Err(Error::config(
                "RBF grid needs at least one point per dimension",
            ));
        }
        if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
            return Err(Error::config(format!(
                "RBF sigma^2 must be positive, got {sigma_sq}"
            )));
        }
        if bounds
            .iter()
            .any(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo <= hi))
        {
            return Err(Error::config(format!(
                "invalid RBF state bounds {bounds:?}"
            )));
        }
        let axis = |d: usize| -> Vec<f64> {
            let [lo, hi] = bounds[d];
            if n_grid == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..n_grid)
                    .map(|k| lo + (hi - lo) * k as f64 / (n_grid - 1) as f64)
                    .collect()
            }
        };
        let (xs, ys) = (axis(0), axis(1));
        let centers = xs
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| [x, y]))
            .collect();
        Ok(RbfSpec {
            n_grid,
            sigma_sq,
            bounds,
            grid_normalized,
            centers,
        })
    }

    pub fn num_features(&self) -> usize {
        self.n_grid * self.n_grid
    }

    /// Grid centers, row-major in the first state dimension.
    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn effective_width(&self) -> f64 {
        if self.grid_normalized {
            self.sigma_sq / self.n_grid as f64
        } else {
            self.sigma_sq
        }
    }

    pub fn features(&self, s: &[f64]) -> Vec<f64> {
        let width = self.effective_width();
        self.centers
            .iter()
            .map(|u| {
                let d0 = s[0] - u[0];
                let d1 = s[1] - u[1];
                (-(d0 * d0 + d1 * d1) / width).exp()
            })
            .collect()
    }
}
