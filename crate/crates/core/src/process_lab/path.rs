use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{LabError, Result};
use crate::linalg::cholesky;
use crate::seed::{rng_from_seed, LabRng};

/// A scalar process realization on a finite grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
    pub process: String,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(LabError::InvalidArgument("empty path grid".into()));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(LabError::InvalidArgument(format!(
            "path grid must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

impl PathSample {
    pub fn new(
        grid: Vec<f64>,
        values: Vec<f64>,
        seed: u64,
        process: impl Into<String>,
    ) -> Result<Self> {
        check_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(LabError::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            seed,
            process: process.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Value at grid point `s`, if `s` is on the grid.
    pub fn value_at(&self, s: f64) -> Option<f64> {
        let i = self.grid.partition_point(|&g| g < s);
        (i < self.grid.len() && self.grid[i] == s).then(|| self.values[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,value\n");
        for (s, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{s},{v}\n"));
        }
        out
    }
}

/// A `p`-dimensional process realization; `values[j]` is the state at
/// `grid[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPath {
    pub grid: Vec<f64>,
    pub values: Vec<DVector<f64>>,
    pub seed: u64,
}

impl VectorPath {
    /// `a' B(t)` along the grid.
    pub fn project(&self, a: &DVector<f64>) -> Vec<f64> {
        self.values.iter().map(|v| a.dot(v)).collect()
    }
}

/// Brownian motion with covariance `min(u, v) Omega`, sampled on `grid`
/// (which must start at 0) by independent Gaussian increments.
pub fn sample_scaled_bm(grid: &[f64], omega: &DMatrix<f64>, seed: u64) -> Result<VectorPath> {
    check_grid(grid)?;
    if grid[0] != 0.0 {
        return Err(LabError::InvalidArgument(format!(
            "Brownian grid must start at 0, starts at {}",
            grid[0]
        )));
    }
    let l = cholesky(omega, "Omega")?.l();
    let mut rng = rng_from_seed(seed);
    Ok(VectorPath {
        grid: grid.to_vec(),
        values: bm_from_factor(grid, &l, &mut rng),
        seed,
    })
}

pub(crate) fn bm_from_factor(
    grid: &[f64],
    l: &DMatrix<f64>,
    rng: &mut LabRng,
) -> Vec<DVector<f64>> {
    let p = l.nrows();
    let mut state = DVector::zeros(p);
    let mut out = Vec::with_capacity(grid.len());
    out.push(state.clone());
    for w in grid.windows(2) {
        let xi = DVector::from_fn(p, |_, _| StandardNormal.sample(rng));
        state += (w[1] - w[0]).sqrt() * (l * xi);
        out.push(state.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_zero_and_is_reproducible() {
        let grid: Vec<f64> = (0..=10).map(|j| j as f64 * 0.1).collect();
        let omega = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let a = sample_scaled_bm(&grid, &omega, 9).unwrap();
        let b = sample_scaled_bm(&grid, &omega, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values[0], DVector::zeros(2));
        assert_ne!(a, sample_scaled_bm(&grid, &omega, 10).unwrap());
    }

    #[test]
    fn rejects_bad_grids() {
        let omega = DMatrix::identity(1, 1);
        assert!(sample_scaled_bm(&[0.1, 0.2], &omega, 0).is_err());
        assert!(sample_scaled_bm(&[0.0, 0.2, 0.2], &omega, 0).is_err());
        assert!(sample_scaled_bm(&[0.0, 1.0], &DMatrix::from_element(1, 1, -1.0), 0).is_err());
    }

    #[test]
    fn path_csv_and_lookup() {
        let p = PathSample::new(vec![-1.0, 0.0, 0.5], vec![2.0, 0.0, -1.5], 1, "test").unwrap();
        assert_eq!(p.to_csv(), "s,value\n-1,2\n0,0\n0.5,-1.5\n");
        assert_eq!(p.value_at(0.5), Some(-1.5));
        assert_eq!(p.value_at(0.25), None);
    }
}
