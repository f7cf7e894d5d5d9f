//! Gaussian linear model `y = theta'x + sigma e` with `theta` restricted to
//! `{g0 + G theta <= 0}`, drifting toward the boundary as
//! `theta_n = theta0 + drift / sqrt(n)`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::design_hash;
use crate::error::{LabError, Result};
use crate::linalg::std_normal_cdf;
use crate::process_lab::QuadraticLimit;
use crate::qp::{ConstraintSystem, QuadraticObjective, FEAS_TOL};
use crate::seed::rng_from_seed;
use crate::set_kernel::{linearized_boundary_set, Offset, PolyhedralSet};

/// Constraints with `g_j(theta0)` below this are slack in the limit.
pub const ACTIVE_TOL: f64 = 1e-9;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryDesign {
    pub n: usize,
    pub theta0: Vec<f64>,
    pub drift: Vec<f64>,
    pub g0: Vec<f64>,
    /// One row per constraint.
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    #[serde(default = "one")]
    pub sigma: f64,
}

impl BoundaryDesign {
    /// `theta >= 0`, written `-theta <= 0`, approached as `theta_n = c / sqrt(n)`.
    pub fn nonnegative_scalar(n: usize, c: f64) -> Self {
        Self {
            n,
            theta0: vec![0.0],
            drift: vec![c],
            g0: vec![0.0],
            g: vec![vec![-1.0]],
            sigma: 1.0,
        }
    }

    /// `theta1 + theta2 <= 0` with `sqrt(n) g(theta_n) = b`.
    pub fn halfplane(n: usize, b: f64) -> Self {
        Self {
            n,
            theta0: vec![0.0, 0.0],
            drift: vec![0.5 * b, 0.5 * b],
            g0: vec![0.0],
            g: vec![vec![1.0, 1.0]],
            sigma: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.theta0.len()
    }

    pub fn g_at(&self, theta: &[f64]) -> Vec<f64> {
        self.g
            .iter()
            .zip(&self.g0)
            .map(|(row, c)| c + row.iter().zip(theta).map(|(a, t)| a * t).sum::<f64>())
            .collect()
    }

    pub fn theta_n(&self) -> Vec<f64> {
        let r = (self.n as f64).sqrt();
        self.theta0
            .iter()
            .zip(&self.drift)
            .map(|(t, d)| t + d / r)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || self.drift.len() != d {
            return Err(LabError::DimensionMismatch {
                expected: d,
                got: self.drift.len(),
            });
        }
        if self.g.len() != self.g0.len() {
            return Err(LabError::DimensionMismatch {
                expected: self.g0.len(),
                got: self.g.len(),
            });
        }
        if let Some(row) = self.g.iter().find(|r| r.len() != d) {
            return Err(LabError::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        if self.n == 0 || !(self.sigma > 0.0) {
            return Err(LabError::InvalidArgument(
                "need n >= 1 and sigma > 0".into(),
            ));
        }
        for (label, theta) in [("theta0", self.theta0.clone()), ("theta_n", self.theta_n())] {
            if let Some(v) = self.g_at(&theta).into_iter().find(|&v| v > FEAS_TOL) {
                return Err(LabError::InvalidArgument(format!(
                    "{label} violates the constraints (g = {v})"
                )));
            }
        }
        Ok(())
    }

    /// `lim sqrt(n) g(theta_n)`: `G_j drift` on constraints active at
    /// `theta0`, `-inf` elsewhere.
    pub fn limit_drift(&self) -> Vec<Offset> {
        self.g_at(&self.theta0)
            .iter()
            .zip(&self.g)
            .map(|(&gj, row)| {
                if gj < -ACTIVE_TOL {
                    Offset::NegInf
                } else {
                    Offset::Finite(row.iter().zip(&self.drift).map(|(a, d)| a * d).sum())
                }
            })
            .collect()
    }

    pub fn limit_set(&self) -> Result<PolyhedralSet> {
        linearized_boundary_set(&self.limit_drift(), &self.g, self.dim())
    }

    /// `V = I`, `Z ~ N(0, sigma^2 I)` for standard normal regressors.
    pub fn limit(&self) -> Result<QuadraticLimit> {
        QuadraticLimit::isotropic(self.dim(), self.sigma * self.sigma)
    }

    /// Probability that the single finite constraint of the limit set is
    /// active: `Phi(b / sd(G_j h_free))`.
    pub fn boundary_mass_oracle(&self) -> Option<f64> {
        let drift = self.limit_drift();
        let finite: Vec<usize> = (0..drift.len())
            .filter(|&j| drift[j].finite().is_some())
            .collect();
        let &[j] = finite.as_slice() else {
            return None;
        };
        let b = drift[j].finite()?;
        let sd = self.sigma * self.g[j].iter().map(|a| a * a).sum::<f64>().sqrt();
        Some(std_normal_cdf(b / sd))
    }

    pub fn hash(&self) -> String {
        design_hash(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFit {
    pub theta_hat: Vec<f64>,
    /// `sqrt(n)(theta_hat - theta_n)`
    pub h: Vec<f64>,
    pub on_boundary: bool,
    pub g_at_hat: Vec<f64>,
    pub kkt: f64,
    /// `sup_h M_n(h)`, the localized least-squares gain `(SSR(theta_n) - SSR(theta_hat)) / 2`.
    pub value: f64,
}

/// Constrained least squares on one simulated sample, solved exactly as a
/// quadratic program in the local coordinate `h`.
pub fn fit_boundary_model(design: &BoundaryDesign, seed: u64) -> Result<BoundaryFit> {
    design.validate()?;
    let (n, d) = (design.n, design.dim());
    let theta_n = design.theta_n();
    let mut rng = rng_from_seed(seed);
    let mut xtx = DMatrix::<f64>::zeros(d, d);
    let mut xtu = DVector::<f64>::zeros(d);
    for _ in 0..n {
        let x = DVector::<f64>::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        let e: f64 = StandardNormal.sample(&mut rng);
        // y - x'theta_n
        xtx += &x * x.transpose();
        xtu += &x * (design.sigma * e);
    }
    let rn = (n as f64).sqrt();
    let v = xtx / n as f64;
    let z = xtu / rn;
    let g = DMatrix::from_fn(design.g.len(), d, |i, j| design.g[i][j]);
    let b = DVector::from_iterator(
        design.g.len(),
        design.g_at(&theta_n).into_iter().map(|v| rn * v),
    );
    let sol =
        QuadraticObjective::new(v.clone())?.maximize(&z, &ConstraintSystem::new(g, b)?, None)?;
    let theta_hat: Vec<f64> = theta_n
        .iter()
        .zip(sol.h.iter())
        .map(|(t, h)| t + h / rn)
        .collect();
    Ok(BoundaryFit {
        g_at_hat: design.g_at(&theta_hat),
        theta_hat,
        h: sol.h.iter().copied().collect(),
        on_boundary: !sol.working_set.is_empty(),
        kkt: sol.kkt.worst(),
        value: sol.objective(&v, &z),
    })
}
