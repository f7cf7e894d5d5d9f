//! Primal active-set solver for strictly concave quadratic programs
//!
//! ```text
//! maximize  h'z - 1/2 h'V h   subject to   b + G h <= 0
//! ```
//!
//! The working set is kept linearly independent by construction; equality
//! subproblems are solved in range-space form through the Cholesky factor of
//! `V`. Ties in blocking constraints and in multiplier signs are broken by the
//! lowest row index, so the iterate sequence is deterministic.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{LabError, Result};
use crate::lp::max_min_slack;

pub const KKT_TOL: f64 = 1e-8;
pub const FEAS_TOL: f64 = 1e-9;

/// Finite affine inequalities `b + G h <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub g: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl ConstraintSystem {
    pub fn new(g: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if g.nrows() != b.len() {
            return Err(LabError::DimensionMismatch {
                expected: g.nrows(),
                got: b.len(),
            });
        }
        Ok(Self { g, b })
    }

    pub fn unconstrained(dim: usize) -> Self {
        Self {
            g: DMatrix::zeros(0, dim),
            b: DVector::zeros(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.g.ncols()
    }

    pub fn rows(&self) -> usize {
        self.g.nrows()
    }

    /// `b + G h`, one entry per row.
    pub fn values(&self, h: &DVector<f64>) -> DVector<f64> {
        &self.b + &self.g * h
    }

    pub fn max_violation(&self, h: &DVector<f64>) -> f64 {
        self.values(h)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// `|| z - V h - G' mu ||_inf`
    pub stationarity: f64,
    pub min_multiplier: f64,
    /// `max_j |mu_j (b_j + G_j h)|`
    pub complementarity: f64,
    /// `max(0, max_j (b_j + G_j h))`
    pub infeasibility: f64,
}

impl KktReport {
    pub fn worst(&self) -> f64 {
        self.stationarity
            .max(-self.min_multiplier)
            .max(self.complementarity)
            .max(self.infeasibility)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub h: DVector<f64>,
    /// One multiplier per row; zero off the final working set.
    pub multipliers: DVector<f64>,
    pub working_set: Vec<usize>,
    pub iterations: usize,
    pub kkt: KktReport,
}

impl QpSolution {
    pub fn objective(&self, v: &DMatrix<f64>, z: &DVector<f64>) -> f64 {
        self.h.dot(z) - 0.5 * self.h.dot(&(v * &self.h))
    }
}

pub fn kkt_report(
    v: &DMatrix<f64>,
    z: &DVector<f64>,
    sys: &ConstraintSystem,
    h: &DVector<f64>,
    mu: &DVector<f64>,
) -> KktReport {
    let stationarity = (z - v * h - sys.g.transpose() * mu).amax();
    let values = sys.values(h);
    let min_multiplier = mu.iter().copied().fold(0.0, f64::min);
    let complementarity = mu
        .iter()
        .zip(values.iter())
        .map(|(m, c)| (m * c).abs())
        .fold(0.0, f64::max);
    let infeasibility = values.iter().copied().fold(0.0, f64::max);
    KktReport {
        stationarity,
        min_multiplier,
        complementarity,
        infeasibility,
    }
}

/// Concave quadratic objective with its Hessian factor, reusable across
/// many linear terms.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    v: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl QuadraticObjective {
    pub fn new(v: DMatrix<f64>) -> Result<Self> {
        let chol = crate::linalg::cholesky(&v, "quadratic form V")?;
        Ok(Self { v, chol })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is positive definite")
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn unconstrained_argmax(&self, z: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(z)
    }

    /// Maximize `h'z - 1/2 h'Vh` over `b + G h <= 0`. `start` must be
    /// feasible when given; otherwise the origin is used if feasible and a
    /// max-min-slack program supplies a start point if not.
    pub fn maximize(
        &self,
        z: &DVector<f64>,
        sys: &ConstraintSystem,
        start: Option<&DVector<f64>>,
    ) -> Result<QpSolution> {
        let d = self.dim();
        if z.len() != d {
            return Err(LabError::DimensionMismatch {
                expected: d,
                got: z.len(),
            });
        }
        if sys.dim() != d {
            return Err(LabError::DimensionMismatch {
                expected: d,
                got: sys.dim(),
            });
        }
        let m = sys.rows();
        let scale = 1.0_f64.max(z.amax()).max(sys.b.amax());
        let free = self.unconstrained_argmax(z);
        if m == 0 || sys.max_violation(&free) <= FEAS_TOL * scale {
            return self.finish(z, sys, free, DVector::zeros(m), vec![], 0, scale);
        }

        let mut x = match start {
            Some(s) => s.clone(),
            None if sys.b.iter().all(|&b| b <= 0.0) => DVector::zeros(d),
            None => {
                let rows: Vec<Vec<f64>> = crate::linalg::mat_to_rows(&sys.g);
                let b: Vec<f64> = sys.b.iter().copied().collect();
                let opt = max_min_slack(d, &rows, &b)?;
                if opt.min_slack < -FEAS_TOL * scale {
                    return Err(LabError::Infeasible {
                        min_slack: opt.min_slack,
                    });
                }
                DVector::from_vec(opt.point)
            }
        };
        if sys.max_violation(&x) > FEAS_TOL * scale {
            return Err(LabError::Infeasible {
                min_slack: -sys.max_violation(&x),
            });
        }

        let cap = 10 * m * d;
        let mut working: Vec<usize> = Vec::new();
        let mut last_step = f64::NAN;
        for iter in 1..=cap {
            let (h_eq, mu_w) = self.equality_solution(z, sys, &working)?;
            let p = &h_eq - &x;
            last_step = p.amax();
            if last_step <= 1e-12 * (1.0 + x.amax()) {
                x = h_eq;
                // most negative multiplier, lowest index on ties
                let mut drop: Option<(usize, f64)> = None;
                for (pos, &mu) in mu_w.iter().enumerate() {
                    if mu < -1e-12 * scale && drop.is_none_or(|(_, best)| mu < best) {
                        drop = Some((pos, mu));
                    }
                }
                match drop {
                    None => {
                        let mut mu_full = DVector::zeros(m);
                        for (pos, &row) in working.iter().enumerate() {
                            mu_full[row] = mu_w[pos];
                        }
                        return self.finish(z, sys, x, mu_full, working, iter, scale);
                    }
                    Some((pos, _)) => {
                        working.remove(pos);
                    }
                }
            } else {
                let mut alpha = 1.0;
                let mut block = None;
                for j in 0..m {
                    if working.contains(&j) {
                        continue;
                    }
                    let row = sys.g.row(j);
                    let ap = row.dot(&p.transpose());
                    if ap <= 1e-14 * row.amax() * last_step {
                        continue;
                    }
                    let slack = (-(sys.b[j] + row.dot(&x.transpose()))).max(0.0);
                    let a_j = slack / ap;
                    if a_j < alpha {
                        alpha = a_j;
                        block = Some(j);
                    }
                }
                x += alpha * &p;
                if let Some(j) = block {
                    let at = working.partition_point(|&w| w < j);
                    working.insert(at, j);
                }
            }
        }
        Err(LabError::IterationCap {
            cap,
            working_set: working,
            step_norm: last_step,
        })
    }

    /// Solution of the equality-constrained subproblem on `working`, with
    /// its multipliers (in `working` order).
    fn equality_solution(
        &self,
        z: &DVector<f64>,
        sys: &ConstraintSystem,
        working: &[usize],
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let vinv_z = self.chol.solve(z);
        if working.is_empty() {
            return Ok((vinv_z, DVector::zeros(0)));
        }
        let d = self.dim();
        let k = working.len();
        let a = DMatrix::from_fn(k, d, |i, j| sys.g[(working[i], j)]);
        let bw = DVector::from_fn(k, |i, _| sys.b[working[i]]);
        let vinv_at = self.chol.solve(&a.transpose());
        let s = &a * &vinv_at;
        let rhs = &a * &vinv_z + bw;
        let s_chol = Cholesky::new(s).ok_or_else(|| LabError::IterationCap {
            cap: 0,
            working_set: working.to_vec(),
            step_norm: f64::NAN,
        })?;
        let mu = s_chol.solve(&rhs);
        let h = vinv_z - vinv_at * &mu;
        Ok((h, mu))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        z: &DVector<f64>,
        sys: &ConstraintSystem,
        h: DVector<f64>,
        multipliers: DVector<f64>,
        working_set: Vec<usize>,
        iterations: usize,
        scale: f64,
    ) -> Result<QpSolution> {
        let kkt = kkt_report(&self.v, z, sys, &h, &multipliers);
        if kkt.worst() > KKT_TOL * scale {
            return Err(LabError::KktFailure {
                stationarity: kkt.stationarity,
                min_multiplier: kkt.min_multiplier,
                complementarity: kkt.complementarity,
                infeasibility: kkt.infeasibility,
            });
        }
        Ok(QpSolution {
            h,
            multipliers,
            working_set,
            iterations,
            kkt,
        })
    }
}

/// Euclidean projection of `point` onto `{h : b + G h <= 0}`.
pub fn project(point: &DVector<f64>, sys: &ConstraintSystem) -> Result<QpSolution> {
    QuadraticObjective::identity(point.len()).maximize(point, sys, None)
}
