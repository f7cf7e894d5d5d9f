//! Two-rate toy model
//!
//! ```text
//! y = pi1 x1 + beta pi1 x2 + pi2 x3 + sigma e,   0 <= beta <= pi2
//! ```
//!
//! estimated by profiling least squares over `beta`.

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::design_hash;
use crate::error::{LabError, Result};
use crate::exec::Execution;
use crate::mc_harness::EmpiricalDist;
use crate::optim::maximize_profile;
use crate::process_lab::weak::{PROFILE_POINTS, PROFILE_TOL};
use crate::process_lab::{QuadraticLimit, WeakLimit};
use crate::seed::{derive_seed, rng_from_seed};
use crate::set_kernel::{
    constructions::interval_of, weakid_limit_sets, AffineConstraints, Offset, WeakIdGeometry,
    WeakIdLimitSets,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeakIdRegime {
    /// `pi1_n = c / sqrt(n)`, `beta_n = beta`, `pi2_n = pi2`.
    Weak { c: f64, beta: f64, pi2: f64 },
    /// `pi1_n = c n^{-1/6}`, `a_n = n^{1/3}`, and `(beta_n, pi2_n)` chosen so
    /// that `a_n g(beta_n, pi_n) = b`.
    Semistrong { c: f64, b: [f64; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakIdDesign {
    pub n: usize,
    pub sigma: f64,
    pub regime: WeakIdRegime,
}

/// `(beta, pi1, pi2)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakIdParams {
    pub beta: f64,
    pub pi1: f64,
    pub pi2: f64,
}

impl WeakIdParams {
    /// Regression coefficients `(pi1, beta pi1, pi2)`.
    pub fn theta(&self) -> Vector3<f64> {
        Vector3::new(self.pi1, self.beta * self.pi1, self.pi2)
    }
}

impl WeakIdDesign {
    pub fn weak(n: usize) -> Self {
        Self {
            n,
            sigma: 0.25,
            regime: WeakIdRegime::Weak {
                c: 1.0,
                beta: 0.25,
                pi2: 1.0,
            },
        }
    }

    pub fn semistrong(n: usize) -> Self {
        Self {
            n,
            sigma: 1.0,
            regime: WeakIdRegime::Semistrong {
                c: 1.0,
                b: [-1.0, -2.0],
            },
        }
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..*self }
    }

    pub fn a_n(&self) -> f64 {
        (self.n as f64).cbrt()
    }

    pub fn truth(&self) -> WeakIdParams {
        let n = self.n as f64;
        match self.regime {
            WeakIdRegime::Weak { c, beta, pi2 } => WeakIdParams {
                beta,
                pi1: c / n.sqrt(),
                pi2,
            },
            WeakIdRegime::Semistrong { c, b } => {
                let an = self.a_n();
                let beta = -b[0] / an;
                WeakIdParams {
                    beta,
                    pi1: c * n.powf(-1.0 / 6.0),
                    pi2: beta - b[1] / an,
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || !(self.sigma > 0.0) {
            return Err(LabError::InvalidArgument(
                "need n >= 4 and sigma > 0".into(),
            ));
        }
        match self.regime {
            WeakIdRegime::Weak { beta, pi2, .. } if !(0.0 <= beta && beta <= pi2) => {
                Err(LabError::InvalidArgument(format!(
                    "true (beta, pi2) = ({beta}, {pi2}) violates 0 <= beta <= pi2"
                )))
            }
            WeakIdRegime::Semistrong { b, .. } if b.iter().any(|&v| v > 0.0 || !v.is_finite()) => {
                Err(LabError::InvalidArgument(format!(
                    "semi-strong drift {b:?} must be finite and nonpositive"
                )))
            }
            _ => Ok(()),
        }
    }

    /// `g(beta, pi) = (-beta, beta - pi2)` with the limit drift of this regime.
    pub fn geometry(&self) -> WeakIdGeometry {
        let constraints = AffineConstraints {
            offset: vec![0.0, 0.0],
            g_beta: vec![vec![-1.0], vec![1.0]],
            g_pi: vec![vec![0.0, 0.0], vec![0.0, -1.0]],
        };
        match self.regime {
            WeakIdRegime::Weak { beta, pi2, .. } => {
                // a_n g(beta_n, pi_n) diverges unless the constraint binds exactly
                let g = [-beta, beta - pi2];
                WeakIdGeometry {
                    constraints,
                    pi0: vec![0.0, pi2],
                    drift: g
                        .iter()
                        .map(|&v| {
                            if v < 0.0 {
                                Offset::NegInf
                            } else {
                                Offset::Finite(0.0)
                            }
                        })
                        .collect(),
                }
            }
            WeakIdRegime::Semistrong { b, .. } => WeakIdGeometry {
                constraints,
                pi0: vec![0.0, 0.0],
                drift: b.iter().map(|&v| Offset::Finite(v)).collect(),
            },
        }
    }

    pub fn limit_sets(&self) -> Result<WeakIdLimitSets> {
        weakid_limit_sets(&self.geometry())
    }

    /// Weak-regime limit of `(beta_hat, sqrt(n)(pi_hat - pi_n))`.
    pub fn weak_limit(&self) -> Result<WeakLimit> {
        let WeakIdRegime::Weak { c, beta, .. } = self.regime else {
            return Err(LabError::InvalidArgument("not a weak-regime design".into()));
        };
        let (lo, hi) = interval_of(&self.limit_sets()?.b_w)?;
        Ok(WeakLimit {
            c,
            sigma: self.sigma,
            beta_n: beta,
            lo,
            hi,
        })
    }

    /// Semi-strong limit in `(a_n(beta - beta_n), sqrt(n)(pi1 - pi1_n),
    /// sqrt(n)(pi2 - pi2_n))` coordinates: `M(h) = (Ah)'Z - |Ah|^2 / 2` with
    /// `Z ~ N(0, sigma^2 I)`, `A = [[0, 1, 0], [c, 0, 0], [0, 0, 1]]`.
    pub fn semistrong_limit(&self) -> Result<QuadraticLimit> {
        let WeakIdRegime::Semistrong { c, .. } = self.regime else {
            return Err(LabError::InvalidArgument("not a semi-strong design".into()));
        };
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, c, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let v = a.transpose() * &a;
        let s2 = self.sigma * self.sigma;
        QuadraticLimit::new(v.clone(), v * s2, nalgebra::DVector::zeros(3))
    }

    pub fn hash(&self) -> String {
        design_hash(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakIdFit {
    pub estimate: WeakIdParams,
    pub truth: WeakIdParams,
    /// `(beta_hat, sqrt(n)(pi1_hat - pi1_n), sqrt(n)(pi2_hat - pi2_n))`
    pub weak: [f64; 3],
    /// `(a_n(beta_hat - beta_n), sqrt(n)(pi1_hat - pi1_n), sqrt(n)(pi2_hat - pi2_n))`
    pub semistrong: [f64; 3],
    /// `(SSR(theta_n) - SSR(theta_hat)) / 2`
    pub value: f64,
}

/// Sufficient statistics `X'X`, `X'y`, `y'y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakIdStats {
    pub xtx: Matrix3<f64>,
    pub xty: Vector3<f64>,
    pub yty: f64,
}

impl WeakIdStats {
    pub fn simulate(design: &WeakIdDesign, seed: u64) -> Self {
        let coef = design.truth().theta();
        let mut rng = rng_from_seed(seed);
        let mut s = Self {
            xtx: Matrix3::zeros(),
            xty: Vector3::zeros(),
            yty: 0.0,
        };
        for _ in 0..design.n {
            let x = Vector3::from_fn(|_, _| StandardNormal.sample(&mut rng));
            let e: f64 = StandardNormal.sample(&mut rng);
            let y = coef.dot(&x) + design.sigma * e;
            s.xtx += x * x.transpose();
            s.xty += x * y;
            s.yty += y * y;
        }
        s
    }

    pub fn ssr(&self, theta: &Vector3<f64>) -> f64 {
        self.yty - 2.0 * theta.dot(&self.xty) + theta.dot(&(self.xtx * theta))
    }

    /// Best `(pi1, pi2)` for fixed `beta` subject to `pi2 >= beta`, and its SSR.
    pub fn profile(&self, beta: f64) -> (f64, f64, f64) {
        let a = Vector3::new(1.0, beta, 0.0);
        let e3 = Vector3::new(0.0, 0.0, 1.0);
        let saa = a.dot(&(self.xtx * a));
        let sa3 = a.dot(&(self.xtx * e3));
        let s33 = self.xtx[(2, 2)];
        let ra = a.dot(&self.xty);
        let r3 = self.xty[2];
        let gram = Matrix2::new(saa, sa3, sa3, s33);
        let (mut pi1, mut pi2) = match gram.cholesky() {
            Some(ch) => {
                let sol = ch.solve(&Vector2::new(ra, r3));
                (sol[0], sol[1])
            }
            None => (0.0, beta),
        };
        if pi2 < beta {
            pi2 = beta;
            pi1 = if saa > 0.0 {
                (ra - beta * sa3) / saa
            } else {
                0.0
            };
        }
        let theta = Vector3::new(pi1, beta * pi1, pi2);
        (pi1, pi2, self.ssr(&theta))
    }

    /// Upper end of the `beta` range that can contain the minimizer.
    pub fn beta_bound(&self) -> f64 {
        let Some(ch) = self.xtx.cholesky() else {
            return 0.0;
        };
        let gamma = ch.solve(&self.xty);
        let ssr_ols = self.ssr(&gamma);
        let f0 = self.profile(0.0).2;
        let lmin = self.xtx.symmetric_eigenvalues().min();
        if !(lmin > 0.0) {
            return 0.0;
        }
        gamma[2].max(0.0) + ((f0 - ssr_ols).max(0.0) / lmin).sqrt()
    }

    pub fn fit(&self) -> Result<WeakIdParams> {
        let hi = self.beta_bound();
        let scale = self.yty.max(1.0);
        let m = maximize_profile(
            |b| -self.profile(b).2 / scale,
            0.0,
            hi,
            PROFILE_POINTS,
            PROFILE_TOL,
        )?;
        let (pi1, pi2, _) = self.profile(m.x);
        Ok(WeakIdParams {
            beta: m.x,
            pi1,
            pi2,
        })
    }
}

pub fn fit_weakid_model(design: &WeakIdDesign, seed: u64) -> Result<WeakIdFit> {
    design.validate()?;
    let stats = WeakIdStats::simulate(design, seed);
    let estimate = stats.fit()?;
    let truth = design.truth();
    let rn = (design.n as f64).sqrt();
    let h1 = rn * (estimate.pi1 - truth.pi1);
    let h2 = rn * (estimate.pi2 - truth.pi2);
    Ok(WeakIdFit {
        estimate,
        truth,
        weak: [estimate.beta, h1, h2],
        semistrong: [design.a_n() * (estimate.beta - truth.beta), h1, h2],
        value: 0.5 * (stats.ssr(&truth.theta()) - stats.ssr(&estimate.theta())),
    })
}

/// Monte Carlo spread of `beta_hat - beta_n` at two sample sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateContrast {
    pub n: [usize; 2],
    pub sd: [f64; 2],
    /// `sd[1] / sd[0]`
    pub ratio: f64,
    /// `a_{n0} / a_{n1}` in the semi-strong regime, 1 in the weak regime.
    pub target: f64,
    pub pass: bool,
}

pub const WEAK_RATIO_BAND: (f64, f64) = (0.8, 1.25);
pub const SEMISTRONG_RATE_TOL: f64 = 0.2;

/// In the semi-strong regime the spread must shrink like `a_n^{-1}` (ratio
/// within 20% of the target); in the weak regime it must not shrink (ratio
/// in `[0.8, 1.25]`). Replication `i` at `n[j]` uses
/// `derive_seed(derive_seed(seed, j), i)`.
pub fn two_rate_contrast(
    design: &WeakIdDesign,
    n: [usize; 2],
    reps: usize,
    seed: u64,
    exec: Execution,
) -> Result<RateContrast> {
    if reps < 2 || n[0] >= n[1] {
        return Err(LabError::InvalidArgument(
            "rate contrast needs reps >= 2 and increasing sample sizes".into(),
        ));
    }
    let mut sd = [0.0; 2];
    for j in 0..2 {
        let d = design.with_n(n[j]);
        d.validate()?;
        let stream = derive_seed(seed, j as u64);
        let errs = exec
            .map(reps, |i| {
                fit_weakid_model(&d, derive_seed(stream, i as u64))
                    .map(|f| f.estimate.beta - f.truth.beta)
            })
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;
        sd[j] = EmpiricalDist::new(errs)?.std_dev();
    }
    let ratio = sd[1] / sd[0];
    let (target, pass) = match design.regime {
        WeakIdRegime::Weak { .. } => (
            1.0,
            (WEAK_RATIO_BAND.0..=WEAK_RATIO_BAND.1).contains(&ratio),
        ),
        WeakIdRegime::Semistrong { .. } => {
            let t = (n[0] as f64 / n[1] as f64).cbrt();
            (t, (ratio / t - 1.0).abs() <= SEMISTRONG_RATE_TOL)
        }
    };
    Ok(RateContrast {
        n,
        sd,
        ratio,
        target,
        pass,
    })
}
