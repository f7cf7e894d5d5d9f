use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::path::{PathSample, VectorPath};
use crate::error::{LabError, Result};
use crate::exec::Execution;
use crate::linalg::cholesky;
use crate::mc_harness::empirical::EmpiricalDist;
use crate::seed::{derive_seed, rng_from_seed, LabRng};
use crate::set_kernel::GridSet;

pub const TIE_TOL: f64 = 1e-12;
pub const SATURATION_LIMIT: f64 = 1e-3;

/// Covariances, second-moment matrices and break direction of the two
/// branches of the break-date limit process.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    omega1: DMatrix<f64>,
    omega2: DMatrix<f64>,
    q1: DMatrix<f64>,
    q2: DMatrix<f64>,
    delta0: DVector<f64>,
    sd1: f64,
    sd2: f64,
}

impl GaussianSpec {
    pub fn new(
        omega1: DMatrix<f64>,
        omega2: DMatrix<f64>,
        q1: DMatrix<f64>,
        q2: DMatrix<f64>,
        delta0: DVector<f64>,
    ) -> Result<Self> {
        let p = delta0.len();
        for (m, what) in [
            (&omega1, "Omega1"),
            (&omega2, "Omega2"),
            (&q1, "Q1"),
            (&q2, "Q2"),
        ] {
            if m.nrows() != p {
                return Err(LabError::DimensionMismatch {
                    expected: p,
                    got: m.nrows(),
                });
            }
            cholesky(m, what)?;
        }
        if delta0.iter().all(|&x| x == 0.0) {
            return Err(LabError::InvalidArgument("delta0 must be nonzero".into()));
        }
        let sd = |omega: &DMatrix<f64>| delta0.dot(&(omega * &delta0)).sqrt();
        let (sd1, sd2) = (sd(&omega1), sd(&omega2));
        Ok(Self {
            omega1,
            omega2,
            q1,
            q2,
            delta0,
            sd1,
            sd2,
        })
    }

    /// `Q1 = Q2 = Q`, `Omega1 = Omega2 = sigma2 Q`.
    pub fn homogeneous(q: DMatrix<f64>, sigma2: f64, delta0: DVector<f64>) -> Result<Self> {
        let omega = &q * sigma2;
        Self::new(omega.clone(), omega, q.clone(), q, delta0)
    }

    pub fn identity(delta0: DVector<f64>) -> Result<Self> {
        let p = delta0.len();
        Self::homogeneous(DMatrix::identity(p, p), 1.0, delta0)
    }

    pub fn delta0(&self) -> &DVector<f64> {
        &self.delta0
    }

    pub fn omega(&self) -> (&DMatrix<f64>, &DMatrix<f64>) {
        (&self.omega1, &self.omega2)
    }

    /// `(delta0' Q1 delta0, delta0' Q2 delta0)`
    pub fn drifts(&self) -> (f64, f64) {
        let d = &self.delta0;
        (d.dot(&(&self.q1 * d)), d.dot(&(&self.q2 * d)))
    }

    /// Standard deviations of `delta0' B_i(1)`.
    pub fn noise_sd(&self) -> (f64, f64) {
        (self.sd1, self.sd2)
    }

    pub fn default_half_width(&self) -> f64 {
        let (c1, c2) = self.drifts();
        40.0 / c1.min(c2)
    }

    pub fn with_delta(&self, delta0: DVector<f64>) -> Result<Self> {
        Self::new(
            self.omega1.clone(),
            self.omega2.clone(),
            self.q1.clone(),
            self.q2.clone(),
            delta0,
        )
    }
}

/// Where the argmax may be taken.
#[derive(Debug, Clone, PartialEq)]
pub enum ArgmaxConstraint {
    Full,
    /// `(-inf, a]`
    UpTo(f64),
    Grid(GridSet),
}

impl ArgmaxConstraint {
    pub fn admits(&self, s: f64) -> bool {
        match self {
            ArgmaxConstraint::Full => true,
            ArgmaxConstraint::UpTo(a) => s <= a + 1e-12 * a.abs().max(1.0),
            ArgmaxConstraint::Grid(g) => g.dim() == 1 && g.contains(&[s]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgmaxResult {
    pub s: f64,
    pub value: f64,
    pub index: usize,
    /// Other admitted grid points whose value is within `TIE_TOL` of the max.
    pub ties: usize,
}

impl ArgmaxResult {
    pub fn tie_flag(&self) -> bool {
        self.ties > 0
    }
}

fn scan(
    len: usize,
    s_of: impl Fn(usize) -> f64,
    value_of: impl Fn(usize) -> f64,
    admit: impl Fn(f64) -> bool,
) -> Option<ArgmaxResult> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..len {
        if !admit(s_of(j)) {
            continue;
        }
        let v = value_of(j);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((j, v));
        }
    }
    let (index, value) = best?;
    let ties = (0..len)
        .filter(|&j| j != index && admit(s_of(j)) && (value_of(j) - value).abs() <= TIE_TOL)
        .count();
    Some(ArgmaxResult {
        s: s_of(index),
        value,
        index,
        ties,
    })
}

/// Maximizing grid point over the admitted part of the path; the smallest
/// `s` wins exact ties.
pub fn argmax_over(path: &PathSample, constraint: &ArgmaxConstraint) -> Result<ArgmaxResult> {
    scan(
        path.len(),
        |j| path.grid[j],
        |j| path.values[j],
        |s| constraint.admits(s),
    )
    .ok_or_else(|| {
        LabError::EmptyConstraint(format!("{constraint:?} admits no point of the path grid"))
    })
}

fn half_steps(half_width: f64, step: f64) -> Result<usize> {
    if !(step > 0.0) || !(half_width > step) {
        return Err(LabError::InvalidArgument(format!(
            "need 0 < step < C, got step = {step}, C = {half_width}"
        )));
    }
    Ok((half_width / step + 1e-9).floor() as usize)
}

/// `-j step c + 2 W(j step)` for `j = 0..=n`, `W` a Brownian motion with
/// standard deviation `sd` at time one.
fn branch(c: f64, sd: f64, n: usize, step: f64, rng: &mut LabRng, out: &mut Vec<f64>) {
    out.clear();
    out.push(0.0);
    let scale = sd * step.sqrt();
    let mut w = 0.0;
    for j in 1..=n {
        let xi: f64 = StandardNormal.sample(rng);
        w += scale * xi;
        out.push(-(j as f64 * step) * c + 2.0 * w);
    }
}

struct TwoSided {
    n: usize,
    step: f64,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl TwoSided {
    fn draw(spec: &GaussianSpec, n: usize, step: f64, seed: u64) -> Self {
        let (c1, c2) = spec.drifts();
        let (sd1, sd2) = spec.noise_sd();
        let mut left = Vec::with_capacity(n + 1);
        let mut right = Vec::with_capacity(n + 1);
        branch(
            c1,
            sd1,
            n,
            step,
            &mut rng_from_seed(derive_seed(seed, 0)),
            &mut left,
        );
        branch(
            c2,
            sd2,
            n,
            step,
            &mut rng_from_seed(derive_seed(seed, 1)),
            &mut right,
        );
        Self {
            n,
            step,
            left,
            right,
        }
    }

    fn len(&self) -> usize {
        2 * self.n + 1
    }

    fn s(&self, j: usize) -> f64 {
        (j as f64 - self.n as f64) * self.step
    }

    fn value(&self, j: usize) -> f64 {
        if j <= self.n {
            self.left[self.n - j]
        } else {
            self.right[j - self.n]
        }
    }
}

/// One path of the two-sided limit process on `{-C, ..., 0, ..., C}`.
/// `B1` and `B2` are driven by the streams `derive_seed(seed, 0)` and
/// `derive_seed(seed, 1)`.
#[allow(non_snake_case)]
pub fn limit_process_M(
    spec: &GaussianSpec,
    half_width: f64,
    step: f64,
    seed: u64,
) -> Result<PathSample> {
    let n = half_steps(half_width, step)?;
    let path = TwoSided::draw(spec, n, step, seed);
    let grid = (0..path.len()).map(|j| path.s(j)).collect();
    let values = (0..path.len()).map(|j| path.value(j)).collect();
    PathSample::new(grid, values, seed, "M")
}

/// The limit process assembled from given Brownian paths, both sampled on
/// the same nonnegative grid starting at 0.
pub fn limit_process_from_paths(
    spec: &GaussianSpec,
    b1: &VectorPath,
    b2: &VectorPath,
) -> Result<PathSample> {
    if b1.grid != b2.grid {
        return Err(LabError::InvalidArgument("B1 and B2 grids differ".into()));
    }
    let (c1, c2) = spec.drifts();
    let w1 = b1.project(spec.delta0());
    let w2 = b2.project(spec.delta0());
    let g = &b1.grid;
    let mut grid = Vec::with_capacity(2 * g.len() - 1);
    let mut values = Vec::with_capacity(2 * g.len() - 1);
    for j in (0..g.len()).rev() {
        grid.push(-g[j]);
        values.push(-g[j] * c1 + 2.0 * w1[j]);
    }
    for j in 1..g.len() {
        grid.push(g[j]);
        values.push(-g[j] * c2 + 2.0 * w2[j]);
    }
    PathSample::new(grid, values, b1.seed, "M")
}

/// Draws of the constrained argmax together with the constrained and
/// unconstrained suprema of the same path.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitArgmaxSample {
    pub argmax: Vec<f64>,
    pub sup: Vec<f64>,
    pub free_sup: Vec<f64>,
    pub tie_draws: usize,
    /// Fraction of draws whose argmax is within one step of `±C`.
    pub saturation: f64,
    pub half_width: f64,
    pub step: f64,
    pub warning: Option<String>,
}

impl LimitArgmaxSample {
    pub fn argmax_dist(&self) -> Result<EmpiricalDist> {
        EmpiricalDist::new(self.argmax.clone())
    }

    pub fn sup_dist(&self) -> Result<EmpiricalDist> {
        EmpiricalDist::new(self.sup.clone())
    }
}

/// `n` independent argmax draws; draw `i` is the argmax of
/// `limit_process_M(spec, C, step, derive_seed(seed, i))`.
pub fn sample_limit_argmax(
    spec: &GaussianSpec,
    constraint: &ArgmaxConstraint,
    n: usize,
    half_width: f64,
    step: f64,
    seed: u64,
    exec: Execution,
) -> Result<LimitArgmaxSample> {
    if n == 0 {
        return Err(LabError::InvalidArgument("need at least one draw".into()));
    }
    let half = half_steps(half_width, step)?;
    let edge = half as f64 * step;
    let draws = exec.map(n, |i| {
        let path = TwoSided::draw(spec, half, step, derive_seed(seed, i as u64));
        let s_of = |j| path.s(j);
        let val = |j| path.value(j);
        let constrained = scan(path.len(), s_of, val, |s| constraint.admits(s));
        let free = scan(path.len(), s_of, val, |_| true).expect("nonempty grid");
        constrained.map(|c| (c, free.value))
    });
    let mut out = LimitArgmaxSample {
        argmax: Vec::with_capacity(n),
        sup: Vec::with_capacity(n),
        free_sup: Vec::with_capacity(n),
        tie_draws: 0,
        saturation: 0.0,
        half_width: edge,
        step,
        warning: None,
    };
    let mut saturated = 0usize;
    for d in draws {
        let (c, free) = d.ok_or_else(|| {
            LabError::EmptyConstraint(format!(
                "{constraint:?} admits no point of [-{edge}, {edge}]"
            ))
        })?;
        if c.s.abs() >= edge - step * (1.0 - 1e-9) {
            saturated += 1;
        }
        if c.tie_flag() {
            out.tie_draws += 1;
        }
        out.argmax.push(c.s);
        out.sup.push(c.value);
        out.free_sup.push(free);
    }
    out.saturation = saturated as f64 / n as f64;
    if out.saturation > SATURATION_LIMIT {
        out.warning = Some(format!(
            "argmax within one step of the truncation edge on {:.3}% of draws; widen C",
            100.0 * out.saturation
        ));
    }
    Ok(out)
}
