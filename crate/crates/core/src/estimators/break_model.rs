//! Least-squares break-date estimation in `y_t = x_t' beta + x_t' delta_T 1{t > k0} + e_t`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::design_hash;
use super::dist::Dist;
use crate::error::{LabError, Result};
use crate::process_lab::{ArgmaxConstraint, GaussianSpec, PathSample};
use crate::seed::rng_from_seed;
use crate::set_kernel::{int_part, trimming_range, BreakLocation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakDesign {
    #[serde(rename = "T")]
    pub t: usize,
    pub location: BreakLocation,
    pub beta: Vec<f64>,
    pub delta0: Vec<f64>,
    /// `v_T = T^{-kappa}`
    pub kappa: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(default)]
    pub regressor: Dist,
    #[serde(default)]
    pub error: Dist,
}

impl Default for BreakDesign {
    fn default() -> Self {
        Self {
            t: 2000,
            location: BreakLocation::Fraction(0.5),
            beta: vec![1.0, 1.0],
            delta0: vec![1.0, 1.0],
            kappa: 0.25,
            lambda1: 0.15,
            lambda2: 0.85,
            regressor: Dist::default(),
            error: Dist::default(),
        }
    }
}

impl BreakDesign {
    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn vt(&self) -> f64 {
        (self.t as f64).powf(-self.kappa)
    }

    pub fn k0(&self) -> Result<usize> {
        self.location.break_date(self.t, self.lambda2, self.vt())
    }

    /// `(min Lambda_T, max Lambda_T)`
    pub fn trimming(&self) -> Result<(usize, usize)> {
        trimming_range(self.t, self.lambda1, self.lambda2)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if p == 0 || self.delta0.len() != p {
            return Err(LabError::DimensionMismatch {
                expected: p,
                got: self.delta0.len(),
            });
        }
        if self.delta0.iter().all(|&d| d == 0.0) {
            return Err(LabError::InvalidArgument("delta0 must be nonzero".into()));
        }
        if !(self.kappa > 0.0 && self.kappa < 0.5) {
            return Err(LabError::InvalidArgument(format!(
                "kappa must lie in (0, 1/2) so that v_T -> 0 and sqrt(T) v_T -> inf, got {}",
                self.kappa
            )));
        }
        let (lo, hi) = self.trimming()?;
        if let BreakLocation::Fraction(tau) = self.location {
            if !(tau > self.lambda1 && tau < self.lambda2) {
                return Err(LabError::InvalidArgument(format!(
                    "tau = {tau} must lie strictly inside (lambda1, lambda2)"
                )));
            }
        }
        let k0 = self.k0()?;
        if k0 <= p || k0 + p >= self.t {
            return Err(LabError::InvalidArgument(format!(
                "break date {k0} must lie in {}..={}",
                p + 1,
                self.t.saturating_sub(p + 1)
            )));
        }
        if lo < p || hi + p > self.t || lo > hi {
            return Err(LabError::InvalidArgument(format!(
                "trimming range {lo}..={hi} leaves fewer than p = {p} observations on a side"
            )));
        }
        self.regressor.validate()?;
        self.error.validate()
    }

    /// Constraint on the localized argmax in the limit.
    pub fn limit_constraint(&self) -> ArgmaxConstraint {
        match self.location {
            BreakLocation::Fraction(_) => ArgmaxConstraint::Full,
            BreakLocation::Drift(a) => ArgmaxConstraint::UpTo(a),
        }
    }

    /// `v_T^2 ([lambda2 T] - k0)`, the largest attainable localized value.
    pub fn localized_upper(&self) -> Result<f64> {
        let (_, hi) = self.trimming()?;
        Ok(self.vt().powi(2) * (hi as f64 - self.k0()? as f64))
    }

    /// `Q = E[x x']`, `Omega = E[e^2] Q` for i.i.d. regressor coordinates
    /// independent of the errors.
    pub fn limit_spec(&self) -> Result<GaussianSpec> {
        let p = self.p();
        let m = self.regressor.mean();
        let m2 = self.regressor.second_moment();
        let q = DMatrix::from_fn(p, p, |i, j| if i == j { m2 } else { m * m });
        GaussianSpec::homogeneous(
            q,
            self.error.second_moment(),
            DVector::from_column_slice(&self.delta0),
        )
    }

    pub fn hash(&self) -> String {
        design_hash(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreakData {
    pub y: Vec<f64>,
    /// One row per observation.
    pub x: Vec<Vec<f64>>,
}

impl BreakData {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn p(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn to_csv(&self) -> String {
        let p = self.p();
        let mut s = String::from("t,y");
        for j in 1..=p {
            s.push_str(&format!(",x{j}"));
        }
        s.push('\n');
        for (t, (y, x)) in self.y.iter().zip(&self.x).enumerate() {
            s.push_str(&format!("{},{y}", t + 1));
            for v in x {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or(LabError::EmptySample)?;
        let cols = header.split(',').count();
        if cols < 3 {
            return Err(LabError::InvalidArgument(format!(
                "bad dataset header '{header}'"
            )));
        }
        let (mut y, mut x) = (Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| LabError::InvalidArgument(format!("line {}: {e}", i + 2)))?;
            if vals.len() != cols {
                return Err(LabError::InvalidArgument(format!(
                    "line {}: expected {cols} fields, got {}",
                    i + 2,
                    vals.len()
                )));
            }
            y.push(vals[1]);
            x.push(vals[2..].to_vec());
        }
        Ok(Self { y, x })
    }
}

pub fn simulate_break_data(design: &BreakDesign, seed: u64) -> Result<BreakData> {
    design.validate()?;
    let k0 = design.k0()?;
    let vt = design.vt();
    let p = design.p();
    let mut rng = rng_from_seed(seed);
    let mut y = Vec::with_capacity(design.t);
    let mut x = Vec::with_capacity(design.t);
    for t in 1..=design.t {
        let xt: Vec<f64> = (0..p).map(|_| design.regressor.sample(&mut rng)).collect();
        let e = design.error.sample(&mut rng);
        let mut yt = e + xt.iter().zip(&design.beta).map(|(a, b)| a * b).sum::<f64>();
        if t > k0 {
            yt += vt
                * xt.iter()
                    .zip(&design.delta0)
                    .map(|(a, d)| a * d)
                    .sum::<f64>();
        }
        y.push(yt);
        x.push(xt);
    }
    Ok(BreakData { y, x })
}

fn check_k(k: usize, t: usize, p: usize) -> Result<()> {
    if k < p || k + p > t {
        return Err(LabError::InvalidArgument(format!(
            "candidate break {k} outside {p}..={}",
            t.saturating_sub(p)
        )));
    }
    Ok(())
}

/// `V_T(k) = d_k' (Z_k' M Z_k) d_k`, computed from the explicit regression
/// of `y` on `(x_t, x_t 1{t > k})`.
pub fn v_t_objective(k: usize, data: &BreakData) -> Result<f64> {
    let (t, p) = (data.len(), data.p());
    check_k(k, t, p)?;
    let w = DMatrix::from_fn(t, 2 * p, |i, j| {
        if j < p {
            data.x[i][j]
        } else if i + 1 > k {
            data.x[i][j - p]
        } else {
            0.0
        }
    });
    let y = DVector::from_column_slice(&data.y);
    let wtw = w.transpose() * &w;
    let coef = wtw
        .cholesky()
        .ok_or(LabError::SingularDesign { k })?
        .solve(&(w.transpose() * &y));
    let delta = coef.rows(p, p).into_owned();
    let x = w.columns(0, p).into_owned();
    let z = w.columns(p, p).into_owned();
    let xtx = (x.transpose() * &x)
        .cholesky()
        .ok_or(LabError::SingularDesign { k })?;
    let xtz = x.transpose() * &z;
    let zmz = z.transpose() * &z - xtz.transpose() * xtx.solve(&xtz);
    Ok(delta.dot(&(zmz * &delta)).max(0.0))
}

/// Prefix sums that give `V_T(k)` for every `k` in `O(p^3)`.
#[derive(Debug, Clone)]
pub struct VProfile {
    t: usize,
    p: usize,
    /// `sum_{s <= k} x_s x_s'` for `k = 0..=T`, row-major `p x p` blocks.
    cum_xx: Vec<f64>,
    /// `sum_{s <= k} x_s y_s`
    cum_xy: Vec<f64>,
    xtx_chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    ssr0: f64,
}

impl VProfile {
    pub fn new(data: &BreakData) -> Result<Self> {
        let (t, p) = (data.len(), data.p());
        let mut cum_xx = vec![0.0; (t + 1) * p * p];
        let mut cum_xy = vec![0.0; (t + 1) * p];
        for s in 0..t {
            let x = &data.x[s];
            for i in 0..p {
                cum_xy[(s + 1) * p + i] = cum_xy[s * p + i] + x[i] * data.y[s];
                for j in 0..p {
                    cum_xx[(s + 1) * p * p + i * p + j] =
                        cum_xx[s * p * p + i * p + j] + x[i] * x[j];
                }
            }
        }
        let total = DMatrix::from_row_slice(p, p, &cum_xx[t * p * p..]);
        let r = DVector::from_column_slice(&cum_xy[t * p..]);
        let xtx_chol = total.cholesky().ok_or(LabError::SingularDesign { k: t })?;
        let yy: f64 = data.y.iter().map(|v| v * v).sum();
        let ssr0 = (yy - r.dot(&xtx_chol.solve(&r))).max(0.0);
        Ok(Self {
            t,
            p,
            cum_xx,
            cum_xy,
            xtx_chol,
            ssr0,
        })
    }

    fn xx(&self, k: usize) -> DMatrix<f64> {
        let pp = self.p * self.p;
        DMatrix::from_row_slice(self.p, self.p, &self.cum_xx[k * pp..(k + 1) * pp])
    }

    fn xy(&self, k: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.cum_xy[k * self.p..(k + 1) * self.p])
    }

    /// Residual sum of squares without a break.
    pub fn ssr0(&self) -> f64 {
        self.ssr0
    }

    pub fn value(&self, k: usize) -> Result<f64> {
        check_k(k, self.t, self.p)?;
        let s = self.xx(self.t);
        let r = self.xy(self.t);
        let s2 = &s - self.xx(k);
        let r2 = &r - self.xy(k);
        let zmz = &s2 - &s2 * self.xtx_chol.solve(&s2);
        let zmy = r2 - &s2 * self.xtx_chol.solve(&r);
        let chol = zmz.cholesky().ok_or(LabError::SingularDesign { k })?;
        Ok(zmy.dot(&chol.solve(&zmy)).max(0.0))
    }

    /// `SSR(k) = SSR_0 - V_T(k)`
    pub fn ssr(&self, k: usize) -> Result<f64> {
        Ok(self.ssr0 - self.value(k)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreakFitResult {
    pub k_hat: usize,
    /// `v_T^2 (k_hat - k0)`
    pub s_hat: f64,
    pub k0: usize,
    pub vt: f64,
    /// First candidate date; `v_profile[i]` belongs to `k_lo + i`.
    pub k_lo: usize,
    pub v_profile: Vec<f64>,
    pub ssr_profile: Vec<f64>,
    pub tie: bool,
    pub v_k0: f64,
}

impl BreakFitResult {
    pub fn v_max(&self) -> f64 {
        self.v_profile[self.k_hat - self.k_lo]
    }

    /// `max_k V_T(k) - V_T(k0)`
    pub fn centered_sup(&self) -> f64 {
        self.v_max() - self.v_k0
    }
}

/// Maximize `V_T` over the trimmed candidate set; the smallest `k` wins ties
/// within `1e-12` relative, which are flagged.
pub fn estimate_break(data: &BreakData, design: &BreakDesign) -> Result<BreakFitResult> {
    let (lo, hi) = design.trimming()?;
    if data.p() != design.p() || data.len() != design.t {
        return Err(LabError::DimensionMismatch {
            expected: design.t,
            got: data.len(),
        });
    }
    let prof = VProfile::new(data)?;
    let v_profile: Vec<f64> = (lo..=hi).map(|k| prof.value(k)).collect::<Result<_>>()?;
    let best = (0..v_profile.len()).fold(0, |b, i| if v_profile[i] > v_profile[b] { i } else { b });
    let vmax = v_profile[best];
    let tol = 1e-12 * vmax.abs().max(1.0);
    let tie = v_profile
        .iter()
        .enumerate()
        .any(|(i, &v)| i != best && (v - vmax).abs() <= tol);
    let k0 = design.k0()?;
    let vt = design.vt();
    let k_hat = lo + best;
    Ok(BreakFitResult {
        k_hat,
        s_hat: vt * vt * (k_hat as f64 - k0 as f64),
        k0,
        vt,
        k_lo: lo,
        ssr_profile: v_profile.iter().map(|v| prof.ssr0() - v).collect(),
        v_profile,
        tie,
        v_k0: prof.value(k0)?,
    })
}

/// `M_T(s) = V_T([k0 + s v_T^{-2}]) - V_T(k0)` on `s_grid`.
pub fn localized_break_objective(
    data: &BreakData,
    design: &BreakDesign,
    s_grid: &[f64],
) -> Result<PathSample> {
    let k0 = design.k0()? as f64;
    let inv = design.vt().powi(-2);
    let (t, p) = (data.len() as i64, data.p() as i64);
    let ks: Vec<i64> = s_grid.iter().map(|&s| int_part(k0 + s * inv)).collect();
    let clipped: Vec<f64> = s_grid
        .iter()
        .zip(&ks)
        .filter(|(_, &k)| k < p || k > t - p)
        .map(|(&s, _)| s)
        .collect();
    if !clipped.is_empty() {
        return Err(LabError::GridOutOfRange { clipped });
    }
    let prof = VProfile::new(data)?;
    let base = prof.value(k0 as usize)?;
    let values = ks
        .iter()
        .map(|&k| Ok(prof.value(k as usize)? - base))
        .collect::<Result<Vec<_>>>()?;
    PathSample::new(s_grid.to_vec(), values, 0, "M_T")
}

/// Per-replication fit record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub k_hat: usize,
    pub s_hat: f64,
    pub seed: u64,
    pub design_hash: String,
}
