use serde::{Deserialize, Serialize};

use super::grid::GridSet;
use super::polyhedral::{Offset, PolyhedralSet};
use crate::error::{LabError, Result};
use crate::lp::max_min_slack;

/// Greatest integer not exceeding `x`, with a relative guard so that
/// products like `0.85 * 1000` land on the intended integer.
pub fn int_part(x: f64) -> i64 {
    (x + 1e-9 * x.abs().max(1.0)).floor() as i64
}

/// Where the true break sits relative to the sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakLocation {
    /// `k0 = [tau T]`
    Fraction(f64),
    /// `k0 = [lambda2 T - a v_T^{-2}]`
    Drift(f64),
}

impl BreakLocation {
    pub fn break_date(&self, t: usize, lambda2: f64, vt: f64) -> Result<usize> {
        let k0 = match *self {
            BreakLocation::Fraction(tau) => int_part(tau * t as f64),
            BreakLocation::Drift(a) => int_part(lambda2 * t as f64 - a / (vt * vt)),
        };
        if k0 < 1 || k0 > t as i64 {
            return Err(LabError::InvalidArgument(format!(
                "break date {k0} implied by {self:?} falls outside 1..={t}"
            )));
        }
        Ok(k0 as usize)
    }
}

/// Candidate break dates `{floor(l1 T), ..., floor(l2 T)}`.
pub fn trimming_range(t: usize, lambda1: f64, lambda2: f64) -> Result<(usize, usize)> {
    if !(0.0 < lambda1 && lambda1 < lambda2 && lambda2 < 1.0) {
        return Err(LabError::InvalidArgument(format!(
            "trimming order violated: need 0 < lambda1 < lambda2 < 1, got lambda1 = {lambda1}, lambda2 = {lambda2}"
        )));
    }
    let lo = int_part(lambda1 * t as f64) as usize;
    let hi = int_part(lambda2 * t as f64) as usize;
    Ok((lo, hi))
}

/// `v_T^2 (Lambda_T - k0)` as a point set.
pub fn rescaled_break_set(
    t: usize,
    k0: usize,
    vt: f64,
    lambda1: f64,
    lambda2: f64,
) -> Result<GridSet> {
    let (lo, hi) = trimming_range(t, lambda1, lambda2)?;
    if k0 < 1 || k0 > t {
        return Err(LabError::InvalidArgument(format!(
            "k0 = {k0} outside 1..={t}"
        )));
    }
    if !(vt > 0.0) || !vt.is_finite() {
        return Err(LabError::InvalidArgument(format!(
            "v_T must be positive, got {vt}"
        )));
    }
    let v2 = vt * vt;
    let values = (lo..=hi).map(|k| v2 * (k as f64 - k0 as f64)).collect();
    GridSet::from_values(values)
}

/// `{ lambda : b + G lambda <= 0 }` for a drift vector `b` in `[-inf, 0]^{d_g}`.
pub fn linearized_boundary_set(b: &[Offset], g: &[Vec<f64>], dim: usize) -> Result<PolyhedralSet> {
    if let Some(j) = b
        .iter()
        .position(|o| matches!(o, Offset::Finite(x) if *x > 0.0))
    {
        return Err(LabError::InvalidArgument(format!(
            "drift entry {j} is positive; the limit of sqrt(n) g(theta_n) lies in [-inf, 0]"
        )));
    }
    PolyhedralSet::new(dim, g.to_vec(), b.to_vec())
}

pub const MFCQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MfcqResult {
    pub holds: bool,
    pub witness: Option<Vec<f64>>,
    /// Largest uniform slack `min_j -(b_j + G_j x)` found, capped at one.
    pub min_slack: f64,
}

/// Is there a point where every finite row holds strictly?
pub fn mfcq_check(p: &PolyhedralSet) -> Result<MfcqResult> {
    let rows: Vec<usize> = p.active_rows();
    let g: Vec<Vec<f64>> = rows.iter().map(|&j| p.rows()[j].clone()).collect();
    let b: Vec<f64> = rows
        .iter()
        .map(|&j| p.offsets()[j].finite().expect("active rows are finite"))
        .collect();
    let opt = max_min_slack(p.dim(), &g, &b)?;
    let holds = opt.min_slack > MFCQ_TOL;
    Ok(MfcqResult {
        holds,
        witness: holds.then_some(opt.point),
        min_slack: opt.min_slack,
    })
}

/// Affine constraints `g(beta, pi) = offset + G_beta beta + G_pi pi <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct AffineConstraints {
    pub offset: Vec<f64>,
    pub g_beta: Vec<Vec<f64>>,
    pub g_pi: Vec<Vec<f64>>,
}

impl AffineConstraints {
    pub fn rows(&self) -> usize {
        self.offset.len()
    }

    pub fn d_beta(&self) -> usize {
        self.g_beta.first().map_or(0, Vec::len)
    }

    pub fn d_pi(&self) -> usize {
        self.g_pi.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.rows();
        if self.g_beta.len() != m || self.g_pi.len() != m {
            return Err(LabError::InvalidArgument(
                "constraint blocks must have one row per offset".into(),
            ));
        }
        let (db, dp) = (self.d_beta(), self.d_pi());
        if self.g_beta.iter().any(|r| r.len() != db) || self.g_pi.iter().any(|r| r.len() != dp) {
            return Err(LabError::InvalidArgument("ragged constraint rows".into()));
        }
        Ok(())
    }

    pub fn eval(&self, beta: &[f64], pi: &[f64]) -> Vec<f64> {
        (0..self.rows())
            .map(|j| {
                self.offset[j]
                    + self.g_beta[j]
                        .iter()
                        .zip(beta)
                        .map(|(a, x)| a * x)
                        .sum::<f64>()
                    + self.g_pi[j].iter().zip(pi).map(|(a, x)| a * x).sum::<f64>()
            })
            .collect()
    }
}

/// Geometry needed for the weak and semi-strong limits of the local
/// parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakIdGeometry {
    pub constraints: AffineConstraints,
    pub pi0: Vec<f64>,
    /// `lim a_n g(beta_n, pi_n)`, entries in `[-inf, 0]`.
    pub drift: Vec<Offset>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakIdLimitSets {
    /// `{beta : (beta, pi0) in Theta}`; the weak limit is this set times the
    /// whole `pi` space.
    pub b_w: PolyhedralSet,
    /// `{lambda : b + G_beta lambda <= 0}`; the semi-strong limit is this set
    /// times the whole `pi` space.
    pub b_ss: PolyhedralSet,
    pub d_pi: usize,
    pub mfcq: MfcqResult,
    pub warning: Option<String>,
}

fn pad_pi(set: &PolyhedralSet, d_pi: usize) -> Result<PolyhedralSet> {
    let rows = set
        .rows()
        .iter()
        .map(|r| {
            let mut row = r.clone();
            row.resize(r.len() + d_pi, 0.0);
            row
        })
        .collect();
    PolyhedralSet::new(set.dim() + d_pi, rows, set.offsets().to_vec())
}

impl WeakIdLimitSets {
    /// `B^W x R^{d_pi}` in `(beta, h_pi)` coordinates.
    pub fn lambda_w(&self) -> Result<PolyhedralSet> {
        pad_pi(&self.b_w, self.d_pi)
    }

    /// `B^SS x R^{d_pi}` in `(h_beta, h_pi)` coordinates.
    pub fn lambda_ss(&self) -> Result<PolyhedralSet> {
        pad_pi(&self.b_ss, self.d_pi)
    }
}

pub fn weakid_limit_sets(geom: &WeakIdGeometry) -> Result<WeakIdLimitSets> {
    let c = &geom.constraints;
    c.validate()?;
    if geom.pi0.len() != c.d_pi() {
        return Err(LabError::DimensionMismatch {
            expected: c.d_pi(),
            got: geom.pi0.len(),
        });
    }
    if geom.drift.len() != c.rows() {
        return Err(LabError::DimensionMismatch {
            expected: c.rows(),
            got: geom.drift.len(),
        });
    }
    let d_beta = c.d_beta();
    let at_pi0 = c.eval(&vec![0.0; d_beta], &geom.pi0);
    let b_w = PolyhedralSet::new(
        d_beta,
        c.g_beta.clone(),
        at_pi0.into_iter().map(Offset::Finite).collect(),
    )?;
    let b_ss = linearized_boundary_set(&geom.drift, &c.g_beta, d_beta)?;
    let mfcq = mfcq_check(&b_ss)?;
    let warning = (!mfcq.holds).then(|| {
        format!(
            "MFCQ fails for the semi-strong limit set (best uniform slack {:e}); the set limit is not guaranteed",
            mfcq.min_slack
        )
    });
    Ok(WeakIdLimitSets {
        b_w,
        b_ss,
        d_pi: c.d_pi(),
        mfcq,
        warning,
    })
}

/// Endpoints of a one-dimensional polyhedral set (infinite when unbounded).
pub fn interval_of(p: &PolyhedralSet) -> Result<(f64, f64)> {
    if p.dim() != 1 {
        return Err(LabError::DimensionMismatch {
            expected: 1,
            got: p.dim(),
        });
    }
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (row, o) in p.rows().iter().zip(p.offsets()) {
        let Some(b) = o.finite() else { continue };
        let a = row[0];
        if a > 0.0 {
            hi = hi.min(-b / a);
        } else if a < 0.0 {
            lo = lo.max(-b / a);
        } else if b > 0.0 {
            return Ok((f64::INFINITY, f64::NEG_INFINITY));
        }
    }
    Ok((lo, hi))
}
