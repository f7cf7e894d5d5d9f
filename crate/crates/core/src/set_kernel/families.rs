//! Built-in set sequences with known limits.

use super::constructions::{rescaled_break_set, BreakLocation};
use super::grid::{BoxBounds, GridSet};
use super::polyhedral::{Offset, PolyhedralSet};
use super::sequence::{AffineScaling, SetSequence};
use crate::error::{LabError, Result};

pub const FAMILIES: [&str; 5] = [
    "remark3",
    "lemma2a",
    "lemma2b",
    "lemma6-weak",
    "lemma6-semistrong",
];

/// A sequence together with the window, schedule and grid it is examined on.
#[derive(Debug, Clone)]
pub struct PkProblem {
    pub name: String,
    pub sequence: SetSequence,
    pub window: BoxBounds,
    pub schedule: Vec<u64>,
    pub grid_step: f64,
}

/// `{1/n, 1 - 1/n}` on `[0, 1]`.
pub fn two_point_sequence() -> SetSequence {
    SetSequence::new("{1/n, 1 - 1/n}", |n| {
        let n = n as f64;
        Ok(GridSet::from_values(vec![1.0 / n, 1.0 - 1.0 / n])?.into())
    })
}

/// Membership in `F = [0, 1/2] ∪ {1}`.
pub fn in_f(x: &[f64]) -> bool {
    (0.0..=0.5).contains(&x[0]) || x[0] == 1.0
}

pub fn remark3(intersect_f: bool) -> Result<PkProblem> {
    let base = two_point_sequence();
    let (name, sequence) = if intersect_f {
        let s = base.intersect("{1/n, 1 - 1/n} ∩ ([0, 1/2] ∪ {1})", in_f);
        ("remark3 ∩ F".to_string(), s)
    } else {
        ("remark3".to_string(), base)
    };
    Ok(PkProblem {
        name,
        sequence,
        window: BoxBounds::interval(0.0, 1.0)?,
        schedule: vec![10, 100, 1000, 5000, 10_000],
        grid_step: 1e-3,
    })
}

/// `v_T^2 (Lambda_T - k0)` along `T`, with `v_T = T^{-kappa}`.
pub fn break_set_sequence(
    location: BreakLocation,
    kappa: f64,
    lambda1: f64,
    lambda2: f64,
) -> Result<SetSequence> {
    if !(kappa > 0.0 && kappa < 0.5) {
        return Err(LabError::InvalidArgument(format!(
            "kappa must lie in (0, 1/2), got {kappa}"
        )));
    }
    // fail on bad trimming before any member is built
    super::constructions::trimming_range(1, lambda1, lambda2)?;
    let desc = match location {
        BreakLocation::Fraction(tau) => format!("T^(-2 kappa) (Lambda_T - [{tau} T])"),
        BreakLocation::Drift(a) => format!("T^(-2 kappa) (Lambda_T - k0), drift a = {a}"),
    };
    Ok(SetSequence::new(desc, move |t| {
        let t = t as usize;
        let vt = (t as f64).powf(-kappa);
        let k0 = location.break_date(t, lambda2, vt)?;
        Ok(rescaled_break_set(t, k0, vt, lambda1, lambda2)?.into())
    }))
}

pub fn lemma2(location: BreakLocation) -> Result<PkProblem> {
    let name = match location {
        BreakLocation::Fraction(_) => "lemma2a".to_string(),
        BreakLocation::Drift(a) => format!("lemma2b (a = {a})"),
    };
    Ok(PkProblem {
        name,
        sequence: break_set_sequence(location, 0.25, 0.15, 0.85)?,
        window: BoxBounds::interval(-3.0, 3.0)?,
        schedule: vec![1_000, 10_000, 100_000, 1_000_000],
        grid_step: 0.01,
    })
}

/// `{beta >= 0, beta <= pi2}` in `(beta, pi2)` coordinates.
pub fn informative_inequalities() -> PolyhedralSet {
    PolyhedralSet::new(
        2,
        vec![vec![-1.0, 0.0], vec![1.0, -1.0]],
        vec![Offset::Finite(0.0), Offset::Finite(0.0)],
    )
    .expect("static constraint set")
}

/// `{(beta, sqrt(n)(pi2 - pi2_n))}` with `pi2_n = pi2_0` fixed.
pub fn weak_rescaling(pi2_0: f64) -> SetSequence {
    let theta = informative_inequalities();
    SetSequence::new(
        "{(beta, sqrt(n)(pi2 - pi2_0)) : (beta, pi2) in Theta}",
        move |_| Ok(theta.clone().into()),
    )
    .with_scaling(AffineScaling::new(
        move |_| vec![0.0, pi2_0],
        |n| vec![1.0, (n as f64).sqrt()],
    ))
}

/// `{(a_n(beta - beta_n), sqrt(n)(pi2 - pi2_n))}` with `a_n = n^{1/3}` and
/// the drifts chosen so that `a_n g(beta_n, pi_n) = (b1, b2)`.
pub fn semistrong_rescaling(b1: f64, b2: f64) -> SetSequence {
    let theta = informative_inequalities();
    let center = move |n: u64| {
        let an = (n as f64).cbrt();
        let beta_n = -b1 / an;
        vec![beta_n, beta_n - b2 / an]
    };
    SetSequence::new(
        "{(a_n(beta - beta_n), sqrt(n)(pi2 - pi2_n)) : (beta, pi2) in Theta}",
        move |_| Ok(theta.clone().into()),
    )
    .with_scaling(AffineScaling::new(center, |n| {
        let n = n as f64;
        vec![n.cbrt(), n.sqrt()]
    }))
}

pub fn lemma6_weak() -> Result<PkProblem> {
    Ok(PkProblem {
        name: "lemma6-weak".into(),
        sequence: weak_rescaling(0.5),
        window: BoxBounds::new(vec![-1.0, -1.0], vec![1.0, 1.0])?,
        schedule: vec![100, 10_000, 1_000_000],
        grid_step: 0.05,
    })
}

pub fn lemma6_semistrong() -> Result<PkProblem> {
    Ok(PkProblem {
        name: "lemma6-semistrong".into(),
        sequence: semistrong_rescaling(-1.0, -1.0),
        window: BoxBounds::new(vec![-2.0, -1.0], vec![2.0, 1.0])?,
        schedule: vec![1_000, 1_000_000, 1_000_000_000, 1_000_000_000_000],
        grid_step: 0.05,
    })
}

/// Look up a built-in family; `a` is the drift for `lemma2b`.
pub fn family(name: &str, a: Option<f64>) -> Result<Vec<PkProblem>> {
    match name {
        "remark3" => Ok(vec![remark3(false)?, remark3(true)?]),
        "lemma2a" => Ok(vec![lemma2(BreakLocation::Fraction(0.5))?]),
        "lemma2b" => match a {
            Some(a) => Ok(vec![lemma2(BreakLocation::Drift(a))?]),
            None => [-0.5, 0.0, 1.0]
                .into_iter()
                .map(|a| lemma2(BreakLocation::Drift(a)))
                .collect(),
        },
        "lemma6-weak" => Ok(vec![lemma6_weak()?]),
        "lemma6-semistrong" => Ok(vec![lemma6_semistrong()?]),
        other => Err(LabError::InvalidArgument(format!(
            "unknown pk family '{other}'; known: {}",
            FAMILIES.join(", ")
        ))),
    }
}
