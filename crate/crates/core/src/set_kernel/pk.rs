//! Numeric Painlevé-Kuratowski limits on a bounded window.
//!
//! A grid point `h` of the window `K` belongs to the estimated limit when its
//! distance to the last two members of the schedule is below the membership
//! radius (half a grid step by default). Convergence is judged on directed
//! distances in both directions, after subtracting the radius: the excess
//! sequences must be non-increasing and end below `converge_tol`.

use serde::Serialize;

use super::distance::{directed_distance_with, point_to_set_distance, SetRepr};
use super::grid::{BoxBounds, GridSet};
use super::sequence::SetSequence;
use crate::error::{LabError, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy)]
pub struct PkOptions {
    /// Membership radius in units of the grid step.
    pub radius_factor: f64,
    /// Largest final excess distance still flagged as converged; defaults to
    /// one grid step.
    pub converge_tol: Option<f64>,
    pub exec: Execution,
}

impl Default for PkOptions {
    fn default() -> Self {
        Self {
            radius_factor: 0.5,
            converge_tol: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PkDiagnostics {
    pub schedule: Vec<u64>,
    pub grid_step: f64,
    pub radius: f64,
    /// `d(estimate, Lambda_n)` along the schedule.
    pub forward: Vec<f64>,
    /// `d(Lambda_n ∩ K, estimate)` along the schedule.
    pub backward: Vec<f64>,
    pub forward_excess: Vec<f64>,
    pub backward_excess: Vec<f64>,
    pub converge_tol: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PkEstimate {
    pub set: GridSet,
    pub diagnostics: PkDiagnostics,
}

fn non_increasing(xs: &[f64]) -> bool {
    xs.windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 || w[0].is_infinite())
}

fn member_within_window(set: &SetRepr, window: &BoxBounds, lattice: &GridSet) -> GridSet {
    match set {
        SetRepr::Grid(g) => g.intersect_box(window),
        // a polyhedron meets the window in a continuum; use its lattice points
        SetRepr::Poly(p) => lattice.filter(|x| p.contains(x)),
    }
}

pub fn pk_limit_estimate(
    seq: &SetSequence,
    window: &BoxBounds,
    schedule: &[u64],
    grid_step: f64,
) -> Result<PkEstimate> {
    pk_limit_estimate_with(seq, window, schedule, grid_step, PkOptions::default())
}

pub fn pk_limit_estimate_with(
    seq: &SetSequence,
    window: &BoxBounds,
    schedule: &[u64],
    grid_step: f64,
    opts: PkOptions,
) -> Result<PkEstimate> {
    if schedule.is_empty() {
        return Err(LabError::InvalidArgument("empty index schedule".into()));
    }
    if schedule.len() < 3 {
        return Err(LabError::InvalidArgument(format!(
            "index schedule needs at least 3 entries, got {}",
            schedule.len()
        )));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::InvalidArgument(
            "index schedule must be strictly increasing".into(),
        ));
    }
    if !(grid_step > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let radius = opts.radius_factor * grid_step;
    let converge_tol = opts.converge_tol.unwrap_or(grid_step);

    let members: Vec<SetRepr> = schedule
        .iter()
        .map(|&n| seq.evaluate(n))
        .collect::<Result<_>>()?;
    for m in &members {
        if m.dim() != window.dim() {
            return Err(LabError::DimensionMismatch {
                expected: window.dim(),
                got: m.dim(),
            });
        }
    }

    let lattice = GridSet::lattice(window, grid_step)?;
    let last = &members[members.len() - 1];
    let prev = &members[members.len() - 2];
    let keep = opts.exec.map(lattice.len(), |i| -> Result<bool> {
        let h = lattice.point(i);
        let d = point_to_set_distance(h, last)?.max(point_to_set_distance(h, prev)?);
        Ok(d < radius)
    });
    let mut flat = Vec::new();
    for (i, k) in keep.into_iter().enumerate() {
        if k? {
            flat.extend_from_slice(lattice.point(i));
        }
    }
    let estimate = GridSet::from_flat(window.dim(), flat)?;
    let estimate_repr = SetRepr::Grid(estimate.clone());

    let mut forward = Vec::with_capacity(members.len());
    let mut backward = Vec::with_capacity(members.len());
    for m in &members {
        forward.push(directed_distance_with(&estimate, m, opts.exec)?);
        let inside = member_within_window(m, window, &lattice);
        backward.push(directed_distance_with(&inside, &estimate_repr, opts.exec)?);
    }
    let excess = |xs: &[f64]| -> Vec<f64> { xs.iter().map(|d| (d - radius).max(0.0)).collect() };
    let forward_excess = excess(&forward);
    let backward_excess = excess(&backward);
    let converged = non_increasing(&forward_excess)
        && non_increasing(&backward_excess)
        && forward_excess.last().copied().unwrap_or(0.0) <= converge_tol
        && backward_excess.last().copied().unwrap_or(0.0) <= converge_tol;

    Ok(PkEstimate {
        set: estimate,
        diagnostics: PkDiagnostics {
            schedule: schedule.to_vec(),
            grid_step,
            radius,
            forward,
            backward,
            forward_excess,
            backward_excess,
            converge_tol,
            converged,
        },
    })
}

/// Hausdorff distance between two finite sets (`+inf` if exactly one is
/// empty).
pub fn hausdorff(a: &GridSet, b: &GridSet) -> Result<f64> {
    let ab = directed_distance_with(a, &SetRepr::Grid(b.clone()), Execution::default())?;
    let ba = directed_distance_with(b, &SetRepr::Grid(a.clone()), Execution::default())?;
    Ok(ab.max(ba))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set_kernel::polyhedral::{Offset, PolyhedralSet};

    #[test]
    fn schedule_validation() {
        let seq = SetSequence::new("const", |_| Ok(GridSet::from_values(vec![0.0])?.into()));
        let k = BoxBounds::interval(0.0, 1.0).unwrap();
        assert!(pk_limit_estimate(&seq, &k, &[], 0.1).is_err());
        assert!(pk_limit_estimate(&seq, &k, &[1, 2], 0.1).is_err());
        assert!(pk_limit_estimate(&seq, &k, &[1, 3, 2], 0.1).is_err());
        assert!(pk_limit_estimate(&seq, &k, &[1, 2, 3], 0.0).is_err());
    }

    #[test]
    fn constant_grid_sequence_has_zero_excess() {
        let lam = GridSet::from_values(vec![0.1, 0.35, 0.8]).unwrap();
        let seq = SetSequence::new("const", move |_| Ok(lam.clone().into()));
        let k = BoxBounds::interval(0.0, 1.0).unwrap();
        let est = pk_limit_estimate(&seq, &k, &[1, 2, 3, 4], 0.01).unwrap();
        assert!(est.diagnostics.forward_excess.iter().all(|&d| d == 0.0));
        assert!(est.diagnostics.backward_excess.iter().all(|&d| d == 0.0));
        assert!(est.diagnostics.converged);
        assert!(est.set.contains(&[0.35]) && est.set.contains(&[0.8]));
    }

    #[test]
    fn constant_polyhedral_sequence() {
        // [0.2, 0.6]
        let p = PolyhedralSet::new(
            1,
            vec![vec![-1.0], vec![1.0]],
            vec![Offset::Finite(0.2), Offset::Finite(-0.6)],
        )
        .unwrap();
        let seq = SetSequence::new("const interval", move |_| Ok(p.clone().into()));
        let k = BoxBounds::interval(0.0, 1.0).unwrap();
        let est = pk_limit_estimate(&seq, &k, &[1, 2, 3], 0.05).unwrap();
        let comps = est.set.components_1d(0.06);
        assert_eq!(comps.len(), 1);
        assert!((comps[0].0 - 0.2).abs() < 1e-12 && (comps[0].1 - 0.6).abs() < 1e-12);
        assert!(est.diagnostics.forward_excess.iter().all(|&d| d == 0.0));
        assert!(est.diagnostics.backward_excess.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn empty_sequence_in_window() {
        let seq = SetSequence::new("far away", |_| Ok(GridSet::from_values(vec![10.0])?.into()));
        let k = BoxBounds::interval(0.0, 1.0).unwrap();
        let est = pk_limit_estimate(&seq, &k, &[1, 2, 3], 0.1).unwrap();
        assert!(est.set.is_empty());
        assert!(est.diagnostics.converged);
    }

    #[test]
    fn oscillating_sequence_is_not_converged() {
        // alternates between {0.2} and {0.8}; last two entries disagree
        let seq = SetSequence::new("flip", |n| {
            Ok(GridSet::from_values(vec![if n % 2 == 0 { 0.2 } else { 0.8 }])?.into())
        });
        let k = BoxBounds::interval(0.0, 1.0).unwrap();
        let est = pk_limit_estimate(&seq, &k, &[1, 2, 3, 4], 0.01).unwrap();
        assert!(est.set.is_empty());
        assert!(!est.diagnostics.converged);
    }
}
