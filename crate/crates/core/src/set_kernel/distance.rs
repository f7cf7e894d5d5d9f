use nalgebra::DVector;

use super::grid::{canonical, GridSet};
use super::polyhedral::PolyhedralSet;
use crate::error::{LabError, Result};
use crate::exec::Execution;
use crate::qp;

/// A concrete subset of Euclidean space.
#[derive(Debug, Clone, PartialEq)]
pub enum SetRepr {
    Grid(GridSet),
    Poly(PolyhedralSet),
}

impl SetRepr {
    pub fn dim(&self) -> usize {
        match self {
            SetRepr::Grid(g) => g.dim(),
            SetRepr::Poly(p) => p.dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            SetRepr::Grid(g) => g.contains(x),
            SetRepr::Poly(p) => p.contains(x),
        }
    }

    pub fn affine_image(&self, center: &[f64], scale: &[f64]) -> Result<SetRepr> {
        Ok(match self {
            SetRepr::Grid(g) => SetRepr::Grid(g.affine_image(center, scale)?),
            SetRepr::Poly(p) => SetRepr::Poly(p.affine_image(center, scale)?),
        })
    }
}

impl From<GridSet> for SetRepr {
    fn from(g: GridSet) -> Self {
        SetRepr::Grid(g)
    }
}

impl From<PolyhedralSet> for SetRepr {
    fn from(p: PolyhedralSet) -> Self {
        SetRepr::Poly(p)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(LabError::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn grid_distance(h: &[f64], g: &GridSet) -> f64 {
    if g.is_empty() {
        return f64::INFINITY;
    }
    let h: Vec<f64> = h.iter().map(|&x| canonical(x)).collect();
    if g.dim() == 1 {
        let xs = g.coords();
        let x = h[0];
        let i = xs.partition_point(|&v| v < x);
        let mut best = f64::INFINITY;
        if i < xs.len() {
            best = best.min((xs[i] - x).abs());
        }
        if i > 0 {
            best = best.min((x - xs[i - 1]).abs());
        }
        return best;
    }
    g.points()
        .map(|p| {
            p.iter()
                .zip(&h)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

fn polyhedral_distance(h: &[f64], p: &PolyhedralSet) -> Result<f64> {
    if p.contains(h) {
        return Ok(0.0);
    }
    let point = DVector::from_column_slice(h);
    match qp::project(&point, &p.constraint_system()) {
        Ok(sol) => Ok((sol.h - point).norm()),
        Err(LabError::Infeasible { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Euclidean distance from `h` to `s`; `+inf` when `s` is empty.
pub fn point_to_set_distance(h: &[f64], s: &SetRepr) -> Result<f64> {
    check_dim(s.dim(), h.len())?;
    match s {
        SetRepr::Grid(g) => Ok(grid_distance(h, g)),
        SetRepr::Poly(p) => polyhedral_distance(h, p),
    }
}

/// `sup_{a in A} d(a, B)`, zero for empty `A`.
pub fn directed_distance(a: &GridSet, b: &SetRepr) -> Result<f64> {
    directed_distance_with(a, b, Execution::default())
}

pub fn directed_distance_with(a: &GridSet, b: &SetRepr, exec: Execution) -> Result<f64> {
    check_dim(b.dim(), a.dim())?;
    if a.is_empty() {
        return Ok(0.0);
    }
    let dists = exec.map(a.len(), |i| point_to_set_distance(a.point(i), b));
    let mut sup = 0.0_f64;
    for d in dists {
        sup = sup.max(d?);
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set_kernel::grid::BoxBounds;
    use crate::set_kernel::polyhedral::Offset;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_minimum() {
        let s: SetRepr = GridSet::from_values(vec![1.0 / 3.0, 2.0 / 3.0])
            .unwrap()
            .into();
        assert_relative_eq!(
            point_to_set_distance(&[0.4], &s).unwrap(),
            1.0 / 15.0,
            epsilon = 1e-12
        );
        assert_eq!(point_to_set_distance(&[1.0 / 3.0], &s).unwrap(), 0.0);
    }

    #[test]
    fn empty_set_conventions() {
        let empty: SetRepr = GridSet::empty(1).into();
        assert_eq!(
            point_to_set_distance(&[0.3], &empty).unwrap(),
            f64::INFINITY
        );
        let a = GridSet::from_values(vec![0.0]).unwrap();
        assert_eq!(directed_distance(&a, &empty).unwrap(), f64::INFINITY);
        assert_eq!(directed_distance(&GridSet::empty(1), &empty).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s: SetRepr = GridSet::from_values(vec![0.0]).unwrap().into();
        assert!(matches!(
            point_to_set_distance(&[0.0, 1.0], &s),
            Err(LabError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distance_to_discretized_interval() {
        let b = GridSet::lattice(&BoxBounds::interval(0.0, 1.0).unwrap(), 0.001).unwrap();
        let a = GridSet::from_values(vec![2.0]).unwrap();
        let d = directed_distance(&a, &b.into()).unwrap();
        assert!((d - 1.0).abs() <= 0.001);
    }

    #[test]
    fn polyhedral_distance_halfspace() {
        // {x : x1 + x2 <= 0}
        let p = PolyhedralSet::new(2, vec![vec![1.0, 1.0]], vec![Offset::Finite(0.0)]).unwrap();
        let s: SetRepr = p.into();
        assert_relative_eq!(
            point_to_set_distance(&[1.0, 1.0], &s).unwrap(),
            2.0_f64.sqrt(),
            epsilon = 1e-12
        );
        assert_eq!(point_to_set_distance(&[-1.0, 0.5], &s).unwrap(), 0.0);
    }

    #[test]
    fn subset_has_zero_directed_distance() {
        let b = GridSet::from_values(vec![0.0, 0.5, 1.0, 2.0]).unwrap();
        let a = GridSet::from_values(vec![0.5, 2.0]).unwrap();
        assert_eq!(directed_distance(&a, &b.into()).unwrap(), 0.0);
    }
}
