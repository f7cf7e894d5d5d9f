//! One-dimensional profile maximization on a bounded interval.

use crate::error::{LabError, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping when
/// the bracket is shorter than `tol`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    // the endpoints are candidates too when the maximum sits on the bracket edge
    [(a, f(a)), (c, fc), (d, fd), (b, f(b))].into_iter().fold(
        (a, f64::NEG_INFINITY),
        |best, (x, v)| if v > best.1 { (x, v) } else { best },
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileMax {
    pub x: f64,
    pub value: f64,
    /// Maximizing grid index before refinement.
    pub grid_index: usize,
}

/// Maximize `f` over `[lo, hi]`: evaluate on `points` equispaced nodes,
/// refine every local grid maximum by golden section within its two
/// neighbouring cells, and keep the best.
///
/// Fails with `ProfileGridTooCoarse` when a local maximum that is not next
/// to the grid argmax refines to a value better than the grid argmax's own
/// refinement by more than `tol`.
pub fn maximize_profile(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
) -> Result<ProfileMax> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(LabError::InvalidArgument(format!(
            "bad profile interval [{lo}, {hi}]"
        )));
    }
    if lo == hi || points < 2 {
        return Ok(ProfileMax {
            x: lo,
            value: f(lo),
            grid_index: 0,
        });
    }
    let h = (hi - lo) / (points - 1) as f64;
    let node = |i: usize| {
        if i + 1 == points {
            hi
        } else {
            lo + i as f64 * h
        }
    };
    let vals: Vec<f64> = (0..points).map(|i| f(node(i))).collect();
    let grid_best = (0..points).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });

    let refine = |i: usize| {
        let a = node(i.saturating_sub(1));
        let b = node((i + 1).min(points - 1));
        let (x, v) = golden_max(&f, a, b, tol);
        if v >= vals[i] {
            (x, v)
        } else {
            (node(i), vals[i])
        }
    };
    let (bx, bv) = refine(grid_best);
    let mut best = ProfileMax {
        x: bx,
        value: bv,
        grid_index: grid_best,
    };
    for i in 0..points {
        if i.abs_diff(grid_best) <= 1 {
            continue;
        }
        let left = i == 0 || vals[i] >= vals[i - 1];
        let right = i + 1 == points || vals[i] >= vals[i + 1];
        if !(left && right) {
            continue;
        }
        let (x, v) = refine(i);
        if v > bv + tol * bv.abs().max(1.0) {
            return Err(LabError::ProfileGridTooCoarse {
                beta: x,
                improvement: v - bv,
            });
        }
        if v > best.value {
            best = ProfileMax {
                x,
                value: v,
                grid_index: i,
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_interior_and_edge_maxima() {
        let (x, _) = golden_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        let (x, _) = golden_max(|x| x, 0.0, 1.0, 1e-10);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn profile_refines_between_nodes() {
        let m = maximize_profile(|x| -(x - 0.123_456_789).powi(2), 0.0, 1.0, 11, 1e-12).unwrap();
        assert!((m.x - 0.123_456_789).abs() < 1e-9);
    }

    #[test]
    fn narrow_hidden_peak_is_reported() {
        // a secondary bump at 0.7 that stays below the main peak is fine
        let f = |x: f64| {
            (-(x - 0.2f64).powi(2) * 10.0).exp()
                + 0.9 * (-(x - 0.7f64).powi(2) * 400.0).exp()
                + 0.5 * (-(x - 0.805f64).powi(2) * 1e6).exp()
        };
        assert!(maximize_profile(f, 0.0, 1.0, 101, 1e-10).is_ok());
        // a bump whose node value is below the grid max but whose peak is above
        let g = |x: f64| {
            (-(x - 0.2f64).powi(2) * 10.0).exp() + 1.5 * (-(x - 0.7049f64).powi(2) * 28_870.0).exp()
        };
        assert!(matches!(
            maximize_profile(g, 0.0, 1.0, 101, 1e-10),
            Err(LabError::ProfileGridTooCoarse { .. })
        ));
    }
}
