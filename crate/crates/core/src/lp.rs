//! Max-min-slack feasibility program for systems `b + G x <= 0`.
//!
//! Solves `max t  s.t.  G_j x + t <= -b_j  (every row),  t <= 1`, with `x`
//! free. The optimum `t*` is the largest uniform slack any point achieves
//! (capped at one so the program stays bounded).

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SlackOptimum {
    pub point: Vec<f64>,
    pub min_slack: f64,
}

/// `rows[j]` are the coefficients of `G_j`, `offsets[j]` is `b_j`.
pub fn max_min_slack(dim: usize, rows: &[Vec<f64>], offsets: &[f64]) -> Result<SlackOptimum> {
    if rows.len() != offsets.len() {
        return Err(LabError::DimensionMismatch {
            expected: rows.len(),
            got: offsets.len(),
        });
    }
    if rows.is_empty() {
        return Ok(SlackOptimum {
            point: vec![0.0; dim],
            min_slack: 1.0,
        });
    }
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let xs: Vec<_> = (0..dim)
        .map(|_| problem.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let t = problem.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    for (row, &b) in rows.iter().zip(offsets) {
        if row.len() != dim {
            return Err(LabError::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        let mut expr: Vec<_> = xs
            .iter()
            .zip(row)
            .filter(|(_, &c)| c != 0.0)
            .map(|(&v, &c)| (v, c))
            .collect();
        expr.push((t, 1.0));
        problem.add_constraint(expr.as_slice(), ComparisonOp::Le, -b);
    }
    let solution = problem
        .solve()
        .map_err(|e| LabError::Lp(e.to_string()))?
        .into_solution()
        .map_err(|_| LabError::Lp("solve interrupted".into()))?;
    let point: Vec<f64> = xs.iter().map(|&v| solution.var_value(v)).collect();
    // Report the slack actually achieved by the returned point.
    let min_slack = rows
        .iter()
        .zip(offsets)
        .map(|(row, &b)| -(b + row.iter().zip(&point).map(|(g, x)| g * x).sum::<f64>()))
        .fold(f64::INFINITY, f64::min)
        .min(1.0);
    Ok(SlackOptimum { point, min_slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_row_reaches_cap() {
        let opt = max_min_slack(1, &[vec![1.0]], &[0.0]).unwrap();
        assert_relative_eq!(opt.min_slack, 1.0, epsilon = 1e-9);
        assert_relative_eq!(opt.point[0], -1.0, epsilon = 1e-9);
    }

    #[test]
    fn opposing_rows_have_zero_slack() {
        let opt = max_min_slack(1, &[vec![1.0], vec![-1.0]], &[0.0, 0.0]).unwrap();
        assert!(opt.min_slack.abs() < 1e-9);
    }

    #[test]
    fn infeasible_system_has_negative_slack() {
        // x <= -1 and x >= 1
        let opt = max_min_slack(1, &[vec![1.0], vec![-1.0]], &[1.0, 1.0]).unwrap();
        assert_relative_eq!(opt.min_slack, -1.0, epsilon = 1e-9);
    }
}
