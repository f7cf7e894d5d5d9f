//! Small dense helpers on top of nalgebra.

use libm::erfc;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{LabError, Result};

const SYMMETRY_TOL: f64 = 1e-10;

pub fn check_square(m: &DMatrix<f64>, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(LabError::InvalidArgument(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    check_square(m, what)?;
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(LabError::NotPositiveDefinite(format!(
                    "{what} is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    check_symmetric(m, what)?;
    Cholesky::new(m.clone())
        .ok_or_else(|| LabError::NotPositiveDefinite(format!("{what}: Cholesky failed")))
}

/// A square root `S` with `S S' = m` for a symmetric PSD matrix, via the
/// eigendecomposition with negative round-off eigenvalues clamped to zero.
pub fn psd_sqrt(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    check_symmetric(m, what)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.amax().max(1.0);
    let mut sqrt_vals = DVector::zeros(n);
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev < -1e-9 * scale {
            return Err(LabError::NotPositiveDefinite(format!(
                "{what} has negative eigenvalue {ev:e}"
            )));
        }
        sqrt_vals[i] = ev.max(0.0).sqrt();
    }
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals))
}

pub fn mat_from_rows(rows: &[Vec<f64>], ncols: usize) -> Result<DMatrix<f64>> {
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(LabError::InvalidArgument(format!(
                "row {i} has {} entries, expected {ncols}",
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn mat_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn psd_sqrt_reconstructs_singular_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let s = psd_sqrt(&m, "m").unwrap();
        let back = &s * s.transpose();
        assert_relative_eq!(back, m, epsilon = 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky(&m, "m").is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(cholesky(&asym, "m").is_err());
    }

    #[test]
    fn normal_cdf_reference() {
        assert_relative_eq!(std_normal_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(
            std_normal_cdf(-1.0),
            0.158_655_253_931_457_05,
            epsilon = 1e-12
        );
    }
}
