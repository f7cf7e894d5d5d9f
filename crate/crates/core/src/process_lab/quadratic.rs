use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{LabError, Result};
use crate::exec::Execution;
use crate::linalg::{check_symmetric, psd_sqrt};
use crate::mc_harness::empirical::EmpiricalDist;
use crate::qp::{QpSolution, QuadraticObjective};
use crate::seed::{derive_seed, rng_from_seed, LabRng};
use crate::set_kernel::PolyhedralSet;

/// `M(h) = h'Z - 1/2 h'Vh` with `Z ~ N(z_mean, z_cov)`.
#[derive(Debug, Clone)]
pub struct QuadraticLimit {
    objective: QuadraticObjective,
    z_cov: DMatrix<f64>,
    z_mean: DVector<f64>,
    z_root: DMatrix<f64>,
}

impl QuadraticLimit {
    pub fn new(v: DMatrix<f64>, z_cov: DMatrix<f64>, z_mean: DVector<f64>) -> Result<Self> {
        let d = v.nrows();
        if z_cov.nrows() != d || z_mean.len() != d {
            return Err(LabError::DimensionMismatch {
                expected: d,
                got: if z_cov.nrows() != d {
                    z_cov.nrows()
                } else {
                    z_mean.len()
                },
            });
        }
        let objective = QuadraticObjective::new(v)?;
        check_symmetric(&z_cov, "Z covariance")?;
        let z_root = psd_sqrt(&z_cov, "Z covariance")?;
        Ok(Self {
            objective,
            z_cov,
            z_mean,
            z_root,
        })
    }

    /// `V = I`, `Z ~ N(0, sigma2 I)`.
    pub fn isotropic(dim: usize, sigma2: f64) -> Result<Self> {
        Self::new(
            DMatrix::identity(dim, dim),
            DMatrix::identity(dim, dim) * sigma2,
            DVector::zeros(dim),
        )
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn v(&self) -> &DMatrix<f64> {
        self.objective.v()
    }

    pub fn z_cov(&self) -> &DMatrix<f64> {
        &self.z_cov
    }

    pub fn z_mean(&self) -> &DVector<f64> {
        &self.z_mean
    }

    pub fn objective(&self) -> &QuadraticObjective {
        &self.objective
    }

    pub fn draw_z(&self, rng: &mut LabRng) -> DVector<f64> {
        let xi = DVector::from_fn(self.dim(), |_, _| StandardNormal.sample(rng));
        &self.z_mean + &self.z_root * xi
    }

    pub fn value(&self, h: &DVector<f64>, z: &DVector<f64>) -> f64 {
        h.dot(z) - 0.5 * h.dot(&(self.v() * h))
    }
}

/// Maximizer of `h'z - 1/2 h'Vh` over `P`, with its KKT certificate.
pub fn polyhedral_argmax(
    q: &QuadraticLimit,
    z: &DVector<f64>,
    p: &PolyhedralSet,
) -> Result<QpSolution> {
    if p.dim() != q.dim() {
        return Err(LabError::DimensionMismatch {
            expected: q.dim(),
            got: p.dim(),
        });
    }
    q.objective.maximize(z, &p.constraint_system(), None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralLimitSample {
    /// One maximizer per draw.
    pub draws: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub free_values: Vec<f64>,
    /// Whether any constraint is active at the maximizer.
    pub on_boundary: Vec<bool>,
    pub max_kkt: f64,
}

impl PolyhedralLimitSample {
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|h| h[j]).collect()
    }

    pub fn coordinate_dist(&self, j: usize) -> Result<EmpiricalDist> {
        EmpiricalDist::new(self.coordinate(j))
    }

    pub fn boundary_fraction(&self) -> f64 {
        self.on_boundary.iter().filter(|&&b| b).count() as f64 / self.on_boundary.len() as f64
    }
}

/// `n` draws of the maximizer over `P`; draw `i` uses the stream
/// `derive_seed(seed, i)`.
pub fn sample_polyhedral_limit(
    q: &QuadraticLimit,
    p: &PolyhedralSet,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<PolyhedralLimitSample> {
    if n == 0 {
        return Err(LabError::InvalidArgument("need at least one draw".into()));
    }
    if p.dim() != q.dim() {
        return Err(LabError::DimensionMismatch {
            expected: q.dim(),
            got: p.dim(),
        });
    }
    let sys = p.constraint_system();
    let results = exec.map(n, |i| -> Result<_> {
        let z = q.draw_z(&mut rng_from_seed(derive_seed(seed, i as u64)));
        let sol = q.objective.maximize(&z, &sys, None)?;
        let free = q.objective.unconstrained_argmax(&z);
        Ok((sol, q.value(&free, &z), z))
    });
    let mut out = PolyhedralLimitSample {
        draws: Vec::with_capacity(n),
        values: Vec::with_capacity(n),
        free_values: Vec::with_capacity(n),
        on_boundary: Vec::with_capacity(n),
        max_kkt: 0.0,
    };
    for r in results {
        let (sol, free_value, z) = r?;
        out.values.push(q.value(&sol.h, &z));
        out.free_values.push(free_value);
        out.on_boundary.push(!sol.working_set.is_empty());
        out.max_kkt = out.max_kkt.max(sol.kkt.worst());
        out.draws.push(sol.h.iter().copied().collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set_kernel::Offset;

    #[test]
    fn free_optimum_when_unconstrained() {
        let q = QuadraticLimit::new(
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]),
            DMatrix::identity(2, 2),
            DVector::zeros(2),
        )
        .unwrap();
        let z = DVector::from_vec(vec![1.0, 1.0]);
        let sol = polyhedral_argmax(&q, &z, &PolyhedralSet::full_space(2)).unwrap();
        assert!((sol.h - DVector::from_vec(vec![0.5, 0.25])).amax() < 1e-15);
    }

    #[test]
    fn orthant() {
        let q = QuadraticLimit::isotropic(2, 1.0).unwrap();
        let p = PolyhedralSet::new(
            2,
            vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
            vec![Offset::Finite(0.0), Offset::Finite(0.0)],
        )
        .unwrap();
        let sol = polyhedral_argmax(&q, &DVector::from_vec(vec![-1.0, -2.0]), &p).unwrap();
        assert_eq!(sol.h, DVector::zeros(2));
    }

    #[test]
    fn sampler_is_reproducible_and_feasible() {
        let q = QuadraticLimit::isotropic(1, 1.0).unwrap();
        let p = PolyhedralSet::new(1, vec![vec![-1.0]], vec![Offset::Finite(0.0)]).unwrap();
        let a = sample_polyhedral_limit(&q, &p, 200, 5, Execution::Sequential).unwrap();
        let b = sample_polyhedral_limit(&q, &p, 200, 5, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.draws.iter().all(|h| h[0] >= 0.0));
        assert!(a.values.iter().zip(&a.free_values).all(|(c, f)| c <= f));
    }

    #[test]
    fn dimension_checks() {
        let q = QuadraticLimit::isotropic(2, 1.0).unwrap();
        assert!(polyhedral_argmax(&q, &DVector::zeros(2), &PolyhedralSet::full_space(3)).is_err());
        assert!(QuadraticLimit::new(
            DMatrix::identity(2, 2),
            DMatrix::identity(3, 3),
            DVector::zeros(2)
        )
        .is_err());
    }
}
