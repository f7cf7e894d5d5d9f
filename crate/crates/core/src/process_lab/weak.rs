//! Limit experiment of the weakly identified toy model
//!
//! ```text
//! y = pi1 x1 + beta pi1 x2 + pi2 x3 + sigma e,   pi1_n = c / sqrt(n)
//! ```
//!
//! With `h = sqrt(n)(pi - pi_n)` and `Z ~ N(0, sigma^2 I_3)` the localized
//! least-squares objective converges to
//!
//! ```text
//! M(beta, h) = h1 Z1 + (h1 beta + e) Z2 + h2 Z3 - 1/2 (h1^2 + (h1 beta + e)^2 + h2^2),
//! e = c (beta - beta_n)
//! ```
//!
//! which is concentrated in closed form over `h` and then maximized over
//! `beta` in `B^W`.

use rand_distr::{Distribution, Normal};

use crate::error::{LabError, Result};
use crate::exec::Execution;
use crate::optim::maximize_profile;
use crate::seed::{derive_seed, rng_from_seed};

pub const PROFILE_POINTS: usize = 2001;
pub const PROFILE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakLimit {
    pub c: f64,
    pub sigma: f64,
    pub beta_n: f64,
    /// `B^W = [lo, hi]`
    pub lo: f64,
    pub hi: f64,
}

impl WeakLimit {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0)
            || !(self.lo <= self.hi)
            || !self.lo.is_finite()
            || !self.hi.is_finite()
        {
            return Err(LabError::InvalidArgument(format!(
                "invalid weak limit {self:?}"
            )));
        }
        Ok(())
    }

    /// Concentrated objective and the maximizing `h1`.
    pub fn profile(&self, beta: f64, z: &[f64; 3]) -> (f64, f64) {
        let e = self.c * (beta - self.beta_n);
        let a = z[0] + beta * (z[1] - e);
        let w = 1.0 + beta * beta;
        (0.5 * a * a / w + e * z[1] - 0.5 * e * e, a / w)
    }

    /// `(beta*, h1*, h2*)` for one draw of `Z`.
    pub fn argmax(&self, z: &[f64; 3]) -> Result<[f64; 3]> {
        Ok(self.argmax_value(z)?.0)
    }

    /// The maximizer and the supremum of `M`.
    pub fn argmax_value(&self, z: &[f64; 3]) -> Result<([f64; 3], f64)> {
        let m = maximize_profile(
            |b| self.profile(b, z).0,
            self.lo,
            self.hi,
            PROFILE_POINTS,
            PROFILE_TOL,
        )?;
        Ok((
            [m.x, self.profile(m.x, z).1, z[2]],
            m.value + 0.5 * z[2] * z[2],
        ))
    }
}

/// `n` draws of the weak-regime limit argmax; draw `i` uses the stream
/// `derive_seed(seed, i)`.
pub fn sample_weak_limit(
    limit: &WeakLimit,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<[f64; 3]>> {
    Ok(sample_weak_limit_values(limit, n, seed, exec)?
        .into_iter()
        .map(|(h, _)| h)
        .collect())
}

/// Like [`sample_weak_limit`], paired with the supremum of each draw.
pub fn sample_weak_limit_values(
    limit: &WeakLimit,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<([f64; 3], f64)>> {
    limit.validate()?;
    if n == 0 {
        return Err(LabError::InvalidArgument("need at least one draw".into()));
    }
    let normal = Normal::new(0.0, limit.sigma).expect("positive sd");
    exec.map(n, |i| {
        let mut rng = rng_from_seed(derive_seed(seed, i as u64));
        let z = [
            normal.sample(&mut rng),
            normal.sample(&mut rng),
            normal.sample(&mut rng),
        ];
        limit.argmax_value(&z)
    })
    .into_iter()
    .collect()
}
