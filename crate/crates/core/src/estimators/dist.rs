use rand::Rng;
use rand_distr::{Distribution, Normal, StudentT, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Scalar generator for regressors and errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dist {
    Normal {
        mean: f64,
        sd: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `scale * t_df`
    StudentT {
        df: f64,
        scale: f64,
    },
    Constant {
        value: f64,
    },
}

impl Default for Dist {
    fn default() -> Self {
        Dist::Normal { mean: 0.0, sd: 1.0 }
    }
}

impl Dist {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Dist::Normal { mean, sd } => mean.is_finite() && sd >= 0.0 && sd.is_finite(),
            Dist::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Dist::StudentT { df, scale } => df > 2.0 && scale > 0.0 && scale.is_finite(),
            Dist::Constant { value } => value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(LabError::InvalidArgument(format!(
                "invalid generator {self:?} (Student t needs df > 2 for a finite variance)"
            )))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Dist::Normal { mean, .. } => mean,
            Dist::Uniform { lo, hi } => 0.5 * (lo + hi),
            Dist::StudentT { .. } => 0.0,
            Dist::Constant { value } => value,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Dist::Normal { sd, .. } => sd * sd,
            Dist::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            Dist::StudentT { df, scale } => scale * scale * df / (df - 2.0),
            Dist::Constant { .. } => 0.0,
        }
    }

    pub fn second_moment(&self) -> f64 {
        self.variance() + self.mean().powi(2)
    }

    /// Call `validate` first; invalid parameters panic here.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Normal { mean, sd } => Normal::new(mean, sd).expect("validated").sample(rng),
            Dist::Uniform { lo, hi } => Uniform::new(lo, hi).expect("validated").sample(rng),
            Dist::StudentT { df, scale } => {
                scale * StudentT::new(df).expect("validated").sample(rng)
            }
            Dist::Constant { value } => value,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn moments_and_validation() {
        assert_eq!(Dist::Uniform { lo: 0.0, hi: 1.0 }.variance(), 1.0 / 12.0);
        assert_eq!(
            Dist::StudentT {
                df: 4.0,
                scale: 1.0
            }
            .variance(),
            2.0
        );
        assert!(Dist::StudentT {
            df: 2.0,
            scale: 1.0
        }
        .validate()
        .is_err());
        assert!(Dist::Normal {
            mean: 0.0,
            sd: -1.0
        }
        .validate()
        .is_err());
        let mut rng = rng_from_seed(1);
        assert_eq!(Dist::Constant { value: 3.0 }.sample(&mut rng), 3.0);
    }

    #[test]
    fn json_shape() {
        let d: Dist = serde_json::from_str(r#"{"dist":"normal","mean":0,"sd":2}"#).unwrap();
        assert_eq!(d, Dist::Normal { mean: 0.0, sd: 2.0 });
        assert!(
            serde_json::from_str::<Dist>(r#"{"dist":"normal","mean":0,"sd":2,"x":1}"#).is_err()
        );
    }
}
