use std::fmt;
use std::sync::Arc;

use super::distance::SetRepr;
use crate::error::{LabError, Result};

type Family = Arc<dyn Fn(u64) -> Result<SetRepr> + Send + Sync>;
type VecRule = Arc<dyn Fn(u64) -> Vec<f64> + Send + Sync>;

/// Coordinatewise affine map `x -> s_n * (x - c_n)`.
#[derive(Clone)]
pub struct AffineScaling {
    center: VecRule,
    scale: VecRule,
}

impl AffineScaling {
    pub fn new(
        center: impl Fn(u64) -> Vec<f64> + Send + Sync + 'static,
        scale: impl Fn(u64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            center: Arc::new(center),
            scale: Arc::new(scale),
        }
    }

    pub fn center(&self, n: u64) -> Vec<f64> {
        (self.center)(n)
    }

    pub fn scale(&self, n: u64) -> Vec<f64> {
        (self.scale)(n)
    }
}

/// An indexed family `n -> Lambda_n`, optionally rescaled.
#[derive(Clone)]
pub struct SetSequence {
    family: Family,
    scaling: Option<AffineScaling>,
    pub description: String,
}

impl fmt::Debug for SetSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetSequence")
            .field("description", &self.description)
            .field("scaled", &self.scaling.is_some())
            .finish()
    }
}

impl SetSequence {
    pub fn new(
        description: impl Into<String>,
        family: impl Fn(u64) -> Result<SetRepr> + Send + Sync + 'static,
    ) -> Self {
        Self {
            family: Arc::new(family),
            scaling: None,
            description: description.into(),
        }
    }

    pub fn with_scaling(mut self, scaling: AffineScaling) -> Self {
        self.scaling = Some(scaling);
        self
    }

    /// Restrict every member to the points accepted by `keep` (grid
    /// families only).
    pub fn intersect(
        self,
        description: impl Into<String>,
        keep: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        let inner = self.family.clone();
        let keep = Arc::new(keep);
        Self {
            family: Arc::new(move |n| match inner(n)? {
                SetRepr::Grid(g) => Ok(SetRepr::Grid(g.filter(|p| keep(p)))),
                SetRepr::Poly(_) => Err(LabError::InvalidArgument(
                    "pointwise intersection is only defined for grid families".into(),
                )),
            }),
            scaling: self.scaling,
            description: description.into(),
        }
    }

    pub fn raw(&self, n: u64) -> Result<SetRepr> {
        (self.family)(n)
    }

    /// Member `n` after the affine rescaling, if any.
    pub fn evaluate(&self, n: u64) -> Result<SetRepr> {
        let raw = self.raw(n)?;
        match &self.scaling {
            None => Ok(raw),
            Some(s) => raw.affine_image(&s.center(n), &s.scale(n)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set_kernel::grid::GridSet;

    #[test]
    fn scaled_evaluation_is_pointwise() {
        let seq = SetSequence::new("integers 0..n", |n| {
            Ok(GridSet::from_values((0..=n).map(|k| k as f64).collect())?.into())
        })
        .with_scaling(AffineScaling::new(
            |n| vec![n as f64 / 2.0],
            |n| vec![1.0 / n as f64],
        ));
        let raw = match seq.raw(10).unwrap() {
            SetRepr::Grid(g) => g,
            _ => unreachable!(),
        };
        let scaled = match seq.evaluate(10).unwrap() {
            SetRepr::Grid(g) => g,
            _ => unreachable!(),
        };
        let manual: Vec<f64> = raw.coords().iter().map(|x| (x - 5.0) / 10.0).collect();
        assert_eq!(scaled, GridSet::from_values(manual).unwrap());
        assert_eq!(seq.evaluate(10).unwrap(), seq.evaluate(10).unwrap());
    }
}
