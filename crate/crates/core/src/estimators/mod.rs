//! Simulators and estimators for the three toy models.

pub mod boundary;
pub mod break_model;
pub mod dist;
pub mod weakid;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use boundary::{fit_boundary_model, BoundaryDesign, BoundaryFit};
pub use break_model::{
    estimate_break, localized_break_objective, simulate_break_data, v_t_objective, BreakData,
    BreakDesign, BreakFitResult, FitRecord, VProfile,
};
pub use dist::Dist;
pub use weakid::{
    fit_weakid_model, two_rate_contrast, RateContrast, WeakIdDesign, WeakIdFit, WeakIdParams,
    WeakIdRegime, WeakIdStats,
};

/// First 16 hex digits of the SHA-256 of the design's JSON encoding.
pub fn design_hash<T: Serialize + ?Sized>(design: &T) -> String {
    let json = serde_json::to_vec(design).expect("designs serialize");
    Sha256::digest(&json)
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Either parameter-on-the-boundary design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ToyModelDesign {
    Boundary(BoundaryDesign),
    Weakid(WeakIdDesign),
}

impl ToyModelDesign {
    pub fn hash(&self) -> String {
        design_hash(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = BoundaryDesign::nonnegative_scalar(100, 1.0);
        let b = BoundaryDesign::nonnegative_scalar(101, 1.0);
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
