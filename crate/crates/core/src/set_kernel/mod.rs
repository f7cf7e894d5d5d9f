//! Subsets of Euclidean space, distances between them, and numeric
//! Painlevé-Kuratowski limits of set sequences.

pub mod constructions;
pub mod distance;
pub mod families;
pub mod grid;
pub mod pk;
pub mod polyhedral;
pub mod sequence;

pub use constructions::{
    int_part, linearized_boundary_set, mfcq_check, rescaled_break_set, trimming_range,
    weakid_limit_sets, AffineConstraints, BreakLocation, MfcqResult, WeakIdGeometry,
    WeakIdLimitSets,
};
pub use distance::{directed_distance, directed_distance_with, point_to_set_distance, SetRepr};
pub use grid::{BoxBounds, GridSet};
pub use pk::{
    hausdorff, pk_limit_estimate, pk_limit_estimate_with, PkDiagnostics, PkEstimate, PkOptions,
};
pub use polyhedral::{Offset, PolyhedralSet};
pub use sequence::{AffineScaling, SetSequence};
