//! Limit processes of the three applications and argmax extraction.

pub mod break_limit;
pub mod path;
pub mod quadratic;
pub mod weak;

pub use break_limit::{
    argmax_over, limit_process_M, limit_process_from_paths, sample_limit_argmax, ArgmaxConstraint,
    ArgmaxResult, GaussianSpec, LimitArgmaxSample, SATURATION_LIMIT, TIE_TOL,
};
pub use path::{sample_scaled_bm, PathSample, VectorPath};
pub use quadratic::{
    polyhedral_argmax, sample_polyhedral_limit, PolyhedralLimitSample, QuadraticLimit,
};
pub use weak::{sample_weak_limit, sample_weak_limit_values, WeakLimit};
