#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod linalg;
pub mod lp;
pub mod mc_harness;
pub mod optim;
pub mod process_lab;
pub mod qp;
pub mod seed;
pub mod set_kernel;

pub use error::{LabError, Result};
pub use exec::Execution;
