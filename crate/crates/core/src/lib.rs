//! Meshfree surface differential operators on point clouds.
//!
//! Overlapped RBF-FD weights built from polyharmonic spline kernels augmented
//! with least-orthogonal-interpolation polynomial bases, plus the time
//! integrators and test problems used to exercise them.

pub mod assembly;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod polybasis;
pub mod problems;
pub mod timestepping;

pub use error::{Error, Result};
