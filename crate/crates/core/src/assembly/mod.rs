//! RBF-FD surface operators: per-stencil saddle solves, the iterated
//! Laplacian, global scatter and hyperviscosity.

pub mod config;
pub mod global;
pub mod kernel;
pub mod weights;

pub use config::{default_delta, polynomial_dim, AssemblyConfig};
pub use global::{
    assemble_global, estimate_lambda_max, hyperviscosity_params, GlobalOperators, Hyperviscosity,
};
pub use kernel::{phs, surface_project};
pub use weights::{
    axis_misalignment_fix, build_stencil_weights, stencil_laplacian, StencilOperators,
    ZERO_ROW_THRESHOLD,
};
