//! Library half of the `mrbf` command-line tool.

pub mod commands;
pub mod config;
pub mod output;

use manifold_rbf::Error;

/// Short machine-readable tag for an error.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "config",
        Error::Parse { .. } => "parse",
        Error::Io { .. } => "io",
        Error::InvalidInput(_) => "invalid_input",
        Error::Dimension { .. } => "dimension",
        Error::DuplicatePoints { .. } => "duplicate_points",
        Error::Singular { .. } => "singular",
        Error::SolveAccuracy { .. } => "solve_accuracy",
        Error::NoConvergence(_) => "no_convergence",
        Error::Basis(_) => "basis",
        Error::Stencil { .. } => "stencil",
        Error::Sampling(_) => "sampling",
        Error::Divergence { .. } => "divergence",
    }
}
