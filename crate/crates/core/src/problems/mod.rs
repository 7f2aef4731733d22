//! Test problems: advection on the sphere, forced diffusion on the torus,
//! and reaction-diffusion systems.

pub mod reaction;
pub mod sphere;
pub mod torus;

pub use reaction::{
    fhn_initial, fhn_kinetics, random_field, CahnHilliard, FitzHughNagumo, ModelKind,
    ReactionModel, Turing,
};
pub use sphere::{
    deformational_velocity, gaussian_bells, max_speed, Advection, ADVECTION_DT, FLOW_PERIOD,
};
pub use torus::{
    TorusManufactured, DIFFUSION_DT, DIFFUSION_FINAL_TIME, TORUS_CENTER_COUNT, TORUS_CENTER_SEED,
};

use crate::error::{Error, Result};

/// `||numeric - exact||_2 / ||exact||_2` over node values.
pub fn relative_l2_error(numeric: &[f64], exact: &[f64]) -> Result<f64> {
    if numeric.len() != exact.len() {
        return Err(Error::Dimension {
            expected: exact.len(),
            actual: numeric.len(),
        });
    }
    let den: f64 = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::InvalidInput("exact field has zero norm".into()));
    }
    let num: f64 = numeric
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(num / den)
}
