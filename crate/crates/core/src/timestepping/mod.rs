//! Time integrators for semi-discrete systems: explicit RK4, implicit BDF
//! with a BDF4 driver, and IMEX SBDF2.

pub mod bdf;
pub mod rk4;
pub mod sbdf2;

pub use bdf::{bdf4_advance, bdf4_bootstrap, BdfSolver, Forcing, MultistepState};
pub use rk4::rk4_advance;
pub use sbdf2::{Explicit, Sbdf2, Sbdf2State};

use crate::error::{Error, Result};

/// Called after every completed step with (step, t, state).
pub type StepCallback<'a> = dyn FnMut(usize, f64, &[f64]) -> Result<()> + 'a;

pub(crate) fn check_finite(u: &[f64], step: usize, t: f64) -> Result<()> {
    if u.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { step, t })
    }
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "time step must be positive, got {dt}"
        )))
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least two points for a slope".into(),
        ));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidInput(
            "log-log fit needs positive data".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("abscissae are all equal".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_two_points() {
        let s = loglog_slope(&[10.0, 20.0], &[1e-2, 2.5e-3]).unwrap();
        assert!((s + 2.0).abs() < 1e-12);
    }

    #[test]
    fn slope_rejects_nonpositive() {
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }
}
