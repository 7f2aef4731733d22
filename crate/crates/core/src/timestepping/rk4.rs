//! Classical fourth-order Runge-Kutta.

use super::{check_dt, check_finite, StepCallback};
use crate::error::Result;

/// Advances `u` from time `t0` by `steps` RK4 steps of size `dt` and
/// returns the final time. `rhs(t, u, du)` writes the derivative into `du`.
pub fn rk4_advance<F>(
    mut rhs: F,
    u: &mut [f64],
    t0: f64,
    dt: f64,
    steps: usize,
    mut on_step: Option<&mut StepCallback>,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    check_dt(dt)?;
    let n = u.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut t = t0;
    for step in 1..=steps {
        rhs(t, u, &mut k1)?;
        check_finite(&k1, step, t)?;
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * dt * k1[i];
        }
        rhs(t + 0.5 * dt, &tmp, &mut k2)?;
        check_finite(&k2, step, t)?;
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * dt * k2[i];
        }
        rhs(t + 0.5 * dt, &tmp, &mut k3)?;
        check_finite(&k3, step, t)?;
        for i in 0..n {
            tmp[i] = u[i] + dt * k3[i];
        }
        rhs(t + dt, &tmp, &mut k4)?;
        check_finite(&k4, step, t)?;
        for i in 0..n {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t = t0 + step as f64 * dt;
        check_finite(u, step, t)?;
        if let Some(cb) = on_step.as_deref_mut() {
            cb(step, t, u)?;
        }
    }
    Ok(t)
}
