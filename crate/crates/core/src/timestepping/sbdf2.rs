//! Second-order semi-implicit BDF for `u' = D u + E(t, u)` with `D` linear
//! and implicit, `E` explicit.

use super::{check_dt, check_finite, StepCallback};
use crate::error::Result;
use crate::linalg::{SparseLu, SparseMatrix};

/// Explicit part callback: `explicit(t, u, out)`.
pub type Explicit<'a> = dyn FnMut(f64, &[f64], &mut [f64]) -> Result<()> + 'a;

pub struct Sbdf2 {
    dt: f64,
    /// `(3/2) I - dt D`
    lu: SparseLu,
    /// `I - dt D`, used for the single IMEX Euler start step.
    start_lu: SparseLu,
}

#[derive(Clone, Debug)]
pub struct Sbdf2State {
    pub t: f64,
    pub current: Vec<f64>,
    previous: Option<(Vec<f64>, Vec<f64>)>,
}

impl Sbdf2State {
    pub fn new(t: f64, u0: Vec<f64>) -> Self {
        Self {
            t,
            current: u0,
            previous: None,
        }
    }
}

impl Sbdf2 {
    pub fn new(implicit: &SparseMatrix, dt: f64) -> Result<Self> {
        check_dt(dt)?;
        let n = implicit.nrows();
        let id = SparseMatrix::identity(n);
        Ok(Self {
            dt,
            lu: SparseLu::new(&id.add_scaled(1.5, implicit, -dt)?)?,
            start_lu: SparseLu::new(&id.add_scaled(1.0, implicit, -dt)?)?,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Takes `steps` steps; the first step of a fresh state is IMEX Euler.
    pub fn advance(
        &self,
        explicit: &mut Explicit,
        state: &mut Sbdf2State,
        steps: usize,
        mut on_step: Option<&mut StepCallback>,
    ) -> Result<()> {
        let n = state.current.len();
        let dt = self.dt;
        let t0 = state.t;
        let mut e_now = vec![0.0; n];
        for step in 1..=steps {
            explicit(state.t, &state.current, &mut e_now)?;
            check_finite(&e_now, step, state.t)?;
            let next = match &state.previous {
                None => {
                    let rhs: Vec<f64> = state
                        .current
                        .iter()
                        .zip(&e_now)
                        .map(|(u, e)| u + dt * e)
                        .collect();
                    self.start_lu.solve(&rhs)?
                }
                Some((u_prev, e_prev)) => {
                    let rhs: Vec<f64> = (0..n)
                        .map(|i| {
                            2.0 * state.current[i] - 0.5 * u_prev[i]
                                + dt * (2.0 * e_now[i] - e_prev[i])
                        })
                        .collect();
                    self.lu.solve(&rhs)?
                }
            };
            let t = t0 + step as f64 * dt;
            check_finite(&next, step, t)?;
            let old = std::mem::replace(&mut state.current, next);
            state.previous = Some((old, e_now.clone()));
            state.t = t;
            if let Some(cb) = on_step.as_deref_mut() {
                cb(step, t, &state.current)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timestepping::loglog_slope;

    #[test]
    fn constant_preserved() {
        let d = SparseMatrix::zeros(2, 2);
        let s = Sbdf2::new(&d, 0.1).unwrap();
        let mut st = Sbdf2State::new(0.0, vec![2.0, -1.0]);
        let mut e = |_: f64, _: &[f64], out: &mut [f64]| {
            out.fill(0.0);
            Ok(())
        };
        s.advance(&mut e, &mut st, 10, None).unwrap();
        assert_eq!(st.current, vec![2.0, -1.0]);
    }

    fn split_error(dt: f64) -> f64 {
        let (lambda, mu) = (-4.0, 1.5);
        let d = SparseMatrix::from_triplets(1, 1, &[(0, 0, lambda)]).unwrap();
        let s = Sbdf2::new(&d, dt).unwrap();
        let mut st = Sbdf2State::new(0.0, vec![1.0]);
        let mut e = |_: f64, u: &[f64], out: &mut [f64]| {
            out[0] = mu * u[0];
            Ok(())
        };
        let steps = (1.0 / dt).round() as usize;
        s.advance(&mut e, &mut st, steps, None).unwrap();
        (st.current[0] - ((lambda + mu) * 1.0f64).exp()).abs()
    }

    #[test]
    fn second_order_with_euler_start() {
        let dts = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let errs: Vec<f64> = dts.iter().map(|&dt| split_error(dt)).collect();
        let slope = loglog_slope(&dts, &errs).unwrap();
        assert!((slope - 2.0).abs() <= 0.2, "{slope}");
    }
}
