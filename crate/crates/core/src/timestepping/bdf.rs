//! Backward differentiation formulas for `u' = L u + f(t)`.

use std::collections::VecDeque;

use super::{check_dt, check_finite, StepCallback};
use crate::error::{Error, Result};
use crate::linalg::{SparseLu, SparseMatrix};

/// Forcing callback writing `f(t)` into its buffer.
pub type Forcing<'a> = dyn FnMut(f64, &mut [f64]) -> Result<()> + 'a;

/// `a_0 u^{n+1} + sum_j a_j u^{n+1-j} = dt (L u^{n+1} + f^{n+1})`.
const COEFFS: [&[f64]; 4] = [
    &[1.0, -1.0],
    &[1.5, -2.0, 0.5],
    &[11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0],
    &[25.0 / 12.0, -4.0, 3.0, -4.0 / 3.0, 0.25],
];

/// One BDF order with its implicit matrix `a_0 I - dt L` factored once.
pub struct BdfSolver {
    order: usize,
    dt: f64,
    lu: SparseLu,
}

impl BdfSolver {
    pub fn new(order: usize, op: &SparseMatrix, dt: f64) -> Result<Self> {
        check_dt(dt)?;
        if !(1..=4).contains(&order) {
            return Err(Error::Config(format!(
                "BDF order must be 1..=4, got {order}"
            )));
        }
        let a0 = COEFFS[order - 1][0];
        let n = op.nrows();
        let m = SparseMatrix::identity(n).add_scaled(a0, op, -dt)?;
        Ok(Self {
            order,
            dt,
            lu: SparseLu::new(&m)?,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn solve_count(&self) -> usize {
        self.lu.solve_count()
    }

    /// Next level from `history` (newest first, `order` entries) and the
    /// forcing at the new time.
    pub fn step(&self, history: &VecDeque<Vec<f64>>, forcing: Option<&[f64]>) -> Result<Vec<f64>> {
        if history.len() < self.order {
            return Err(Error::Dimension {
                expected: self.order,
                actual: history.len(),
            });
        }
        let coeffs = COEFFS[self.order - 1];
        let n = self.lu.dim();
        let mut rhs = vec![0.0; n];
        for (a, level) in coeffs[1..].iter().zip(history) {
            for (r, v) in rhs.iter_mut().zip(level) {
                *r -= a * v;
            }
        }
        if let Some(f) = forcing {
            for (r, v) in rhs.iter_mut().zip(f) {
                *r += self.dt * v;
            }
        }
        self.lu.solve(&rhs)
    }
}

/// Time levels for a multistep scheme, newest first.
#[derive(Clone, Debug)]
pub struct MultistepState {
    /// Time of `levels[0]`.
    pub t: f64,
    pub levels: VecDeque<Vec<f64>>,
}

impl MultistepState {
    pub fn current(&self) -> &[f64] {
        &self.levels[0]
    }
}

fn eval_forcing(forcing: &mut Option<&mut Forcing>, t: f64, buf: &mut Vec<f64>) -> Result<bool> {
    match forcing {
        Some(f) => {
            f(t, buf)?;
            Ok(true)
        }
        None => Ok(false),
    }
}

/// Advances a BDF4 state by `steps` steps of the solver's `dt`.
pub fn bdf4_advance(
    solver: &BdfSolver,
    state: &mut MultistepState,
    mut forcing: Option<&mut Forcing>,
    steps: usize,
    mut on_step: Option<&mut StepCallback>,
) -> Result<()> {
    if solver.order() != 4 {
        return Err(Error::Config("bdf4_advance needs an order-4 solver".into()));
    }
    let n = state.levels[0].len();
    let t0 = state.t;
    let mut f = vec![0.0; n];
    for step in 1..=steps {
        let t = t0 + step as f64 * solver.dt();
        let has = eval_forcing(&mut forcing, t, &mut f)?;
        let next = solver.step(&state.levels, has.then_some(f.as_slice()))?;
        check_finite(&next, step, t)?;
        state.levels.push_front(next);
        state.levels.truncate(4);
        state.t = t;
        if let Some(cb) = on_step.as_deref_mut() {
            cb(step, t, &state.levels[0])?;
        }
    }
    Ok(())
}

/// Builds the four BDF4 starting levels at `t0, t0+dt, t0+2dt, t0+3dt` from
/// `u0` with BDF1, BDF2, then BDF3 steps of size `dt/4`.
pub fn bdf4_bootstrap(
    op: &SparseMatrix,
    u0: Vec<f64>,
    t0: f64,
    dt: f64,
    mut forcing: Option<&mut Forcing>,
) -> Result<MultistepState> {
    check_dt(dt)?;
    let h = dt / 4.0;
    let solvers = [
        BdfSolver::new(1, op, h)?,
        BdfSolver::new(2, op, h)?,
        BdfSolver::new(3, op, h)?,
    ];
    let n = u0.len();
    let mut fine: VecDeque<Vec<f64>> = VecDeque::from([u0.clone()]);
    let mut coarse: VecDeque<Vec<f64>> = VecDeque::from([u0]);
    let mut f = vec![0.0; n];
    for sub in 1..=12 {
        let t = t0 + sub as f64 * h;
        let solver = &solvers[(sub - 1).min(2)];
        let has = eval_forcing(&mut forcing, t, &mut f)?;
        let next = solver.step(&fine, has.then_some(f.as_slice()))?;
        check_finite(&next, sub, t)?;
        fine.push_front(next);
        fine.truncate(3);
        if sub % 4 == 0 {
            coarse.push_front(fine[0].clone());
        }
    }
    Ok(MultistepState {
        t: t0 + 3.0 * dt,
        levels: coarse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::factorization_count;
    use crate::timestepping::loglog_slope;

    fn scalar(l: f64) -> SparseMatrix {
        SparseMatrix::from_triplets(1, 1, &[(0, 0, l)]).unwrap()
    }

    #[test]
    fn constant_state_preserved() {
        let op = SparseMatrix::zeros(3, 3);
        let solver = BdfSolver::new(4, &op, 0.1).unwrap();
        let u = vec![1.0, -2.0, 0.5];
        let mut st = MultistepState {
            t: 0.3,
            levels: VecDeque::from(vec![u.clone(); 4]),
        };
        bdf4_advance(&solver, &mut st, None, 20, None).unwrap();
        for (a, b) in st.current().iter().zip(&u) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn stiff_decay_is_stable() {
        // at lambda dt = -1 the BDF4 roots are complex, so single levels
        // oscillate; the largest magnitude over the four stored levels decays
        let op = scalar(-1e3);
        let dt = 1e-3;
        let solver = BdfSolver::new(4, &op, dt).unwrap();
        let mut st = MultistepState {
            t: 3.0 * dt,
            levels: (0..4).rev().map(|k| vec![(-(k as f64)).exp()]).collect(),
        };
        let mut window: VecDeque<f64> = st.levels.iter().map(|l| l[0].abs()).collect();
        let mut last = window.iter().cloned().fold(0.0, f64::max);
        let mut cb = |_: usize, _: f64, u: &[f64]| {
            window.push_front(u[0].abs());
            window.truncate(4);
            let m = window.iter().cloned().fold(0.0, f64::max);
            assert!(m <= last);
            last = m;
            Ok(())
        };
        bdf4_advance(&solver, &mut st, None, 300, Some(&mut cb)).unwrap();
        assert!(st.current()[0].abs() < 1e-40);
    }

    fn manufactured_error(dt: f64) -> f64 {
        // y = exp(-5t), y' = lambda y + f
        let lambda = -2.0;
        let op = scalar(lambda);
        let exact = |t: f64| (-5.0 * t).exp();
        let mut forcing = |t: f64, f: &mut [f64]| {
            f[0] = -5.0 * exact(t) - lambda * exact(t);
            Ok(())
        };
        let solver = BdfSolver::new(4, &op, dt).unwrap();
        let mut st = MultistepState {
            t: 3.0 * dt,
            levels: (0..4).rev().map(|k| vec![exact(k as f64 * dt)]).collect(),
        };
        let steps = (1.0 / dt).round() as usize - 3;
        bdf4_advance(&solver, &mut st, Some(&mut forcing), steps, None).unwrap();
        assert!((st.t - 1.0).abs() < 1e-12);
        (st.current()[0] - exact(1.0)).abs()
    }

    #[test]
    fn fourth_order_convergence() {
        let dts = [1e-2, 5e-3, 2.5e-3];
        let errs: Vec<f64> = dts.iter().map(|&dt| manufactured_error(dt)).collect();
        let slope = loglog_slope(&dts, &errs).unwrap();
        assert!((slope - 4.0).abs() <= 0.3, "{slope} {errs:?}");
    }

    #[test]
    fn bootstrap_is_accurate() {
        let op = scalar(-3.0);
        let st = bdf4_bootstrap(&op, vec![1.0], 0.0, 0.01, None).unwrap();
        for (k, level) in st.levels.iter().enumerate() {
            let t = (3 - k) as f64 * 0.01;
            assert!((level[0] - (-3.0 * t).exp()).abs() < 1e-4);
        }
    }

    #[test]
    fn factorization_happens_once() {
        let op = scalar(-1.0);
        let solver = BdfSolver::new(4, &op, 0.1).unwrap();
        let before = factorization_count();
        let mut st = MultistepState {
            t: 0.0,
            levels: VecDeque::from(vec![vec![1.0]; 4]),
        };
        bdf4_advance(&solver, &mut st, None, 50, None).unwrap();
        assert_eq!(factorization_count(), before);
        assert_eq!(solver.solve_count(), 50);
    }

    #[test]
    fn diffusion_norm_nonincreasing() {
        // 1D periodic second difference
        let n = 40;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, -2.0 * 100.0));
            trip.push((i, (i + 1) % n, 100.0));
            trip.push((i, (i + n - 1) % n, 100.0));
        }
        let op = SparseMatrix::from_triplets(n, n, &trip).unwrap();
        let u0: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let dt = 1e-2;
        let solver = BdfSolver::new(4, &op, dt).unwrap();
        let mut st = bdf4_bootstrap(&op, u0, 0.0, dt, None).unwrap();
        let norm = |u: &[f64]| u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut last = norm(st.current());
        let mut cb = |_: usize, _: f64, u: &[f64]| {
            let nu = norm(u);
            assert!(nu <= last * (1.0 + 1e-12));
            last = nu;
            Ok(())
        };
        bdf4_advance(&solver, &mut st, None, 100, Some(&mut cb)).unwrap();
    }

    #[test]
    fn singular_implicit_matrix_rejected() {
        // 25/12 - dt * L = 0 for L = 25/12 / dt
        let op = scalar(25.0 / 12.0 / 0.5);
        assert!(BdfSolver::new(4, &op, 0.5).is_err());
    }
}
