//! End-to-end drivers: node set to operators to time-stepped solution, with
//! per-stage wall-clock timings.

use std::time::Instant;

use log::info;
use num_complex::Complex64;

use crate::assembly::{
    assemble_global, estimate_lambda_max, hyperviscosity_params, AssemblyConfig, GlobalOperators,
    Hyperviscosity,
};
use crate::error::{Error, Result};
use crate::geometry::{build_stencils, torus_angles, NodeSet};
use crate::linalg::dense_spectrum;
use crate::problems::{
    gaussian_bells, max_speed, relative_l2_error, Advection, ReactionModel, TorusManufactured,
};
use crate::timestepping::{
    bdf4_advance, rk4_advance, BdfSolver, MultistepState, Sbdf2, Sbdf2State, StepCallback,
};

/// Wall-clock seconds per stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub assembly: f64,
    pub factorization: f64,
    pub solve: f64,
}

#[derive(Clone, Debug)]
pub struct Assembled {
    pub ops: GlobalOperators,
    pub stencil_count: usize,
    pub seconds: f64,
}

/// Stencils plus global operators for `nodes`.
pub fn assemble(nodes: &NodeSet, config: &AssemblyConfig) -> Result<Assembled> {
    let start = Instant::now();
    let stencils = build_stencils(nodes, config.stencil_size, config.delta)?;
    let ops = assemble_global(&stencils, nodes, config)?;
    let seconds = start.elapsed().as_secs_f64();
    info!(
        "assembled N = {} with {} stencils in {:.2}s",
        nodes.len(),
        stencils.len(),
        seconds
    );
    Ok(Assembled {
        ops,
        stencil_count: stencils.len(),
        seconds,
    })
}

#[derive(Clone, Debug)]
pub struct DiffusionReport {
    pub node_count: usize,
    pub stencil_count: usize,
    pub error: f64,
    pub steps: usize,
    pub timings: Timings,
    pub solution: Vec<f64>,
}

/// Forced diffusion `c_t = L c + f` on the torus against the manufactured
/// solution, BDF4 seeded with the exact solution at the first four levels.
pub fn run_torus_diffusion(
    nodes: &NodeSet,
    config: &AssemblyConfig,
    manufactured: &TorusManufactured,
    dt: f64,
    final_time: f64,
    on_step: Option<&mut StepCallback>,
) -> Result<DiffusionReport> {
    let total_steps = (final_time / dt).round() as usize;
    if total_steps < 4 || ((total_steps as f64) * dt - final_time).abs() > 1e-9 * final_time {
        return Err(Error::Config(format!(
            "final time {final_time} must be a multiple of dt {dt} with at least 4 steps"
        )));
    }
    let assembled = assemble(nodes, config)?;
    let angles: Vec<(f64, f64)> = nodes.points.iter().map(|&p| torus_angles(p)).collect();
    let exact = |t: f64| -> Vec<f64> {
        angles
            .iter()
            .map(|&(p, l)| manufactured.solution(t, p, l))
            .collect()
    };

    let start = Instant::now();
    let solver = BdfSolver::new(4, &assembled.ops.laplacian, dt)?;
    let factorization = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let mut state = MultistepState {
        t: 3.0 * dt,
        levels: (0..4).rev().map(|k| exact(k as f64 * dt)).collect(),
    };
    let mut forcing = |t: f64, f: &mut [f64]| {
        for (v, &(p, l)) in f.iter_mut().zip(&angles) {
            *v = manufactured.forcing(t, p, l);
        }
        Ok(())
    };
    let steps = total_steps - 3;
    bdf4_advance(&solver, &mut state, Some(&mut forcing), steps, on_step)?;
    let solve = start.elapsed().as_secs_f64();

    let error = relative_l2_error(state.current(), &exact(final_time))?;
    info!("torus N = {}: relative error {error:.3e}", nodes.len());
    Ok(DiffusionReport {
        node_count: nodes.len(),
        stencil_count: assembled.stencil_count,
        error,
        steps: total_steps,
        timings: Timings {
            assembly: assembled.seconds,
            factorization,
            solve,
        },
        solution: state.levels[0].clone(),
    })
}

/// How the advection hyperviscosity is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HyperviscosityMode {
    /// From the estimated rightmost eigenvalue of the gradient operators.
    Estimated {
        tol: f64,
    },
    Fixed(Hyperviscosity),
    Off,
}

#[derive(Clone, Debug)]
pub struct AdvectionReport {
    pub node_count: usize,
    pub stencil_count: usize,
    pub error: f64,
    pub steps: usize,
    pub lambda_max: Option<f64>,
    pub lambda_converged: Option<bool>,
    pub hyperviscosity: Option<Hyperviscosity>,
    /// Largest flow speed over the nodes at `t = 0`.
    pub max_speed: f64,
    pub timings: Timings,
    pub solution: Vec<f64>,
}

/// Deformational-flow advection of the two bells with RK4; the error is
/// measured against the initial condition at the final time.
pub fn run_sphere_advection(
    nodes: &NodeSet,
    config: &AssemblyConfig,
    mode: HyperviscosityMode,
    dt: f64,
    final_time: f64,
    on_step: Option<&mut StepCallback>,
) -> Result<AdvectionReport> {
    let steps = (final_time / dt).round() as usize;
    if steps == 0 || ((steps as f64) * dt - final_time).abs() > 1e-9 * final_time {
        return Err(Error::Config(format!(
            "final time {final_time} must be a positive multiple of dt {dt}"
        )));
    }
    let assembled = assemble(nodes, config)?;
    let u_max = max_speed(&nodes.points, 0.0)?;

    let start = Instant::now();
    let (lambda, hyper) = match mode {
        HyperviscosityMode::Estimated { tol } => {
            let (lam, conv) = estimate_lambda_max(&assembled.ops.gradient(), tol)?;
            let h = hyperviscosity_params(lam, config.stencil_size, nodes.len(), u_max)?;
            info!(
                "lambda_max {lam:.4e} (converged: {conv}), gamma {:.4e}, k {}",
                h.gamma, h.power
            );
            (Some((lam, conv)), Some(h))
        }
        HyperviscosityMode::Fixed(h) => (None, Some(h)),
        HyperviscosityMode::Off => (None, None),
    };
    let preprocessing = start.elapsed().as_secs_f64();

    let c0: Vec<f64> = nodes.points.iter().map(|&p| gaussian_bells(p)).collect();
    let mut c = c0.clone();
    let mut adv = Advection::new(&assembled.ops, &nodes.points, hyper);
    let start = Instant::now();
    rk4_advance(
        |t, u, du| adv.rhs(t, u, du),
        &mut c,
        0.0,
        dt,
        steps,
        on_step,
    )?;
    let solve = start.elapsed().as_secs_f64();
    let error = relative_l2_error(&c, &c0)?;
    info!("sphere N = {}: relative error {error:.3e}", nodes.len());
    Ok(AdvectionReport {
        node_count: nodes.len(),
        stencil_count: assembled.stencil_count,
        error,
        steps,
        lambda_max: lambda.map(|l| l.0),
        lambda_converged: lambda.map(|l| l.1),
        hyperviscosity: hyper,
        max_speed: u_max,
        timings: Timings {
            assembly: assembled.seconds,
            factorization: preprocessing,
            solve,
        },
        solution: c,
    })
}

#[derive(Clone, Debug)]
pub struct ReactionReport {
    pub node_count: usize,
    pub stencil_count: usize,
    pub steps: usize,
    pub final_time: f64,
    /// Stacked fields at the final time.
    pub state: Vec<f64>,
    pub timings: Timings,
}

/// SBDF2 run of a reaction-diffusion model from the stacked initial state.
pub fn run_reaction(
    nodes: &NodeSet,
    config: &AssemblyConfig,
    model: &ReactionModel,
    initial: Vec<f64>,
    dt: f64,
    steps: usize,
    on_step: Option<&mut StepCallback>,
) -> Result<ReactionReport> {
    let assembled = assemble(nodes, config)?;
    run_reaction_with(&assembled, nodes.len(), model, initial, dt, steps, on_step)
}

/// As [`run_reaction`] with operators already assembled.
pub fn run_reaction_with(
    assembled: &Assembled,
    node_count: usize,
    model: &ReactionModel,
    initial: Vec<f64>,
    dt: f64,
    steps: usize,
    on_step: Option<&mut StepCallback>,
) -> Result<ReactionReport> {
    if initial.len() != model.field_count() * node_count {
        return Err(Error::Dimension {
            expected: model.field_count() * node_count,
            actual: initial.len(),
        });
    }
    let lap = &assembled.ops.laplacian;
    let start = Instant::now();
    let implicit = model.implicit_operator(lap)?;
    let stepper = Sbdf2::new(&implicit, dt)?;
    let factorization = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let mut scratch = vec![0.0; node_count];
    let mut explicit =
        |_: f64, u: &[f64], out: &mut [f64]| model.explicit(lap, u, out, &mut scratch);
    let mut state = Sbdf2State::new(0.0, initial);
    stepper.advance(&mut explicit, &mut state, steps, on_step)?;
    let solve = start.elapsed().as_secs_f64();
    Ok(ReactionReport {
        node_count,
        stencil_count: assembled.stencil_count,
        steps,
        final_time: state.t,
        state: state.current,
        timings: Timings {
            assembly: assembled.seconds,
            factorization,
            solve,
        },
    })
}

/// Full spectrum of the global Laplacian and `(max Re, min Re)`.
pub fn laplacian_spectrum(ops: &GlobalOperators) -> Result<(Vec<Complex64>, f64, f64)> {
    let eig = dense_spectrum(&ops.laplacian.to_dense())?;
    let max_re = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let min_re = eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    Ok((eig, max_re, min_re))
}
