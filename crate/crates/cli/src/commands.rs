//! The five subcommands. Each writes `metadata.json` plus its data files into
//! the output directory.

use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use serde_json::{json, Value};

use manifold_rbf::assembly::{estimate_lambda_max, Hyperviscosity};
use manifold_rbf::experiments::{
    assemble, laplacian_spectrum, run_reaction_with, run_sphere_advection, run_torus_diffusion,
    HyperviscosityMode, Timings,
};
use manifold_rbf::geometry::{
    generate_sphere_nodes, generate_torus_nodes, load_nodeset, sample_double_torus, write_nodeset,
    NodeSet, Surface,
};
use manifold_rbf::linalg::DENSE_SPECTRUM_CAP;
use manifold_rbf::problems::{
    fhn_initial, max_speed, random_field, ModelKind, ReactionModel, TorusManufactured, FLOW_PERIOD,
};
use manifold_rbf::timestepping::loglog_slope;
use manifold_rbf::{Error, Result};

use crate::config::{Problem, RunConfig, Settings};
use crate::output::{
    base_metadata, convergence_csv, convergence_gnuplot, create_dir, spectrum_gnuplot,
    timings_json, write_metadata, write_text, ConvergenceRow, Snapshots,
};

pub fn build_nodes(cfg: &RunConfig) -> Result<NodeSet> {
    match cfg.surface {
        Surface::Sphere => generate_sphere_nodes(cfg.level),
        Surface::Torus => generate_torus_nodes(cfg.count, cfg.seed),
        Surface::DoubleTorus => sample_double_torus(cfg.count, cfg.seed),
        Surface::External => {
            let path = cfg
                .nodes_file
                .as_deref()
                .ok_or_else(|| Error::Config("surface 'external' needs nodes-file".into()))?;
            load_nodeset(path)
        }
    }
}

pub fn nodes(cfg: &RunConfig, settings: &Settings, out: &Path) -> Result<Value> {
    create_dir(out)?;
    let start = Instant::now();
    let nodes = build_nodes(cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    write_nodeset(&nodes, &out.join("nodes.txt"))?;
    let mut meta = base_metadata("nodes", settings, cfg);
    meta["result"] = json!({
        "node_count": nodes.len(),
        "min_separation": nodes.min_separation(),
        "seconds": seconds,
    });
    write_metadata(out, &meta)?;
    Ok(meta)
}

pub fn assemble_cmd(cfg: &RunConfig, settings: &Settings, out: &Path) -> Result<Value> {
    create_dir(out)?;
    let nodes = build_nodes(cfg)?;
    let assembled = assemble(&nodes, &cfg.assembly)?;
    let ops = &assembled.ops;
    let (lambda, lambda_converged) = estimate_lambda_max(&ops.gradient(), cfg.lambda_tol)?;
    let (laplacian_rightmost, laplacian_converged) =
        estimate_lambda_max(&[&ops.laplacian], cfg.lambda_tol)?;
    let mut meta = base_metadata("assemble", settings, cfg);
    meta["result"] = json!({
        "node_count": nodes.len(),
        "stencil_count": assembled.stencil_count,
        "stencils_with_eliminations": ops.stencils_with_eliminations,
        "nnz": {
            "gx": ops.gx.nnz(),
            "gy": ops.gy.nnz(),
            "gz": ops.gz.nnz(),
            "laplacian": ops.laplacian.nnz(),
        },
        "gradient_lambda_max": lambda,
        "gradient_lambda_converged": lambda_converged,
        "laplacian_rightmost_estimate": laplacian_rightmost,
        "laplacian_rightmost_converged": laplacian_converged,
        "seconds": assembled.seconds,
    });
    write_metadata(out, &meta)?;
    Ok(meta)
}

pub fn spectrum(cfg: &RunConfig, settings: &Settings, out: &Path) -> Result<Value> {
    create_dir(out)?;
    let nodes = build_nodes(cfg)?;
    if nodes.len() > DENSE_SPECTRUM_CAP {
        return Err(Error::Config(format!(
            "N = {} exceeds the dense spectrum cap {DENSE_SPECTRUM_CAP}; \
             use the `assemble` command, which reports Arnoldi estimates of the rightmost eigenvalues",
            nodes.len()
        )));
    }
    let assembled = assemble(&nodes, &cfg.assembly)?;
    let start = Instant::now();
    let (eigs, max_re, min_re) = laplacian_spectrum(&assembled.ops)?;
    let seconds = start.elapsed().as_secs_f64();
    let mut csv = String::from("re,im\n");
    for z in &eigs {
        csv.push_str(&format!("{:e},{:e}\n", z.re, z.im));
    }
    write_text(&out.join("spectrum.csv"), &csv)?;
    write_text(&out.join("spectrum.gp"), &spectrum_gnuplot())?;
    let stable = max_re <= 1e-6 * min_re.abs();
    info!("spectrum: max Re {max_re:.3e}, min Re {min_re:.3e}, stable {stable}");
    let mut meta = base_metadata("spectrum", settings, cfg);
    meta["result"] = json!({
        "node_count": nodes.len(),
        "stencil_count": assembled.stencil_count,
        "max_real_part": max_re,
        "min_real_part": min_re,
        "stable": stable,
        "timings": { "assembly": assembled.seconds, "eigenvalues": seconds },
    });
    write_metadata(out, &meta)?;
    Ok(meta)
}

fn advection_mode(cfg: &RunConfig) -> HyperviscosityMode {
    match cfg.hyperviscosity {
        Some(h) if h.gamma == 0.0 => HyperviscosityMode::Off,
        Some(h) => HyperviscosityMode::Fixed(Hyperviscosity {
            gamma: h.gamma,
            power: h
                .power
                .unwrap_or((cfg.assembly.stencil_size as f64).ln().floor() as u32),
        }),
        None => HyperviscosityMode::Estimated {
            tol: cfg.lambda_tol,
        },
    }
}

/// Runs the time-stepping for the configured problem with snapshots.
fn run_problem(
    cfg: &RunConfig,
    nodes: &NodeSet,
    snaps: &mut Snapshots,
) -> Result<(Value, Option<f64>, Vec<f64>)> {
    let mut record = |step: usize, t: f64, u: &[f64]| snaps.record(step, t, u);
    match cfg.problem {
        Problem::Advection => {
            let r = run_sphere_advection(
                nodes,
                &cfg.assembly,
                advection_mode(cfg),
                cfg.dt,
                cfg.final_time,
                Some(&mut record),
            )?;
            let result = json!({
                "node_count": r.node_count,
                "stencil_count": r.stencil_count,
                "steps": r.steps,
                "relative_error_vs_initial": r.error,
                "hyperviscosity": r.hyperviscosity.map(|h| json!({"gamma": h.gamma, "k": h.power})),
                "lambda_max": r.lambda_max,
                "lambda_converged": r.lambda_converged,
                "u_max_at_t0": r.max_speed,
                "timings": timings_json(&r.timings),
            });
            let returns = (cfg.final_time / FLOW_PERIOD).fract() == 0.0;
            Ok((result, returns.then_some(r.error), r.solution))
        }
        Problem::Diffusion => {
            let manufactured = TorusManufactured::new(cfg.center_seed);
            let r = run_torus_diffusion(
                nodes,
                &cfg.assembly,
                &manufactured,
                cfg.dt,
                cfg.final_time,
                Some(&mut record),
            )?;
            let result = json!({
                "node_count": r.node_count,
                "stencil_count": r.stencil_count,
                "steps": r.steps,
                "relative_error": r.error,
                "torus_centers": manufactured.centers,
                "timings": timings_json(&r.timings),
            });
            Ok((result, Some(r.error), r.solution))
        }
        Problem::Reaction(kind) => {
            let model = cfg
                .model
                .ok_or_else(|| Error::Config("reaction model parameters missing".into()))?;
            let initial = initial_state(cfg, kind, nodes);
            let assembled = assemble(nodes, &cfg.assembly)?;
            let steps = cfg.steps()?;
            let r = run_reaction_with(
                &assembled,
                nodes.len(),
                &model,
                initial,
                cfg.dt,
                steps,
                Some(&mut record),
            )?;
            let result = json!({
                "node_count": r.node_count,
                "stencil_count": r.stencil_count,
                "steps": r.steps,
                "final_time": r.final_time,
                "model": model.kind().to_string(),
                "parameters": model_params(&model),
                "splitting": model.splitting(),
                "timings": timings_json(&r.timings),
            });
            Ok((result, None, r.state))
        }
    }
}

fn model_params(model: &ReactionModel) -> Value {
    let mut map = serde_json::Map::new();
    for (k, v) in model.params() {
        map.insert(k.to_string(), json!(v));
    }
    Value::Object(map)
}

/// Stacked initial fields for a reaction model.
pub fn initial_state(cfg: &RunConfig, kind: ModelKind, nodes: &NodeSet) -> Vec<f64> {
    let n = nodes.len();
    match kind {
        ModelKind::CahnHilliard => random_field(n, cfg.ic_mean, cfg.ic_amplitude, cfg.seed),
        ModelKind::Turing => random_field(2 * n, cfg.ic_mean, cfg.ic_amplitude, cfg.seed),
        ModelKind::FitzHughNagumo => {
            let (a, b): (Vec<f64>, Vec<f64>) = nodes.points.iter().map(|&p| fhn_initial(p)).unzip();
            a.into_iter().chain(b).collect()
        }
    }
}

pub fn solve(cfg: &RunConfig, settings: &Settings, out: &Path) -> Result<Value> {
    create_dir(out)?;
    let nodes = build_nodes(cfg)?;
    let mut meta = base_metadata("solve", settings, cfg);
    if cfg.problem == Problem::Advection {
        meta["u_max_at_t0"] = json!(max_speed(&nodes.points, 0.0)?);
    }
    let mut snaps = Snapshots::new(out, &nodes.points, cfg.snapshot_every)?;
    match run_problem(cfg, &nodes, &mut snaps) {
        Ok((result, error, solution)) => {
            snaps.write("final.csv", &solution)?;
            meta["result"] = result;
            meta["final_error"] = json!(error);
            write_metadata(out, &meta)?;
            if let Some(e) = error {
                println!("final relative error {e:.6e}");
            }
            Ok(meta)
        }
        Err(e) => {
            let last = snaps.write_last_valid()?;
            meta["failure"] = json!({
                "message": e.to_string(),
                "last_valid_step": last.map(|l| l.0),
                "last_valid_time": last.map(|l| l.1),
            });
            write_metadata(out, &meta)?;
            Err(e)
        }
    }
}

pub fn convergence(cfg: &RunConfig, settings: &Settings, out: &Path) -> Result<Value> {
    let sizes: Vec<usize> = match cfg.problem {
        Problem::Advection => cfg.levels.iter().map(|&l| l as usize).collect(),
        Problem::Diffusion => cfg.counts.clone(),
        p => {
            return Err(Error::Config(format!(
                "convergence needs a problem with an exact solution (advection or diffusion), got '{p}'"
            )))
        }
    };
    if sizes.len() < 3 {
        return Err(Error::Config(format!(
            "convergence needs at least 3 refinement levels, got {}",
            sizes.len()
        )));
    }
    create_dir(out)?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &size in &sizes {
        let mut level = cfg.clone();
        match cfg.problem {
            Problem::Advection => level.level = size as u32,
            _ => level.count = size,
        }
        let outcome = build_nodes(&level).and_then(|nodes| {
            let n = nodes.len();
            convergence_level(&level, &nodes).map(|r| (n, r))
        });
        match outcome {
            Ok((n, (error, timings, extra))) => {
                info!("N = {n}: error {error:.4e}");
                rows.push(ConvergenceRow { n, error, timings });
                records
                    .push(json!({"size": size, "node_count": n, "error": error, "details": extra}));
            }
            Err(e) => {
                warn!("refinement {size} failed: {e}");
                records.push(json!({"size": size, "failure": e.to_string()}));
            }
        }
    }
    let ok: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.error > 0.0).collect();
    let slope = if ok.len() >= 2 {
        let x: Vec<f64> = ok.iter().map(|r| (r.n as f64).sqrt()).collect();
        let y: Vec<f64> = ok.iter().map(|r| r.error).collect();
        Some(-loglog_slope(&x, &y)?)
    } else {
        None
    };
    write_text(&out.join("convergence.csv"), &convergence_csv(&rows))?;
    let title = format!(
        "{} convergence, degree {}",
        cfg.problem, cfg.assembly.degree
    );
    write_text(&out.join("convergence.gp"), &convergence_gnuplot(&title))?;
    let mut meta = base_metadata("convergence", settings, cfg);
    meta["levels"] = Value::Array(records);
    meta["slope"] = json!(slope);
    write_metadata(out, &meta)?;
    match slope {
        Some(s) => println!("fitted convergence rate {s:.3}"),
        None => println!("fewer than two successful levels; no rate fitted"),
    }
    Ok(meta)
}

fn convergence_level(cfg: &RunConfig, nodes: &NodeSet) -> Result<(f64, Timings, Value)> {
    match cfg.problem {
        Problem::Advection => {
            let r = run_sphere_advection(
                nodes,
                &cfg.assembly,
                advection_mode(cfg),
                cfg.dt,
                cfg.final_time,
                None,
            )?;
            let extra = json!({
                "hyperviscosity": r.hyperviscosity.map(|h| json!({"gamma": h.gamma, "k": h.power})),
                "lambda_max": r.lambda_max,
                "u_max_at_t0": r.max_speed,
                "stencil_count": r.stencil_count,
            });
            Ok((r.error, r.timings, extra))
        }
        _ => {
            let r = run_torus_diffusion(
                nodes,
                &cfg.assembly,
                &TorusManufactured::new(cfg.center_seed),
                cfg.dt,
                cfg.final_time,
                None,
            )?;
            Ok((
                r.error,
                r.timings,
                json!({"stencil_count": r.stencil_count}),
            ))
        }
    }
}
