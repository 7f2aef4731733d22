//! Files written into a run's output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use manifold_rbf::experiments::Timings;
use manifold_rbf::geometry::Vec3;
use manifold_rbf::{Error, Result};

use crate::config::{RunConfig, Settings};

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn timings_json(t: &Timings) -> Value {
    json!({
        "assembly": t.assembly,
        "factorization": t.factorization,
        "solve": t.solve,
    })
}

/// Metadata common to every command: version, raw settings and the resolved
/// configuration.
pub fn base_metadata(command: &str, settings: &Settings, cfg: &RunConfig) -> Value {
    let a = &cfg.assembly;
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "settings": settings_json(settings),
        "resolved": {
            "problem": cfg.problem.to_string(),
            "surface": cfg.surface.to_string(),
            "nodes_file": cfg.nodes_file,
            "count": cfg.count,
            "level": cfg.level,
            "levels": cfg.levels,
            "counts": cfg.counts,
            "degree": a.degree,
            "basis_size": a.basis_size,
            "stencil_size": a.stencil_size,
            "phs_exponent": a.phs_exponent,
            "delta": a.delta,
            "tau": a.tau,
            "degree_cap": a.degree_cap,
            "dt": cfg.dt,
            "final_time": cfg.final_time,
            "lambda_tol": cfg.lambda_tol,
            "allow_unstable": cfg.allow_unstable,
            "snapshot_every": cfg.snapshot_every,
        },
        "seeds": {
            "nodes": cfg.seed,
            "torus_centers": cfg.center_seed,
            "initial_condition": cfg.seed,
        },
    })
}

fn settings_json(settings: &Settings) -> Value {
    let mut map = serde_json::Map::new();
    for key in crate::config::KEYS {
        if let Some(v) = settings.get(key) {
            map.insert(key.to_string(), Value::String(v.to_string()));
        }
    }
    Value::Object(map)
}

pub fn write_metadata(dir: &Path, meta: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(meta)
        .map_err(|e| Error::InvalidInput(format!("metadata serialization: {e}")))?;
    write_text(&dir.join("metadata.json"), &(text + "\n"))
}

/// One row of a convergence table; failed levels carry `NaN` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error: f64,
    pub timings: Timings,
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("N,sqrtN,error,t_assembly,t_factor,t_solve\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:e},{},{},{}",
            r.n,
            (r.n as f64).sqrt(),
            r.error,
            r.timings.assembly,
            r.timings.factorization,
            r.timings.solve
        );
    }
    s
}

pub fn convergence_gnuplot(title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 1200,500\n\
         set output 'convergence.png'\n\
         set multiplot layout 1,2\n\
         set logscale xy\n\
         set grid\n\
         set key top right\n\
         set title '{title}'\n\
         set xlabel 'sqrt(N)'\n\
         set ylabel 'relative l2 error'\n\
         plot 'convergence.csv' using 2:3 skip 1 with linespoints pt 7 title 'error'\n\
         set title 'wall-clock time per stage'\n\
         set xlabel 'N'\n\
         set ylabel 'seconds'\n\
         set key top left\n\
         plot 'convergence.csv' using 1:4 skip 1 with linespoints title 'assembly', \\\n\
         \x20    '' using 1:5 skip 1 with linespoints title 'factorization', \\\n\
         \x20    '' using 1:6 skip 1 with linespoints title 'solve'\n\
         unset multiplot\n"
    )
}

pub fn spectrum_gnuplot() -> String {
    "set datafile separator ','\n\
     set terminal pngcairo size 700,600\n\
     set output 'spectrum.png'\n\
     set grid\n\
     set title 'eigenvalues of the discrete Laplacian'\n\
     set xlabel 'Re'\n\
     set ylabel 'Im'\n\
     plot 'spectrum.csv' using 1:2 skip 1 with points pt 7 ps 0.4 notitle\n"
        .to_string()
}

/// Field snapshots `x y z value [value2]` written every `every` steps; the
/// last finite state is kept for divergence reports.
pub struct Snapshots<'a> {
    dir: PathBuf,
    points: &'a [Vec3],
    every: usize,
    last: Option<(usize, f64, Vec<f64>)>,
}

impl<'a> Snapshots<'a> {
    pub fn new(dir: &Path, points: &'a [Vec3], every: usize) -> Result<Self> {
        let dir = dir.join("snapshots");
        create_dir(&dir)?;
        Ok(Self {
            dir,
            points,
            every,
            last: None,
        })
    }

    pub fn record(&mut self, step: usize, t: f64, u: &[f64]) -> Result<()> {
        if self.every > 0 && step.is_multiple_of(self.every) {
            self.write(&format!("step_{step:07}.csv"), u)?;
        }
        match &mut self.last {
            Some((s, time, buf)) => {
                *s = step;
                *time = t;
                buf.copy_from_slice(u);
            }
            None => self.last = Some((step, t, u.to_vec())),
        }
        Ok(())
    }

    pub fn write(&self, name: &str, u: &[f64]) -> Result<()> {
        write_text(&self.dir.join(name), &field_csv(self.points, u))
    }

    /// Writes the last recorded state to `last_valid.csv`, returning its step.
    pub fn write_last_valid(&self) -> Result<Option<(usize, f64)>> {
        match &self.last {
            Some((step, t, u)) => {
                self.write("last_valid.csv", u)?;
                Ok(Some((*step, *t)))
            }
            None => Ok(None),
        }
    }
}

/// Space-separated `x y z value [value2 ...]` rows; `u` holds the stacked
/// fields.
pub fn field_csv(points: &[Vec3], u: &[f64]) -> String {
    let n = points.len();
    let fields = if n == 0 { 0 } else { u.len() / n };
    let mut s = String::new();
    for (i, p) in points.iter().enumerate() {
        let _ = write!(s, "{:.17e} {:.17e} {:.17e}", p[0], p[1], p[2]);
        for f in 0..fields {
            let _ = write!(s, " {:.17e}", u[f * n + i]);
        }
        s.push('\n');
    }
    s
}
