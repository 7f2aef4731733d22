//! Run configuration: a flat `key = value` file merged with command-line
//! overrides, then resolved into concrete parameters.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use manifold_rbf::assembly::AssemblyConfig;
use manifold_rbf::geometry::Surface;
use manifold_rbf::problems::{
    CahnHilliard, FitzHughNagumo, ModelKind, ReactionModel, Turing, ADVECTION_DT, DIFFUSION_DT,
    DIFFUSION_FINAL_TIME, FLOW_PERIOD, TORUS_CENTER_SEED,
};
use manifold_rbf::{Error, Result};

/// Every key accepted in a config file or as a `--key` flag.
pub const KEYS: &[&str] = &[
    "problem",
    "surface",
    "nodes-file",
    "count",
    "level",
    "levels",
    "counts",
    "degree",
    "order",
    "stencil-size",
    "phs-exponent",
    "delta",
    "tau",
    "dt",
    "final-time",
    "seed",
    "center-seed",
    "nu",
    "ch-gamma",
    "delta1",
    "delta2",
    "tau1",
    "tau2",
    "alpha",
    "beta",
    "gamma1",
    "ic-mean",
    "ic-amplitude",
    "hyperviscosity-gamma",
    "hyperviscosity-power",
    "allow-unstable",
    "lambda-tol",
    "snapshot-every",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    Advection,
    Diffusion,
    Reaction(ModelKind),
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "advection" => Ok(Self::Advection),
            "diffusion" => Ok(Self::Diffusion),
            other => other.parse().map(Self::Reaction),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Advection => f.write_str("advection"),
            Self::Diffusion => f.write_str("diffusion"),
            Self::Reaction(k) => k.fmt(f),
        }
    }
}

impl Problem {
    /// Order of the differential operator the accuracy order refers to.
    fn operator_order(self) -> usize {
        match self {
            Self::Advection => 1,
            _ => 2,
        }
    }

    fn default_surface(self) -> Surface {
        match self {
            Self::Advection => Surface::Sphere,
            Self::Diffusion => Surface::Torus,
            Self::Reaction(_) => Surface::DoubleTorus,
        }
    }

    fn default_degree(self) -> usize {
        match self {
            Self::Advection => 2,
            _ => 4,
        }
    }

    fn default_tau(self, degree: usize) -> f64 {
        match (self, degree) {
            (Self::Advection, 2) => 1e-2,
            (Self::Advection, 3) => 1e-3,
            (Self::Advection, _) => 1e-4,
            (Self::Diffusion, d) if d >= 6 => 1e-4,
            _ => 1e-3,
        }
    }

    fn default_dt(self) -> f64 {
        match self {
            Self::Advection => ADVECTION_DT,
            Self::Diffusion => DIFFUSION_DT,
            Self::Reaction(ModelKind::CahnHilliard) => 1e-4,
            Self::Reaction(ModelKind::FitzHughNagumo) => 1e-3,
            Self::Reaction(ModelKind::Turing) => 0.01,
        }
    }

    fn default_final_time(self) -> f64 {
        match self {
            Self::Advection => FLOW_PERIOD,
            Self::Diffusion => DIFFUSION_FINAL_TIME,
            Self::Reaction(ModelKind::CahnHilliard) => 1.0,
            Self::Reaction(ModelKind::FitzHughNagumo) => 100.0,
            Self::Reaction(ModelKind::Turing) => 800.0,
        }
    }
}

/// Raw key/value settings; later insertions override earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut settings = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected 'key = value', got '{line}'")))?;
            settings
                .set(key.trim(), value.trim())
                .map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Underscores in keys are accepted as hyphens.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("invalid value '{v}' for {key}: {e}")))
            })
            .transpose()
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim().parse::<T>().map_err(|e| {
                            Error::Config(format!("invalid entry '{s}' in {key}: {e}"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool> {
        Ok(self.parsed::<bool>(key)?.unwrap_or(false))
    }
}

/// Explicit hyperviscosity override.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperviscosityOverride {
    pub gamma: f64,
    pub power: Option<u32>,
}

/// Fully resolved run parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    pub surface: Surface,
    pub nodes_file: Option<PathBuf>,
    /// Node count for generated torus and double torus sets.
    pub count: usize,
    /// Icosahedral subdivision level for sphere sets.
    pub level: u32,
    pub levels: Vec<u32>,
    pub counts: Vec<usize>,
    pub assembly: AssemblyConfig,
    pub dt: f64,
    pub final_time: f64,
    pub seed: u64,
    pub center_seed: u64,
    pub model: Option<ReactionModel>,
    /// Mean and amplitude of random initial fields (Cahn-Hilliard, Turing).
    pub ic_mean: f64,
    pub ic_amplitude: f64,
    pub hyperviscosity: Option<HyperviscosityOverride>,
    pub allow_unstable: bool,
    pub lambda_tol: f64,
    pub snapshot_every: usize,
}

impl RunConfig {
    pub fn resolve(s: &Settings) -> Result<Self> {
        let problem: Problem = s.parsed("problem")?.unwrap_or(Problem::Advection);
        let surface: Surface = s.parsed("surface")?.unwrap_or(problem.default_surface());
        let nodes_file = s.get("nodes-file").map(PathBuf::from);
        if surface == Surface::External && nodes_file.is_none() {
            return Err(Error::Config("surface 'external' needs nodes-file".into()));
        }
        match (problem, surface) {
            (Problem::Advection, Surface::Sphere | Surface::External) => {}
            (Problem::Diffusion, Surface::Torus) => {}
            (Problem::Reaction(_), _) => {}
            (p, s) => {
                return Err(Error::Config(format!(
                    "problem '{p}' is not defined on the {s}"
                )))
            }
        }

        let degree = match (s.parsed::<usize>("degree")?, s.parsed::<usize>("order")?) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either degree or order, not both".into(),
                ))
            }
            (Some(d), None) => d,
            (None, Some(xi)) if xi > 0 => xi + problem.operator_order() - 1,
            (None, Some(_)) => return Err(Error::Config("order must be positive".into())),
            (None, None) => problem.default_degree(),
        };
        let tau = s.parsed("tau")?.unwrap_or(problem.default_tau(degree));
        let mut assembly = AssemblyConfig::for_degree(degree, tau)?;
        if let Some(n) = s.parsed("stencil-size")? {
            assembly = assembly.with_stencil_size(n)?;
        }
        if let Some(m) = s.parsed("phs-exponent")? {
            assembly = assembly.with_phs_exponent(m)?;
        }
        if let Some(d) = s.parsed("delta")? {
            assembly = assembly.with_delta(d)?;
        }

        let dt: f64 = s.parsed("dt")?.unwrap_or(problem.default_dt());
        let final_time: f64 = s
            .parsed("final-time")?
            .unwrap_or(problem.default_final_time());
        if !(dt > 0.0) || !(final_time > 0.0) {
            return Err(Error::Config("dt and final-time must be positive".into()));
        }

        let model = match problem {
            Problem::Reaction(kind) => Some(resolve_model(kind, s)?),
            _ => None,
        };

        let gamma: Option<f64> = s.parsed("hyperviscosity-gamma")?;
        let power: Option<u32> = s.parsed("hyperviscosity-power")?;
        let hyperviscosity = match (gamma, power) {
            (Some(gamma), power) => Some(HyperviscosityOverride { gamma, power }),
            (None, Some(_)) => {
                return Err(Error::Config(
                    "hyperviscosity-power needs hyperviscosity-gamma".into(),
                ))
            }
            (None, None) => None,
        };
        let allow_unstable = s.flag("allow-unstable")?;
        if problem == Problem::Advection
            && hyperviscosity.is_some_and(|h| h.gamma == 0.0)
            && !allow_unstable
        {
            return Err(Error::Config(
                "advection without hyperviscosity may be unstable; pass --allow-unstable (allow-unstable = true in a config file)"
                    .into(),
            ));
        }

        Ok(Self {
            problem,
            surface,
            nodes_file,
            count: s.parsed("count")?.unwrap_or(match surface {
                Surface::Torus => 4000,
                _ => 2000,
            }),
            level: s.parsed("level")?.unwrap_or(4),
            levels: s.list("levels")?.unwrap_or_else(|| vec![2, 3, 4, 5]),
            counts: s
                .list("counts")?
                .unwrap_or_else(|| vec![1000, 2000, 4000, 8000, 16000]),
            assembly,
            dt,
            final_time,
            seed: s.parsed("seed")?.unwrap_or(1),
            center_seed: s.parsed("center-seed")?.unwrap_or(TORUS_CENTER_SEED),
            model,
            ic_mean: s.parsed("ic-mean")?.unwrap_or(match problem {
                Problem::Reaction(ModelKind::Turing) => 0.0,
                _ => 0.1,
            }),
            ic_amplitude: s.parsed("ic-amplitude")?.unwrap_or(match problem {
                Problem::Reaction(ModelKind::Turing) => 0.5,
                _ => 0.05,
            }),
            hyperviscosity,
            allow_unstable,
            lambda_tol: s.parsed("lambda-tol")?.unwrap_or(8e-2),
            snapshot_every: s.parsed("snapshot-every")?.unwrap_or(0),
        })
    }

    /// Number of time steps; the final time must be a multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let steps = (self.final_time / self.dt).round() as usize;
        if steps == 0 || ((steps as f64) * self.dt - self.final_time).abs() > 1e-9 * self.final_time
        {
            return Err(Error::Config(format!(
                "final-time {} is not a positive multiple of dt {}",
                self.final_time, self.dt
            )));
        }
        Ok(steps)
    }
}

fn resolve_model(kind: ModelKind, s: &Settings) -> Result<ReactionModel> {
    Ok(match kind {
        ModelKind::CahnHilliard => {
            let d = CahnHilliard::default();
            ReactionModel::CahnHilliard(CahnHilliard {
                nu: s.parsed("nu")?.unwrap_or(d.nu),
                gamma: s.parsed("ch-gamma")?.unwrap_or(d.gamma),
            })
        }
        ModelKind::FitzHughNagumo => {
            let diffusion = s.parsed("delta1")?.ok_or_else(|| {
                Error::Config("the fhn model needs delta1 (diffusion coefficient)".into())
            })?;
            ReactionModel::FitzHughNagumo(FitzHughNagumo { diffusion })
        }
        ModelKind::Turing => {
            let d = Turing::default();
            let alpha = s.parsed("alpha")?.unwrap_or(d.alpha);
            ReactionModel::Turing(Turing {
                delta1: s.parsed("delta1")?.unwrap_or(d.delta1),
                delta2: s.parsed("delta2")?.unwrap_or(d.delta2),
                tau1: s.parsed("tau1")?.unwrap_or(d.tau1),
                tau2: s.parsed("tau2")?.unwrap_or(d.tau2),
                alpha,
                beta: s.parsed("beta")?.unwrap_or(d.beta),
                gamma1: s.parsed("gamma1")?.unwrap_or(-alpha),
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(text: &str) -> Settings {
        Settings::parse(text, Path::new("test.cfg")).unwrap()
    }

    #[test]
    fn parses_comments_and_underscores() {
        let s = settings("# run\nproblem = diffusion\nfinal_time = 0.2 # short\n\n");
        assert_eq!(s.get("problem"), Some("diffusion"));
        assert_eq!(s.get("final-time"), Some("0.2"));
    }

    #[test]
    fn bad_lines_report_position() {
        let err = Settings::parse("dt = 1\nnonsense\n", Path::new("a.cfg")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = Settings::parse("colour = red\n", Path::new("a.cfg")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn later_settings_override() {
        let mut a = settings("dt = 1\nseed = 3");
        a.merge(&settings("dt = 2"));
        assert_eq!(a.get("dt"), Some("2"));
        assert_eq!(a.get("seed"), Some("3"));
    }

    #[test]
    fn advection_defaults() {
        let c = RunConfig::resolve(&Settings::default()).unwrap();
        assert_eq!(c.problem, Problem::Advection);
        assert_eq!(c.surface, Surface::Sphere);
        assert_eq!(c.assembly.degree, 2);
        assert_eq!(c.assembly.tau, 1e-2);
        assert_eq!(c.assembly.stencil_size, 21);
        assert_eq!(c.assembly.phs_exponent, 5);
        assert_eq!(c.steps().unwrap(), 2400);
    }

    #[test]
    fn order_maps_to_degree() {
        let c = RunConfig::resolve(&settings("problem = diffusion\norder = 3")).unwrap();
        assert_eq!(c.assembly.degree, 4);
        assert_eq!(c.assembly.tau, 1e-3);
        let c = RunConfig::resolve(&settings("order = 3")).unwrap();
        assert_eq!(c.assembly.degree, 3);
        assert!(RunConfig::resolve(&settings("order = 3\ndegree = 3")).is_err());
    }

    #[test]
    fn overrides_are_validated() {
        let c = RunConfig::resolve(&settings("delta = 1\nstencil-size = 25")).unwrap();
        assert_eq!((c.assembly.delta, c.assembly.stencil_size), (1.0, 25));
        assert!(RunConfig::resolve(&settings("phs-exponent = 4")).is_err());
        assert!(RunConfig::resolve(&settings("delta = 0.1")).is_err());
    }

    #[test]
    fn fhn_needs_diffusion() {
        assert!(RunConfig::resolve(&settings("problem = fhn")).is_err());
        let c = RunConfig::resolve(&settings("problem = fhn\ndelta1 = 0.001")).unwrap();
        assert_eq!(c.final_time, 100.0);
        assert_eq!(
            c.model,
            Some(ReactionModel::FitzHughNagumo(FitzHughNagumo {
                diffusion: 0.001
            }))
        );
    }

    #[test]
    fn unhyperviscous_advection_needs_flag() {
        assert!(RunConfig::resolve(&settings("hyperviscosity-gamma = 0")).is_err());
        let c = RunConfig::resolve(&settings("hyperviscosity-gamma = 0\nallow-unstable = true"))
            .unwrap();
        assert!(c.allow_unstable);
    }

    #[test]
    fn surface_must_fit_problem() {
        assert!(RunConfig::resolve(&settings("problem = diffusion\nsurface = sphere")).is_err());
        assert!(RunConfig::resolve(&settings("surface = external")).is_err());
        let c = RunConfig::resolve(&settings("problem = turing\nsurface = sphere")).unwrap();
        assert_eq!(c.surface, Surface::Sphere);
    }

    #[test]
    fn lists_parse() {
        let c = RunConfig::resolve(&settings("levels = 2, 3,4\ncounts = 100,200")).unwrap();
        assert_eq!(c.levels, vec![2, 3, 4]);
        assert_eq!(c.counts, vec![100, 200]);
        assert!(RunConfig::resolve(&settings("levels = 2,x")).is_err());
    }

    #[test]
    fn steps_must_divide() {
        let c = RunConfig::resolve(&settings("dt = 0.3\nfinal-time = 1")).unwrap();
        assert!(c.steps().is_err());
    }
}
