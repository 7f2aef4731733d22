use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use manifold_rbf::Result;
use manifold_rbf_cli::commands;
use manifold_rbf_cli::config::{RunConfig, Settings};
use manifold_rbf_cli::error_kind;

#[derive(Parser, Debug)]
#[command(
    name = "mrbf",
    version,
    about = "RBF-FD surface operators and PDE runs on point clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate (or load) a node set and write it as text.
    Nodes(RunArgs),
    /// Assemble the operators and report sizes and eigenvalue estimates.
    Assemble(RunArgs),
    /// Dense spectrum of the Laplace-Beltrami matrix.
    Spectrum(RunArgs),
    /// Run the configured problem with snapshots.
    Solve(RunArgs),
    /// Error and timings over a sequence of refinements.
    Convergence(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, default_value = "out")]
    output: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

macro_rules! overrides {
    ($($field:ident => $key:literal),* $(,)?) => {
        #[derive(Args, Debug)]
        struct Overrides {
            $(
                #[arg(long = $key, value_name = "VALUE", allow_hyphen_values = true)]
                $field: Option<String>,
            )*
            /// Permit advection with the hyperviscosity switched off.
            #[arg(long)]
            allow_unstable: bool,
        }

        impl Overrides {
            fn settings(&self) -> Result<Settings> {
                let mut s = Settings::default();
                $(
                    if let Some(v) = &self.$field {
                        s.set($key, v)?;
                    }
                )*
                if self.allow_unstable {
                    s.set("allow-unstable", "true")?;
                }
                Ok(s)
            }
        }
    };
}

overrides! {
    problem => "problem",
    surface => "surface",
    nodes_file => "nodes-file",
    count => "count",
    level => "level",
    levels => "levels",
    counts => "counts",
    degree => "degree",
    order => "order",
    stencil_size => "stencil-size",
    phs_exponent => "phs-exponent",
    delta => "delta",
    tau => "tau",
    dt => "dt",
    final_time => "final-time",
    seed => "seed",
    center_seed => "center-seed",
    nu => "nu",
    ch_gamma => "ch-gamma",
    delta1 => "delta1",
    delta2 => "delta2",
    tau1 => "tau1",
    tau2 => "tau2",
    alpha => "alpha",
    beta => "beta",
    gamma1 => "gamma1",
    ic_mean => "ic-mean",
    ic_amplitude => "ic-amplitude",
    hyperviscosity_gamma => "hyperviscosity-gamma",
    hyperviscosity_power => "hyperviscosity-power",
    lambda_tol => "lambda-tol",
    snapshot_every => "snapshot-every",
}

fn run(command: &str, args: &RunArgs) -> Result<()> {
    let mut settings = match &args.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    settings.merge(&args.overrides.settings()?);
    let cfg = RunConfig::resolve(&settings)?;
    let out = &args.output;
    match command {
        "nodes" => commands::nodes(&cfg, &settings, out),
        "assemble" => commands::assemble_cmd(&cfg, &settings, out),
        "spectrum" => commands::spectrum(&cfg, &settings, out),
        "solve" => commands::solve(&cfg, &settings, out),
        _ => commands::convergence(&cfg, &settings, out),
    }?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Nodes(a) => ("nodes", a),
        Command::Assemble(a) => ("assemble", a),
        Command::Spectrum(a) => ("spectrum", a),
        Command::Solve(a) => ("solve", a),
        Command::Convergence(a) => ("convergence", a),
    };
    match run(name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                json!({"status": "error", "command": name, "kind": error_kind(&e), "message": e.to_string()})
            );
            ExitCode::FAILURE
        }
    }
}
