//! Command-line front end: configure, run, and export continuous and
//! discrete solver experiments as CSV plus a JSON run report.

mod config;
mod output;
mod report;
mod runs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use splitdyn::Error;

#[derive(Parser)]
#[command(
    name = "splitdyn",
    version,
    about = "Inertial forward-backward dynamics for monotone inclusions: simulate, iterate, compare, validate"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the continuous dynamics and export trajectory CSV + report
    Simulate(RunArgs),
    /// Run the discrete inertial proximal algorithm
    Iterate(RunArgs),
    /// Run two configurations on the same problem and compare a metric
    Compare(CompareArgs),
    /// Check a configuration against its mode's preconditions
    Validate(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Built-in preset (quadratic | nonsmooth | rotation); repeatable
    #[arg(long)]
    preset: Vec<String>,
    /// Config file of key=value lines; repeatable
    #[arg(long)]
    config: Vec<PathBuf>,
    /// Override any config key, e.g. --set alpha=7
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Shorthand for --set xi=...
    #[arg(long)]
    xi: Option<f64>,
    /// Shorthand for --set gamma=... (const:C | poly:N | poly:A,N | exp:R)
    #[arg(long)]
    gamma: Option<String>,
    /// Shorthand for --set problem=... (e.g. abs, half_square, rotation_identity)
    #[arg(long, visible_alias = "f")]
    problem: Option<String>,
    /// Shorthand for --set scheme=... (generic | resolvent | resolvent_alt)
    #[arg(long)]
    scheme: Option<String>,
    /// Output CSV path (single-config runs only)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run this many configs concurrently in batch mode
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct CompareArgs {
    /// Left side: preset:NAME or a config file path
    #[arg(long)]
    a: String,
    /// Right side: preset:NAME or a config file path
    #[arg(long)]
    b: String,
    /// Overrides applied to the left side only
    #[arg(long = "set-a", value_name = "KEY=VALUE")]
    sets_a: Vec<String>,
    /// Overrides applied to the right side only
    #[arg(long = "set-b", value_name = "KEY=VALUE")]
    sets_b: Vec<String>,
    /// x_norm | speed | t_norm | residual | objective | envelope | sign_changes:IDX
    #[arg(long, default_value = "x_norm")]
    metric: String,
    /// Write the matched-time table here
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_side(side: &str, sets: &[String]) -> Result<ExperimentConfig, Error> {
    let mut cfg = if let Some(name) = side.strip_prefix("preset:") {
        ExperimentConfig::preset(name)?
    } else {
        let path = PathBuf::from(side);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Parameter(format!("cannot read {}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "config".into());
        ExperimentConfig::from_text(&name, &text)?
    };
    apply_sets(&mut cfg, sets)?;
    cfg.apply_env()?;
    Ok(cfg)
}

fn apply_sets(cfg: &mut ExperimentConfig, sets: &[String]) -> Result<(), Error> {
    for s in sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("--set expects KEY=VALUE, got '{s}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(())
}

fn collect_configs(args: &RunArgs) -> Result<Vec<ExperimentConfig>, Error> {
    let mut configs = Vec::new();
    for name in &args.preset {
        configs.push(ExperimentConfig::preset(name)?);
    }
    for path in &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parameter(format!("cannot read {}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "config".into());
        configs.push(ExperimentConfig::from_text(&name, &text)?);
    }
    if configs.is_empty() {
        return Err(Error::Parameter(
            "give at least one --preset or --config".into(),
        ));
    }
    if configs.len() > 1 && args.out.is_some() {
        return Err(Error::Parameter(
            "--out applies to single-config runs; set out= per config file".into(),
        ));
    }
    for cfg in &mut configs {
        if let Some(xi) = args.xi {
            cfg.xi = xi;
        }
        if let Some(g) = &args.gamma {
            cfg.set("gamma", g)?;
        }
        if let Some(p) = &args.problem {
            cfg.set("problem", p)?;
        }
        if let Some(s) = &args.scheme {
            cfg.set("scheme", s)?;
        }
        apply_sets(cfg, &args.sets)?;
        if let Some(out) = &args.out {
            cfg.out = Some(out.clone());
        }
        cfg.apply_env()?;
    }
    Ok(configs)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation { .. } => 2,
        Error::Divergence { .. } => 3,
        Error::InnerSolver { .. } => 4,
        _ => 1,
    }
}

fn run_batch(
    configs: Vec<ExperimentConfig>,
    jobs: usize,
    f: fn(&ExperimentConfig) -> Result<(), Error>,
) -> ExitCode {
    if configs.len() == 1 || jobs <= 1 {
        for cfg in &configs {
            if let Err(e) = f(cfg) {
                eprintln!("error [{}]: {e}", cfg.name);
                return ExitCode::from(exit_code(&e));
            }
        }
        return ExitCode::SUCCESS;
    }
    let results: Vec<Option<Error>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk in configs.chunks(configs.len().div_ceil(jobs)) {
            handles.push(scope.spawn(move || {
                chunk
                    .iter()
                    .map(|cfg| f(cfg).err())
                    .collect::<Vec<Option<Error>>>()
            }));
        }
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    for (cfg, err) in configs.iter().zip(&results) {
        if let Some(e) = err {
            eprintln!("error [{}]: {e}", cfg.name);
        }
    }
    match results.iter().flatten().next() {
        Some(e) => ExitCode::from(exit_code(e)),
        None => ExitCode::SUCCESS,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<ExitCode, Error> = (|| match &cli.cmd {
        Cmd::Simulate(args) => Ok(run_batch(collect_configs(args)?, args.jobs, runs::simulate)),
        Cmd::Iterate(args) => Ok(run_batch(collect_configs(args)?, args.jobs, runs::iterate)),
        Cmd::Validate(args) => Ok(run_batch(collect_configs(args)?, args.jobs, runs::validate)),
        Cmd::Compare(args) => {
            let cfg_a = load_side(&args.a, &args.sets_a)?;
            let cfg_b = load_side(&args.b, &args.sets_b)?;
            let metric = runs::Metric::parse(&args.metric)?;
            runs::compare(&cfg_a, &cfg_b, metric, args.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
