//! Drivers for the simulate / iterate / compare / validate subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::Value;

use splitdyn::diagnostics::count_sign_changes;
use splitdyn::discrete::run as discrete_run;
use splitdyn::dynamics::{SplitField, StepperConfig, Trajectory};
use splitdyn::problems::ProblemSpec;
use splitdyn::schedule::ValidationMode;
use splitdyn::vecmath::norm;
use splitdyn::{Error, Result};

use crate::config::ExperimentConfig;
use crate::output::{fmt_num, iterate_csv, trajectory_csv};
use crate::report::{iterate_report, simulate_report};

fn out_paths(cfg: &ExperimentConfig, suffix: &str) -> (PathBuf, PathBuf) {
    let csv = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}_{suffix}.csv", cfg.name)));
    let json = csv.with_extension("json");
    (csv, json)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::Parameter(format!("cannot write {}: {e}", path.display())))
}

pub fn run_trajectory(cfg: &ExperimentConfig) -> Result<(ProblemSpec, Trajectory)> {
    let spec = cfg.build_problem()?;
    let schedules = cfg.build_schedules(&spec)?;
    let field = SplitField::new(schedules, spec.problem.clone(), cfg.mode, cfg.t_end)?;
    let z0 = field.initial_phase(&cfg.x0, &cfg.u0)?;
    let stepper = StepperConfig {
        step: cfg.step,
        samples: cfg.samples,
        ..Default::default()
    };
    let traj = field.integrate(&z0, &stepper)?;
    Ok((spec, traj))
}

fn gap_series(
    traj: &Trajectory,
    spec: &ProblemSpec,
    envelope: bool,
) -> Option<Result<Vec<f64>>> {
    let mut out = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let gam = traj.schedules.gamma.eval(s.t);
        let v = if envelope {
            spec.envelope_gap(gam, &s.x)?
        } else {
            spec.objective_gap(gam, &s.x)?
        };
        match v {
            Ok(v) => out.push(v),
            Err(e) => return Some(Err(e)),
        }
    }
    Some(Ok(out))
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<()> {
    let started = Instant::now();
    let (spec, traj) = run_trajectory(cfg)?;

    let objective_gap = gap_series(&traj, &spec, false).transpose()?;
    let envelope_gap = gap_series(&traj, &spec, true).transpose()?;
    // the CSV column carries the objective value itself
    let min_value = spec.objectives.as_ref().map(|o| o.min_value).unwrap_or(0.0);
    let objective_vals: Option<Vec<f64>> = objective_gap
        .as_ref()
        .map(|g| g.iter().map(|v| v + min_value).collect());

    let (energies, _) = splitdyn::diagnostics::energy_series(&traj)?;
    let csv = trajectory_csv(&traj, &energies, objective_vals.as_deref());
    let report = simulate_report(
        cfg,
        &spec,
        &traj,
        objective_gap.as_deref(),
        envelope_gap.as_deref(),
        started.elapsed().as_secs_f64(),
    )?;

    let (csv_path, json_path) = out_paths(cfg, "simulate");
    write_file(&csv_path, &csv)?;
    write_file(&json_path, &serde_json::to_string_pretty(&report).unwrap())?;

    let final_d = report
        .get("final_distance_to_zero")
        .and_then(Value::as_f64)
        .map(|d| format!("{d:.3e}"))
        .unwrap_or_else(|| "n/a".into());
    println!(
        "simulate {}: {} samples on [{}, {}], final distance to zero {final_d}",
        cfg.name,
        traj.samples.len(),
        cfg.t0,
        cfg.t_end
    );
    println!("  wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

pub fn iterate(cfg: &ExperimentConfig) -> Result<()> {
    let started = Instant::now();
    let spec = cfg.build_problem()?;
    let params = cfg.build_discrete(&spec)?;
    let mode = match cfg.mode {
        ValidationMode::BZero => ValidationMode::BZero,
        _ => ValidationMode::General,
    };
    params.validate(spec.problem.b().beta(), mode).into_result()?;
    let inner = splitdyn::discrete::InnerConfig {
        tol: cfg.inner_tol,
        max_iters: cfg.inner_max,
    };
    let run = discrete_run(&spec.problem, &params, cfg.scheme, &cfg.x0, &cfg.x1, &inner)?;

    let csv = iterate_csv(&run);
    let report = iterate_report(cfg, &spec, &run, started.elapsed().as_secs_f64());
    let (csv_path, json_path) = out_paths(cfg, "iterate");
    write_file(&csv_path, &csv)?;
    write_file(&json_path, &serde_json::to_string_pretty(&report).unwrap())?;

    println!(
        "iterate {}: {} iterations, |x_final| = {:.3e}",
        cfg.name,
        run.records.len(),
        norm(&run.final_x)
    );
    println!("  wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    let spec = cfg.build_problem()?;
    let schedules = cfg.build_schedules(&spec)?;
    let report = schedules.validate(spec.problem.b().beta(), cfg.mode, cfg.t_end);
    println!(
        "validate {}: mode {}, {}",
        cfg.name,
        report.mode,
        if report.passed() { "passed" } else { "FAILED" }
    );
    for v in &report.violations {
        println!("  violation: {v}");
    }
    report.into_result()
}

/// What to compare between two runs.
#[derive(Debug, Clone, Copy)]
pub enum Metric {
    XNorm,
    Speed,
    TNorm,
    Residual,
    Objective,
    Envelope,
    /// sign flips of one velocity component
    SignChanges(usize),
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("sign_changes:") {
            let idx = rest
                .parse()
                .map_err(|_| Error::Parameter(format!("bad component index '{rest}'")))?;
            return Ok(Self::SignChanges(idx));
        }
        match s {
            "x_norm" => Ok(Self::XNorm),
            "speed" => Ok(Self::Speed),
            "t_norm" => Ok(Self::TNorm),
            "residual" => Ok(Self::Residual),
            "objective" => Ok(Self::Objective),
            "envelope" => Ok(Self::Envelope),
            _ => Err(Error::Parameter(format!(
                "unknown metric '{s}' (x_norm, speed, t_norm, residual, objective, envelope, sign_changes:IDX)"
            ))),
        }
    }

    fn series(&self, traj: &Trajectory, spec: &ProblemSpec) -> Result<Vec<f64>> {
        match self {
            Self::XNorm => Ok(traj.samples.iter().map(|s| norm(&s.x)).collect()),
            Self::Speed => Ok(traj.samples.iter().map(|s| s.speed).collect()),
            Self::TNorm => Ok(traj.samples.iter().map(|s| norm(&s.t_op)).collect()),
            Self::Residual => Ok(traj.samples.iter().map(|s| norm(&s.residual)).collect()),
            Self::Objective => gap_series(traj, spec, false).ok_or_else(|| {
                Error::Parameter(format!("problem '{}' has no objective oracles", spec.name))
            })?,
            Self::Envelope => gap_series(traj, spec, true).ok_or_else(|| {
                Error::Parameter(format!(
                    "envelope values need objective oracles and B = 0 (problem '{}')",
                    spec.name
                ))
            })?,
            Self::SignChanges(_) => Err(Error::Parameter(
                "sign_changes is a scalar summary, not a series".into(),
            )),
        }
    }
}

pub fn compare(
    cfg_a: &ExperimentConfig,
    cfg_b: &ExperimentConfig,
    metric: Metric,
    out: Option<&Path>,
) -> Result<()> {
    if cfg_a.problem != cfg_b.problem {
        return Err(Error::Parameter(format!(
            "compare needs the same problem on both sides, got '{}' vs '{}'",
            cfg_a.problem, cfg_b.problem
        )));
    }
    let (spec_a, traj_a) = run_trajectory(cfg_a)?;
    let (spec_b, traj_b) = run_trajectory(cfg_b)?;

    if let Metric::SignChanges(idx) = metric {
        let dim = spec_a.problem.dim();
        if idx >= dim {
            return Err(Error::Parameter(format!(
                "component {idx} out of range for dimension {dim}"
            )));
        }
        let ca = count_sign_changes(traj_a.samples.iter().map(|s| s.xdot[idx]));
        let cb = count_sign_changes(traj_b.samples.iter().map(|s| s.xdot[idx]));
        println!(
            "compare {} vs {}: sign changes of xdot[{idx}] = {ca} vs {cb}",
            cfg_a.name, cfg_b.name
        );
        return Ok(());
    }

    let vals_a = metric.series(&traj_a, &spec_a)?;
    let vals_b = metric.series(&traj_b, &spec_b)?;
    let n = vals_a.len().min(vals_b.len());
    let mut table = String::from("t,a,b\n");
    for i in 0..n {
        let (ta, tb) = (traj_a.samples[i].t, traj_b.samples[i].t);
        if (ta - tb).abs() > 1e-9 * (1.0 + ta.abs()) {
            return Err(Error::Parameter(format!(
                "sample grids do not match at index {i} ({ta} vs {tb}); align t0/t_end/step/samples"
            )));
        }
        table.push_str(&format!(
            "{},{},{}\n",
            fmt_num(ta),
            fmt_num(vals_a[i]),
            fmt_num(vals_b[i])
        ));
    }
    let (last_a, last_b) = (vals_a[n - 1], vals_b[n - 1]);
    let ratio = if last_b == 0.0 {
        if last_a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        last_a / last_b
    };
    println!(
        "compare {} vs {} at t = {}: a = {:.6e}, b = {:.6e}, ratio a/b = {:.6e}",
        cfg_a.name,
        cfg_b.name,
        traj_a.samples[n - 1].t,
        last_a,
        last_b,
        ratio
    );
    if let Some(path) = out {
        write_file(path, &table)?;
        println!("  wrote {}", path.display());
    }
    Ok(())
}
