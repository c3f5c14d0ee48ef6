//! Flat key=value experiment configuration, presets, and resolution into
//! runnable pieces.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use splitdyn::discrete::{DiscreteParams, DiscreteScheme};
use splitdyn::problems::{self, ProblemSpec};
use splitdyn::schedule::{
    forward_only_reduction, DampingParams, GammaSchedule, LambdaSchedule, ScheduleSet,
    ValidationMode,
};
use splitdyn::{Error, Result};

/// Everything a run needs, as parsed. Continuous and discrete fields
/// coexist; `simulate` reads the former, `iterate` the latter.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: String,
    pub mode: ValidationMode,
    pub alpha: f64,
    pub xi: f64,
    pub lambda0: Option<f64>,
    pub gamma: Option<GammaSchedule>,
    /// forward-only rate coefficient; replaces lambda0/gamma in a_zero mode
    pub eta: Option<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub step: Option<f64>,
    pub samples: usize,
    pub x0: Vec<f64>,
    pub u0: Vec<f64>,
    pub n_iters: usize,
    pub x1: Vec<f64>,
    pub scheme: DiscreteScheme,
    pub inner_tol: f64,
    pub inner_max: usize,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

fn parse_vec(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("bad vector entry '{p}'")))
        })
        .collect()
}

fn parse_scheme(s: &str) -> Result<DiscreteScheme> {
    match s {
        "generic" => Ok(DiscreteScheme::Generic),
        "resolvent" => Ok(DiscreteScheme::ResolventOnly),
        "resolvent_alt" => Ok(DiscreteScheme::ResolventOnlyAlt),
        _ => Err(Error::Parameter(format!("unknown scheme '{s}'"))),
    }
}

impl ExperimentConfig {
    /// A permissive baseline; presets and files fill it in.
    fn blank(name: &str) -> Self {
        Self {
            name: name.to_string(),
            problem: "rotation_identity".into(),
            mode: ValidationMode::General,
            alpha: 7.0,
            xi: 0.0,
            lambda0: None,
            gamma: None,
            eta: None,
            t0: 1.0,
            t_end: 100.0,
            step: None,
            samples: 500,
            x0: vec![1.0, 2.0],
            u0: vec![-1.0, -1.0],
            n_iters: 1000,
            x1: vec![1.0, 2.0],
            scheme: DiscreteScheme::Generic,
            inner_tol: 1e-12,
            inner_max: 10_000,
            out: None,
            seed: 42,
        }
    }

    /// Built-in presets encoding the benchmark constants.
    pub fn preset(name: &str) -> Result<Self> {
        let mut c = Self::blank(name);
        match name {
            // ill-conditioned diagonal quadratic, forward-only mode
            "quadratic" => {
                c.problem = "quadratic_diag:1,100".into();
                c.mode = ValidationMode::AZero;
                c.alpha = 20.0;
                c.xi = 0.0;
                c.eta = Some(0.278);
                c.t0 = 1.0;
                c.t_end = 50.0;
                c.x0 = vec![1.0, 1.0];
                c.u0 = vec![1.0, 1.0];
                c.x1 = vec![1.0, 1.0];
            }
            // 1-d nonsmooth minimization with a fast-growing step schedule
            "nonsmooth" => {
                c.problem = "abs".into();
                c.mode = ValidationMode::BZero;
                c.alpha = 2.0;
                c.xi = 0.0;
                c.lambda0 = Some(1.1);
                c.gamma = Some(GammaSchedule::poly(1.0, 8).unwrap());
                c.t0 = 1.0;
                c.t_end = 10.0;
                c.x0 = vec![5.0];
                c.u0 = vec![0.0];
                c.n_iters = 200;
                c.x1 = vec![4.5];
                c.scheme = DiscreteScheme::ResolventOnly;
            }
            // rotation + identity splitting instance
            "rotation" => {
                c.problem = "rotation_identity".into();
                c.mode = ValidationMode::General;
                c.alpha = 7.0;
                c.xi = 0.0;
                c.lambda0 = Some(0.056);
                c.gamma = Some(GammaSchedule::constant(1.5).unwrap());
                c.t0 = 1.0;
                c.t_end = 100.0;
                c.x0 = vec![1.0, 2.0];
                c.u0 = vec![-1.0, -1.0];
                c.n_iters = 1000;
                c.x1 = vec![1.0, 2.0];
            }
            _ => {
                return Err(Error::Parameter(format!(
                    "unknown preset '{name}' (available: quadratic, nonsmooth, rotation)"
                )))
            }
        }
        Ok(c)
    }

    /// Parse a flat key=value file. Lines starting with `#` are comments.
    pub fn from_text(name: &str, text: &str) -> Result<Self> {
        let mut c = Self::blank(name);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parameter(format!("line {}: expected key=value", lineno + 1))
            })?;
            c.set(key.trim(), value.trim())?;
        }
        Ok(c)
    }

    /// Apply one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |k: &str, v: &str| Error::Parameter(format!("bad value '{v}' for key '{k}'"));
        match key {
            "problem" => self.problem = value.to_string(),
            "mode" => self.mode = ValidationMode::from_str(value)?,
            "alpha" => self.alpha = value.parse().map_err(|_| bad(key, value))?,
            "xi" => self.xi = value.parse().map_err(|_| bad(key, value))?,
            "lambda0" => self.lambda0 = Some(value.parse().map_err(|_| bad(key, value))?),
            "gamma" => self.gamma = Some(GammaSchedule::from_str(value)?),
            "eta" => self.eta = Some(value.parse().map_err(|_| bad(key, value))?),
            "t0" => self.t0 = value.parse().map_err(|_| bad(key, value))?,
            "t_end" => self.t_end = value.parse().map_err(|_| bad(key, value))?,
            "step" => self.step = Some(value.parse().map_err(|_| bad(key, value))?),
            "samples" => self.samples = value.parse().map_err(|_| bad(key, value))?,
            "x0" => self.x0 = parse_vec(value)?,
            "u0" => self.u0 = parse_vec(value)?,
            "n_iters" => self.n_iters = value.parse().map_err(|_| bad(key, value))?,
            "x1" => self.x1 = parse_vec(value)?,
            "scheme" => self.scheme = parse_scheme(value)?,
            "inner_tol" => self.inner_tol = value.parse().map_err(|_| bad(key, value))?,
            "inner_max" => self.inner_max = value.parse().map_err(|_| bad(key, value))?,
            "out" => self.out = Some(PathBuf::from(value)),
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            _ => return Err(Error::Parameter(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Environment seed override, applied last.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(s) = std::env::var("SPLITDYN_SEED") {
            self.seed = s
                .parse()
                .map_err(|_| Error::Parameter(format!("bad SPLITDYN_SEED '{s}'")))?;
        }
        Ok(())
    }

    pub fn build_problem(&self) -> Result<ProblemSpec> {
        problems::by_name(&self.problem)
    }

    /// Resolve the schedules, applying the forward-only reduction when eta
    /// is given in a_zero mode.
    pub fn build_schedules(&self, spec: &ProblemSpec) -> Result<ScheduleSet> {
        let damping = DampingParams::new(self.alpha, self.xi, self.t0);
        let (lambda, gamma) = match (self.mode, self.eta) {
            (ValidationMode::AZero, Some(eta)) => {
                forward_only_reduction(eta, spec.problem.b().beta())?
            }
            _ => {
                let lambda0 = self.lambda0.ok_or_else(|| {
                    Error::Parameter("lambda0 is required (or eta in a_zero mode)".into())
                })?;
                let gamma = self
                    .gamma
                    .ok_or_else(|| Error::Parameter("gamma schedule is required".into()))?;
                (LambdaSchedule::new(lambda0)?, gamma)
            }
        };
        Ok(ScheduleSet::new(damping, lambda, gamma))
    }

    pub fn build_discrete(&self, spec: &ProblemSpec) -> Result<DiscreteParams> {
        let schedules = self.build_schedules(spec)?;
        Ok(DiscreteParams {
            alpha: self.alpha,
            xi: self.xi,
            lambda0: schedules.lambda.lambda0(),
            gamma: schedules.gamma,
            n_iters: self.n_iters,
        })
    }

    /// Echo of the effective configuration, resolved values included.
    pub fn echo(&self, spec: &ProblemSpec) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("name".into(), self.name.clone());
        m.insert("problem".into(), self.problem.clone());
        m.insert("mode".into(), self.mode.to_string());
        m.insert("alpha".into(), self.alpha.to_string());
        m.insert("xi".into(), self.xi.to_string());
        if let Ok(s) = self.build_schedules(spec) {
            m.insert("lambda0".into(), s.lambda.lambda0().to_string());
            m.insert("gamma".into(), s.gamma.to_string());
        }
        if let Some(eta) = self.eta {
            m.insert("eta".into(), eta.to_string());
        }
        m.insert("t0".into(), self.t0.to_string());
        m.insert("t_end".into(), self.t_end.to_string());
        if let Some(step) = self.step {
            m.insert("step".into(), step.to_string());
        }
        m.insert("samples".into(), self.samples.to_string());
        let fmt_vec = |v: &[f64]| {
            let mut s = String::new();
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{x}");
            }
            s
        };
        m.insert("x0".into(), fmt_vec(&self.x0));
        m.insert("u0".into(), fmt_vec(&self.u0));
        m.insert("n_iters".into(), self.n_iters.to_string());
        m.insert("x1".into(), fmt_vec(&self.x1));
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}
