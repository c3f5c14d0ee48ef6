//! Closed-form benchmark problems with exact resolvents and known zeros.
//!
//! Every built-in problem carries analytic oracles only; brute-force
//! minimization exists solely as a test oracle and never enters the solve
//! path.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operator::{scalar_op, soft_threshold, CocoerciveOp, MonotoneOp, SplitProblem};
use crate::vecmath::lincomb;

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Objective oracles for problems that come from minimization: A = ∂f,
/// B = ∇g, min attained at the known zero.
#[derive(Clone)]
pub struct Objectives {
    pub f: Arc<ValueFn>,
    pub g: Arc<ValueFn>,
    pub min_value: f64,
}

impl std::fmt::Debug for Objectives {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Objectives")
            .field("min_value", &self.min_value)
            .finish()
    }
}

/// A named benchmark instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub problem: SplitProblem,
    pub objectives: Option<Objectives>,
    /// What the instance is, mathematically.
    pub note: String,
}

impl ProblemSpec {
    /// f(prox) + g(prox) − min over the proximal point prox_{γf}(x − γ∇g(x)).
    /// None when the problem carries no objective oracles.
    pub fn objective_gap(&self, gamma: f64, x: &[f64]) -> Option<Result<f64>> {
        let obj = self.objectives.as_ref()?;
        Some((|| {
            let prox = self.prox_point(gamma, x)?;
            Ok((obj.f)(&prox) + (obj.g)(&prox) - obj.min_value)
        })())
    }

    /// The proximal point prox_{γf}(x − γ∇g(x)) = J_{γA}(x − γBx).
    pub fn prox_point(&self, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        let bx = self.problem.b().eval(x)?;
        let u = lincomb(1.0, x, -gamma, &bx);
        self.problem.a().resolvent(gamma, &u)
    }

    /// Moreau-envelope gap f_γ(x) − min f for resolvent-only problems
    /// (B = 0): f_γ(x) = f(prox_{γf}(x)) + ‖x − prox_{γf}(x)‖²/(2γ).
    /// Strictly positive away from the minimizer, which makes it the
    /// right series for log-log rate fits when f(prox) collapses to an
    /// exact zero.
    pub fn envelope_gap(&self, gamma: f64, x: &[f64]) -> Option<Result<f64>> {
        let obj = self.objectives.as_ref()?;
        if !self.problem.b().is_zero() {
            return None;
        }
        Some((|| {
            let prox = self.problem.a().resolvent(gamma, x)?;
            let d: f64 = x
                .iter()
                .zip(&prox)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            Ok((obj.f)(&prox) + d / (2.0 * gamma) - obj.min_value)
        })())
    }
}

/// The smooth kinds available for B = ∇g: g(x) = ½Σ cᵢxᵢ² with cᵢ > 0.
/// β = 1/max(c) and the zero is the origin.
pub fn build_quadratic_diag(coeffs: &[f64]) -> Result<ProblemSpec> {
    if coeffs.is_empty() {
        return Err(Error::Parameter("need at least one coefficient".into()));
    }
    if let Some(c) = coeffs.iter().find(|c| !(**c > 0.0)) {
        return Err(Error::Parameter(format!(
            "quadratic coefficients must be positive, got {c}"
        )));
    }
    let dim = coeffs.len();
    let lipschitz = coeffs.iter().cloned().fold(f64::MIN, f64::max);
    let c_grad = coeffs.to_vec();
    let b = CocoerciveOp::new(dim, 1.0 / lipschitz, move |x: &[f64]| {
        x.iter().zip(&c_grad).map(|(xi, ci)| ci * xi).collect()
    })?;
    let a = MonotoneOp::zero(dim);
    let problem = SplitProblem::new(a, b)?.with_known_zero(vec![0.0; dim])?;
    let c_f = coeffs.to_vec();
    let g = Arc::new(move |x: &[f64]| {
        0.5 * x.iter().zip(&c_f).map(|(xi, ci)| ci * xi * xi).sum::<f64>()
    });
    let name = format!(
        "quadratic_diag:{}",
        coeffs
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(ProblemSpec {
        name,
        problem,
        objectives: Some(Objectives {
            f: Arc::new(|_| 0.0),
            g,
            min_value: 0.0,
        }),
        note: "diagonal quadratic; gradient is the diagonal map, minimizer at the origin".into(),
    })
}

/// One-dimensional nonsmooth kinds for A = ∂f, B = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonsmoothKind {
    /// f(x) = ½x², prox_γ(x) = x/(1+γ)
    HalfSquare,
    /// f(x) = |x|, prox_γ = soft threshold
    Abs,
    /// f(x) = |x| + ½x², prox_γ(x) = soft(x, γ)/(1+γ)
    AbsPlusHalfSquare,
}

pub fn build_nonsmooth_1d(kind: NonsmoothKind) -> ProblemSpec {
    let (name, a, f): (&str, MonotoneOp, Arc<ValueFn>) = match kind {
        NonsmoothKind::HalfSquare => (
            "half_square",
            scalar_op("grad x^2/2", |g, x| x / (1.0 + g)).with_forward(|x| vec![x[0]]),
            Arc::new(|x: &[f64]| 0.5 * x[0] * x[0]),
        ),
        NonsmoothKind::Abs => (
            "abs",
            scalar_op("subgrad |x|", |g, x| soft_threshold(x, g)),
            Arc::new(|x: &[f64]| x[0].abs()),
        ),
        NonsmoothKind::AbsPlusHalfSquare => (
            "abs_plus_half_square",
            scalar_op("subgrad |x|+x^2/2", |g, x| soft_threshold(x, g) / (1.0 + g)),
            Arc::new(|x: &[f64]| x[0].abs() + 0.5 * x[0] * x[0]),
        ),
    };
    let problem = SplitProblem::new(a, CocoerciveOp::zero(1))
        .unwrap()
        .with_known_zero(vec![0.0])
        .unwrap();
    ProblemSpec {
        name: name.to_string(),
        problem,
        objectives: Some(Objectives {
            f,
            g: Arc::new(|_| 0.0),
            min_value: 0.0,
        }),
        note: "1-d nonsmooth convex function with closed-form prox, minimum 0 at 0".into(),
    }
}

/// Rotation A(x₁,x₂) = (−x₂, x₁) paired with B = id (β = 1); a monotone
/// inclusion that is not the optimality system of any minimization problem.
/// J_{γA} = (1/(1+γ²))·[[1, γ], [−γ, 1]], zero at the origin.
pub fn build_rotation_identity() -> ProblemSpec {
    let a = MonotoneOp::new(2, "rotation", |g, x| {
        let d = 1.0 + g * g;
        vec![(x[0] + g * x[1]) / d, (-g * x[0] + x[1]) / d]
    })
    .with_forward(|x| vec![-x[1], x[0]]);
    let b = CocoerciveOp::new(2, 1.0, |x: &[f64]| x.to_vec()).unwrap();
    let problem = SplitProblem::new(a, b)
        .unwrap()
        .with_known_zero(vec![0.0, 0.0])
        .unwrap();
    ProblemSpec {
        name: "rotation_identity".into(),
        problem,
        objectives: None,
        note: "rotation plus identity; genuinely monotone (non-gradient) splitting instance".into(),
    }
}

/// Closed-form matrix of T_{λ,γ} for the rotation+identity problem, used as
/// an independent cross-check of the composed evaluation. Row-major 2×2:
/// diagonal (γ²+γ)/(λ(1+γ²)), off-diagonal ±γ(γ−1)/(λ(1+γ²)).
pub fn rotation_identity_fb_matrix(lam: f64, gamma: f64) -> [[f64; 2]; 2] {
    let d = lam * (1.0 + gamma * gamma);
    let diag = (gamma * gamma + gamma) / d;
    let off = gamma * (gamma - 1.0) / d;
    [[diag, off], [-off, diag]]
}

/// Composite pair A = ∂f (1-d nonsmooth kind), B = ∇g (1-d quadratic with
/// coefficient `g_coeff`). Both objective oracles available.
pub fn build_composite(kind: NonsmoothKind, g_coeff: f64) -> Result<ProblemSpec> {
    if !(g_coeff > 0.0) {
        return Err(Error::Parameter(format!(
            "quadratic coefficient must be positive, got {g_coeff}"
        )));
    }
    let fspec = build_nonsmooth_1d(kind);
    let f = fspec.objectives.as_ref().unwrap().f.clone();
    let a = fspec.problem.a().clone();
    let b = CocoerciveOp::new(1, 1.0 / g_coeff, move |x: &[f64]| vec![g_coeff * x[0]])?;
    let problem = SplitProblem::new(a, b)?.with_known_zero(vec![0.0])?;
    Ok(ProblemSpec {
        name: format!("composite:{}:{}", fspec.name, g_coeff),
        problem,
        objectives: Some(Objectives {
            f,
            g: Arc::new(move |x: &[f64]| 0.5 * g_coeff * x[0] * x[0]),
            min_value: 0.0,
        }),
        note: "nonsmooth + smooth composite, minimum 0 at 0".into(),
    })
}

/// A = B = 0 in the given dimension; the governing operator vanishes
/// identically, so trajectories obey the bare damped equation
/// ẍ + (α/t)ẋ = 0. Useful as an integrator fixture.
pub fn build_zero(dim: usize) -> ProblemSpec {
    let problem = SplitProblem::new(MonotoneOp::zero(dim), CocoerciveOp::zero(dim))
        .unwrap()
        .with_known_zero(vec![0.0; dim])
        .unwrap();
    ProblemSpec {
        name: format!("zero:{dim}"),
        problem,
        objectives: None,
        note: "both operators vanish; free damped motion".into(),
    }
}

/// Look a problem up by its config-file name, e.g. `quadratic_diag:1,100`,
/// `abs`, `rotation_identity`, `composite:abs:1`, `zero:2`.
pub fn by_name(name: &str) -> Result<ProblemSpec> {
    let unknown = || Error::Parameter(format!("unknown problem '{name}'"));
    let mut parts = name.split(':');
    match parts.next().ok_or_else(unknown)? {
        "quadratic_diag" => {
            let args = parts.next().ok_or_else(unknown)?;
            let coeffs: Vec<f64> = args
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| unknown())?;
            build_quadratic_diag(&coeffs)
        }
        "half_square" => Ok(build_nonsmooth_1d(NonsmoothKind::HalfSquare)),
        "abs" => Ok(build_nonsmooth_1d(NonsmoothKind::Abs)),
        "abs_plus_half_square" => Ok(build_nonsmooth_1d(NonsmoothKind::AbsPlusHalfSquare)),
        "rotation_identity" => Ok(build_rotation_identity()),
        "composite" => {
            let kind = match parts.next().ok_or_else(unknown)? {
                "half_square" => NonsmoothKind::HalfSquare,
                "abs" => NonsmoothKind::Abs,
                "abs_plus_half_square" => NonsmoothKind::AbsPlusHalfSquare,
                _ => return Err(unknown()),
            };
            let c: f64 = parts
                .next()
                .unwrap_or("1")
                .parse()
                .map_err(|_| unknown())?;
            build_composite(kind, c)
        }
        "zero" => {
            let dim: usize = parts
                .next()
                .unwrap_or("2")
                .parse()
                .map_err(|_| unknown())?;
            Ok(build_zero(dim))
        }
        _ => Err(unknown()),
    }
}

/// All built-in instances exercised by the operator property suites.
pub fn builtin_suite() -> Vec<ProblemSpec> {
    vec![
        build_quadratic_diag(&[1.0, 100.0]).unwrap(),
        build_nonsmooth_1d(NonsmoothKind::HalfSquare),
        build_nonsmooth_1d(NonsmoothKind::Abs),
        build_nonsmooth_1d(NonsmoothKind::AbsPlusHalfSquare),
        build_rotation_identity(),
        build_composite(NonsmoothKind::Abs, 1.0).unwrap(),
    ]
}
