//! The inertial proximal algorithm obtained by discretizing the dynamics
//! with unit step:
//!
//! ```text
//! y_k     = x_k + (1 − α/k)(x_k − x_{k−1}) − ξ(T_{λ_k,γ_k}(x_k) − T_{λ_{k−1},γ_{k−1}}(x_{k−1}))
//! x_{k+1} = (id + T_{λ_{k+1},γ_{k+1}})^{−1}(y_k)
//! ```
//!
//! with λ_k = λ₀k². The backward step is well posed because T_{λ,γ} is
//! maximally monotone; it is solved by fixed-point iteration on
//! x ↦ y − T(x), a contraction of factor 2/λ once λ > 2. For early
//! iterations with 2/λ ≥ 1 the damped update x ← x − θ(x + T(x) − y) with
//! θ = 1/(1 + 2/λ) = λ/(λ+2) contracts with factor 2/(λ+2) instead, which
//! follows from the λ/2-cocoercivity of T.
//!
//! When B = 0 the resolvent can be written out: T_{λ,γ} = (γ/λ)A_γ and
//!
//! ```text
//! (id + T_{λ,γ})^{−1} = id − (γ/λ)·A_{γ+γ/λ}
//!                     = λ/(λ+1)·id + 1/(λ+1)·J_{(γ(λ+1)/λ)A},
//! ```
//!
//! two resolvent evaluations per iteration and no inner loop.

use crate::error::{Error, Result};
use crate::operator::{MonotoneOp, SplitProblem};
use crate::schedule::{GammaSchedule, ValidationMode, ValidationReport};
use crate::vecmath::{dist, lincomb, norm};

/// Parameters of the discrete scheme. γ_k reuses the schedule families,
/// evaluated at integer times (clamped at 1 so the k = 0 seed is positive;
/// the theory constrains the sequences only from k = 1 on).
#[derive(Debug, Clone)]
pub struct DiscreteParams {
    pub alpha: f64,
    pub xi: f64,
    pub lambda0: f64,
    pub gamma: GammaSchedule,
    pub n_iters: usize,
}

impl DiscreteParams {
    pub fn lambda_k(&self, k: usize) -> f64 {
        let k = k.max(1) as f64;
        self.lambda0 * k * k
    }

    pub fn gamma_k(&self, k: usize) -> f64 {
        self.gamma.eval(k.max(1) as f64)
    }

    pub fn alpha_k(&self, k: usize) -> f64 {
        1.0 - self.alpha / k as f64
    }

    /// Precondition check. General splitting needs λ₀ > (4ξ+2)/(α−1)² and
    /// γ_k bounded inside (0, 2β); the resolvent-only case relaxes to
    /// λ₀ > (2ξ+1)/(α−1)² and inf γ_k > 0.
    pub fn validate(&self, beta: f64, mode: ValidationMode) -> ValidationReport {
        let mut violations = Vec::new();
        if !(self.alpha > 1.0) {
            violations.push(format!(
                "alpha <= 1: the scheme requires alpha > 1 (got {})",
                self.alpha
            ));
        }
        if !(self.xi >= 0.0) {
            violations.push(format!("xi < 0 (got {})", self.xi));
        }
        if self.n_iters == 0 {
            violations.push("n_iters == 0".to_string());
        }
        if violations.is_empty() {
            let am1sq = (self.alpha - 1.0) * (self.alpha - 1.0);
            match mode {
                ValidationMode::BZero => {
                    let bound = (2.0 * self.xi + 1.0) / am1sq;
                    if !(self.lambda0 > bound) {
                        violations.push(format!(
                            "lambda0 <= (2xi+1)/(alpha-1)^2: need lambda0 > {bound:.6e}, got {}",
                            self.lambda0
                        ));
                    }
                    if !(self.gamma.asymptotic_inf(1.0) > 0.0) {
                        violations.push("inf gamma_k <= 0".to_string());
                    }
                }
                _ => {
                    let bound = (4.0 * self.xi + 2.0) / am1sq;
                    if !(self.lambda0 > bound) {
                        violations.push(format!(
                            "lambda0 <= (4xi+2)/(alpha-1)^2: need lambda0 > {bound:.6e}, got {}",
                            self.lambda0
                        ));
                    }
                    let horizon = self.n_iters.max(1) as f64;
                    let (lo, hi) = self.gamma.range_on(1.0, horizon);
                    let sup = self.gamma.asymptotic_sup(1.0).unwrap_or(f64::INFINITY);
                    if !(lo > 0.0) {
                        violations.push(format!("inf gamma_k <= 0 (got {lo})"));
                    }
                    if !(sup.max(hi) < 2.0 * beta) {
                        violations.push(format!(
                            "sup gamma_k >= 2*beta: need sup gamma_k < {:.6e}, got {:.6e}",
                            2.0 * beta,
                            sup.max(hi)
                        ));
                    }
                }
            }
        }
        ValidationReport { mode, violations }
    }
}

/// Inner fixed-point solve controls for the backward step.
#[derive(Debug, Clone, Copy)]
pub struct InnerConfig {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for InnerConfig {
    fn default() -> Self {
        // the damped fallback contracts with factor 2/(lambda+2), which for
        // small lambda0 needs a few hundred iterations at k = 1
        Self {
            tol: 1e-12,
            max_iters: 10_000,
        }
    }
}

/// Iteration state with the operator values cached for the next
/// extrapolation.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub k: usize,
    pub x_prev: Vec<f64>,
    pub x_curr: Vec<f64>,
    /// T_{λ_{k−1},γ_{k−1}}(x_{k−1})
    pub t_prev: Vec<f64>,
    /// T_{λ_k,γ_k}(x_k)
    pub t_curr: Vec<f64>,
}

impl IterateState {
    /// Seed the recursion at k = 1 from initial points (x₀, x₁).
    pub fn initial(p: &SplitProblem, params: &DiscreteParams, x0: &[f64], x1: &[f64]) -> Result<Self> {
        let t_prev = p.forward_backward(params.lambda_k(0), params.gamma_k(0), x0)?;
        let t_curr = p.forward_backward(params.lambda_k(1), params.gamma_k(1), x1)?;
        Ok(Self {
            k: 1,
            x_prev: x0.to_vec(),
            x_curr: x1.to_vec(),
            t_prev,
            t_curr,
        })
    }
}

/// Extrapolated point y_k = x_k + α_k(x_k − x_{k−1}) − ξ(T_k(x_k) − T_{k−1}(x_{k−1})).
pub fn extrapolate(state: &IterateState, params: &DiscreteParams) -> Vec<f64> {
    let ak = params.alpha_k(state.k);
    state
        .x_curr
        .iter()
        .zip(&state.x_prev)
        .zip(&state.t_curr)
        .zip(&state.t_prev)
        .map(|(((xc, xp), tc), tp)| xc + ak * (xc - xp) - params.xi * (tc - tp))
        .collect()
}

/// Outcome of one backward solve.
#[derive(Debug, Clone)]
pub struct BackwardSolve {
    pub x: Vec<f64>,
    pub iters: usize,
    /// certified ‖x + T(x) − y‖ at exit
    pub residual: f64,
}

/// Solve x + T_{λ,γ}(x) = y by fixed-point iteration.
pub fn backward_resolve(
    p: &SplitProblem,
    lam: f64,
    gamma: f64,
    y: &[f64],
    cfg: &InnerConfig,
) -> Result<BackwardSolve> {
    let q = 2.0 / lam;
    let theta = if q < 1.0 { 1.0 } else { 1.0 / (1.0 + q) };
    let mut x = y.to_vec();
    for iters in 0..cfg.max_iters {
        let tx = p.forward_backward(lam, gamma, &x)?;
        let res: Vec<f64> = x
            .iter()
            .zip(&tx)
            .zip(y)
            .map(|((xv, tv), yv)| xv + tv - yv)
            .collect();
        let rnorm = norm(&res);
        if rnorm <= cfg.tol {
            return Ok(BackwardSolve {
                x,
                iters,
                residual: rnorm,
            });
        }
        for (xv, rv) in x.iter_mut().zip(&res) {
            *xv -= theta * rv;
        }
    }
    let tx = p.forward_backward(lam, gamma, &x)?;
    let residual = dist(&lincomb(1.0, &x, 1.0, &tx), y);
    Err(Error::InnerSolver {
        residual,
        iters: cfg.max_iters,
    })
}

/// One step of the generic scheme: extrapolate, then backward-resolve with
/// the (k+1)-indexed parameters.
pub fn step(
    state: &IterateState,
    params: &DiscreteParams,
    p: &SplitProblem,
    cfg: &InnerConfig,
) -> Result<(IterateState, StepDiagnostics)> {
    let y = extrapolate(state, params);
    let lam_next = params.lambda_k(state.k + 1);
    let gam_next = params.gamma_k(state.k + 1);
    let solve = backward_resolve(p, lam_next, gam_next, &y, cfg)?;
    let t_next = p.forward_backward(lam_next, gam_next, &solve.x)?;
    let next = IterateState {
        k: state.k + 1,
        x_prev: state.x_curr.clone(),
        x_curr: solve.x,
        t_prev: state.t_curr.clone(),
        t_curr: t_next,
    };
    let diag = StepDiagnostics {
        y,
        inner_iters: solve.iters,
        backward_residual: solve.residual,
    };
    Ok((next, diag))
}

/// Per-step byproducts used by the run records.
#[derive(Debug, Clone)]
pub struct StepDiagnostics {
    pub y: Vec<f64>,
    pub inner_iters: usize,
    pub backward_residual: f64,
}

/// One step of the resolvent-only scheme for B = 0, written in terms of the
/// resolvents of A. Set `alt_form` to use the alternative
/// coefficients λ²/(λ²+γ)·id + γ/(λ²+γ)·J_{(λ+γ/λ)A}, kept for comparison;
/// the default form is the exact inverse of id + T_{λ,γ}.
pub fn b_zero_step(
    state: &IterateState,
    params: &DiscreteParams,
    a: &MonotoneOp,
    alt_form: bool,
) -> Result<(IterateState, StepDiagnostics)> {
    let k = state.k;
    let (lam_p, lam_c, lam_n) = (
        params.lambda_k(k - 1),
        params.lambda_k(k),
        params.lambda_k(k + 1),
    );
    let (gam_p, gam_c, gam_n) = (
        params.gamma_k(k - 1),
        params.gamma_k(k),
        params.gamma_k(k + 1),
    );
    let xi = params.xi;
    let ak = params.alpha_k(k);

    let j_curr = a.resolvent(gam_c, &state.x_curr)?;
    let j_prev = a.resolvent(gam_p, &state.x_prev)?;
    let c0 = 1.0 - xi * (1.0 / lam_c - 1.0 / lam_p);
    let c1 = ak - xi / lam_p;
    let y: Vec<f64> = state
        .x_curr
        .iter()
        .zip(&state.x_prev)
        .zip(&j_curr)
        .zip(&j_prev)
        .map(|(((xc, xp), jc), jp)| {
            c0 * xc + c1 * (xc - xp) + xi * (jc / lam_c - jp / lam_p)
        })
        .collect();

    // w_j = 1 − w_id keeps the convex combination exact
    let (w_id, idx) = if alt_form {
        (lam_n * lam_n / (lam_n * lam_n + gam_n), lam_n + gam_n / lam_n)
    } else {
        (lam_n / (lam_n + 1.0), gam_n * (lam_n + 1.0) / lam_n)
    };
    let w_j = 1.0 - w_id;
    let jy = a.resolvent(idx, &y)?;
    let x_next = lincomb(w_id, &y, w_j, &jy);

    let t_next: Vec<f64> = x_next
        .iter()
        .zip(&a.resolvent(gam_n, &x_next)?)
        .map(|(x, j)| (x - j) / lam_n)
        .collect();
    let next = IterateState {
        k: k + 1,
        x_prev: state.x_curr.clone(),
        x_curr: x_next,
        t_prev: state.t_curr.clone(),
        t_curr: t_next,
    };
    let diag = StepDiagnostics {
        y,
        inner_iters: 0,
        backward_residual: 0.0,
    };
    Ok((next, diag))
}

/// Which update rule drives a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscreteScheme {
    /// extrapolation + inner fixed-point backward solve
    Generic,
    /// closed-form resolvent-only updates, valid when B = 0
    ResolventOnly,
    /// the alternative closed form kept for comparison runs
    ResolventOnlyAlt,
}

/// Per-iteration record of a run.
#[derive(Debug, Clone)]
pub struct IterRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// ‖x_{k+1} − x_k‖
    pub dx_norm: f64,
    /// ‖A_{γ_k}(x_k − γ_k B x_k) + B x_k‖
    pub residual_norm: f64,
    /// ‖x_k − y_k‖
    pub xy_norm: f64,
    pub inner_iters: usize,
    pub backward_residual: f64,
}

/// A complete run with its per-iteration diagnostics.
#[derive(Debug, Clone)]
pub struct IterateRun {
    pub params: DiscreteParams,
    pub scheme: DiscreteScheme,
    pub records: Vec<IterRecord>,
    pub final_x: Vec<f64>,
}

/// Run the scheme for `params.n_iters` steps from initial points (x₀, x₁).
pub fn run(
    p: &SplitProblem,
    params: &DiscreteParams,
    scheme: DiscreteScheme,
    x0: &[f64],
    x1: &[f64],
    cfg: &InnerConfig,
) -> Result<IterateRun> {
    if scheme != DiscreteScheme::Generic && !p.b().is_zero() {
        return Err(Error::Parameter(
            "resolvent-only schemes require B = 0".into(),
        ));
    }
    let mut state = IterateState::initial(p, params, x0, x1)?;
    let mut records = Vec::with_capacity(params.n_iters);
    for _ in 0..params.n_iters {
        let gam_k = params.gamma_k(state.k);
        let residual_norm = norm(&p.residual(gam_k, &state.x_curr)?);
        let x_k = state.x_curr.clone();
        let k = state.k;
        let (next, diag) = match scheme {
            DiscreteScheme::Generic => step(&state, params, p, cfg)?,
            DiscreteScheme::ResolventOnly => b_zero_step(&state, params, p.a(), false)?,
            DiscreteScheme::ResolventOnlyAlt => b_zero_step(&state, params, p.a(), true)?,
        };
        records.push(IterRecord {
            k,
            x: x_k.clone(),
            y: diag.y.clone(),
            dx_norm: dist(&next.x_curr, &x_k),
            residual_norm,
            xy_norm: dist(&x_k, &diag.y),
            inner_iters: diag.inner_iters,
            backward_residual: diag.backward_residual,
        });
        state = next;
    }
    Ok(IterateRun {
        params: params.clone(),
        scheme,
        records,
        final_x: state.x_curr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::CocoerciveOp;
    use crate::problems;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rotation_params(n: usize) -> DiscreteParams {
        DiscreteParams {
            alpha: 7.0,
            xi: 0.8,
            lambda0: 0.15,
            gamma: GammaSchedule::constant(1.5).unwrap(),
            n_iters: n,
        }
    }

    #[test]
    fn validation_bounds() {
        let p = rotation_params(10);
        assert!(p.validate(1.0, ValidationMode::General).passed());
        let mut bad = rotation_params(10);
        bad.lambda0 = 0.14; // below (4*0.8+2)/36 = 0.1444…
        assert!(!bad.validate(1.0, ValidationMode::General).passed());
        // the resolvent-only bound is weaker
        assert!(bad.validate(f64::INFINITY, ValidationMode::BZero).passed());
    }

    #[test]
    fn extrapolate_fixed_point_at_zero() {
        let p = problems::build_rotation_identity().problem;
        let params = rotation_params(10);
        let z = vec![0.0, 0.0];
        let state = IterateState::initial(&p, &params, &z, &z).unwrap();
        assert_eq!(extrapolate(&state, &params), vec![0.0, 0.0]);
    }

    #[test]
    fn extrapolate_momentum_vanishes_at_k_equals_alpha() {
        // xi = 0, alpha = 2, k = 2: alpha_k = 0, so y = x_k
        let params = DiscreteParams {
            alpha: 2.0,
            xi: 0.0,
            lambda0: 1.1,
            gamma: GammaSchedule::constant(1.0).unwrap(),
            n_iters: 10,
        };
        let state = IterateState {
            k: 2,
            x_prev: vec![1.0, 0.0],
            x_curr: vec![2.0, 0.0],
            t_prev: vec![0.0, 0.0],
            t_curr: vec![0.0, 0.0],
        };
        assert_eq!(extrapolate(&state, &params), vec![2.0, 0.0]);
    }

    #[test]
    fn extrapolate_matches_hand_formula() {
        let p = problems::build_rotation_identity().problem;
        let params = rotation_params(10);
        let mut rng = StdRng::seed_from_u64(41);
        let x0: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x1: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
        let state = IterateState::initial(&p, &params, &x0, &x1).unwrap();
        let y = extrapolate(&state, &params);
        let ak = 1.0 - params.alpha / 1.0;
        for i in 0..2 {
            let hand = x1[i] + ak * (x1[i] - x0[i])
                - params.xi * (state.t_curr[i] - state.t_prev[i]);
            assert!((y[i] - hand).abs() < 1e-15);
        }
    }

    #[test]
    fn cached_operator_values_match_recomputation() {
        let p = problems::build_rotation_identity().problem;
        let params = rotation_params(5);
        let state =
            IterateState::initial(&p, &params, &[1.0, 2.0], &[0.9, 1.8]).unwrap();
        let (next, _) = step(&state, &params, &p, &InnerConfig::default()).unwrap();
        let fresh = p
            .forward_backward(params.lambda_k(2), params.gamma_k(2), &next.x_curr)
            .unwrap();
        assert!(dist(&fresh, &next.t_curr) <= 1e-12);
    }

    #[test]
    fn backward_resolve_at_zero_is_instant() {
        let p = problems::build_rotation_identity().problem;
        let solve =
            backward_resolve(&p, 10.0, 1.5, &[0.0, 0.0], &InnerConfig::default()).unwrap();
        assert!(norm(&solve.x) <= 1e-12);
        assert!(solve.iters <= 1);
    }

    #[test]
    fn backward_resolve_matches_scalar_closed_form() {
        // A = 0, B = id: T = (γ/λ)x, so (id+T)^{-1}(y) = y/(1 + γ/λ)
        let p = SplitProblem::new(
            MonotoneOp::zero(1),
            CocoerciveOp::new(1, 1.0, |x: &[f64]| x.to_vec()).unwrap(),
        )
        .unwrap();
        for (lam, gam, y) in [(0.3, 1.2, 4.0), (5.0, 0.7, -2.0), (50.0, 1.9, 10.0)] {
            let solve = backward_resolve(&p, lam, gam, &[y], &InnerConfig::default()).unwrap();
            let exact = y / (1.0 + gam / lam);
            assert!(
                (solve.x[0] - exact).abs() <= 1e-11,
                "lam={lam}: {} vs {exact}",
                solve.x[0]
            );
        }
    }

    #[test]
    fn backward_resolve_contraction_count() {
        // lambda_k = 1.1 k² at k = 10: factor 2/110, about 7 iterations
        let p = problems::build_rotation_identity().problem;
        let solve =
            backward_resolve(&p, 110.0, 1.5, &[3.0, -1.0], &InnerConfig::default()).unwrap();
        assert!(solve.iters <= 7, "took {} iterations", solve.iters);
        assert!(solve.residual <= 1e-12);
    }

    #[test]
    fn backward_resolve_reports_stall() {
        let p = problems::build_rotation_identity().problem;
        let cfg = InnerConfig {
            tol: 1e-12,
            max_iters: 2,
        };
        let err = backward_resolve(&p, 0.15, 1.5, &[3.0, -1.0], &cfg);
        assert!(matches!(err, Err(Error::InnerSolver { .. })));
    }

    #[test]
    fn run_stays_at_known_zero() {
        let p = problems::build_rotation_identity().problem;
        let params = rotation_params(50);
        let z = vec![0.0, 0.0];
        let run = run(&p, &params, DiscreteScheme::Generic, &z, &z, &InnerConfig::default())
            .unwrap();
        assert_eq!(run.records.len(), 50);
        for r in &run.records {
            assert!(r.dx_norm <= 1e-12);
            assert!(r.residual_norm <= 1e-12);
            assert!(r.xy_norm <= 1e-12);
        }
    }

    #[test]
    fn b_zero_coefficients_sum_to_one() {
        for lam in [0.3f64, 2.0, 117.0] {
            let w_id = lam / (lam + 1.0);
            let w_j = 1.0 - w_id;
            assert_eq!(w_id + w_j, 1.0);
            let gam = 3.7;
            let w_id_alt = lam * lam / (lam * lam + gam);
            assert_eq!(w_id_alt + (1.0 - w_id_alt), 1.0);
        }
    }

    #[test]
    fn b_zero_scalar_recursion_matches_generic() {
        // 1-d A = ∂(½x²): J_{sA}(y) = y/(1+s); 60 iterations, pointwise
        let spec = problems::build_nonsmooth_1d(problems::NonsmoothKind::HalfSquare);
        let p = &spec.problem;
        let params = DiscreteParams {
            alpha: 3.0,
            xi: 0.5,
            lambda0: 1.0,
            gamma: GammaSchedule::poly(1.0, 2).unwrap(),
            n_iters: 60,
        };
        let generic = run(
            p,
            &params,
            DiscreteScheme::Generic,
            &[5.0],
            &[4.5],
            &InnerConfig::default(),
        )
        .unwrap();
        let closed = run(
            p,
            &params,
            DiscreteScheme::ResolventOnly,
            &[5.0],
            &[4.5],
            &InnerConfig::default(),
        )
        .unwrap();
        for (g, c) in generic.records.iter().zip(&closed.records) {
            assert!(
                dist(&g.x, &c.x) <= 1e-9,
                "k={}: {:?} vs {:?}",
                g.k,
                g.x,
                c.x
            );
        }
    }

    #[test]
    fn scaled_residual_decays_on_growing_gamma() {
        // A = subgradient of |x|, gamma_k = k^2: gamma_k * |residual| tracks
        // |x_k| and has to head to zero
        let spec = problems::build_nonsmooth_1d(problems::NonsmoothKind::Abs);
        let params = DiscreteParams {
            alpha: 3.0,
            xi: 0.0,
            lambda0: 1.0,
            gamma: GammaSchedule::poly(1.0, 2).unwrap(),
            n_iters: 600,
        };
        let out = run(
            &spec.problem,
            &params,
            DiscreteScheme::ResolventOnly,
            &[5.0],
            &[4.5],
            &InnerConfig::default(),
        )
        .unwrap();
        let scaled: Vec<f64> = out
            .records
            .iter()
            .map(|r| params.gamma_k(r.k) * r.residual_norm)
            .collect();
        let early_max = scaled[..30].iter().cloned().fold(0.0f64, f64::max);
        let late_max = scaled[540..].iter().cloned().fold(0.0f64, f64::max);
        assert!(late_max < early_max / 10.0, "{late_max} vs {early_max}");
    }

    #[test]
    fn alt_form_differs_from_exact_inverse() {
        let spec = problems::build_nonsmooth_1d(problems::NonsmoothKind::HalfSquare);
        let params = DiscreteParams {
            alpha: 3.0,
            xi: 0.0,
            lambda0: 1.0,
            gamma: GammaSchedule::constant(2.0).unwrap(),
            n_iters: 5,
        };
        let state = IterateState::initial(&spec.problem, &params, &[4.0], &[4.0]).unwrap();
        let (exact, _) = b_zero_step(&state, &params, spec.problem.a(), false).unwrap();
        let (alt, _) = b_zero_step(&state, &params, spec.problem.a(), true).unwrap();
        assert!(dist(&exact.x_curr, &alt.x_curr) > 1e-6);
    }

    #[test]
    fn resolvent_only_rejects_nonzero_b() {
        let p = problems::build_rotation_identity().problem;
        let params = rotation_params(5);
        let err = run(
            &p,
            &params,
            DiscreteScheme::ResolventOnly,
            &[1.0, 2.0],
            &[1.0, 2.0],
            &InnerConfig::default(),
        );
        assert!(matches!(err, Err(Error::Parameter(_))));
    }
}
