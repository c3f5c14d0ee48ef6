//! Time-dependent parameter schedules and precondition validation.
//!
//! The inertial system runs with viscous damping α/t, a Hessian-type damping
//! weight ξ ≥ 0, the regularization schedule λ(t) = λ₀t², and a step
//! schedule γ(t) from one of three families: constant, monomial a·tⁿ, or
//! exp(t^{−r}). Each convergence theorem places a strict lower bound on λ₀
//! and a range condition on γ; [`ScheduleSet::validate`] checks them per
//! mode and reports named violations instead of failing.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Damping constants: ẍ + (α/t)ẋ + ξ(d/dt)T(x) + T(x) = 0 for t ≥ t0 > 0.
/// Values are not range-checked at construction; validation reports
/// violations so that invalid configurations can be diagnosed rather than
/// refused at parse time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingParams {
    pub alpha: f64,
    pub xi: f64,
    pub t0: f64,
}

impl DampingParams {
    pub fn new(alpha: f64, xi: f64, t0: f64) -> Self {
        Self { alpha, xi, t0 }
    }
}

/// λ(t) = λ₀·t² with λ̇(t) = 2λ₀·t, so λ̇/λ = 2/t exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSchedule {
    lambda0: f64,
}

impl LambdaSchedule {
    pub fn new(lambda0: f64) -> Result<Self> {
        if !(lambda0 > 0.0) {
            return Err(Error::Parameter(format!(
                "lambda0 must be positive, got {lambda0}"
            )));
        }
        Ok(Self { lambda0 })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.lambda0 * t * t
    }

    pub fn eval_dot(&self, t: f64) -> f64 {
        2.0 * self.lambda0 * t
    }
}

/// The γ(t) families admitted by the rate theorems. All three satisfy the
/// growth condition t·|γ̇(t)|/γ(t) = O(1) with a closed-form bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSchedule {
    /// γ(t) = c
    Constant(f64),
    /// γ(t) = scale·t^degree
    Poly { scale: f64, degree: u32 },
    /// γ(t) = exp(t^{−rate}), which stays ≥ 1 for all t ≥ 0
    Exp { rate: f64 },
}

impl GammaSchedule {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Parameter(format!(
                "constant gamma must be positive, got {c}"
            )));
        }
        Ok(Self::Constant(c))
    }

    pub fn poly(scale: f64, degree: u32) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Parameter(format!(
                "polynomial gamma needs a positive leading coefficient, got {scale}"
            )));
        }
        Ok(Self::Poly { scale, degree })
    }

    pub fn exp(rate: f64) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(Error::Parameter(format!(
                "exponential gamma needs rate >= 0, got {rate}"
            )));
        }
        Ok(Self::Exp { rate })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Self::Constant(c) => c,
            Self::Poly { scale, degree } => scale * t.powi(degree as i32),
            Self::Exp { rate } => t.powf(-rate).exp(),
        }
    }

    pub fn eval_dot(&self, t: f64) -> f64 {
        match *self {
            Self::Constant(_) => 0.0,
            Self::Poly { scale, degree } => {
                if degree == 0 {
                    0.0
                } else {
                    scale * degree as f64 * t.powi(degree as i32 - 1)
                }
            }
            Self::Exp { rate } => -rate * t.powf(-(rate + 1.0)) * t.powf(-rate).exp(),
        }
    }

    /// Closed-form bound on sup_{s ≥ t} s·|γ̇(s)|/γ(s).
    pub fn growth_ratio_bound(&self, t: f64) -> f64 {
        match *self {
            Self::Constant(_) => 0.0,
            Self::Poly { degree, .. } => degree as f64,
            Self::Exp { rate } => rate * t.powf(-rate),
        }
    }

    /// Exact range of γ over [t_lo, t_hi].
    pub fn range_on(&self, t_lo: f64, t_hi: f64) -> (f64, f64) {
        match *self {
            Self::Constant(c) => (c, c),
            // monomials with positive coefficient are nondecreasing on t > 0
            Self::Poly { .. } => (self.eval(t_lo), self.eval(t_hi)),
            // exp(t^{-r}) is nonincreasing for r > 0
            Self::Exp { .. } => (self.eval(t_hi), self.eval(t_lo)),
        }
    }

    /// Supremum over the whole half-line [t0, ∞); None when unbounded.
    pub fn asymptotic_sup(&self, t0: f64) -> Option<f64> {
        match *self {
            Self::Constant(c) => Some(c),
            Self::Poly { scale, degree } => {
                if degree == 0 {
                    Some(scale)
                } else {
                    None
                }
            }
            Self::Exp { .. } => Some(self.eval(t0)),
        }
    }

    /// Infimum over [t0, ∞).
    pub fn asymptotic_inf(&self, t0: f64) -> f64 {
        match *self {
            Self::Constant(c) => c,
            Self::Poly { .. } => self.eval(t0),
            Self::Exp { rate } => {
                if rate == 0.0 {
                    self.eval(t0)
                } else {
                    1.0
                }
            }
        }
    }
}

impl fmt::Display for GammaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Constant(c) => write!(f, "const:{c}"),
            Self::Poly { scale, degree } => {
                if scale == 1.0 {
                    write!(f, "poly:{degree}")
                } else {
                    write!(f, "poly:{scale},{degree}")
                }
            }
            Self::Exp { rate } => write!(f, "exp:{rate}"),
        }
    }
}

impl FromStr for GammaSchedule {
    type Err = Error;

    /// Config-file syntax: `const:<c>`, `poly:<n>`, `poly:<a>,<n>`, `exp:<r>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |s: &str| Error::Parameter(format!("unrecognized gamma schedule '{s}'"));
        let (kind, args) = s.split_once(':').ok_or_else(|| bad(s))?;
        match kind {
            "const" => {
                let c: f64 = args.parse().map_err(|_| bad(s))?;
                Self::constant(c)
            }
            "poly" => match args.split_once(',') {
                Some((a, n)) => {
                    let scale: f64 = a.parse().map_err(|_| bad(s))?;
                    let degree: u32 = n.parse().map_err(|_| bad(s))?;
                    Self::poly(scale, degree)
                }
                None => {
                    let degree: u32 = args.parse().map_err(|_| bad(s))?;
                    Self::poly(1.0, degree)
                }
            },
            "exp" => {
                let rate: f64 = args.parse().map_err(|_| bad(s))?;
                Self::exp(rate)
            }
            _ => Err(bad(s)),
        }
    }
}

/// Which theorem's precondition set a configuration is validated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationMode {
    /// Full splitting: λ₀ > 2/(α−1)², γ bounded inside (0, 2β).
    General,
    /// B = 0 (resolvent-only): λ₀ > 1/(α−1)², γ only bounded away from 0.
    BZero,
    /// A = 0 (forward-only): constant γ, effective rate η = λ₀/γ above
    /// 1/(β(α−1)²).
    AZero,
    /// Composite minimization f + g: as General with β = 1/L_∇g.
    ConvexMin,
}

impl fmt::Display for ValidationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::General => "general",
            Self::BZero => "b_zero",
            Self::AZero => "a_zero",
            Self::ConvexMin => "convex_min",
        };
        f.write_str(s)
    }
}

impl FromStr for ValidationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Self::General),
            "b_zero" => Ok(Self::BZero),
            "a_zero" => Ok(Self::AZero),
            "convex_min" => Ok(Self::ConvexMin),
            _ => Err(Error::Parameter(format!("unknown mode '{s}'"))),
        }
    }
}

/// Result of checking a configuration against a mode's preconditions.
/// `passed` holds exactly when `violations` is empty.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub mode: ValidationMode,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::Validation {
                violations: self.violations,
            })
        }
    }
}

/// A complete parameterization of the dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSet {
    pub damping: DampingParams,
    pub lambda: LambdaSchedule,
    pub gamma: GammaSchedule,
}

impl ScheduleSet {
    pub fn new(damping: DampingParams, lambda: LambdaSchedule, gamma: GammaSchedule) -> Self {
        Self {
            damping,
            lambda,
            gamma,
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if t < self.damping.t0 {
            return Err(Error::Domain {
                t,
                t0: self.damping.t0,
            });
        }
        Ok(())
    }

    pub fn lambda_at(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.lambda.eval(t))
    }

    pub fn gamma_at(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.gamma.eval(t))
    }

    pub fn gamma_dot_at(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.gamma.eval_dot(t))
    }

    /// Check every precondition of the chosen mode over the horizon
    /// [t0, t_end]. `beta` is the cocoercivity modulus of B (+∞ for B = 0);
    /// in convex_min mode pass 1/L_∇g.
    pub fn validate(&self, beta: f64, mode: ValidationMode, t_end: f64) -> ValidationReport {
        let mut violations = Vec::new();
        let alpha = self.damping.alpha;
        let xi = self.damping.xi;
        let t0 = self.damping.t0;
        let lambda0 = self.lambda.lambda0();

        if !(alpha > 1.0) {
            violations.push(format!(
                "alpha <= 1: vanishing damping requires alpha > 1 (got {alpha})"
            ));
        }
        if !(xi >= 0.0) {
            violations.push(format!("xi < 0: damping weight must be nonnegative (got {xi})"));
        }
        if !(t0 > 0.0) {
            violations.push(format!("t0 <= 0: initial time must be positive (got {t0})"));
        }
        if t_end <= t0 {
            violations.push(format!("t_end <= t0 ({t_end} <= {t0})"));
        }
        if !violations.is_empty() {
            // the bounds below all divide by (alpha - 1)^2 or evaluate the
            // schedules on [t0, t_end]; stop at the structural failures
            return ValidationReport { mode, violations };
        }

        let am1sq = (alpha - 1.0) * (alpha - 1.0);
        let (gamma_min, gamma_max) = self.gamma.range_on(t0, t_end);
        let gamma_sup = self.gamma.asymptotic_sup(t0);
        let gamma_inf = self.gamma.asymptotic_inf(t0).min(gamma_min);

        match mode {
            ValidationMode::General | ValidationMode::ConvexMin => {
                let bound = 2.0 / am1sq;
                if !(lambda0 > bound) {
                    violations.push(format!(
                        "lambda0 <= 2/(alpha-1)^2: need lambda0 > {bound:.6e}, got {lambda0}"
                    ));
                }
                let upper = 2.0 * beta;
                let upper_name = if mode == ValidationMode::ConvexMin {
                    "2/L"
                } else {
                    "2*beta"
                };
                if !(gamma_inf > 0.0) {
                    violations.push(format!("inf gamma <= 0 (got {gamma_inf})"));
                }
                match gamma_sup {
                    Some(sup) => {
                        if !(sup.max(gamma_max) < upper) {
                            violations.push(format!(
                                "sup gamma >= {upper_name}: need sup gamma < {upper:.6e}, got {:.6e}",
                                sup.max(gamma_max)
                            ));
                        }
                    }
                    None => violations.push(format!(
                        "gamma unbounded as t grows: this mode needs sup gamma < {upper_name}"
                    )),
                }
            }
            ValidationMode::BZero => {
                let bound = 1.0 / am1sq;
                if !(lambda0 > bound) {
                    violations.push(format!(
                        "lambda0 <= 1/(alpha-1)^2: need lambda0 > {bound:.6e}, got {lambda0}"
                    ));
                }
                if !(gamma_inf > 0.0) {
                    violations.push(format!("inf gamma <= 0 (got {gamma_inf})"));
                }
            }
            ValidationMode::AZero => {
                let gamma_const = match self.gamma {
                    GammaSchedule::Constant(c) => Some(c),
                    _ => None,
                };
                match gamma_const {
                    Some(c) => {
                        if !beta.is_finite() {
                            violations.push(
                                "a_zero mode needs a cocoercive B with finite beta".to_string(),
                            );
                        } else {
                            if !(c < 2.0 * beta) {
                                violations.push(format!(
                                    "gamma >= 2*beta: need gamma < {:.6e}, got {c}",
                                    2.0 * beta
                                ));
                            }
                            let eta = lambda0 / c;
                            let bound = 1.0 / (beta * am1sq);
                            if !(eta > bound) {
                                violations.push(format!(
                                    "eta <= 1/(beta*(alpha-1)^2): need eta > {bound:.6e}, got {eta:.6e}"
                                ));
                            }
                        }
                    }
                    None => violations
                        .push("a_zero mode requires a constant gamma schedule".to_string()),
                }
            }
        }

        ValidationReport { mode, violations }
    }
}

/// Reduce a forward-only configuration with rate coefficient η to splitting
/// parameters: λ₀ = 2(β−ε)η and γ ≡ 2(β−ε), with ε = β·10⁻³ fixed so the
/// reduction is deterministic.
pub fn forward_only_reduction(eta: f64, beta: f64) -> Result<(LambdaSchedule, GammaSchedule)> {
    if !(eta > 0.0) || !beta.is_finite() || !(beta > 0.0) {
        return Err(Error::Parameter(format!(
            "forward-only reduction needs eta > 0 and finite beta > 0 (eta {eta}, beta {beta})"
        )));
    }
    let eps = beta * 1e-3;
    let gamma_c = 2.0 * (beta - eps);
    let lambda0 = gamma_c * eta;
    Ok((LambdaSchedule::new(lambda0)?, GammaSchedule::constant(gamma_c)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(alpha: f64, xi: f64, lambda0: f64, gamma: GammaSchedule) -> ScheduleSet {
        ScheduleSet::new(
            DampingParams::new(alpha, xi, 1.0),
            LambdaSchedule::new(lambda0).unwrap(),
            gamma,
        )
    }

    #[test]
    fn lambda_values() {
        let lam = LambdaSchedule::new(1.1).unwrap();
        assert!((lam.eval(2.0) - 4.4).abs() < 1e-15);
        assert!((lam.eval_dot(2.0) - 4.4).abs() < 1e-15);
        // λ̇/λ = 2/t
        assert!((lam.eval_dot(3.0) / lam.eval(3.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_values() {
        let g = GammaSchedule::exp(1.0).unwrap();
        assert!((g.eval(1.0) - std::f64::consts::E).abs() < 1e-12);

        let g = GammaSchedule::poly(1.0, 8).unwrap();
        assert!((g.eval_dot(1.0) - 8.0).abs() < 1e-15);
        assert!((g.eval(2.0) - 256.0).abs() < 1e-12);
    }

    #[test]
    fn poly_growth_ratio_reaches_degree() {
        let g = GammaSchedule::poly(3.0, 5).unwrap();
        for t in [1e3, 1e6] {
            let ratio = t * g.eval_dot(t) / g.eval(t);
            assert!((ratio - 5.0).abs() / 5.0 < 0.01);
        }
        assert_eq!(g.growth_ratio_bound(1.0), 5.0);
    }

    #[test]
    fn exp_family_stays_above_one() {
        let g = GammaSchedule::exp(2.0).unwrap();
        for t in [0.1, 0.5, 1.0, 10.0, 1e6] {
            assert!(g.eval(t) >= 1.0);
        }
        assert!(g.growth_ratio_bound(1e6) < 1e-6);
    }

    #[test]
    fn domain_error_below_t0() {
        let s = set(2.0, 0.0, 1.1, GammaSchedule::poly(1.0, 8).unwrap());
        assert!(matches!(s.lambda_at(0.5), Err(Error::Domain { .. })));
        assert!(s.lambda_at(1.0).is_ok());
        assert!(s.gamma_at(2.0).is_ok());
        assert!(matches!(s.gamma_dot_at(0.99), Err(Error::Domain { .. })));
    }

    #[test]
    fn a_zero_mode_accepts_reduced_config() {
        // alpha = 20, eta = 0.278 with beta = 0.01: eta > 100/361 = 0.27700…
        let beta = 0.01;
        let (lam, gam) = forward_only_reduction(0.278, beta).unwrap();
        let s = ScheduleSet::new(DampingParams::new(20.0, 0.2, 1.0), lam, gam);
        let rep = s.validate(beta, ValidationMode::AZero, 50.0);
        assert!(rep.passed(), "{:?}", rep.violations);
    }

    #[test]
    fn a_zero_reduction_satisfies_general_mode() {
        let beta = 0.01;
        let (lam, gam) = forward_only_reduction(0.278, beta).unwrap();
        let s = ScheduleSet::new(DampingParams::new(20.0, 0.2, 1.0), lam, gam);
        let rep = s.validate(beta, ValidationMode::General, 50.0);
        assert!(rep.passed(), "{:?}", rep.violations);
    }

    #[test]
    fn b_zero_mode_accepts_polynomial_gamma() {
        let s = set(2.0, 0.0, 1.1, GammaSchedule::poly(1.0, 8).unwrap());
        let rep = s.validate(f64::INFINITY, ValidationMode::BZero, 10.0);
        assert!(rep.passed(), "{:?}", rep.violations);
    }

    #[test]
    fn general_mode_rejects_unbounded_gamma() {
        let s = set(3.0, 0.0, 1.0, GammaSchedule::poly(1.0, 2).unwrap());
        let rep = s.validate(1.0, ValidationMode::General, 10.0);
        assert!(!rep.passed());
        assert!(rep.violations.iter().any(|v| v.contains("unbounded")));
    }

    #[test]
    fn alpha_one_fails() {
        let s = set(1.0, 0.0, 1.1, GammaSchedule::constant(1.0).unwrap());
        let rep = s.validate(1.0, ValidationMode::BZero, 10.0);
        assert!(!rep.passed());
        assert!(rep.violations[0].contains("alpha"));
        assert!(rep.violations[0].contains("alpha > 1"));
    }

    #[test]
    fn lambda0_boundary_is_strict() {
        // exactly 2/(alpha-1)^2 must fail in general mode
        let alpha = 3.0;
        let s = set(alpha, 0.0, 0.5, GammaSchedule::constant(1.0).unwrap());
        let rep = s.validate(1.0, ValidationMode::General, 10.0);
        assert!(!rep.passed());
        assert!(rep.violations.iter().any(|v| v.contains("lambda0")));
        let s = set(alpha, 0.0, 0.5 + 1e-12, GammaSchedule::constant(1.0).unwrap());
        assert!(s.validate(1.0, ValidationMode::General, 10.0).passed());
    }

    #[test]
    fn general_mode_example() {
        // alpha=7, lambda0=0.056 > 2/36, gamma = 1.5 in (0, 2)
        let s = set(7.0, 0.8, 0.056, GammaSchedule::constant(1.5).unwrap());
        let rep = s.validate(1.0, ValidationMode::General, 100.0);
        assert!(rep.passed(), "{:?}", rep.violations);
    }

    #[test]
    fn schedule_string_round_trip() {
        for s in ["const:1.5", "poly:8", "poly:1.1,2", "exp:1"] {
            let g: GammaSchedule = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
        assert!("poly".parse::<GammaSchedule>().is_err());
        assert!("spline:3".parse::<GammaSchedule>().is_err());
        assert!("const:-1".parse::<GammaSchedule>().is_err());
    }

    #[test]
    fn validation_error_conversion() {
        let s = set(1.0, 0.0, 1.1, GammaSchedule::constant(1.0).unwrap());
        let err = s
            .validate(1.0, ValidationMode::General, 10.0)
            .into_result()
            .unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }
}
