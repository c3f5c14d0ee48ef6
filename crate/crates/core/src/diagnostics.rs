//! Numerical certification of the convergence theory on computed
//! trajectories: Lyapunov-energy evaluation, the dissipation inequality,
//! log-log rate fits, and saturation of the integral estimates.
//!
//! The Lyapunov function anchored at x̄ ∈ zer(A+B) is
//!
//! ```text
//! E(t) = ½‖(α−1)/2·(x−x̄) + t(ẋ + ξT_{λ(t),γ(t)}(x))‖² + (α−1)²/8·‖x−x̄‖²
//! ```
//!
//! and along solutions, for every admissible ε and large enough t,
//!
//! ```text
//! Ė(t) + (ε/2)·t‖ẋ‖² + (ε/4)·tλ(t)‖T_{λ(t),γ(t)}(x)‖² ≤ 0.
//! ```
//!
//! The admissible range is 0 < ε < α−1−√(2/λ₀) (and with √(1/λ₀) in the
//! resolvent-only case, where T is λ-cocoercive instead of λ/2-cocoercive).

use crate::dynamics::{Trajectory, TrajectorySample};
use crate::error::{Error, Result};
use crate::problems::ProblemSpec;
use crate::schedule::{DampingParams, ValidationMode};
use crate::vecmath::{dot, norm, sub};

/// Energy value at one sample, together with the anchor it was taken
/// against.
#[derive(Debug, Clone)]
pub struct EnergyRecord {
    pub t: f64,
    pub energy: f64,
    pub anchor: Vec<f64>,
}

/// Evaluate the Lyapunov energy at a sample.
pub fn lyapunov_energy(
    sample: &TrajectorySample,
    anchor: &[f64],
    damping: &DampingParams,
) -> Result<EnergyRecord> {
    if anchor.len() != sample.x.len() {
        return Err(Error::Dimension {
            expected: sample.x.len(),
            got: anchor.len(),
        });
    }
    let alpha = damping.alpha;
    let xi = damping.xi;
    let dx = sub(&sample.x, anchor);
    let lead: Vec<f64> = dx
        .iter()
        .zip(&sample.xdot)
        .zip(&sample.t_op)
        .map(|((d, v), w)| 0.5 * (alpha - 1.0) * d + sample.t * (v + xi * w))
        .collect();
    let energy = 0.5 * dot(&lead, &lead) + (alpha - 1.0).powi(2) / 8.0 * dot(&dx, &dx);
    Ok(EnergyRecord {
        t: sample.t,
        energy,
        anchor: anchor.to_vec(),
    })
}

/// Which anchor the energy series was computed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorKind {
    /// the problem's known zero
    Known,
    /// final trajectory point used as a stand-in; energies are approximate
    Approximate,
}

/// Energy along a whole trajectory. Uses the problem's known zero when
/// present, else falls back to the final trajectory point and says so.
pub fn energy_series(traj: &Trajectory) -> Result<(Vec<EnergyRecord>, AnchorKind)> {
    let (anchor, kind): (Vec<f64>, AnchorKind) = match traj.problem.known_zero() {
        Some(z) => (z.to_vec(), AnchorKind::Known),
        None => (
            traj.final_x().ok_or(Error::MissingAnchor)?.to_vec(),
            AnchorKind::Approximate,
        ),
    };
    let records = traj
        .samples
        .iter()
        .map(|s| lyapunov_energy(s, &anchor, &traj.schedules.damping))
        .collect::<Result<Vec<_>>>()?;
    Ok((records, kind))
}

/// First sample index after which the energy never increases by more than
/// `per_step_tol`; None when the tail itself still violates monotonicity.
pub fn energy_monotone_onset(records: &[EnergyRecord], per_step_tol: f64) -> Option<usize> {
    if records.len() < 2 {
        return None;
    }
    let mut onset = 0usize;
    for i in 0..records.len() - 1 {
        if records[i + 1].energy > records[i].energy + per_step_tol {
            onset = i + 1;
        }
    }
    if onset >= records.len() - 1 {
        None
    } else {
        Some(onset)
    }
}

/// Worst value of the dissipation left-hand side past the burn-in.
#[derive(Debug, Clone)]
pub struct DissipationReport {
    pub epsilon: f64,
    pub max_lhs: f64,
    pub at_t: f64,
    /// first sample time from which the left-hand side stays nonpositive
    pub nonpositive_from: Option<f64>,
    pub burn_in_index: usize,
}

impl DissipationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_lhs <= tol
    }
}

fn epsilon_upper(mode: ValidationMode, alpha: f64, lambda0: f64) -> f64 {
    let c = match mode {
        ValidationMode::BZero => 1.0,
        _ => 2.0,
    };
    alpha - 1.0 - (c / lambda0).sqrt()
}

/// Midpoint of the admissible ε interval (0, α−1−√(2/λ₀)).
pub fn epsilon_default(alpha: f64, lambda0: f64) -> Result<f64> {
    let hi = epsilon_upper(ValidationMode::General, alpha, lambda0);
    if !(hi > 0.0) {
        return Err(Error::Parameter(format!(
            "no admissible epsilon: need lambda0 > 2/(alpha-1)^2 (alpha {alpha}, lambda0 {lambda0})"
        )));
    }
    Ok(0.5 * hi)
}

/// Resolvent-only analogue: midpoint of (0, α−1−√(1/λ₀)).
pub fn epsilon_default_b_zero(alpha: f64, lambda0: f64) -> Result<f64> {
    let hi = epsilon_upper(ValidationMode::BZero, alpha, lambda0);
    if !(hi > 0.0) {
        return Err(Error::Parameter(format!(
            "no admissible epsilon: need lambda0 > 1/(alpha-1)^2 (alpha {alpha}, lambda0 {lambda0})"
        )));
    }
    Ok(0.5 * hi)
}

/// Check the dissipation inequality along the trajectory. The energy
/// derivative is approximated by centered differences on the sample grid,
/// and the first `burn_in` fraction of samples is skipped: the inequality
/// is only guaranteed from some finite onset time onward.
pub fn dissipation_check(
    traj: &Trajectory,
    anchor: &[f64],
    epsilon: f64,
    burn_in: f64,
) -> Result<DissipationReport> {
    let alpha = traj.schedules.damping.alpha;
    let lambda0 = traj.schedules.lambda.lambda0();
    let hi = epsilon_upper(traj.mode, alpha, lambda0);
    if !(epsilon > 0.0 && epsilon < hi) {
        return Err(Error::Parameter(format!(
            "epsilon {epsilon} outside the admissible range (0, {hi:.6e})"
        )));
    }
    let n = traj.samples.len();
    if n < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: n });
    }
    let energies = traj
        .samples
        .iter()
        .map(|s| lyapunov_energy(s, anchor, &traj.schedules.damping).map(|r| r.energy))
        .collect::<Result<Vec<_>>>()?;

    let burn_in_index = ((n as f64 * burn_in) as usize).clamp(1, n - 2);
    let mut max_lhs = f64::NEG_INFINITY;
    let mut at_t = traj.samples[burn_in_index].t;
    let mut nonpositive_from = None;
    for i in burn_in_index..n - 1 {
        let s = &traj.samples[i];
        let e_dot =
            (energies[i + 1] - energies[i - 1]) / (traj.samples[i + 1].t - traj.samples[i - 1].t);
        let lam = traj.schedules.lambda.eval(s.t);
        let lhs = e_dot
            + 0.5 * epsilon * s.t * s.speed * s.speed
            + 0.25 * epsilon * s.t * lam * dot(&s.t_op, &s.t_op);
        if lhs > max_lhs {
            max_lhs = lhs;
            at_t = s.t;
        }
        if lhs <= 0.0 {
            if nonpositive_from.is_none() {
                nonpositive_from = Some(s.t);
            }
        } else {
            nonpositive_from = None;
        }
    }
    Ok(DissipationReport {
        epsilon,
        max_lhs,
        at_t,
        nonpositive_from,
        burn_in_index,
    })
}

/// Least-squares power-law fit on a trailing log-time window.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
    /// nonpositive values dropped before fitting
    pub dropped: usize,
}

/// Fit log(value) against log(t) over the trailing `window_fraction` of the
/// horizon in log-time. Nonpositive values are dropped (their count is
/// reported); at least 10 positive points must remain.
pub fn rate_fit(series: &[(f64, f64)], window_fraction: f64) -> Result<RateFit> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::Parameter(format!(
            "window fraction must be in (0, 1], got {window_fraction}"
        )));
    }
    let (t_first, t_last) = match (series.first(), series.last()) {
        (Some(a), Some(b)) if b.0 > a.0 && a.0 > 0.0 => (a.0, b.0),
        _ => {
            return Err(Error::InsufficientPoints {
                needed: 10,
                got: series.len(),
            })
        }
    };
    let ln_lo = t_last.ln() - window_fraction * (t_last.ln() - t_first.ln());
    let t_lo = ln_lo.exp();

    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut dropped = 0usize;
    for &(t, v) in series {
        if t < t_lo {
            continue;
        }
        if v > 0.0 {
            pts.push((t.ln(), v.ln()));
        } else {
            dropped += 1;
        }
    }
    if pts.len() < 10 {
        return Err(Error::InsufficientPoints {
            needed: 10,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("degenerate fit window".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit {
        slope,
        intercept,
        window: (t_lo, t_last),
        r_squared,
        points: pts.len(),
        dropped,
    })
}

/// Trapezoid value of one integral together with its partial values at the
/// quarter points of the horizon.
#[derive(Debug, Clone, Copy)]
pub struct IntegralSaturation {
    pub total: f64,
    /// partial integrals at 25/50/75/100% of the horizon
    pub quarters: [f64; 4],
}

impl IntegralSaturation {
    /// Fraction of the total contributed by the last quarter of the horizon.
    pub fn last_quartile_fraction(&self) -> f64 {
        if self.total == 0.0 {
            0.0
        } else {
            (self.quarters[3] - self.quarters[2]) / self.total
        }
    }
}

/// The three integral estimates: ∫ t‖ẋ‖², ∫ t³‖ẍ‖² (acceleration by
/// differencing the sampled velocity), ∫ (γ²(t)/t)‖residual‖².
#[derive(Debug, Clone, Copy)]
pub struct IntegralEstimates {
    pub speed: IntegralSaturation,
    pub accel: IntegralSaturation,
    pub residual: IntegralSaturation,
}

fn saturating_trapezoid(ts: &[f64], values: &[f64]) -> IntegralSaturation {
    let t0 = ts[0];
    let t_end = *ts.last().unwrap();
    let marks = [
        t0 + 0.25 * (t_end - t0),
        t0 + 0.5 * (t_end - t0),
        t0 + 0.75 * (t_end - t0),
        t_end,
    ];
    let mut quarters = [0.0f64; 4];
    let mut acc = 0.0;
    let mut mark = 0usize;
    for i in 0..ts.len() - 1 {
        acc += 0.5 * (values[i] + values[i + 1]) * (ts[i + 1] - ts[i]);
        while mark < 4 && ts[i + 1] >= marks[mark] - 1e-12 {
            quarters[mark] = acc;
            mark += 1;
        }
    }
    quarters[3] = acc;
    IntegralSaturation {
        total: acc,
        quarters,
    }
}

pub fn integral_estimates(traj: &Trajectory) -> Result<IntegralEstimates> {
    let n = traj.samples.len();
    if n < 50 {
        return Err(Error::InsufficientPoints { needed: 50, got: n });
    }
    let ts: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();

    let speed_vals: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| s.t * s.speed * s.speed)
        .collect();

    // acceleration by differencing the recovered velocities: centered in the
    // interior, one-sided at the ends
    let mut accel_vals = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = if i == 0 {
            (0usize, 1usize)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        let dt = ts[hi] - ts[lo];
        let acc: Vec<f64> = traj.samples[hi]
            .xdot
            .iter()
            .zip(&traj.samples[lo].xdot)
            .map(|(a, b)| (a - b) / dt)
            .collect();
        let t = ts[i];
        accel_vals.push(t * t * t * dot(&acc, &acc));
    }

    let residual_vals: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| {
            let gam = traj.schedules.gamma.eval(s.t);
            gam * gam / s.t * dot(&s.residual, &s.residual)
        })
        .collect();

    Ok(IntegralEstimates {
        speed: saturating_trapezoid(&ts, &speed_vals),
        accel: saturating_trapezoid(&ts, &accel_vals),
        residual: saturating_trapezoid(&ts, &residual_vals),
    })
}

/// Norm of the residual's time derivative, by centered differences on the
/// sample grid (one-sided at the ends).
pub fn residual_derivative_series(traj: &Trajectory) -> Vec<(f64, f64)> {
    let n = traj.samples.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = if i == 0 {
            (0, 1.min(n - 1))
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        if lo == hi {
            break;
        }
        let dt = traj.samples[hi].t - traj.samples[lo].t;
        let d: Vec<f64> = traj.samples[hi]
            .residual
            .iter()
            .zip(&traj.samples[lo].residual)
            .map(|(a, b)| (a - b) / dt)
            .collect();
        out.push((traj.samples[i].t, norm(&d)));
    }
    out
}

/// The two decay envelopes paired with the residual derivative:
/// 1/(t·γ(t)) and t²·|d/dt(γ/λ)(t)|/γ²(t). Which one dominates depends on
/// the γ family, and a single slope fit cannot attribute the decay, so both
/// are reported next to the measured series.
pub fn residual_derivative_envelopes(
    traj: &Trajectory,
) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let mut env_time = Vec::with_capacity(traj.samples.len());
    let mut env_schedule = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let gam = traj.schedules.gamma.eval(s.t);
        let gam_dot = traj.schedules.gamma.eval_dot(s.t);
        let lam = traj.schedules.lambda.eval(s.t);
        let lam_dot = traj.schedules.lambda.eval_dot(s.t);
        env_time.push((s.t, 1.0 / (s.t * gam)));
        let ratio_dot = gam_dot / lam - gam * lam_dot / (lam * lam);
        env_schedule.push((s.t, s.t * s.t * ratio_dot.abs() / (gam * gam)));
    }
    (env_time, env_schedule)
}

/// Count strict sign flips in a sampled scalar series, ignoring exact zeros.
/// Used to quantify oscillation of trajectory components.
pub fn count_sign_changes<I: IntoIterator<Item = f64>>(series: I) -> usize {
    let mut count = 0usize;
    let mut last_sign = 0i8;
    for v in series {
        let sign = if v > 0.0 {
            1i8
        } else if v < 0.0 {
            -1i8
        } else {
            0i8
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                count += 1;
            }
            last_sign = sign;
        }
    }
    count
}

/// Pointwise function-value certificate for composite minimization: at every
/// sample, with u = x − γ∇g(x) and p = prox_{γf}(u),
/// f(p) + g(p) − min ≤ (λ/γ)‖T‖·‖x − x̄‖. Returns the worst violation of
/// the inequality (negative when it holds everywhere with slack).
pub fn objective_certificate(traj: &Trajectory, spec: &ProblemSpec) -> Result<f64> {
    let anchor = traj
        .problem
        .known_zero()
        .ok_or(Error::MissingAnchor)?
        .to_vec();
    if spec.objectives.is_none() {
        return Err(Error::Parameter(format!(
            "problem '{}' carries no objective oracles",
            spec.name
        )));
    }
    let mut worst = f64::NEG_INFINITY;
    for s in &traj.samples {
        let lam = traj.schedules.lambda.eval(s.t);
        let gam = traj.schedules.gamma.eval(s.t);
        let gap = spec
            .objective_gap(gam, &s.x)
            .expect("objectives checked above")?;
        let bound = lam / gam * norm(&s.t_op) * norm(&sub(&s.x, &anchor));
        worst = worst.max(gap - bound);
    }
    Ok(worst)
}
