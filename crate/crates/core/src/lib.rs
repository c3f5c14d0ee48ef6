//! Solver toolkit for monotone inclusions 0 ∈ (A+B)x driven by second-order
//! inertial dynamics with vanishing damping.
//!
//! The governing operator is the forward-backward map
//! T_{λ,γ} = (1/λ)[id − J_{γA}∘(id − γB)], whose zeros coincide with
//! zer(A+B). The crate provides:
//!
//! * [`operator`] — monotone/cocoercive operator abstractions, resolvents,
//!   Yosida regularizations and T_{λ,γ} itself;
//! * [`schedule`] — the time-dependent parameters λ(t) = λ₀t², the γ(t)
//!   families, and validation of the parameter conditions each solver mode requires;
//! * [`dynamics`] — integration of the damped inertial system
//!   ẍ + (α/t)ẋ + ξ(d/dt)T_{λ(t),γ(t)}(x) + T_{λ(t),γ(t)}(x) = 0 via its
//!   first-order phase-space reformulation;
//! * [`diagnostics`] — Lyapunov energy, dissipation-inequality verification,
//!   log-log rate fits and integral estimates that certify the convergence
//!   rates numerically;
//! * [`discrete`] — the inertial proximal algorithm obtained by time
//!   discretization, with a contraction-based inner solver for
//!   (id + T_{λ,γ})^{−1} and a resolvent-only specialization for B = 0;
//! * [`problems`] — closed-form benchmark problems with exact resolvents and
//!   known zeros.

// `!(x > 0.0)` is used throughout the validation paths on purpose: unlike
// `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod discrete;
pub mod dynamics;
mod error;
pub mod operator;
pub mod problems;
pub mod schedule;
pub mod vecmath;

pub use error::{Error, Result};
