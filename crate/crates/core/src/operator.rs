//! Maximally monotone and cocoercive operator abstractions.
//!
//! A maximally monotone operator A is exposed through its resolvent oracle
//! J_{γA} = (id + γA)^{−1}, which is single-valued and firmly nonexpansive.
//! Its Yosida regularization A_λ = (id − J_{λA})/λ is single-valued and
//! λ-cocoercive. A cocoercive operator B satisfies
//! β‖Bx − By‖² ≤ ⟨Bx − By, x − y⟩ and is evaluated forward.
//!
//! The pair (A, B) forms a [`SplitProblem`] whose governing map is the
//! forward-backward operator T_{λ,γ} = (1/λ)[id − J_{γA}∘(id − γB)];
//! T_{λ,γ}(x̄) = 0 exactly when x̄ ∈ zer(A+B). For γ ∈ (0, 2β) the map
//! T_{λ,γ} is λ(4β−γ)/(4β)-cocoercive, hence (λ/2)-cocoercive and
//! (2/λ)-Lipschitz.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vecmath::{dot, lincomb, sub};

type ResolventFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;
type ForwardFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A maximally monotone operator on R^dim, represented by its resolvent
/// oracle. Immutable after construction; safe to share across threads.
#[derive(Clone)]
pub struct MonotoneOp {
    dim: usize,
    label: String,
    resolvent: Arc<ResolventFn>,
    forward: Option<Arc<ForwardFn>>,
}

impl fmt::Debug for MonotoneOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneOp")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("has_forward", &self.forward.is_some())
            .finish()
    }
}

impl MonotoneOp {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        resolvent: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            label: label.into(),
            resolvent: Arc::new(resolvent),
            forward: None,
        }
    }

    /// Attach a forward oracle; only meaningful for single-valued operators.
    pub fn with_forward(
        mut self,
        forward: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.forward = Some(Arc::new(forward));
        self
    }

    /// The zero operator; its resolvent is the identity for every index.
    pub fn zero(dim: usize) -> Self {
        Self::new(dim, "zero", |_, x| x.to_vec()).with_forward(|x| vec![0.0; x.len()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_forward(&self) -> bool {
        self.forward.is_some()
    }

    /// Resolvent J_{γA}(x) = (id + γA)^{−1}(x). Fixed points of J_{γA} are
    /// exactly the zeros of A.
    pub fn resolvent(&self, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        if !(gamma > 0.0) {
            return Err(Error::Parameter(format!(
                "resolvent index must be positive, got {gamma}"
            )));
        }
        self.check_dim(x)?;
        Ok((self.resolvent)(gamma, x))
    }

    /// Yosida regularization A_λ(x) = (x − J_{λA}(x))/λ, a λ-cocoercive map.
    pub fn yosida(&self, lam: f64, x: &[f64]) -> Result<Vec<f64>> {
        if !(lam > 0.0) {
            return Err(Error::Parameter(format!(
                "yosida index must be positive, got {lam}"
            )));
        }
        self.check_dim(x)?;
        let j = (self.resolvent)(lam, x);
        Ok(lincomb(1.0 / lam, x, -1.0 / lam, &j))
    }

    /// Forward evaluation A(x), available only when the operator is
    /// single-valued and carries an oracle.
    pub fn forward(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.forward.as_ref().map(|f| f(x))
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// A β-cocoercive (hence (1/β)-Lipschitz) single-valued operator.
/// The zero operator carries β = +∞, which lifts every γ < 2β restriction.
#[derive(Clone)]
pub struct CocoerciveOp {
    dim: usize,
    beta: f64,
    forward: Arc<ForwardFn>,
    zero: bool,
}

impl fmt::Debug for CocoerciveOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CocoerciveOp")
            .field("dim", &self.dim)
            .field("beta", &self.beta)
            .field("zero", &self.zero)
            .finish()
    }
}

impl CocoerciveOp {
    pub fn new(
        dim: usize,
        beta: f64,
        forward: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::Parameter(format!(
                "cocoercivity modulus must be positive, got {beta}"
            )));
        }
        Ok(Self {
            dim,
            beta,
            forward: Arc::new(forward),
            zero: false,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            beta: f64::INFINITY,
            forward: Arc::new(|x: &[f64]| vec![0.0; x.len()]),
            zero: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok((self.forward)(x))
    }
}

/// The monotone inclusion 0 ∈ (A+B)x in fixed finite dimension, with an
/// optional known member of zer(A+B) used as the anchor of Lyapunov
/// diagnostics.
#[derive(Debug, Clone)]
pub struct SplitProblem {
    a: MonotoneOp,
    b: CocoerciveOp,
    known_zero: Option<Vec<f64>>,
    dim: usize,
}

impl SplitProblem {
    pub fn new(a: MonotoneOp, b: CocoerciveOp) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::Dimension {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        let dim = a.dim();
        Ok(Self {
            a,
            b,
            known_zero: None,
            dim,
        })
    }

    pub fn with_known_zero(mut self, z: Vec<f64>) -> Result<Self> {
        if z.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: z.len(),
            });
        }
        self.known_zero = Some(z);
        Ok(self)
    }

    pub fn a(&self) -> &MonotoneOp {
        &self.a
    }

    pub fn b(&self) -> &CocoerciveOp {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn known_zero(&self) -> Option<&[f64]> {
        self.known_zero.as_deref()
    }

    /// Upper end of the admissible γ range (0, 2β); +∞ when B = 0.
    pub fn gamma_upper(&self) -> f64 {
        2.0 * self.b.beta()
    }

    fn check_gamma(&self, gamma: f64) -> Result<()> {
        if !(gamma > 0.0) || gamma >= self.gamma_upper() {
            return Err(Error::Parameter(format!(
                "gamma must lie in (0, 2*beta) = (0, {:.6e}), got {gamma}",
                self.gamma_upper()
            )));
        }
        Ok(())
    }

    /// Forward-backward operator
    /// T_{λ,γ}(x) = (1/λ)[x − J_{γA}(x − γBx)].
    pub fn forward_backward(&self, lam: f64, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        if !(lam > 0.0) {
            return Err(Error::Parameter(format!(
                "lambda must be positive, got {lam}"
            )));
        }
        self.check_gamma(gamma)?;
        let bx = self.b.eval(x)?;
        let inner = lincomb(1.0, x, -gamma, &bx);
        let j = self.a.resolvent(gamma, &inner)?;
        Ok(lincomb(1.0 / lam, x, -1.0 / lam, &j))
    }

    /// Splitting residual A_γ(x − γBx) + Bx. Vanishes exactly on zer(A+B)
    /// and equals (λ/γ)·T_{λ,γ}(x) for every λ > 0.
    pub fn residual(&self, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check_gamma(gamma)?;
        let bx = self.b.eval(x)?;
        let inner = lincomb(1.0, x, -gamma, &bx);
        let y = self.a.yosida(gamma, &inner)?;
        Ok(lincomb(1.0, &y, 1.0, &bx))
    }

    /// Cocoercivity modulus of T_{λ,γ}: λ(4β−γ)/(4β) for finite β, and λ
    /// when B = 0 (where T_{λ,γ} = (γ/λ)A_γ is λ-cocoercive).
    pub fn fb_cocoercivity_modulus(&self, lam: f64, gamma: f64) -> f64 {
        if self.b.beta().is_finite() {
            lam * (4.0 * self.b.beta() - gamma) / (4.0 * self.b.beta())
        } else {
            lam
        }
    }
}

/// Outcome of a sampled cocoercivity check: the minimum over pairs of
/// ⟨Tx−Ty, x−y⟩ − modulus·‖Tx−Ty‖².
#[derive(Debug, Clone, Copy)]
pub struct CocoercivityReport {
    pub min_margin: f64,
    pub pairs: usize,
}

impl CocoercivityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_margin >= -tol
    }
}

/// Check β-cocoercivity of an arbitrary map on the given sample pairs.
pub fn cocoercivity_certificate<F>(
    op: F,
    modulus: f64,
    samples: &[(Vec<f64>, Vec<f64>)],
) -> Result<CocoercivityReport>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if samples.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    }
    let mut min_margin = f64::INFINITY;
    for (x, y) in samples {
        if x.len() != y.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: y.len(),
            });
        }
        let tx = op(x);
        let ty = op(y);
        if tx.len() != x.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: tx.len(),
            });
        }
        let dt = sub(&tx, &ty);
        let dx = sub(x, y);
        let margin = dot(&dt, &dx) - modulus * dot(&dt, &dt);
        if margin < min_margin {
            min_margin = margin;
        }
    }
    Ok(CocoercivityReport {
        min_margin,
        pairs: samples.len(),
    })
}

/// Scaled soft threshold: the resolvent of γ∂|·| in one dimension.
pub fn soft_threshold(x: f64, gamma: f64) -> f64 {
    x.signum() * (x.abs() - gamma).max(0.0)
}

/// Convenience for building 1-d operators from scalar resolvents.
pub fn scalar_op(
    label: impl Into<String>,
    resolvent: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
) -> MonotoneOp {
    MonotoneOp::new(1, label, move |gamma, x| vec![resolvent(gamma, x[0])])
}
