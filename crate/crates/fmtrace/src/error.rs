//! Error taxonomy shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalculusError {
    /// Input lies outside the mathematical domain of an operation
    /// (zero momentum fed to a homogeneous map, zero vector split, …).
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller broke an API contract (grid mismatch, wrong space tag, …).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A quadrature was requested outside its convergence region.
    #[error("divergent quadrature: {0}")]
    Divergence(String),

    /// Newton inversion of a homogeneous map did not converge.
    #[error("map inversion failed: residual {residual:.3e} after {iterations} iterations")]
    InversionFailure { residual: f64, iterations: usize },

    /// A Jacobian required to be nondegenerate is numerically singular.
    #[error("degenerate Jacobian: |det| = {0:.3e}")]
    Degeneracy(f64),

    /// The operation needs data the caller did not supply.
    #[error("unsupported check: {0}")]
    UnsupportedCheck(String),

    /// Configuration asked for machinery outside the supported range.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, CalculusError>;

/// A value together with non-fatal quadrature/aliasing warnings.
///
/// Warnings never change the numbers; they flag inputs that violated a
/// soft precondition (band-limit, truncation tail) so drivers can report them.
#[derive(Debug, Clone)]
pub struct WithWarnings<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> WithWarnings<T> {
    pub fn clean(value: T) -> Self {
        Self { value, warnings: Vec::new() }
    }

    pub fn warn(mut self, w: impl Into<String>) -> Self {
        self.warnings.push(w.into());
        self
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> WithWarnings<U> {
        WithWarnings { value: f(self.value), warnings: self.warnings }
    }

    /// Merge warnings from an upstream stage.
    pub fn absorb<U>(mut self, other: WithWarnings<U>) -> (Self, U) {
        let WithWarnings { value, warnings } = other;
        self.warnings.splice(0..0, warnings);
        (self, value)
    }
}
