//! Solver traces shared by the abelian and non-abelian solvers.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Converged,
    /// The iterates left the divergence radius, or the target is off the
    /// affine subspace the orbit image lives in.
    TargetUnreachable,
    /// The iteration budget ran out or the line search stalled before the
    /// tolerance was met.
    MaxIterations,
    /// Balancing failed: the Cartan part of the iterate diverged, the line
    /// search stalled, or the budget ran out.
    NonConvergence,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::TargetUnreachable => "TargetUnreachable",
            SolveStatus::MaxIterations => "MaxIterations",
            SolveStatus::NonConvergence => "NonConvergence",
        }
    }

    pub fn is_converged(self) -> bool {
        self == SolveStatus::Converged
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct TraceEntry<S> {
    pub iterate: S,
    pub residual: f64,
}

/// Outcome of an iterative solve. `residual_norm` is the residual of
/// `solution`; a `Converged` report always has it below the tolerance.
#[derive(Debug, Clone)]
pub struct SolveReport<S> {
    pub status: SolveStatus,
    pub solution: S,
    pub residual_norm: f64,
    pub iterations: usize,
    pub trace: Vec<TraceEntry<S>>,
}

pub(crate) fn check_tolerances(tol: f64, max_iter: usize) -> crate::Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(crate::error::invalid_param("tol", format!("{tol} must be positive and finite")));
    }
    if max_iter == 0 {
        return Err(crate::error::invalid_param("max_iter", "must be at least 1"));
    }
    Ok(())
}
