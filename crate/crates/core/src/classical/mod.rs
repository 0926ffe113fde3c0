//! Sum-cost transportation norms over the real and complex numbers.

mod complex;
mod flow;
mod metric;
mod reduce;
mod transport;

pub use complex::{
    appendix, complex_norm_small, fermat_sequence, support_restricted_complex_inf, weiszfeld,
    weiszfeld_weighted, AppendixReport, ComplexPlan, ComplexSolution, SolverOptions,
    COMPLEX_MAX_POINTS,
};
pub use flow::{kantorovich_real, RealPlan};
pub use metric::{validate_metric, MetricSpace};
pub use reduce::{reduce_real_decomposition, sum_cost, RealReductionLog, RealReductionStep};
pub use transport::{bipartite_transport, TRANSPORT_MAX_POINTS};

pub use num_complex::Complex64;

use num_rational::BigRational;
use thiserror::Error;

use crate::ultrametric::MetricError;
use crate::vector::{FreeVector, VectorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassicalError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error("vector is not balanced: coefficients sum to {0}")]
    Unbalanced(String),
    #[error("coefficient at {0} is not a rational number")]
    NotRational(String),
    #[error("coefficient at {0} is not a complex number")]
    NotComplex(String),
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("{found} points exceed the limit of {limit}")]
    TooLarge { found: usize, limit: usize },
    #[error("no convergence after {iterations} iterations (gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },
    #[error("{0}")]
    Input(String),
}

/// Rational coefficients of `u` paired with point indices in `space`.
pub(crate) fn rational_coefficients(
    space: &MetricSpace,
    u: &FreeVector,
) -> Result<Vec<(usize, BigRational)>, ClassicalError> {
    let mut out = Vec::with_capacity(u.len());
    let mut total = BigRational::from_integer(0.into());
    for (label, c) in u.terms() {
        let q = c
            .as_rational()
            .ok_or_else(|| ClassicalError::NotRational(label.clone()))?;
        let i = space
            .index_of(label)
            .ok_or_else(|| ClassicalError::UnknownPoint(label.clone()))?;
        total += q;
        out.push((i, q.clone()));
    }
    if total != BigRational::from_integer(0.into()) {
        return Err(ClassicalError::Unbalanced(
            crate::rational::format_rational(&total),
        ));
    }
    Ok(out)
}
