//! Max-cost transportation norms over non-archimedean fields.

mod certificate;
mod norm;
mod oracle;
mod reduce;

pub use certificate::{verify_certificate, CheckResult, VerificationReport};
pub use norm::{
    bounds, na_norm, na_norm_pointed, plan_cost, seminorm_family, CutBound, Extension,
    ExtensionOptions, NormCertificate, PlanEntry,
};
pub use oracle::{for_each_plan, na_norm_bruteforce, OracleError, ORACLE_MAX_SUPPORT};
pub use reduce::{
    decomposition_cost, g_value_reduce, reduce_decomposition, zero_distance_reduction,
    ReductionLog, ReductionStep,
};

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::magnitude::Magnitude;
use crate::scalar::{FieldSpec, Scalar, ScalarError};
use crate::ultrametric::{MetricError, UltraSpace, ZERO_LABEL};
use crate::vector::{FreeVector, VectorError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NaError {
    #[error("{0} is archimedean; use the classical solver")]
    Archimedean(String),
    #[error("vector is over {vector} but the solver was asked for {field}")]
    FieldMismatch { vector: String, field: String },
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("the pointed norm is defined on balanced vectors only")]
    Unbalanced,
    #[error("spaces in a seminorm family must share one point list")]
    InconsistentFamily,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Vector(#[from] VectorError),
}

/// A vector laid out on its support, with `0̄` appended when needed.
#[derive(Clone, Debug)]
pub(crate) struct Prepared {
    /// Subspace on the support, in support order; `0̄` last if present.
    pub space: UltraSpace,
    pub coeffs: Vec<Scalar>,
    pub magnitudes: Vec<Magnitude>,
    /// Number of normal-form coefficients (excludes `0̄`).
    pub n: usize,
    pub extension: Option<Extension>,
}

impl Prepared {
    pub fn labels(&self) -> &[String] {
        self.space.points()
    }
}

pub(crate) fn check_field(u: &FreeVector, field: &FieldSpec) -> Result<(), NaError> {
    if !field.is_non_archimedean() {
        return Err(NaError::Archimedean(field.kind().name().to_string()));
    }
    if u.field() != field {
        return Err(NaError::FieldMismatch {
            vector: u.field().to_string(),
            field: field.to_string(),
        });
    }
    Ok(())
}

/// Restricts `space` to the support of `u`, extending by `0̄` when `u` is
/// unbalanced.
pub(crate) fn prepare(
    space: &UltraSpace,
    u: &FreeVector,
    options: &ExtensionOptions,
    allow_zero_point: bool,
) -> Result<Prepared, NaError> {
    let field = u.field();
    let mut indices = Vec::with_capacity(u.len() + 1);
    for p in u.points() {
        indices.push(
            space
                .index_of(p)
                .ok_or_else(|| NaError::UnknownPoint(p.to_string()))?,
        );
    }
    let mut coeffs: Vec<Scalar> = u.terms().iter().map(|(_, c)| c.clone()).collect();
    let n = coeffs.len();
    let balance = u.balance();
    if balance.is_zero() {
        let sub = space.restrict(&indices);
        let magnitudes = coeffs
            .iter()
            .map(|c| field.abs(c))
            .collect::<Result<_, _>>()?;
        return Ok(Prepared {
            space: sub,
            coeffs,
            magnitudes,
            n,
            extension: None,
        });
    }
    if !allow_zero_point {
        return Err(NaError::Unbalanced);
    }
    let (extended, extension) = extend(space, u, &indices, options)?;
    indices.push(extended.len() - 1);
    coeffs.push(-&balance);
    let sub = extended.restrict(&indices);
    let magnitudes = coeffs
        .iter()
        .map(|c| field.abs(c))
        .collect::<Result<_, _>>()?;
    Ok(Prepared {
        space: sub,
        coeffs,
        magnitudes,
        n,
        extension: Some(extension),
    })
}

fn extend(
    space: &UltraSpace,
    u: &FreeVector,
    support: &[usize],
    options: &ExtensionOptions,
) -> Result<(UltraSpace, Extension), NaError> {
    let record =
        |ext: &UltraSpace, basepoint: Option<String>, explicit: bool, warning: Option<String>| {
            let z = ext.len() - 1;
            Extension {
                basepoint,
                explicit,
                zero_distances: support
                    .iter()
                    .map(|&i| (ext.points()[i].clone(), ext.dist(i, z).clone()))
                    .collect(),
                warning,
            }
        };
    if space.has_zero_point() {
        return Ok((space.clone(), record(space, None, true, None)));
    }
    if let Some(zd) = &options.zero_distances {
        let ext = space.extend_with_zero_distances(zd.clone())?;
        let e = record(&ext, None, true, None);
        return Ok((ext, e));
    }
    let (basepoint, explicit) = match &options.basepoint {
        Some(b) => (b.clone(), true),
        None => (
            u.points()
                .next()
                .expect("unbalanced vectors are nonzero")
                .to_string(),
            false,
        ),
    };
    let ext = space.extend_with_zero(&basepoint)?;
    let diam = support
        .iter()
        .flat_map(|&i| support.iter().map(move |&j| (i, j)))
        .map(|(i, j)| space.dist(i, j))
        .max()
        .cloned()
        .unwrap_or_else(BigRational::zero);
    let warning = (!explicit && diam > BigRational::one()).then(|| {
        format!(
            "support diameter {diam} exceeds 1: distances to {ZERO_LABEL} depend on the basepoint; defaulted to {basepoint}"
        )
    });
    let e = record(&ext, Some(basepoint), explicit, warning);
    Ok((ext, e))
}
