use num_rational::BigRational;

use super::{check_field, prepare, NaError, Prepared};
use crate::magnitude::{Cost, Magnitude};
use crate::scalar::{FieldSpec, Scalar};
use crate::ultrametric::{build_dendrogram, UltraSpace};
use crate::vector::FreeVector;

/// How to place `0̄` for unbalanced vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtensionOptions {
    /// `x₀` in `d(x, 0̄) = max(d(x, x₀), 1)`; defaults to the first support point.
    pub basepoint: Option<String>,
    /// Explicit `d(x, 0̄)`, one per point of the space; overrides `basepoint`.
    pub zero_distances: Option<Vec<BigRational>>,
}

impl ExtensionOptions {
    pub fn basepoint(label: impl Into<String>) -> Self {
        ExtensionOptions {
            basepoint: Some(label.into()),
            zero_distances: None,
        }
    }
}

/// The `0̄` distances a certificate was computed with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    pub basepoint: Option<String>,
    /// Whether the caller chose the extension (basepoint or distances).
    pub explicit: bool,
    /// `d(x, 0̄)` for each support point.
    pub zero_distances: Vec<(String, BigRational)>,
    pub warning: Option<String>,
}

/// `coeff·(from - to)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanEntry {
    pub from: String,
    pub to: String,
    pub coeff: Scalar,
    pub cost: Cost,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutBound {
    pub cluster: Vec<String>,
    /// `λ(C)`.
    pub sum: Scalar,
    /// Height at which `C` merges with the rest.
    pub sep: BigRational,
    /// `|λ(C)|·sep(C)`.
    pub bound: Cost,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormCertificate {
    pub field: FieldSpec,
    pub value: Cost,
    pub witness: Vec<PlanEntry>,
    pub cuts: Vec<CutBound>,
    /// Index into `cuts` of the first cut attaining `value`.
    pub argmax: Option<usize>,
    /// Support labels, `0̄` last when present.
    pub support: Vec<String>,
    pub extension: Option<Extension>,
    /// Set for the pointed norm (no `0̄`).
    pub pointed: bool,
    pub notes: Vec<String>,
}

/// Max-cost norm of `u` with witness plan and cut bounds.
///
/// `space` is the plain space; `0̄` is attached internally when `u` is
/// unbalanced, following `options`.
pub fn na_norm(
    space: &UltraSpace,
    u: &FreeVector,
    field: &FieldSpec,
    options: &ExtensionOptions,
) -> Result<NormCertificate, NaError> {
    check_field(u, field)?;
    let prep = prepare(space, u, options, true)?;
    Ok(solve(&prep, field, false))
}

/// Norm on balanced vectors without the zero point.
pub fn na_norm_pointed(
    space: &UltraSpace,
    u: &FreeVector,
    field: &FieldSpec,
) -> Result<NormCertificate, NaError> {
    check_field(u, field)?;
    let prep = prepare(space, u, &ExtensionOptions::default(), false)?;
    Ok(solve(&prep, field, true))
}

/// One certificate per pseudometric of a finite family on the same points.
pub fn seminorm_family(
    spaces: &[UltraSpace],
    u: &FreeVector,
    field: &FieldSpec,
    options: &ExtensionOptions,
) -> Result<Vec<NormCertificate>, NaError> {
    if let Some(first) = spaces.first() {
        if spaces.iter().any(|s| s.points() != first.points()) {
            return Err(NaError::InconsistentFamily);
        }
    }
    spaces
        .iter()
        .map(|s| na_norm(s, u, field, options))
        .collect()
}

/// `(r·l₀, r·l₁)` with `l₀`, `l₁` the smallest and largest distances
/// between distinct support points.
pub fn bounds(
    space: &UltraSpace,
    u: &FreeVector,
    field: &FieldSpec,
    options: &ExtensionOptions,
) -> Result<(Cost, Cost), NaError> {
    check_field(u, field)?;
    let prep = prepare(space, u, options, true)?;
    Ok(prepared_bounds(&prep, field))
}

pub(crate) fn prepared_bounds(prep: &Prepared, field: &FieldSpec) -> (Cost, Cost) {
    let base = field.base();
    let m = prep.space.len();
    if m < 2 {
        return (Cost::zero(base), Cost::zero(base));
    }
    let r = prep.magnitudes[..prep.n]
        .iter()
        .max()
        .cloned()
        .unwrap_or(Magnitude::Zero);
    let mut l0: Option<&BigRational> = None;
    let mut l1: Option<&BigRational> = None;
    for i in 0..m {
        for j in (i + 1)..m {
            let d = prep.space.dist(i, j);
            l0 = Some(l0.map_or(d, |x| x.min(d)));
            l1 = Some(l1.map_or(d, |x| x.max(d)));
        }
    }
    (
        Cost::from_magnitude(&r, l0.expect("two points"), base),
        Cost::from_magnitude(&r, l1.expect("two points"), base),
    )
}

/// `max |c|·d(from, to)` over the entries, looked up in `space`.
pub fn plan_cost(
    space: &UltraSpace,
    entries: &[(String, String, Scalar)],
    field: &FieldSpec,
) -> Result<Cost, NaError> {
    let mut best = Cost::zero(field.base());
    for (from, to, c) in entries {
        let d = space.distance(from, to).map_err(NaError::Metric)?;
        best = best.max_of(Cost::from_magnitude(&field.abs(c)?, d, field.base()));
    }
    Ok(best)
}

fn solve(prep: &Prepared, field: &FieldSpec, pointed: bool) -> NormCertificate {
    let base = field.base();
    let labels = prep.labels();
    let mut notes: Vec<String> = field.valuation_note().into_iter().collect();
    if let Some(w) = prep.extension.as_ref().and_then(|e| e.warning.clone()) {
        notes.push(w);
    }
    let mut cert = NormCertificate {
        field: field.clone(),
        value: Cost::zero(base),
        witness: Vec::new(),
        cuts: Vec::new(),
        argmax: None,
        support: labels.to_vec(),
        extension: prep.extension.clone(),
        pointed,
        notes,
    };
    if prep.space.is_empty() {
        cert.support = vec![crate::ultrametric::ZERO_LABEL.to_string()];
        return cert;
    }
    let tree = build_dendrogram(&prep.space);
    let nodes = tree.nodes();
    // cluster sums, bottom-up (children are created before parents)
    let mut sums: Vec<Scalar> = Vec::with_capacity(nodes.len());
    for (id, node) in nodes.iter().enumerate() {
        let s = if node.is_leaf() {
            prep.coeffs[id].clone()
        } else {
            node.children
                .iter()
                .fold(field.zero(), |acc, &c| &acc + &sums[c])
        };
        sums.push(s);
    }
    // representative: smallest point index, so 0̄ only when alone
    let rep = |id: usize| nodes[id].leaves[0];
    for (id, node) in nodes.iter().enumerate() {
        let Some(parent) = node.parent else { continue };
        let sep = nodes[parent].height.clone();
        let mag = field.abs(&sums[id]).expect("non-archimedean field");
        let bound = Cost::from_magnitude(&mag, &sep, base);
        if bound > cert.value {
            cert.value = bound.clone();
        }
        cert.cuts.push(CutBound {
            cluster: node.leaves.iter().map(|&i| labels[i].clone()).collect(),
            sum: sums[id].clone(),
            sep: sep.clone(),
            bound: bound.clone(),
        });
        // every child but the first hands its aggregate to the parent's representative
        let first = nodes[parent].children[0];
        if first != id && !sums[id].is_zero() {
            cert.witness.push(PlanEntry {
                from: labels[rep(id)].clone(),
                to: labels[rep(parent)].clone(),
                coeff: sums[id].clone(),
                cost: bound,
            });
        }
    }
    cert.argmax = cert.cuts.iter().position(|c| c.bound == cert.value);
    cert
}

impl NormCertificate {
    /// Witness as `(from, to, coeff)` triples.
    pub fn witness_triples(&self) -> Vec<(String, String, Scalar)> {
        self.witness
            .iter()
            .map(|e| (e.from.clone(), e.to.clone(), e.coeff.clone()))
            .collect()
    }
}
