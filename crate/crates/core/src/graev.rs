//! The Graev ultra-norm on the free abelian group over an ultrametric
//! space, and its comparison with the field-valued norms.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::levi_civita::Series;
use crate::magnitude::Cost;
use crate::na::{na_norm, ExtensionOptions, NaError, NormCertificate};
use crate::scalar::{FieldKind, FieldSpec, Scalar};
use crate::ultrametric::{UltraSpace, ZERO_LABEL};
use crate::vector::FreeVector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraevError {
    #[error("coefficient at {0} is not an integer")]
    NonInteger(String),
    #[error("{0} is not a non-archimedean field of characteristic zero")]
    UnsupportedField(String),
    #[error(transparent)]
    Na(#[from] NaError),
}

fn integer_of(s: &Scalar) -> Option<BigInt> {
    match s {
        Scalar::Rational(q) if q.is_integer() => Some(q.numer().clone()),
        Scalar::Series(x) if x.is_constant() => {
            let c = x.coefficient(&BigRational::zero());
            c.is_integer().then(|| c.numer().clone())
        }
        Scalar::Complex { re, im } if im.is_zero() && re.is_integer() => Some(re.numer().clone()),
        _ => None,
    }
}

/// Integer coefficients of `u`, in order.
pub fn integer_coefficients(u: &FreeVector) -> Result<Vec<(String, BigInt)>, GraevError> {
    u.terms()
        .iter()
        .map(|(l, c)| {
            integer_of(c)
                .map(|k| (l.clone(), k))
                .ok_or_else(|| GraevError::NonInteger(l.clone()))
        })
        .collect()
}

/// `u` with the same integer coefficients over another field.
pub fn integer_vector(
    field: &FieldSpec,
    coeffs: &[(String, BigInt)],
) -> Result<FreeVector, GraevError> {
    let mut terms = Vec::with_capacity(coeffs.len());
    for (l, k) in coeffs {
        let q = BigRational::from_integer(k.clone());
        let s = match field.kind() {
            FieldKind::LeviCivita => Scalar::Series(Series::constant(q)),
            _ => field.from_rational(&q).map_err(NaError::from)?,
        };
        terms.push((l.clone(), s));
    }
    Ok(FreeVector::normalize(field, terms).map_err(NaError::from)?)
}

/// `inf max d(x_i, y_i)` over `u = Σ (x_i - y_i)`, computed as the norm over
/// the trivially valued rationals.
pub fn graev_norm(
    space: &UltraSpace,
    u: &FreeVector,
    options: &ExtensionOptions,
) -> Result<NormCertificate, GraevError> {
    let coeffs = integer_coefficients(u)?;
    let field = FieldSpec::trivial();
    let v = integer_vector(&field, &coeffs)?;
    Ok(na_norm(space, &v, &field, options)?)
}

/// Independent check of [`graev_norm`]: the least threshold `t` such that
/// every component of the graph `{d ≤ t}` carries coefficient sum zero.
/// Reads raw distances only.
pub fn graev_threshold_oracle(
    space: &UltraSpace,
    u: &FreeVector,
    options: &ExtensionOptions,
) -> Result<BigRational, GraevError> {
    let mut coeffs = integer_coefficients(u)?;
    let total: BigInt = coeffs.iter().map(|(_, k)| k).sum();
    let ext;
    let space = if total.is_zero() || space.has_zero_point() {
        space
    } else {
        ext = match (&options.zero_distances, &options.basepoint) {
            (Some(zd), _) => space
                .extend_with_zero_distances(zd.clone())
                .map_err(NaError::from)?,
            (None, Some(b)) => space.extend_with_zero(b).map_err(NaError::from)?,
            (None, None) => space
                .extend_with_zero(&coeffs[0].0)
                .map_err(NaError::from)?,
        };
        &ext
    };
    if !total.is_zero() {
        coeffs.push((ZERO_LABEL.to_string(), -total));
    }
    let mut idx = Vec::with_capacity(coeffs.len());
    for (l, _) in &coeffs {
        idx.push(
            space
                .index_of(l)
                .ok_or_else(|| NaError::UnknownPoint(l.clone()))?,
        );
    }
    let m = idx.len();
    let mut levels: BTreeSet<BigRational> = BTreeSet::new();
    levels.insert(BigRational::zero());
    for &i in &idx {
        for &j in &idx {
            levels.insert(space.dist(i, j).clone());
        }
    }
    for t in levels {
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for a in 0..m {
            for b in (a + 1)..m {
                if *space.dist(idx[a], idx[b]) <= t {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        let mut sums = vec![BigInt::zero(); m];
        for (a, (_, k)) in coeffs.iter().enumerate() {
            let r = find(&mut parent, a);
            sums[r] += k;
        }
        if sums.iter().all(Zero::is_zero) {
            return Ok(t);
        }
    }
    unreachable!("at the diameter every component sum is the total, which is zero")
}

#[derive(Clone, Debug)]
pub struct TkReport {
    pub field: FieldSpec,
    /// Norm of `u` over `field`.
    pub field_norm: Cost,
    /// Graev norm of `u`.
    pub group_norm: Cost,
    pub equal: bool,
    /// Whether the valuation of `field` is trivial on the rationals, so the
    /// two norms must agree.
    pub expect_equal: bool,
}

/// Compares the norm of an integer vector over `field` with its Graev norm.
pub fn tk_usp_compare(
    space: &UltraSpace,
    u: &FreeVector,
    field: &FieldSpec,
    options: &ExtensionOptions,
) -> Result<TkReport, GraevError> {
    if !field.is_non_archimedean() || !field.has_char_zero() {
        return Err(GraevError::UnsupportedField(field.to_string()));
    }
    let coeffs = integer_coefficients(u)?;
    let v = integer_vector(field, &coeffs)?;
    let field_norm = na_norm(space, &v, field, options)?.value;
    let group_norm = graev_norm(space, u, options)?.value;
    // a Graev value has exponent zero, so it carries over to any base
    let rebased = group_norm
        .rebase(field.base())
        .expect("trivially valued costs have exponent zero");
    let equal = field_norm == rebased;
    Ok(TkReport {
        field: field.clone(),
        field_norm,
        group_norm,
        equal,
        expect_equal: field.is_trivial_on_rationals(),
    })
}

/// `‖p^n (x - y)‖` over `ℚ_p` for `n = 0..=max_n`, next to the constant
/// Graev value.
pub fn padic_power_sequence(
    space: &UltraSpace,
    x: &str,
    y: &str,
    p: u64,
    max_n: u32,
) -> Result<Vec<(u32, Cost, Cost)>, GraevError> {
    let field = FieldSpec::p_adic(p).map_err(NaError::from)?;
    let mut out = Vec::new();
    let mut k = BigInt::one();
    for n in 0..=max_n {
        let coeffs = vec![(x.to_string(), k.clone()), (y.to_string(), -k.clone())];
        let v = integer_vector(&field, &coeffs)?;
        let over_field = na_norm(space, &v, &field, &ExtensionOptions::default())?.value;
        let group = graev_norm(space, &v, &ExtensionOptions::default())?.value;
        out.push((n, over_field, group));
        k *= p;
    }
    Ok(out)
}
