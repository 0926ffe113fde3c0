//! Finite formal combinations `Σ λ_i x_i` of labelled points.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::magnitude::Magnitude;
use crate::scalar::{FieldKind, FieldSpec, Scalar, ScalarError};
use crate::ultrametric::ZERO_LABEL;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VectorError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("point label {0} is reserved")]
    ReservedLabel(String),
    #[error("decomposition evaluates to {found}, expected {expected}")]
    Mismatch { expected: String, found: String },
}

/// A vector in normal form: distinct points, nonzero coefficients, kept in
/// order of first appearance. Equality ignores that order.
#[derive(Clone, Debug)]
pub struct FreeVector {
    field: FieldSpec,
    terms: Vec<(String, Scalar)>,
}

impl PartialEq for FreeVector {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.terms.len() == other.terms.len()
            && self.terms.iter().all(|(p, c)| other.coeff(p) == Some(c))
    }
}

impl Eq for FreeVector {}

impl FreeVector {
    pub fn zero(field: &FieldSpec) -> Self {
        FreeVector {
            field: field.clone(),
            terms: Vec::new(),
        }
    }

    /// Merges repeated points and drops zero coefficients.
    pub fn normalize<I, S>(field: &FieldSpec, raw: I) -> Result<Self, VectorError>
    where
        I: IntoIterator<Item = (S, Scalar)>,
        S: Into<String>,
    {
        let mut order: Vec<String> = Vec::new();
        let mut sums: HashMap<String, Scalar> = HashMap::new();
        for (label, c) in raw {
            let label = label.into();
            if label == ZERO_LABEL {
                return Err(VectorError::ReservedLabel(label));
            }
            field.check(&c)?;
            match sums.get_mut(&label) {
                Some(acc) => *acc = acc.try_add(&c)?,
                None => {
                    order.push(label.clone());
                    sums.insert(label, c);
                }
            }
        }
        let terms = order
            .into_iter()
            .filter_map(|p| {
                let c = sums.remove(&p).expect("every label was summed");
                (!c.is_zero()).then_some((p, c))
            })
            .collect();
        Ok(FreeVector {
            field: field.clone(),
            terms,
        })
    }

    /// `x - y`.
    pub fn difference(field: &FieldSpec, x: &str, y: &str) -> Result<Self, VectorError> {
        Self::normalize(field, [(x, field.one()), (y, field.from_integer(-1))])
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn terms(&self) -> &[(String, Scalar)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, label: &str) -> Option<&Scalar> {
        self.terms.iter().find(|(p, _)| p == label).map(|(_, c)| c)
    }

    pub fn points(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|(p, _)| p.as_str())
    }

    /// `Σ λ_i`.
    pub fn balance(&self) -> Scalar {
        self.terms
            .iter()
            .fold(self.field.zero(), |acc, (_, c)| &acc + c)
    }

    pub fn is_balanced(&self) -> bool {
        self.balance().is_zero()
    }

    pub fn add(&self, other: &FreeVector) -> Result<FreeVector, VectorError> {
        if self.field != other.field {
            return Err(
                ScalarError::MixedFields(self.field.to_string(), other.field.to_string()).into(),
            );
        }
        Self::normalize(&self.field, self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn scale(&self, alpha: &Scalar) -> Result<FreeVector, VectorError> {
        self.field.check(alpha)?;
        let mut out = Vec::with_capacity(self.terms.len());
        for (p, c) in &self.terms {
            out.push((p.clone(), c.try_mul(alpha)?));
        }
        Self::normalize(&self.field, out)
    }

    pub fn neg(&self) -> FreeVector {
        FreeVector {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(p, c)| (p.clone(), -c)).collect(),
        }
    }

    /// Support (with `0̄` appended when unbalanced), its size and the largest
    /// coefficient magnitude. Fails for archimedean fields.
    pub fn support_info(&self) -> Result<SupportInfo, ScalarError> {
        let mut r = Magnitude::Zero;
        for (_, c) in &self.terms {
            r = r.max(self.field.abs(c)?);
        }
        let mut support: Vec<String> = self.terms.iter().map(|(p, _)| p.clone()).collect();
        let balanced = self.is_balanced();
        if !balanced || support.is_empty() {
            support.push(ZERO_LABEL.to_string());
        }
        Ok(SupportInfo {
            m: support.len(),
            support,
            r,
            balanced,
        })
    }

    /// Coefficients with `0̄` carrying `-Σλ`, aligned with `support_info().support`.
    pub fn extended_coefficients(&self) -> Vec<(String, Scalar)> {
        let mut out = self.terms.clone();
        let b = self.balance();
        if !b.is_zero() || out.is_empty() {
            out.push((ZERO_LABEL.to_string(), -&b));
        }
        out
    }

    pub fn generators(&self) -> GroupBasis {
        GroupBasis {
            field: self.field.clone(),
            generators: self.terms.iter().map(|(_, c)| c.clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportInfo {
    pub support: Vec<String>,
    pub m: usize,
    /// `max |λ_i|` over the normal-form coefficients only.
    pub r: Magnitude,
    pub balanced: bool,
}

/// One term `s·(x - y)`; either endpoint may be [`ZERO_LABEL`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Scalar,
    pub from: String,
    pub to: String,
}

impl Term {
    pub fn new(coeff: Scalar, from: impl Into<String>, to: impl Into<String>) -> Self {
        Term {
            coeff,
            from: from.into(),
            to: to.into(),
        }
    }
}

/// `u = Σ s_k (x_k - y_k)` as a list of terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decomposition {
    pub terms: Vec<Term>,
}

impl Decomposition {
    pub fn new(terms: Vec<Term>) -> Self {
        Decomposition { terms }
    }

    /// The formal sum; `0̄` is the zero vector and drops out.
    pub fn evaluate(&self, field: &FieldSpec) -> Result<FreeVector, VectorError> {
        let mut raw = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.from != ZERO_LABEL {
                raw.push((t.from.clone(), t.coeff.clone()));
            }
            if t.to != ZERO_LABEL {
                raw.push((t.to.clone(), -&t.coeff));
            }
        }
        FreeVector::normalize(field, raw)
    }

    /// Errors unless the decomposition evaluates to `u`.
    pub fn check_evaluates_to(&self, u: &FreeVector) -> Result<(), VectorError> {
        let v = self.evaluate(u.field())?;
        if v == *u {
            Ok(())
        } else {
            Err(VectorError::Mismatch {
                expected: describe(u),
                found: describe(&v),
            })
        }
    }

    /// Labels touched by some term.
    pub fn points(&self) -> BTreeSet<&str> {
        self.terms
            .iter()
            .flat_map(|t| [t.from.as_str(), t.to.as_str()])
            .collect()
    }
}

pub fn describe(u: &FreeVector) -> String {
    if u.is_zero() {
        return "0".into();
    }
    u.terms()
        .iter()
        .map(|(p, c)| format!("({c})·{p}"))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Result of a `G_u` membership query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    /// Integer multipliers `m_i` with `c = Σ m_i λ_i`.
    Member(Vec<BigInt>),
    NotMember,
    /// No combination within the search budget.
    Unknown,
}

/// The additive subgroup generated by the coefficients of a vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupBasis {
    field: FieldSpec,
    generators: Vec<Scalar>,
}

impl GroupBasis {
    pub fn generators(&self) -> &[Scalar] {
        &self.generators
    }

    /// Membership test: subset sums first, then an exact answer where one is
    /// cheap (rationals, prime fields), otherwise a search over `|m_i| ≤ budget`.
    pub fn contains(&self, c: &Scalar, budget: u32) -> Membership {
        let n = self.generators.len();
        if c.is_zero() {
            return Membership::Member(vec![BigInt::zero(); n]);
        }
        if self.field.check(c).is_err() || n == 0 {
            return Membership::NotMember;
        }
        if n <= 16 {
            for mask in 1u32..(1 << n) {
                let sum = (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .fold(c.zero_like(), |acc, i| &acc + &self.generators[i]);
                if &sum == c {
                    return Membership::Member(
                        (0..n).map(|i| BigInt::from((mask >> i) & 1)).collect(),
                    );
                }
            }
        }
        match self.field.kind() {
            FieldKind::FiniteField => self.contains_finite(c),
            FieldKind::LeviCivita => self.contains_bounded(c, budget),
            _ => self.contains_rational(c),
        }
    }

    // A nonzero element generates all of GF(p).
    fn contains_finite(&self, c: &Scalar) -> Membership {
        let Some(i) = self.generators.iter().position(|g| !g.is_zero()) else {
            return Membership::NotMember;
        };
        let k = match self.generators[i].try_inv().and_then(|inv| inv.try_mul(c)) {
            Ok(Scalar::Residue { value, .. }) => value,
            _ => return Membership::NotMember,
        };
        let mut m = vec![BigInt::zero(); self.generators.len()];
        m[i] = BigInt::from(k);
        Membership::Member(m)
    }

    // Rationals: the group is g·ℤ with g the gcd of the generators.
    fn contains_rational(&self, c: &Scalar) -> Membership {
        let qs: Vec<&BigRational> = match self
            .generators
            .iter()
            .map(|g| match g {
                Scalar::Rational(q) => Some(q),
                Scalar::Complex { re, im } if im.is_zero() => Some(re),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
        {
            Some(qs) => qs,
            None => return Membership::Unknown,
        };
        let target = match c {
            Scalar::Rational(q) => q.clone(),
            Scalar::Complex { re, im } if im.is_zero() => re.clone(),
            _ => return Membership::Unknown,
        };
        // Extended gcd over the numerators after clearing denominators.
        let den = qs
            .iter()
            .fold(target.denom().clone(), |acc, q| acc.lcm(q.denom()));
        let scale = BigRational::from_integer(den);
        let nums: Vec<BigInt> = qs.iter().map(|q| (*q * &scale).to_integer()).collect();
        let t = (&target * &scale).to_integer();
        let mut g = BigInt::zero();
        let mut coeffs: Vec<BigInt> = vec![BigInt::zero(); nums.len()];
        for (i, a) in nums.iter().enumerate() {
            let e = g.extended_gcd(a);
            for c in coeffs.iter_mut() {
                *c *= &e.x;
            }
            coeffs[i] = e.y.clone();
            g = e.gcd;
        }
        if g.is_zero() || !t.is_multiple_of(&g) {
            return Membership::NotMember;
        }
        let k = &t / &g;
        Membership::Member(coeffs.into_iter().map(|c| c * &k).collect())
    }

    fn contains_bounded(&self, c: &Scalar, budget: u32) -> Membership {
        let b = budget as i64;
        let n = self.generators.len();
        let mut m = vec![-b; n];
        loop {
            let sum = m
                .iter()
                .zip(&self.generators)
                .fold(c.zero_like(), |acc, (&k, g)| &acc + &g.times_int(k));
            if &sum == c {
                return Membership::Member(m.into_iter().map(BigInt::from).collect());
            }
            let mut i = 0;
            while i < n && m[i] == b {
                m[i] = -b;
                i += 1;
            }
            if i == n {
                return Membership::Unknown;
            }
            m[i] += 1;
        }
    }

    /// `{Σ m_i λ_i : |m_i| ≤ budget} ∪ {0}`, without repeats.
    pub fn enumerate(&self, budget: u32) -> Vec<Scalar> {
        let b = budget as i64;
        let mut out: Vec<Scalar> = Vec::new();
        let mut seen: std::collections::HashSet<Scalar> = std::collections::HashSet::new();
        let zero = self.field.zero();
        seen.insert(zero.clone());
        out.push(zero.clone());
        let mut partial = vec![zero];
        for g in &self.generators {
            let mut next = Vec::with_capacity(partial.len() * (2 * budget as usize + 1));
            let mut level_seen = std::collections::HashSet::new();
            for s in &partial {
                for k in -b..=b {
                    let v = s + &g.times_int(k);
                    if level_seen.insert(v.clone()) {
                        next.push(v);
                    }
                }
            }
            partial = next;
        }
        for v in partial {
            if seen.insert(v.clone()) {
                out.push(v);
            }
        }
        out
    }
}

/// Integer multiplier check for [`Membership::Member`] results.
pub fn combination(generators: &[Scalar], m: &[BigInt], zero: &Scalar) -> Option<Scalar> {
    let mut acc = zero.clone();
    for (g, k) in generators.iter().zip(m) {
        let k: i64 = k.try_into().ok()?;
        acc = &acc + &g.times_int(k);
    }
    Some(acc)
}

/// `true` when `q` is an integer; used for integer-coefficient vectors.
pub fn scalar_is_integer(s: &Scalar) -> bool {
    match s {
        Scalar::Rational(q) => q.denom().is_one(),
        Scalar::Series(f) => {
            f.is_constant() && f.leading_coefficient().is_none_or(|c| c.denom().is_one())
        }
        Scalar::Complex { re, im } => im.is_zero() && re.denom().is_one(),
        Scalar::Residue { .. } => true,
    }
}
