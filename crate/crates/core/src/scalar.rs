//! Field configuration and exact scalars.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::levi_civita::Series;
use crate::magnitude::Magnitude;
use crate::rational::{format_rational, is_prime, padic_valuation, parse_rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields: {0} and {1}")]
    MixedFields(String, String),
    #[error("scalar {scalar} does not belong to the {field} field")]
    NotInField { scalar: String, field: String },
    #[error("{0} is archimedean; no non-archimedean magnitude is defined")]
    Archimedean(String),
    #[error("invalid field specification: {0}")]
    InvalidField(String),
    #[error("malformed scalar: {0}")]
    Malformed(String),
    #[error("inverse of the non-monomial series {0} has infinite support")]
    NonMonomialInverse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    #[serde(alias = "trivial")]
    TrivialRational,
    #[serde(alias = "p-adic")]
    PAdicRational,
    #[serde(alias = "finite")]
    FiniteField,
    LeviCivita,
    Real,
    Complex,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::TrivialRational => "trivial-rational",
            FieldKind::PAdicRational => "p-adic-rational",
            FieldKind::FiniteField => "finite-field",
            FieldKind::LeviCivita => "levi-civita",
            FieldKind::Real => "real",
            FieldKind::Complex => "complex",
        }
    }
}

/// Which field the scalars live in, with the base `b` used to write
/// magnitudes as `b^(-e)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FieldSpecRepr", into = "FieldSpecRepr")]
pub struct FieldSpec {
    kind: FieldKind,
    prime: Option<u64>,
    base: BigRational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FieldSpecRepr {
    kind: FieldKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<String>,
}

impl TryFrom<FieldSpecRepr> for FieldSpec {
    type Error = ScalarError;

    fn try_from(repr: FieldSpecRepr) -> Result<Self, Self::Error> {
        let base = repr
            .base
            .as_deref()
            .map(|b| parse_rational(b).map_err(|e| ScalarError::InvalidField(e.to_string())))
            .transpose()?;
        FieldSpec::new(repr.kind, repr.p, base)
    }
}

impl From<FieldSpec> for FieldSpecRepr {
    fn from(spec: FieldSpec) -> Self {
        let base = match spec.kind {
            FieldKind::Real | FieldKind::Complex | FieldKind::PAdicRational => None,
            _ => Some(format_rational(&spec.base)),
        };
        FieldSpecRepr {
            kind: spec.kind,
            p: spec.prime,
            base,
        }
    }
}

fn default_base() -> BigRational {
    BigRational::from_integer(BigInt::from(2))
}

impl FieldSpec {
    pub fn new(
        kind: FieldKind,
        prime: Option<u64>,
        base: Option<BigRational>,
    ) -> Result<Self, ScalarError> {
        let needs_prime = matches!(kind, FieldKind::PAdicRational | FieldKind::FiniteField);
        let prime = match (needs_prime, prime) {
            (true, Some(p)) if is_prime(p) => Some(p),
            (true, Some(p)) => return Err(ScalarError::InvalidField(format!("{p} is not prime"))),
            (true, None) => {
                return Err(ScalarError::InvalidField(format!(
                    "{} requires a prime p",
                    kind.name()
                )))
            }
            (false, Some(_)) => {
                return Err(ScalarError::InvalidField(format!(
                    "{} takes no prime",
                    kind.name()
                )))
            }
            (false, None) => None,
        };
        let base = match kind {
            FieldKind::PAdicRational => {
                let p = BigRational::from_integer(BigInt::from(prime.unwrap_or(2)));
                if base.as_ref().is_some_and(|b| *b != p) {
                    return Err(ScalarError::InvalidField(
                        "the magnitude base of a p-adic field is p".into(),
                    ));
                }
                p
            }
            _ => base.unwrap_or_else(default_base),
        };
        if base <= BigRational::one() {
            return Err(ScalarError::InvalidField(
                "magnitude base must exceed 1".into(),
            ));
        }
        Ok(FieldSpec { kind, prime, base })
    }

    pub fn trivial() -> Self {
        FieldSpec::new(FieldKind::TrivialRational, None, None).unwrap()
    }

    pub fn p_adic(p: u64) -> Result<Self, ScalarError> {
        FieldSpec::new(FieldKind::PAdicRational, Some(p), None)
    }

    pub fn finite(p: u64) -> Result<Self, ScalarError> {
        FieldSpec::new(FieldKind::FiniteField, Some(p), None)
    }

    pub fn levi_civita(base: Option<BigRational>) -> Result<Self, ScalarError> {
        FieldSpec::new(FieldKind::LeviCivita, None, base)
    }

    pub fn real() -> Self {
        FieldSpec::new(FieldKind::Real, None, None).unwrap()
    }

    pub fn complex() -> Self {
        FieldSpec::new(FieldKind::Complex, None, None).unwrap()
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn prime(&self) -> Option<u64> {
        self.prime
    }

    pub fn base(&self) -> &BigRational {
        &self.base
    }

    pub fn is_non_archimedean(&self) -> bool {
        !matches!(self.kind, FieldKind::Real | FieldKind::Complex)
    }

    pub fn has_char_zero(&self) -> bool {
        self.kind != FieldKind::FiniteField
    }

    /// True when every nonzero rational has magnitude 1.
    pub fn is_trivial_on_rationals(&self) -> bool {
        matches!(
            self.kind,
            FieldKind::TrivialRational | FieldKind::LeviCivita | FieldKind::FiniteField
        )
    }

    /// Note attached to outputs when the magnitude base is a substitution.
    pub fn valuation_note(&self) -> Option<String> {
        (self.kind == FieldKind::LeviCivita).then(|| {
            format!(
                "levi-civita magnitudes use base {} in place of e: |f| = {}^(-min supp f)",
                format_rational(&self.base),
                format_rational(&self.base)
            )
        })
    }

    pub fn zero(&self) -> Scalar {
        self.from_integer(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_integer(1)
    }

    pub fn from_integer(&self, n: i64) -> Scalar {
        self.from_rational(&BigRational::from_integer(BigInt::from(n)))
            .expect("integers embed in every field")
    }

    /// The image of a rational under the prime-field embedding.
    pub fn from_rational(&self, q: &BigRational) -> Result<Scalar, ScalarError> {
        Ok(match self.kind {
            FieldKind::TrivialRational | FieldKind::PAdicRational | FieldKind::Real => {
                Scalar::Rational(q.clone())
            }
            FieldKind::Complex => Scalar::Complex {
                re: q.clone(),
                im: BigRational::zero(),
            },
            FieldKind::LeviCivita => Scalar::Series(Series::constant(q.clone())),
            FieldKind::FiniteField => {
                let p = self.prime.expect("finite field has a prime");
                let num = residue(q.numer(), p);
                let den = residue(q.denom(), p);
                if den == 0 {
                    return Err(ScalarError::DivisionByZero);
                }
                Scalar::Residue {
                    value: (num * inv_mod(den, p)) % p,
                    modulus: p,
                }
            }
        })
    }

    /// Checks that `s` is a well-formed element of this field.
    pub fn check(&self, s: &Scalar) -> Result<(), ScalarError> {
        let ok = match (self.kind, s) {
            (
                FieldKind::TrivialRational | FieldKind::PAdicRational | FieldKind::Real,
                Scalar::Rational(_),
            ) => true,
            (FieldKind::FiniteField, Scalar::Residue { value, modulus }) => {
                Some(*modulus) == self.prime && value < modulus
            }
            (FieldKind::LeviCivita, Scalar::Series(_)) => true,
            (FieldKind::Complex, Scalar::Complex { .. }) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(ScalarError::NotInField {
                scalar: s.to_string(),
                field: self.kind.name().to_string(),
            })
        }
    }

    /// Non-archimedean absolute value, as an exponent over [`FieldSpec::base`].
    pub fn abs(&self, s: &Scalar) -> Result<Magnitude, ScalarError> {
        self.check(s)?;
        if s.is_zero() {
            return Ok(Magnitude::Zero);
        }
        match (self.kind, s) {
            (FieldKind::TrivialRational | FieldKind::FiniteField, _) => Ok(Magnitude::one()),
            (FieldKind::PAdicRational, Scalar::Rational(q)) => {
                let v = padic_valuation(q, self.prime.expect("p-adic prime"))
                    .expect("nonzero rational");
                Ok(Magnitude::Positive(BigRational::from_integer(
                    BigInt::from(v),
                )))
            }
            (FieldKind::LeviCivita, Scalar::Series(f)) => Ok(Magnitude::Positive(
                f.leading_exponent().expect("nonzero series").clone(),
            )),
            _ => Err(ScalarError::Archimedean(self.kind.name().to_string())),
        }
    }

    /// `|a + b| ≤ max(|a|, |b|)`, with equality required when `|a| ≠ |b|`.
    pub fn strong_triangle_check(&self, a: &Scalar, b: &Scalar) -> Result<bool, ScalarError> {
        if !self.is_non_archimedean() {
            return Err(ScalarError::Archimedean(self.kind.name().to_string()));
        }
        let sum = a.try_add(b)?;
        let (ma, mb, ms) = (self.abs(a)?, self.abs(b)?, self.abs(&sum)?);
        let bound = ma.clone().max(mb.clone());
        if ma != mb {
            Ok(ms == bound)
        } else {
            Ok(ms <= bound)
        }
    }

    /// Reads a scalar from its JSON wire form.
    ///
    /// Rationals are `"num/den"` strings (bare integers are accepted), finite
    /// field elements `"k mod p"`, Levi-Civita series `[[exp, coeff], ...]`
    /// and complex numbers `[re, im]`.
    pub fn parse_scalar(&self, value: &Value) -> Result<Scalar, ScalarError> {
        let rational = |v: &Value| -> Result<BigRational, ScalarError> {
            match v {
                Value::String(s) => {
                    parse_rational(s).map_err(|e| ScalarError::Malformed(e.to_string()))
                }
                Value::Number(n) if n.is_i64() => Ok(BigRational::from_integer(BigInt::from(
                    n.as_i64().expect("checked"),
                ))),
                other => Err(ScalarError::Malformed(format!(
                    "expected a rational, got {other}"
                ))),
            }
        };
        let scalar = match self.kind {
            FieldKind::TrivialRational | FieldKind::PAdicRational | FieldKind::Real => {
                Scalar::Rational(rational(value)?)
            }
            FieldKind::FiniteField => {
                let p = self.prime.expect("finite prime");
                match value {
                    Value::String(s) if s.contains("mod") => {
                        let (k, m) = s.split_once("mod").expect("checked");
                        let k: i64 = k
                            .trim()
                            .parse()
                            .map_err(|_| ScalarError::Malformed(s.clone()))?;
                        let m: u64 = m
                            .trim()
                            .parse()
                            .map_err(|_| ScalarError::Malformed(s.clone()))?;
                        if m != p {
                            return Err(ScalarError::MixedFields(
                                format!("GF({m})"),
                                format!("GF({p})"),
                            ));
                        }
                        self.from_integer(k)
                    }
                    other => self.from_rational(&rational(other)?)?,
                }
            }
            FieldKind::LeviCivita => match value {
                Value::Array(pairs) => {
                    let mut terms = Vec::with_capacity(pairs.len());
                    for pair in pairs {
                        match pair {
                            Value::Array(ec) if ec.len() == 2 => {
                                terms.push((rational(&ec[0])?, rational(&ec[1])?))
                            }
                            other => {
                                return Err(ScalarError::Malformed(format!(
                                    "expected [exponent, coefficient], got {other}"
                                )))
                            }
                        }
                    }
                    Scalar::Series(Series::from_terms(terms))
                }
                other => Scalar::Series(Series::constant(rational(other)?)),
            },
            FieldKind::Complex => match value {
                Value::Array(parts) if parts.len() == 2 => Scalar::Complex {
                    re: rational(&parts[0])?,
                    im: rational(&parts[1])?,
                },
                other => Scalar::Complex {
                    re: rational(other)?,
                    im: BigRational::zero(),
                },
            },
        };
        self.check(&scalar)?;
        Ok(scalar)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.prime) {
            (FieldKind::PAdicRational, Some(p)) => write!(f, "Q_{p}"),
            (FieldKind::FiniteField, Some(p)) => write!(f, "GF({p})"),
            (kind, _) => write!(f, "{}", kind.name()),
        }
    }
}

fn residue(n: &BigInt, p: u64) -> u64 {
    n.mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("residue below p")
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p
    let mut result = 1u128;
    let mut base = a as u128 % p as u128;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    result as u64
}

/// An element of one of the supported fields, always in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    /// Trivially valued, `p`-adic and real kinds.
    Rational(BigRational),
    /// Finite-field residue in `[0, p)`.
    Residue {
        value: u64,
        modulus: u64,
    },
    Series(Series),
    Complex {
        re: BigRational,
        im: BigRational,
    },
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Residue { value, .. } => *value == 0,
            Scalar::Series(s) => s.is_zero(),
            Scalar::Complex { re, im } => re.is_zero() && im.is_zero(),
        }
    }

    /// The additive identity of the same field.
    pub fn zero_like(&self) -> Scalar {
        match self {
            Scalar::Rational(_) => Scalar::Rational(BigRational::zero()),
            Scalar::Residue { modulus, .. } => Scalar::Residue {
                value: 0,
                modulus: *modulus,
            },
            Scalar::Series(_) => Scalar::Series(Series::zero()),
            Scalar::Complex { .. } => Scalar::Complex {
                re: BigRational::zero(),
                im: BigRational::zero(),
            },
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(q) => Some(q),
            _ => None,
        }
    }

    fn mismatch(&self, other: &Scalar) -> ScalarError {
        ScalarError::MixedFields(self.variant_name(), other.variant_name())
    }

    fn variant_name(&self) -> String {
        match self {
            Scalar::Rational(_) => "rational".into(),
            Scalar::Residue { modulus, .. } => format!("GF({modulus})"),
            Scalar::Series(_) => "levi-civita".into(),
            Scalar::Complex { .. } => "complex".into(),
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        Ok(match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (
                Scalar::Residue {
                    value: a,
                    modulus: p,
                },
                Scalar::Residue {
                    value: b,
                    modulus: q,
                },
            ) if p == q => Scalar::Residue {
                value: ((*a as u128 + *b as u128) % *p as u128) as u64,
                modulus: *p,
            },
            (Scalar::Series(a), Scalar::Series(b)) => Scalar::Series(a.add(b)),
            (Scalar::Complex { re: a, im: b }, Scalar::Complex { re: c, im: d }) => {
                Scalar::Complex {
                    re: a + c,
                    im: b + d,
                }
            }
            _ => return Err(self.mismatch(other)),
        })
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.try_add(&other.neg_ref())
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        Ok(match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (
                Scalar::Residue {
                    value: a,
                    modulus: p,
                },
                Scalar::Residue {
                    value: b,
                    modulus: q,
                },
            ) if p == q => Scalar::Residue {
                value: ((*a as u128 * *b as u128) % *p as u128) as u64,
                modulus: *p,
            },
            (Scalar::Series(a), Scalar::Series(b)) => Scalar::Series(a.mul(b)),
            (Scalar::Complex { re: a, im: b }, Scalar::Complex { re: c, im: d }) => {
                Scalar::Complex {
                    re: a * c - b * d,
                    im: a * d + b * c,
                }
            }
            _ => return Err(self.mismatch(other)),
        })
    }

    pub fn neg_ref(&self) -> Scalar {
        match self {
            Scalar::Rational(q) => Scalar::Rational(-q),
            Scalar::Residue { value, modulus } => Scalar::Residue {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            },
            Scalar::Series(s) => Scalar::Series(s.neg()),
            Scalar::Complex { re, im } => Scalar::Complex { re: -re, im: -im },
        }
    }

    /// Multiplicative inverse. Levi-Civita elements are invertible here only
    /// when they are monomials; see [`Series::truncated_inverse`].
    pub fn try_inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rational(q) => Scalar::Rational(q.recip()),
            Scalar::Residue { value, modulus } => Scalar::Residue {
                value: inv_mod(*value, *modulus),
                modulus: *modulus,
            },
            Scalar::Series(s) => Scalar::Series(
                s.inverse()
                    .ok_or_else(|| ScalarError::NonMonomialInverse(s.to_string()))?,
            ),
            Scalar::Complex { re, im } => {
                let norm = re * re + im * im;
                Scalar::Complex {
                    re: re / &norm,
                    im: -im / norm,
                }
            }
        })
    }

    /// Multiplies by an integer.
    pub fn times_int(&self, k: i64) -> Scalar {
        let q = BigRational::from_integer(BigInt::from(k));
        match self {
            Scalar::Rational(a) => Scalar::Rational(a * q),
            Scalar::Residue { value, modulus } => {
                let k = k.rem_euclid(*modulus as i64) as u128;
                Scalar::Residue {
                    value: ((*value as u128 * k) % *modulus as u128) as u64,
                    modulus: *modulus,
                }
            }
            Scalar::Series(s) => Scalar::Series(s.scale(&q)),
            Scalar::Complex { re, im } => Scalar::Complex {
                re: re * &q,
                im: im * q,
            },
        }
    }

    /// JSON wire form (see [`FieldSpec::parse_scalar`]).
    pub fn to_json(&self) -> Value {
        match self {
            Scalar::Rational(q) => Value::String(format_rational(q)),
            Scalar::Residue { value, modulus } => Value::String(format!("{value} mod {modulus}")),
            Scalar::Series(s) => serde_json::to_value(s.to_pairs()).expect("strings serialize"),
            Scalar::Complex { re, im } => {
                serde_json::json!([format_rational(re), format_rational(im)])
            }
        }
    }

    /// `(re, im)` as floats, for the archimedean solvers.
    pub fn to_complex_f64(&self) -> Option<(f64, f64)> {
        use crate::rational::rational_to_f64;
        match self {
            Scalar::Rational(q) => Some((rational_to_f64(q), 0.0)),
            Scalar::Complex { re, im } => Some((rational_to_f64(re), rational_to_f64(im))),
            _ => None,
        }
    }

    pub fn is_negative_rational(&self) -> bool {
        matches!(self, Scalar::Rational(q) if q.is_negative())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => write!(f, "{q}"),
            Scalar::Residue { value, modulus } => write!(f, "{value} mod {modulus}"),
            Scalar::Series(s) => write!(f, "{s}"),
            Scalar::Complex { re, im } => write!(
                f,
                "{re}{}{}i",
                if im.is_negative() { "-" } else { "+" },
                im.abs()
            ),
        }
    }
}

// Operator forms panic on mixed-field operands; the solvers only apply them
// after the inputs were checked against one `FieldSpec`.
impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        self.try_add(rhs).expect("mixed-field addition")
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self.try_sub(rhs).expect("mixed-field subtraction")
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.try_mul(rhs).expect("mixed-field multiplication")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn rational_addition() {
        let f = FieldSpec::trivial();
        let a = Scalar::Rational(rat(1, 2));
        let b = Scalar::Rational(rat(1, 3));
        assert_eq!(a.try_add(&b).unwrap(), Scalar::Rational(rat(5, 6)));
        f.check(&a).unwrap();
    }

    #[test]
    fn finite_field_product() {
        let f = FieldSpec::finite(5).unwrap();
        let p = f.from_integer(3).try_mul(&f.from_integer(4)).unwrap();
        assert_eq!(p, f.from_integer(2));
        assert_eq!(f.from_integer(-1), f.from_integer(4));
        assert_eq!(f.from_rational(&rat(1, 2)).unwrap(), f.from_integer(3));
        assert_eq!(f.from_integer(3).try_inv().unwrap(), f.from_integer(2));
    }

    #[test]
    fn levi_civita_monomial_product() {
        let one = Scalar::Series(Series::constant(int(1)));
        let m = Scalar::Series(Series::monomial(rat(1, 2), int(2)));
        assert_eq!(one.try_mul(&m).unwrap(), m);
    }

    #[test]
    fn division_by_zero_and_mixed_fields() {
        let f = FieldSpec::p_adic(3).unwrap();
        assert_eq!(f.zero().try_inv(), Err(ScalarError::DivisionByZero));
        let g = FieldSpec::finite(3).unwrap();
        assert!(matches!(
            f.one().try_add(&g.one()),
            Err(ScalarError::MixedFields(_, _))
        ));
        let h = FieldSpec::finite(5).unwrap();
        assert!(g.one().try_mul(&h.one()).is_err());
    }

    #[test]
    fn padic_magnitudes() {
        let q2 = FieldSpec::p_adic(2).unwrap();
        assert_eq!(
            q2.abs(&q2.from_integer(12)).unwrap(),
            Magnitude::Positive(int(2))
        );
        let q3 = FieldSpec::p_adic(3).unwrap();
        assert_eq!(
            q3.abs(&Scalar::Rational(rat(1, 6))).unwrap(),
            Magnitude::Positive(int(-1))
        );
        assert_eq!(q3.abs(&q3.zero()).unwrap(), Magnitude::Zero);
    }

    #[test]
    fn levi_civita_magnitude_is_leading_exponent() {
        let f = FieldSpec::levi_civita(None).unwrap();
        let s = Scalar::Series(Series::from_terms([(rat(-1, 2), int(3)), (int(1), int(1))]));
        // b^(1/2)
        assert_eq!(f.abs(&s).unwrap(), Magnitude::Positive(rat(-1, 2)));
    }

    #[test]
    fn trivial_and_finite_magnitudes() {
        let t = FieldSpec::trivial();
        assert_eq!(t.abs(&t.from_integer(-40)).unwrap(), Magnitude::one());
        let g = FieldSpec::finite(7).unwrap();
        assert_eq!(g.abs(&g.from_integer(3)).unwrap(), Magnitude::one());
        assert!(matches!(
            FieldSpec::real().abs(&Scalar::Rational(int(1))),
            Err(ScalarError::Archimedean(_))
        ));
    }

    #[test]
    fn strong_triangle_examples() {
        let q2 = FieldSpec::p_adic(2).unwrap();
        assert!(q2.strong_triangle_check(&q2.one(), &q2.one()).unwrap());
        assert!(q2
            .strong_triangle_check(&q2.one(), &q2.from_integer(2))
            .unwrap());
        let t = FieldSpec::trivial();
        assert!(t
            .strong_triangle_check(&t.from_integer(5), &t.from_integer(-5))
            .unwrap());
        assert!(FieldSpec::real()
            .strong_triangle_check(&Scalar::Rational(int(1)), &Scalar::Rational(int(1)))
            .is_err());
    }

    #[test]
    fn field_spec_validation() {
        assert!(FieldSpec::p_adic(4).is_err());
        assert!(FieldSpec::new(FieldKind::FiniteField, None, None).is_err());
        assert!(FieldSpec::levi_civita(Some(int(1))).is_err());
        assert!(FieldSpec::new(FieldKind::PAdicRational, Some(3), Some(int(2))).is_err());
        assert_eq!(FieldSpec::p_adic(3).unwrap().base(), &int(3));
    }

    #[test]
    fn field_spec_json() {
        let spec: FieldSpec = serde_json::from_str(r#"{"kind": "p-adic", "p": 2}"#).unwrap();
        assert_eq!(spec, FieldSpec::p_adic(2).unwrap());
        let spec: FieldSpec =
            serde_json::from_str(r#"{"kind": "levi-civita", "base": "3/2"}"#).unwrap();
        assert_eq!(spec.base(), &rat(3, 2));
        let back: FieldSpec = serde_json::from_value(serde_json::to_value(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        assert!(serde_json::from_str::<FieldSpec>(r#"{"kind": "finite-field", "p": 6}"#).is_err());
    }

    #[test]
    fn scalar_json_forms() {
        let q = FieldSpec::trivial();
        let s = q.parse_scalar(&serde_json::json!("6/4")).unwrap();
        assert_eq!(s.to_json(), serde_json::json!("3/2"));
        let g = FieldSpec::finite(5).unwrap();
        assert_eq!(
            g.parse_scalar(&serde_json::json!("7 mod 5")).unwrap(),
            g.from_integer(2)
        );
        assert!(g.parse_scalar(&serde_json::json!("1 mod 3")).is_err());
        let lc = FieldSpec::levi_civita(None).unwrap();
        let s = lc
            .parse_scalar(&serde_json::json!([["1/2", "2"], ["-1", "3"]]))
            .unwrap();
        assert_eq!(
            s.to_json(),
            serde_json::json!([["-1/1", "3/1"], ["1/2", "2/1"]])
        );
        let c = FieldSpec::complex();
        let z = c.parse_scalar(&serde_json::json!(["1/2", "-3"])).unwrap();
        assert_eq!(z.to_json(), serde_json::json!(["1/2", "-3/1"]));
    }
}
