//! Finite-support Levi-Civita series `Σ a_q t^q` with rational exponents and
//! rational coefficients.
//!
//! Finite support is closed under `+` and `·`, so these form a ring on their
//! own. Inverses exist exactly only for monomials; for general series
//! [`Series::truncated_inverse`] returns the expansion up to a relative order
//! and flags the truncation.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::rational::format_rational;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Series {
    // exponent -> nonzero coefficient
    terms: BTreeMap<BigRational, BigRational>,
}

/// Result of [`Series::truncated_inverse`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedInverse {
    pub series: Series,
    /// Relative order (above the leading exponent) kept in the expansion.
    pub order: BigRational,
    /// `false` only when the inverse is exact.
    pub truncated: bool,
}

impl Series {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(BigRational::zero(), c)
    }

    pub fn monomial(exponent: BigRational, coeff: BigRational) -> Self {
        Self::from_terms([(exponent, coeff)])
    }

    /// Merges repeated exponents and drops zero coefficients.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (BigRational, BigRational)>,
    {
        let mut out = BTreeMap::new();
        for (e, c) in terms {
            add_term(&mut out, e, c);
        }
        Series { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `min supp(f)`.
    pub fn leading_exponent(&self) -> Option<&BigRational> {
        self.terms.keys().next()
    }

    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.terms.values().next()
    }

    pub fn coefficient(&self, exponent: &BigRational) -> BigRational {
        self.terms
            .get(exponent)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&BigRational, &BigRational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Series) -> Series {
        let mut out = self.terms.clone();
        for (e, c) in &other.terms {
            add_term(&mut out, e.clone(), c.clone());
        }
        Series { terms: out }
    }

    pub fn neg(&self) -> Series {
        Series {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.neg())
    }

    /// Convolution product.
    pub fn mul(&self, other: &Series) -> Series {
        let mut out = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                add_term(&mut out, e1 + e2, c1 * c2);
            }
        }
        Series { terms: out }
    }

    pub fn scale(&self, k: &BigRational) -> Series {
        if k.is_zero() {
            return Series::zero();
        }
        Series {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    /// Exact inverse; defined only for monomials.
    pub fn inverse(&self) -> Option<Series> {
        if !self.is_monomial() {
            return None;
        }
        let (e, c) = self.terms.iter().next()?;
        Some(Series::monomial(-e, c.recip()))
    }

    /// Inverse expanded up to exponents `≤ -lead + order`.
    ///
    /// Writes `f = a t^e (1 + g)` with `g` of strictly positive support and
    /// sums the geometric series `Σ (-g)^k` while the terms stay in range.
    pub fn truncated_inverse(&self, order: &BigRational) -> Option<TruncatedInverse> {
        let lead = self.leading_exponent()?.clone();
        let a = self.leading_coefficient()?.clone();
        if self.is_monomial() {
            return Some(TruncatedInverse {
                series: self.inverse()?,
                order: order.clone(),
                truncated: false,
            });
        }
        let a_inv = a.recip();
        // g = f / (a t^e) - 1
        let g = Series::from_terms(
            self.terms
                .iter()
                .skip(1)
                .map(|(e, c)| (e - &lead, c * &a_inv)),
        );
        let minus_g = g.neg();
        let mut sum = Series::constant(BigRational::one());
        let mut power = Series::constant(BigRational::one());
        loop {
            power = power.mul(&minus_g).keep_up_to(order);
            if power.is_zero() {
                break;
            }
            sum = sum.add(&power);
        }
        let series = sum.mul(&Series::monomial(-lead, a_inv));
        Some(TruncatedInverse {
            series,
            order: order.clone(),
            truncated: true,
        })
    }

    fn keep_up_to(&self, order: &BigRational) -> Series {
        Series {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| *e <= order)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Embedding of a rational as a constant series.
    pub fn is_constant(&self) -> bool {
        self.is_zero() || (self.is_monomial() && self.leading_exponent().is_some_and(Zero::is_zero))
    }

    /// `[[exponent, coefficient], ...]` in exponent order.
    pub fn to_pairs(&self) -> Vec<[String; 2]> {
        self.terms
            .iter()
            .map(|(e, c)| [format_rational(e), format_rational(c)])
            .collect()
    }
}

fn add_term(map: &mut BTreeMap<BigRational, BigRational>, e: BigRational, c: BigRational) {
    if c.is_zero() {
        return;
    }
    let remove = {
        let slot = map.entry(e.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        slot.is_zero()
    };
    if remove {
        map.remove(&e);
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            write!(f, "{}", c.abs())?;
            if !e.is_zero() {
                write!(f, "·t^({e})")?;
            }
        }
        Ok(())
    }
}
