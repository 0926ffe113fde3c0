//! Exact magnitudes `b^(-e)` and transport costs `q·b^(-e)`.
//!
//! Nothing here is ever stored as a float. Two costs over the same base are
//! ordered by cross-powering: with `e1 - e2 = num/den`,
//! `q1·b^(-e1) ≤ q2·b^(-e2)` iff `(q1/q2)^den ≤ b^num`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{format_rational, parse_rational, pow_rational, rational_to_f64};

/// `|x|` of a field element, kept as the exponent `e` of `b^(-e)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Magnitude {
    Zero,
    Positive(BigRational),
}

impl Magnitude {
    pub fn one() -> Self {
        Magnitude::Positive(BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Magnitude::Zero)
    }

    pub fn exponent(&self) -> Option<&BigRational> {
        match self {
            Magnitude::Zero => None,
            Magnitude::Positive(e) => Some(e),
        }
    }

    /// Approximate value; for reports only.
    pub fn approx(&self, base: &BigRational) -> f64 {
        match self {
            Magnitude::Zero => 0.0,
            Magnitude::Positive(e) => rational_to_f64(base).powf(-rational_to_f64(e)),
        }
    }
}

impl Ord for Magnitude {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Magnitude::Zero, Magnitude::Zero) => Ordering::Equal,
            (Magnitude::Zero, _) => Ordering::Less,
            (_, Magnitude::Zero) => Ordering::Greater,
            // larger exponent means smaller magnitude
            (Magnitude::Positive(a), Magnitude::Positive(b)) => b.cmp(a),
        }
    }
}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mul for &Magnitude {
    type Output = Magnitude;

    fn mul(self, rhs: &Magnitude) -> Magnitude {
        match (self, rhs) {
            (Magnitude::Positive(a), Magnitude::Positive(b)) => Magnitude::Positive(a + b),
            _ => Magnitude::Zero,
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Magnitude::Zero => write!(f, "0"),
            Magnitude::Positive(e) => write!(f, "b^({})", -e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("cost bases differ: {0} vs {1}")]
    BaseMismatch(String, String),
    #[error("malformed cost: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum CostRepr {
    Zero,
    Positive {
        mantissa: BigRational,
        exponent: BigRational,
    },
}

/// `q·b^(-e)` with `q > 0`, or zero.
///
/// The representation is not unique (`2·2^0 = 1·2^(-1)`); equality and
/// ordering both go through [`Cost::try_cmp`].
#[derive(Clone, Debug)]
pub struct Cost {
    repr: CostRepr,
    base: BigRational,
}

impl Cost {
    pub fn zero(base: &BigRational) -> Self {
        Cost {
            repr: CostRepr::Zero,
            base: base.clone(),
        }
    }

    /// `q·b^(-e)`; a zero mantissa collapses to [`Cost::zero`].
    pub fn new(mantissa: BigRational, exponent: BigRational, base: &BigRational) -> Self {
        assert!(!mantissa.is_negative(), "cost mantissa must be nonnegative");
        assert!(*base > BigRational::one(), "cost base must exceed 1");
        if mantissa.is_zero() {
            return Cost::zero(base);
        }
        Cost {
            repr: CostRepr::Positive { mantissa, exponent },
            base: base.clone(),
        }
    }

    /// `|c|·d` for a magnitude `|c|` and a nonnegative rational distance `d`.
    pub fn from_magnitude(
        magnitude: &Magnitude,
        distance: &BigRational,
        base: &BigRational,
    ) -> Self {
        match magnitude {
            Magnitude::Zero => Cost::zero(base),
            Magnitude::Positive(e) => Cost::new(distance.clone(), e.clone(), base),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, CostRepr::Zero)
    }

    pub fn base(&self) -> &BigRational {
        &self.base
    }

    pub fn mantissa(&self) -> Option<&BigRational> {
        match &self.repr {
            CostRepr::Zero => None,
            CostRepr::Positive { mantissa, .. } => Some(mantissa),
        }
    }

    pub fn exponent(&self) -> Option<&BigRational> {
        match &self.repr {
            CostRepr::Zero => None,
            CostRepr::Positive { exponent, .. } => Some(exponent),
        }
    }

    /// Multiplies the mantissa by a nonnegative rational.
    pub fn scale(&self, k: &BigRational) -> Cost {
        match &self.repr {
            CostRepr::Zero => self.clone(),
            CostRepr::Positive { mantissa, exponent } => {
                Cost::new(mantissa * k, exponent.clone(), &self.base)
            }
        }
    }

    /// Multiplies by a magnitude (exponents add).
    pub fn times_magnitude(&self, m: &Magnitude) -> Cost {
        match (&self.repr, m) {
            (CostRepr::Positive { mantissa, exponent }, Magnitude::Positive(e)) => {
                Cost::new(mantissa.clone(), exponent + e, &self.base)
            }
            _ => Cost::zero(&self.base),
        }
    }

    /// Re-expresses a cost with exponent zero over another base.
    ///
    /// Only costs whose exponent is zero (or zero costs) have a
    /// base-independent value; anything else returns `None`.
    pub fn rebase(&self, base: &BigRational) -> Option<Cost> {
        match &self.repr {
            CostRepr::Zero => Some(Cost::zero(base)),
            CostRepr::Positive { mantissa, exponent } if exponent.is_zero() => {
                Some(Cost::new(mantissa.clone(), BigRational::zero(), base))
            }
            _ => None,
        }
    }

    /// Exact comparison.
    pub fn try_cmp(&self, other: &Cost) -> Result<Ordering, CostError> {
        if self.base != other.base {
            return Err(CostError::BaseMismatch(
                format_rational(&self.base),
                format_rational(&other.base),
            ));
        }
        let ord = match (&self.repr, &other.repr) {
            (CostRepr::Zero, CostRepr::Zero) => Ordering::Equal,
            (CostRepr::Zero, _) => Ordering::Less,
            (_, CostRepr::Zero) => Ordering::Greater,
            (
                CostRepr::Positive {
                    mantissa: q1,
                    exponent: e1,
                },
                CostRepr::Positive {
                    mantissa: q2,
                    exponent: e2,
                },
            ) => {
                let delta = e1 - e2;
                if delta.is_zero() {
                    q1.cmp(q2)
                } else {
                    let ratio = q1 / q2;
                    let den: &BigInt = delta.denom();
                    let lhs = pow_rational(&ratio, den);
                    let rhs = pow_rational(&self.base, delta.numer());
                    lhs.cmp(&rhs)
                }
            }
        };
        Ok(ord)
    }

    pub fn max_of(self, other: Cost) -> Cost {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Approximate value; for reports only.
    pub fn approx(&self) -> f64 {
        match &self.repr {
            CostRepr::Zero => 0.0,
            CostRepr::Positive { mantissa, exponent } => {
                rational_to_f64(mantissa)
                    * rational_to_f64(&self.base).powf(-rational_to_f64(exponent))
            }
        }
    }

    /// `log2` of the value, `-inf` for zero; used to pre-sort before exact
    /// comparison.
    pub fn log2_approx(&self) -> f64 {
        match &self.repr {
            CostRepr::Zero => f64::NEG_INFINITY,
            CostRepr::Positive { mantissa, exponent } => {
                let log2 = |q: &BigRational| {
                    let (n, d) = (q.numer().bits() as i64, q.denom().bits() as i64);
                    // scale both to at most 64 significant bits before converting
                    let shift = (n.max(d) - 60).max(0) as u64;
                    let n = rational_to_f64(&BigRational::from_integer(q.numer() >> shift));
                    let d = rational_to_f64(&BigRational::from_integer(q.denom() >> shift));
                    n.log2() - d.log2()
                };
                log2(mantissa) - rational_to_f64(exponent) * log2(&self.base)
            }
        }
    }

    pub fn to_json(&self) -> CostJson {
        let (mantissa, exponent) = match &self.repr {
            CostRepr::Zero => ("0/1".to_string(), "0/1".to_string()),
            CostRepr::Positive { mantissa, exponent } => {
                (format_rational(mantissa), format_rational(exponent))
            }
        };
        CostJson {
            mantissa,
            exponent,
            base: format_rational(&self.base),
            approx: self.approx(),
        }
    }

    pub fn from_json(json: &CostJson) -> Result<Cost, CostError> {
        let parse = |s: &str| parse_rational(s).map_err(|e| CostError::Malformed(e.to_string()));
        let mantissa = parse(&json.mantissa)?;
        let exponent = parse(&json.exponent)?;
        let base = parse(&json.base)?;
        if mantissa.is_negative() {
            return Err(CostError::Malformed("negative mantissa".into()));
        }
        if base <= BigRational::one() {
            return Err(CostError::Malformed("base must exceed 1".into()));
        }
        Ok(Cost::new(mantissa, exponent, &base))
    }
}

/// Panics on mismatched bases; use [`Cost::try_cmp`] when that can happen.
impl PartialEq for Cost {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cost {}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.try_cmp(other)
            .expect("compared costs over different bases")
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            CostRepr::Zero => write!(f, "0"),
            CostRepr::Positive { mantissa, exponent } if exponent.is_zero() => {
                write!(f, "{mantissa}")
            }
            CostRepr::Positive { mantissa, exponent } => {
                write!(f, "{mantissa}·{}^({})", self.base, -exponent)
            }
        }
    }
}

/// Wire form of a [`Cost`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostJson {
    pub mantissa: String,
    pub exponent: String,
    pub base: String,
    pub approx: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn cost(q: BigRational, e: BigRational) -> Cost {
        Cost::new(q, e, &int(2))
    }

    #[test]
    fn direct_evaluation_order() {
        // 3·2^-1 = 1.5 < 1·2^1 = 2
        assert_eq!(
            cost(int(3), int(1)).cmp(&cost(int(1), int(-1))),
            Ordering::Less
        );
    }

    #[test]
    fn cross_powering_order() {
        // 2·2^(3/2) ≈ 5.66 < 1·2^3 = 8
        let a = cost(int(2), rat(-3, 2));
        let b = cost(int(1), int(-3));
        assert_eq!(a.cmp(&b), Ordering::Less);
        assert_eq!(b.cmp(&a), Ordering::Greater);
    }

    #[test]
    fn zero_is_least() {
        let z = Cost::zero(&int(2));
        assert!(z < cost(rat(1, 1000), int(40)));
        assert_eq!(z, Cost::new(int(0), int(5), &int(2)));
    }

    #[test]
    fn representations_of_same_value_are_equal() {
        assert_eq!(cost(int(2), int(0)), cost(int(1), int(-1)));
        assert_eq!(
            cost(int(1), rat(1, 2)).scale(&int(2)),
            cost(int(1), rat(-1, 2))
        );
    }

    #[test]
    fn mismatched_bases_are_reported() {
        let a = Cost::new(int(1), int(0), &int(2));
        let b = Cost::new(int(1), int(0), &int(3));
        assert!(matches!(a.try_cmp(&b), Err(CostError::BaseMismatch(_, _))));
        assert_eq!(a.rebase(&int(3)).unwrap(), b);
    }

    #[test]
    fn magnitude_order_and_product() {
        let half = Magnitude::Positive(int(1));
        let quarter = Magnitude::Positive(int(2));
        assert!(quarter < half);
        assert!(Magnitude::Zero < quarter);
        assert_eq!(&half * &half, quarter);
        assert_eq!(&half * &Magnitude::Zero, Magnitude::Zero);
    }

    #[test]
    fn json_round_trip() {
        let c = cost(rat(3, 2), rat(-1, 3));
        let back = Cost::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!((c.approx() - 1.5 * 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }
}
