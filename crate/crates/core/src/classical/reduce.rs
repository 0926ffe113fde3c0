use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{ClassicalError, MetricSpace};
use crate::scalar::{FieldSpec, Scalar};
use crate::vector::{Decomposition, FreeVector, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealReductionStep {
    pub rule: &'static str,
    pub detail: String,
    pub cost_after: BigRational,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RealReductionLog {
    pub steps: Vec<RealReductionStep>,
}

/// `Σ |c_k|·d(x_k, y_k)`.
pub fn sum_cost(dec: &Decomposition, space: &MetricSpace) -> Result<BigRational, ClassicalError> {
    let mut total = BigRational::zero();
    for t in &dec.terms {
        let q = t
            .coeff
            .as_rational()
            .ok_or_else(|| ClassicalError::NotRational(format!("{} - {}", t.from, t.to)))?;
        total += q.abs() * space.distance(&t.from, &t.to)?;
    }
    Ok(total)
}

struct Item {
    c: BigRational,
    x: String,
    y: String,
}

struct State<'a> {
    space: &'a MetricSpace,
    items: Vec<Item>,
    log: RealReductionLog,
}

impl State<'_> {
    fn cost(&self) -> BigRational {
        self.items
            .iter()
            .map(|t| &t.c * self.space.distance(&t.x, &t.y).expect("labels checked"))
            .sum()
    }

    fn record(&mut self, rule: &'static str, detail: String) {
        let cost_after = self.cost();
        self.log.steps.push(RealReductionStep {
            rule,
            detail,
            cost_after,
        });
    }

    /// Makes every coefficient positive and drops empty terms.
    fn normalize(&mut self) {
        let before = self.items.len();
        let mut flipped = 0;
        self.items.retain(|t| !t.c.is_zero() && t.x != t.y);
        for t in &mut self.items {
            if t.c.is_negative() {
                t.c = -&t.c;
                std::mem::swap(&mut t.x, &mut t.y);
                flipped += 1;
            }
        }
        if flipped > 0 {
            self.record("1", format!("reoriented {flipped} negative term(s)"));
        }
        if self.items.len() < before {
            self.record(
                "1",
                format!("dropped {} empty term(s)", before - self.items.len()),
            );
        }
    }

    /// Merges parallel and antiparallel pairs.
    fn merge(&mut self) {
        let mut k = 0;
        while k < self.items.len() {
            let mut l = k + 1;
            while l < self.items.len() {
                let (a, b) = (&self.items[k], &self.items[l]);
                if a.x == b.x && a.y == b.y {
                    let c = &a.c + &b.c;
                    let detail = format!("({})({} - {}) + ({}) same -> ({c})", a.c, a.x, a.y, b.c);
                    self.items[k].c = c;
                    self.items.remove(l);
                    self.record("2", detail);
                } else if a.x == b.y && a.y == b.x {
                    let c = &a.c - &b.c;
                    let detail =
                        format!("({})({} - {}) + ({}) reversed -> ({c})", a.c, a.x, a.y, b.c);
                    self.items[k].c = c;
                    self.items.remove(l);
                    self.record("2", detail);
                } else {
                    l += 1;
                }
            }
            k += 1;
        }
        self.normalize();
    }

    /// One reduction through an off-support point `z`. All coefficients are
    /// positive here, and the net coefficient at `z` is zero, so `z` has an
    /// incoming `λ(x - z)` and an outgoing `μ(z - y)`.
    fn bypass(&mut self, z: &str) -> bool {
        let Some(i) = self.items.iter().position(|t| t.y == z) else {
            return false;
        };
        let Some(o) = self.items.iter().position(|t| t.x == z) else {
            return false;
        };
        let lambda = self.items[i].c.clone();
        let mu = self.items[o].c.clone();
        let x = self.items[i].x.clone();
        let y = self.items[o].y.clone();
        let direct = Item {
            c: lambda.clone().min(mu.clone()),
            x: x.clone(),
            y: y.clone(),
        };
        let rule = if lambda == mu {
            let (hi, lo) = (i.max(o), i.min(o));
            self.items.remove(hi);
            self.items.remove(lo);
            "3a"
        } else if lambda < mu {
            self.items[o].c = &mu - &lambda;
            self.items.remove(i);
            "3b"
        } else {
            self.items[i].c = &lambda - &mu;
            self.items.remove(o);
            "3c"
        };
        self.items.push(direct);
        self.record(
            rule,
            format!("({lambda})({x} - {z}) + ({mu})({z} - {y}) rerouted past {z}"),
        );
        self.normalize();
        true
    }
}

/// Rewrites a real decomposition of `u` onto the support of `u` without
/// raising its sum-cost, logging every rule applied.
pub fn reduce_real_decomposition(
    dec: &Decomposition,
    space: &MetricSpace,
    u: &FreeVector,
) -> Result<(Decomposition, RealReductionLog), ClassicalError> {
    let field = FieldSpec::real();
    let target = FreeVector::normalize(&field, u.terms().iter().cloned())?;
    dec.check_evaluates_to(&target)?;
    sum_cost(dec, space)?;
    let support: BTreeSet<&str> = u.points().collect();
    let mut st = State {
        space,
        items: dec
            .terms
            .iter()
            .map(|t| Item {
                c: t.coeff.as_rational().expect("checked by sum_cost").clone(),
                x: t.from.clone(),
                y: t.to.clone(),
            })
            .collect(),
        log: RealReductionLog::default(),
    };
    st.normalize();
    st.merge();
    loop {
        let off = st
            .items
            .iter()
            .flat_map(|t| [&t.x, &t.y])
            .find(|p| !support.contains(p.as_str()))
            .cloned();
        let Some(z) = off else { break };
        if !st.bypass(&z) {
            break;
        }
    }
    st.merge();
    let out = Decomposition::new(
        st.items
            .into_iter()
            .map(|t| Term::new(Scalar::Rational(t.c), t.x, t.y))
            .collect(),
    );
    out.check_evaluates_to(&target)?;
    Ok((out, st.log))
}
