//! Rewriting decompositions `u = Σ s_k (x_k - y_k)` without raising their
//! max-cost.

use std::collections::BTreeSet;

use num_traits::Zero;

use super::NaError;
use crate::magnitude::Cost;
use crate::scalar::{FieldSpec, Scalar};
use crate::ultrametric::{UltraSpace, ZERO_LABEL};
use crate::vector::{Decomposition, FreeVector, Term};

/// Upper bound on rewrite steps; each elimination removes one incidence of
/// the point being cleared, so hitting it means a bug.
const STEP_LIMIT: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionStep {
    pub rule: &'static str,
    pub detail: String,
    pub cost_after: Cost,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReductionLog {
    pub steps: Vec<ReductionStep>,
}

/// `max |s_k|·d(x_k, y_k)`.
pub fn decomposition_cost(
    dec: &Decomposition,
    space: &UltraSpace,
    field: &FieldSpec,
) -> Result<Cost, NaError> {
    let mut best = Cost::zero(field.base());
    for t in &dec.terms {
        let d = space.distance(&t.from, &t.to)?;
        best = best.max_of(Cost::from_magnitude(&field.abs(&t.coeff)?, d, field.base()));
    }
    Ok(best)
}

struct Reducer<'a> {
    space: &'a UltraSpace,
    field: &'a FieldSpec,
    terms: Vec<Term>,
    log: ReductionLog,
}

impl Reducer<'_> {
    fn record(&mut self, rule: &'static str, detail: String) -> Result<(), NaError> {
        let cost_after = decomposition_cost(
            &Decomposition::new(self.terms.clone()),
            self.space,
            self.field,
        )?;
        self.log.steps.push(ReductionStep {
            rule,
            detail,
            cost_after,
        });
        Ok(())
    }

    fn delete_trivial(&mut self) -> Result<(), NaError> {
        let before = self.terms.len();
        self.terms.retain(|t| !t.coeff.is_zero() && t.from != t.to);
        if self.terms.len() < before {
            self.record(
                "delete",
                format!("dropped {} zero term(s)", before - self.terms.len()),
            )?;
        }
        Ok(())
    }

    /// `s(x - y) + t(x - y) → (s + t)(x - y)`, in either orientation.
    fn merge_duplicates(&mut self) -> Result<(), NaError> {
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        let mut count = 0;
        for t in std::mem::take(&mut self.terms) {
            if let Some(m) = merged
                .iter_mut()
                .find(|m| (m.from == t.from && m.to == t.to) || (m.from == t.to && m.to == t.from))
            {
                m.coeff = if m.from == t.from {
                    &m.coeff + &t.coeff
                } else {
                    &m.coeff - &t.coeff
                };
                count += 1;
            } else {
                merged.push(t);
            }
        }
        self.terms = merged;
        if count > 0 {
            self.record("merge", format!("merged {count} duplicate pair(s)"))?;
        }
        self.delete_trivial()
    }

    /// Removes one incidence of an off-support point `z`: with
    /// `λ(x - z)` of least magnitude and another `b(y - z)`, rewrite as
    /// `λ(x - y) + (λ + b)(y - z)`.
    fn eliminate(&mut self, z: &str) -> Result<bool, NaError> {
        let mut incident: Vec<usize> = Vec::new();
        for (k, t) in self.terms.iter_mut().enumerate() {
            if t.from == z {
                // orient as coeff·(other - z)
                std::mem::swap(&mut t.from, &mut t.to);
                t.coeff = -&t.coeff;
            }
            if t.to == z {
                incident.push(k);
            }
        }
        if incident.is_empty() {
            return Ok(false);
        }
        if incident.len() == 1 {
            // the coefficient of z in u is nonzero, so z is on the support after all
            return Ok(false);
        }
        let mags: Vec<_> = incident
            .iter()
            .map(|&k| self.field.abs(&self.terms[k].coeff))
            .collect::<Result<_, _>>()?;
        let a_pos = (0..incident.len())
            .min_by(|&i, &j| mags[i].cmp(&mags[j]))
            .expect("nonempty");
        let b_pos = if a_pos == 0 { 1 } else { 0 };
        let (ka, kb) = (incident[a_pos], incident[b_pos]);
        let lambda = self.terms[ka].coeff.clone();
        let x = self.terms[ka].from.clone();
        let y = self.terms[kb].from.clone();
        let new_b = &self.terms[kb].coeff + &lambda;
        self.terms[ka] = Term::new(lambda.clone(), x.clone(), y.clone());
        self.terms[kb].coeff = new_b;
        self.record(
            "eliminate",
            format!("moved ({lambda})·({x} - {z}) through {y}, avoiding {z}"),
        )?;
        self.delete_trivial()?;
        Ok(true)
    }
}

/// Rewrites `dec` onto the support of `u`: zero terms are deleted, every
/// off-support point (including `0̄` when `u` is balanced) is routed
/// around, and parallel terms are merged. Coefficients of the output are
/// sums and differences of input coefficients, so a subgroup containing the
/// inputs contains the outputs.
///
/// `space` must contain every label used by `dec`.
pub fn reduce_decomposition(
    dec: &Decomposition,
    space: &UltraSpace,
    u: &FreeVector,
) -> Result<(Decomposition, ReductionLog), NaError> {
    dec.check_evaluates_to(u)?;
    let field = u.field();
    let mut support: BTreeSet<String> = u.points().map(str::to_string).collect();
    if !u.is_balanced() {
        support.insert(ZERO_LABEL.to_string());
    }
    let mut r = Reducer {
        space,
        field,
        terms: dec.terms.clone(),
        log: ReductionLog::default(),
    };
    // validates labels up front
    decomposition_cost(dec, space, field)?;
    r.delete_trivial()?;
    let mut steps = 0;
    loop {
        let off: Option<String> = r
            .terms
            .iter()
            .flat_map(|t| [&t.from, &t.to])
            .find(|p| !support.contains(*p))
            .cloned();
        let Some(z) = off else { break };
        // clear z completely: no rewrite reintroduces it, but routing
        // through another off-support point adds incidences there
        let mut moved = false;
        while r.eliminate(&z)? {
            moved = true;
            steps += 1;
            assert!(steps < STEP_LIMIT, "reduction did not terminate");
        }
        if !moved {
            break;
        }
    }
    r.merge_duplicates()?;
    let out = Decomposition::new(r.terms);
    out.check_evaluates_to(u)?;
    Ok((out, r.log))
}

/// Rewrites `dec` so every coefficient satisfies `in_g`, without raising the
/// max-cost. Requires the coefficients of `u` to satisfy `in_g` and `in_g`
/// to describe an additive subgroup.
pub fn g_value_reduce(
    dec: &Decomposition,
    space: &UltraSpace,
    u: &FreeVector,
    in_g: &dyn Fn(&Scalar) -> bool,
) -> Result<(Decomposition, ReductionLog), NaError> {
    dec.check_evaluates_to(u)?;
    let field = u.field();
    decomposition_cost(dec, space, field)?;
    let mut r = Reducer {
        space,
        field,
        terms: dec.terms.clone(),
        log: ReductionLog::default(),
    };
    r.delete_trivial()?;
    let mut steps = 0;
    'outer: loop {
        let points: BTreeSet<String> = r
            .terms
            .iter()
            .flat_map(|t| [t.from.clone(), t.to.clone()])
            .filter(|p| p != ZERO_LABEL)
            .collect();
        for a1 in &points {
            // terms at a1 with coefficients outside G, oriented as μ(a1 - b)
            let mut bad: Vec<usize> = Vec::new();
            for (k, t) in r.terms.iter_mut().enumerate() {
                if in_g(&t.coeff) || (t.from != *a1 && t.to != *a1) {
                    continue;
                }
                if t.to == *a1 {
                    std::mem::swap(&mut t.from, &mut t.to);
                    t.coeff = -&t.coeff;
                }
                bad.push(k);
            }
            if bad.is_empty() {
                continue;
            }
            if bad.len() < 2 {
                // the balance at a1 forces a second such term unless G is not a group
                return Err(NaError::Vector(crate::vector::VectorError::Mismatch {
                    expected: "coefficients of u inside G".into(),
                    found: format!("a single non-G term at {a1}"),
                }));
            }
            let mags: Vec<_> = bad
                .iter()
                .map(|&k| field.abs(&r.terms[k].coeff))
                .collect::<Result<_, _>>()?;
            let i1 = (0..bad.len())
                .max_by(|&i, &j| mags[i].cmp(&mags[j]).then(j.cmp(&i)))
                .expect("nonempty");
            let j = if i1 == 0 { 1 } else { 0 };
            let (k1, kj) = (bad[i1], bad[j]);
            // μ1(a1 - b1) and μj(aj - a1), the latter from -μj'(a1 - aj)
            let mu1 = r.terms[k1].coeff.clone();
            let b1 = r.terms[k1].to.clone();
            let muj = -&r.terms[kj].coeff;
            let aj = r.terms[kj].to.clone();
            r.terms[kj] = Term::new(muj.clone(), aj.clone(), b1.clone());
            r.terms[k1].coeff = &mu1 - &muj;
            r.record(
                "g-value",
                format!("rerouted ({muj})·({aj} - {a1}) to end at {b1}"),
            )?;
            r.delete_trivial()?;
            steps += 1;
            assert!(steps < STEP_LIMIT, "G-value reduction did not terminate");
            continue 'outer;
        }
        break;
    }
    let out = Decomposition::new(r.terms);
    out.check_evaluates_to(u)?;
    Ok((out, r.log))
}

/// Tries to write `u` as `Σ λ_i (x_i - y_i)` with every `d(x_i, y_i) = 0` by
/// moving each coefficient onto the first support point at distance zero.
/// Returns the presentation when the remainder vanishes.
pub fn zero_distance_reduction(
    space: &UltraSpace,
    u: &FreeVector,
) -> Result<Option<Decomposition>, NaError> {
    if !u.is_balanced() {
        // 0̄ is at positive distance from every point
        return Ok(None);
    }
    let labels: Vec<&str> = u.points().collect();
    let mut idx = Vec::with_capacity(labels.len());
    for l in &labels {
        idx.push(
            space
                .index_of(l)
                .ok_or_else(|| NaError::UnknownPoint(l.to_string()))?,
        );
    }
    let mut rest: Vec<Scalar> = u.terms().iter().map(|(_, c)| c.clone()).collect();
    let mut terms = Vec::new();
    for i in 0..labels.len() {
        if rest[i].is_zero() {
            continue;
        }
        if let Some(j) = (0..i).find(|&j| space.dist(idx[i], idx[j]).is_zero()) {
            terms.push(Term::new(rest[i].clone(), labels[i], labels[j]));
            rest[j] = &rest[j] + &rest[i];
            rest[i] = rest[i].zero_like();
        }
    }
    Ok(rest
        .iter()
        .all(Scalar::is_zero)
        .then(|| Decomposition::new(terms)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::ultrametric::validate_ultrametric;

    fn space(names: &[&str], rows: &[&[i64]]) -> UltraSpace {
        let m = rows
            .iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect();
        validate_ultrametric(names.iter().map(|s| s.to_string()).collect(), m, true).unwrap()
    }

    #[test]
    fn routes_around_off_support_point() {
        let f = FieldSpec::trivial();
        let s = space(&["x", "y", "z"], &[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        let u = FreeVector::difference(&f, "x", "y").unwrap();
        let dec = Decomposition::new(vec![
            Term::new(f.one(), "x", "z"),
            Term::new(f.one(), "z", "y"),
        ]);
        let (out, log) = reduce_decomposition(&dec, &s, &u).unwrap();
        assert_eq!(out.terms, vec![Term::new(f.one(), "x", "y")]);
        assert!(log.steps.iter().any(|s| s.rule == "eliminate"));
        assert!(
            decomposition_cost(&out, &s, &f).unwrap() <= decomposition_cost(&dec, &s, &f).unwrap()
        );
    }

    #[test]
    fn deletes_zero_terms() {
        let f = FieldSpec::trivial();
        let s = space(&["x", "y"], &[&[0, 1], &[1, 0]]);
        let u = FreeVector::difference(&f, "x", "y").unwrap();
        let dec = Decomposition::new(vec![
            Term::new(f.zero(), "x", "y"),
            Term::new(f.one(), "x", "y"),
        ]);
        let (out, log) = reduce_decomposition(&dec, &s, &u).unwrap();
        assert_eq!(out.terms.len(), 1);
        assert_eq!(log.steps[0].rule, "delete");
    }

    #[test]
    fn substitution_keeps_cost() {
        let f = FieldSpec::p_adic(2).unwrap();
        let s = space(&["x", "y", "z"], &[&[0, 2, 2], &[2, 0, 1], &[2, 1, 0]]);
        // 2(x - z) + 3(z - y) = 2x + z - 3y
        let u = FreeVector::normalize(
            &f,
            [
                ("x", f.from_integer(2)),
                ("y", f.from_integer(-3)),
                ("z", f.from_integer(1)),
            ],
        )
        .unwrap();
        let dec = Decomposition::new(vec![
            Term::new(f.from_integer(2), "x", "z"),
            Term::new(f.from_integer(3), "z", "y"),
        ]);
        let (out, _) = reduce_decomposition(&dec, &s, &u).unwrap();
        assert!(
            decomposition_cost(&out, &s, &f).unwrap() <= decomposition_cost(&dec, &s, &f).unwrap()
        );
    }

    #[test]
    fn g_value_rewrite_over_rationals() {
        let f = FieldSpec::p_adic(3).unwrap();
        let s = space(&["a", "b", "c"], &[&[0, 1, 3], &[1, 0, 3], &[3, 3, 0]]);
        let u = FreeVector::normalize(&f, [("a", f.from_integer(1)), ("c", f.from_integer(-1))])
            .unwrap();
        let half = Scalar::Rational(crate::rational::rat(1, 2));
        // (1/2)(a - b) + (1/2)(a - c) + (1/2)(b - c)  =  a - c
        let dec = Decomposition::new(vec![
            Term::new(half.clone(), "a", "b"),
            Term::new(half.clone(), "a", "c"),
            Term::new(half, "b", "c"),
        ]);
        let in_z = |c: &Scalar| crate::vector::scalar_is_integer(c);
        let (out, _) = g_value_reduce(&dec, &s, &u, &in_z).unwrap();
        assert!(out.terms.iter().all(|t| in_z(&t.coeff)));
        assert!(
            decomposition_cost(&out, &s, &f).unwrap() <= decomposition_cost(&dec, &s, &f).unwrap()
        );
    }

    #[test]
    fn kernel_presentation() {
        let f = FieldSpec::trivial();
        let s = space(&["a", "b", "c"], &[&[0, 0, 1], &[0, 0, 1], &[1, 1, 0]]);
        let u = FreeVector::normalize(&f, [("a", f.from_integer(5)), ("b", f.from_integer(-5))])
            .unwrap();
        let dec = zero_distance_reduction(&s, &u).unwrap().unwrap();
        dec.check_evaluates_to(&u).unwrap();
        let v = FreeVector::normalize(&f, [("a", f.from_integer(5)), ("c", f.from_integer(-5))])
            .unwrap();
        assert!(zero_distance_reduction(&s, &v).unwrap().is_none());
    }
}
