use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use super::{ClassicalError, MetricSpace};
use crate::rational::rat;

/// Largest space the complex solver accepts.
pub const COMPLEX_MAX_POINTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Accuracy target; the solver stops once the relative duality gap is
    /// a hundredth of this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            max_iter: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPlan {
    pub entries: Vec<(String, String, Complex64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSolution {
    /// Sum-cost of `plan`.
    pub value: f64,
    /// Certified lower bound from a feasible dual potential.
    pub lower_bound: f64,
    pub plan: ComplexPlan,
    pub iterations: usize,
    /// Minimizer of the one-variable reduction, when that route was taken.
    pub median: Option<Complex64>,
}

fn check_vertex(points: &[Complex64], weights: &[f64], k: usize) -> (Complex64, bool) {
    let y = points[k];
    let mut r = Complex64::zero();
    for (j, (&p, &w)) in points.iter().zip(weights).enumerate() {
        let d = (p - y).norm();
        if j != k && d > 0.0 {
            r += w * (p - y) / d;
        }
    }
    let wk: f64 = points
        .iter()
        .zip(weights)
        .filter(|(p, _)| **p == y)
        .map(|(_, w)| w)
        .sum();
    (r, r.norm() <= wk)
}

fn weighted_sum(points: &[Complex64], weights: &[f64], y: Complex64) -> f64 {
    points
        .iter()
        .zip(weights)
        .map(|(p, w)| w * (p - y).norm())
        .sum()
}

/// Weighted geometric median: minimizes `Σ w_k |p_k - y|`. Weiszfeld
/// iteration with the Vardi-Zhang modification at data points.
pub fn weiszfeld_weighted(points: &[Complex64], weights: &[f64], tol: f64) -> (Complex64, f64) {
    assert!(
        !points.is_empty() && points.len() == weights.len(),
        "need weighted points"
    );
    assert!(tol > 0.0, "tolerance must be positive");
    for k in 0..points.len() {
        if weights[k] > 0.0 && check_vertex(points, weights, k).1 {
            return (points[k], weighted_sum(points, weights, points[k]));
        }
    }
    let total: f64 = weights.iter().sum();
    let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let mut y = points
        .iter()
        .zip(weights)
        .map(|(p, w)| p * *w)
        .sum::<Complex64>()
        / total;
    for _ in 0..100_000 {
        let mut num = Complex64::zero();
        let mut den = 0.0;
        let mut at = None;
        for (k, (&p, &w)) in points.iter().zip(weights).enumerate() {
            let d = (p - y).norm();
            if d <= f64::EPSILON * scale {
                at = Some(k);
                continue;
            }
            num += w * p / d;
            den += w / d;
        }
        let mut next = num / den;
        if let Some(k) = at {
            let (r, optimal) = check_vertex(points, weights, k);
            if optimal {
                break;
            }
            let share = (weights[k] / r.norm()).min(1.0);
            next = (1.0 - share) * next + share * y;
        }
        let step = (next - y).norm();
        y = next;
        if step <= tol * scale {
            break;
        }
    }
    (y, weighted_sum(points, weights, y))
}

/// Geometric median with unit weights.
pub fn weiszfeld(points: &[Complex64], tol: f64) -> (Complex64, f64) {
    weiszfeld_weighted(points, &vec![1.0; points.len()], tol)
}

fn indexed(
    space: &MetricSpace,
    u: &[(String, Complex64)],
) -> Result<Vec<(usize, Complex64)>, ClassicalError> {
    let mut out = Vec::with_capacity(u.len());
    let mut total = Complex64::zero();
    let mut scale = 1.0f64;
    for (label, c) in u {
        let i = space
            .index_of(label)
            .ok_or_else(|| ClassicalError::UnknownPoint(label.clone()))?;
        total += c;
        scale = scale.max(c.norm());
        if c.norm() > 0.0 {
            out.push((i, *c));
        }
    }
    if total.norm() > 1e-12 * scale {
        return Err(ClassicalError::Unbalanced(format!("{total}")));
    }
    Ok(out)
}

/// Infimum of the sum-cost over presentations using support points only.
/// Three-point supports reduce to a weighted geometric median in one free
/// variable; larger supports go to [`complex_norm_small`] on the support.
pub fn support_restricted_complex_inf(
    space: &MetricSpace,
    u: &[(String, Complex64)],
    options: &SolverOptions,
) -> Result<ComplexSolution, ClassicalError> {
    let coeffs = indexed(space, u)?;
    let label = |i: usize| space.points()[i].clone();
    match coeffs.as_slice() {
        [] => Ok(ComplexSolution {
            value: 0.0,
            lower_bound: 0.0,
            plan: ComplexPlan { entries: vec![] },
            iterations: 0,
            median: None,
        }),
        [(i, c), (j, _)] => {
            let v = c.norm() * space.dist_f64(*i, *j);
            Ok(ComplexSolution {
                value: v,
                lower_bound: v,
                plan: ComplexPlan {
                    entries: vec![(label(*i), label(*j), *c)],
                },
                iterations: 0,
                median: None,
            })
        }
        [(p, lp), (q, lq), (r, _)] => {
            // c_pq = t, c_pr = λ_p - t, c_qr = λ_q + t
            let anchors = [Complex64::zero(), *lp, -lq];
            let weights = [
                space.dist_f64(*p, *q),
                space.dist_f64(*p, *r),
                space.dist_f64(*q, *r),
            ];
            let (t, value) = weiszfeld_weighted(&anchors, &weights, options.tol * 1e-6);
            Ok(ComplexSolution {
                value,
                lower_bound: value,
                plan: ComplexPlan {
                    entries: vec![
                        (label(*p), label(*q), t),
                        (label(*p), label(*r), lp - t),
                        (label(*q), label(*r), lq + t),
                    ],
                },
                iterations: 0,
                median: Some(t),
            })
        }
        _ => {
            let idx: Vec<usize> = coeffs.iter().map(|(i, _)| *i).collect();
            complex_norm_small(&space.restrict(&idx), u, options)
        }
    }
}

/// Sum-cost norm of a balanced complex vector over every point of `space`,
/// by iteratively reweighted least squares. Stops once the best plan found
/// is within `tol` (relative) of a dual lower bound.
pub fn complex_norm_small(
    space: &MetricSpace,
    u: &[(String, Complex64)],
    options: &SolverOptions,
) -> Result<ComplexSolution, ClassicalError> {
    if space.len() > COMPLEX_MAX_POINTS {
        return Err(ClassicalError::TooLarge {
            found: space.len(),
            limit: COMPLEX_MAX_POINTS,
        });
    }
    let coeffs = indexed(space, u)?;
    // points at distance zero share one representative
    let n_all = space.len();
    let rep: Vec<usize> = (0..n_all)
        .map(|i| {
            (0..=i)
                .find(|&j| space.dist(i, j).is_zero())
                .expect("d(i,i) = 0")
        })
        .collect();
    let nodes: Vec<usize> = (0..n_all).filter(|&i| rep[i] == i).collect();
    let pos = |i: usize| {
        nodes
            .iter()
            .position(|&r| r == rep[i])
            .expect("representative")
    };
    let n = nodes.len();
    let mut lambda = vec![Complex64::zero(); n];
    let mut entries = Vec::new();
    for &(i, c) in &coeffs {
        lambda[pos(i)] += c;
        if rep[i] != i {
            entries.push((space.points()[i].clone(), space.points()[rep[i]].clone(), c));
        }
    }
    let edges: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .map(|(a, b)| (a, b, space.dist_f64(nodes[a], nodes[b])))
        .collect();
    let mass: f64 = lambda.iter().map(|c| c.norm()).sum();
    if n < 2 || mass == 0.0 {
        return Ok(ComplexSolution {
            value: 0.0,
            lower_bound: 0.0,
            plan: ComplexPlan { entries },
            iterations: 0,
            median: None,
        });
    }
    let mut s = vec![1.0f64; edges.len()];
    let mut eps = mass;
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    let mut lower = 0.0f64;
    for iter in 1..=options.max_iter {
        let m = n - 1;
        let mut lap = DMatrix::<f64>::zeros(m, m);
        for (k, &(a, b, w)) in edges.iter().enumerate() {
            let g = s[k] / w;
            for (x, y, sign) in [(a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)] {
                if x < m && y < m {
                    lap[(x, y)] += sign * g;
                }
            }
        }
        let chol = lap.cholesky().ok_or(ClassicalError::NotConverged {
            iterations: iter,
            gap: f64::INFINITY,
        })?;
        let re = chol.solve(&DVector::from_iterator(m, lambda[..m].iter().map(|c| c.re)));
        let im = chol.solve(&DVector::from_iterator(m, lambda[..m].iter().map(|c| c.im)));
        let phi: Vec<Complex64> = (0..n)
            .map(|i| {
                if i < m {
                    Complex64::new(re[i], im[i])
                } else {
                    Complex64::zero()
                }
            })
            .collect();
        let flows: Vec<Complex64> = edges
            .iter()
            .zip(&s)
            .map(|(&(a, b, w), &sk)| (phi[a] - phi[b]) * (sk / w))
            .collect();
        let primal: f64 = flows.iter().zip(&edges).map(|(c, e)| c.norm() * e.2).sum();
        let steep = edges
            .iter()
            .map(|&(a, b, w)| (phi[a] - phi[b]).norm() / w)
            .fold(0.0, f64::max);
        if steep > 0.0 {
            let dual: f64 = lambda
                .iter()
                .zip(&phi)
                .map(|(l, p)| (l * p.conj()).re)
                .sum::<f64>()
                / steep;
            lower = lower.max(dual);
        }
        if best.as_ref().map_or(true, |(v, _)| primal < *v) {
            best = Some((primal, flows.clone()));
        }
        let value = best.as_ref().expect("set above").0;
        if value - lower <= 0.01 * options.tol * value.max(1.0) {
            let (value, flows) = best.expect("set above");
            for (&(a, b, _), c) in edges.iter().zip(flows) {
                if c.norm() > 0.0 {
                    entries.push((
                        space.points()[nodes[a]].clone(),
                        space.points()[nodes[b]].clone(),
                        c,
                    ));
                }
            }
            return Ok(ComplexSolution {
                value,
                lower_bound: lower,
                plan: ComplexPlan { entries },
                iterations: iter,
                median: None,
            });
        }
        eps = (eps * 0.8).max(1e-15 * mass);
        for (sk, c) in s.iter_mut().zip(&flows) {
            *sk = (c.norm_sqr() + eps * eps).sqrt();
        }
    }
    Err(ClassicalError::NotConverged {
        iterations: options.max_iter,
        gap: best.map_or(f64::INFINITY, |(v, _)| v - lower),
    })
}

/// Dyadic points `t_k` approaching the geometric median of `vertices`,
/// keeping only those whose cost strictly improves: `(re, im, cost)`.
pub fn fermat_sequence(
    vertices: &[Complex64],
    max_bits: u32,
) -> Vec<(BigRational, BigRational, f64)> {
    let (p, _) = weiszfeld(vertices, 1e-15);
    let weights = vec![1.0; vertices.len()];
    let mut out: Vec<(BigRational, BigRational, f64)> = Vec::new();
    for k in 0..=max_bits {
        let den = 1i64 << k;
        let re = (p.re * den as f64).round() as i64;
        let im = (p.im * den as f64).round() as i64;
        let t = Complex64::new(re as f64 / den as f64, im as f64 / den as f64);
        let cost = weighted_sum(vertices, &weights, t);
        if out.last().map_or(true, |last| cost < last.2) {
            out.push((
                BigRational::new(BigInt::from(re), BigInt::from(den)),
                BigRational::new(BigInt::from(im), BigInt::from(den)),
                cost,
            ));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppendixReport {
    /// Support-only infimum for `p + μq + νr` on the unit triangle.
    pub support_restricted: f64,
    /// Full norm once the centre `e` at distance 1/2 is available.
    pub full: f64,
    pub full_lower_bound: f64,
    pub full_plan: ComplexPlan,
    /// Minimizer `t` of the support-only problem.
    pub fermat_point: Complex64,
    /// Geometric median of `0, 1, i` and its cost.
    pub qi_fermat_point: Complex64,
    pub qi_fermat_value: f64,
    /// Gaussian-rational approximations with strictly decreasing cost.
    pub qi_sequence: Vec<(BigRational, BigRational, f64)>,
}

/// The cube-roots-of-unity example on the unit triangle with a centre point,
/// and the `0, 1, i` median used for the Gaussian-rational sequence.
pub fn appendix(options: &SolverOptions) -> Result<AppendixReport, ClassicalError> {
    let names = ["e", "p", "q", "r"].map(String::from).to_vec();
    let h = rat(1, 2);
    let one = rat(1, 1);
    let z = BigRational::zero();
    let m = vec![
        vec![z.clone(), h.clone(), h.clone(), h.clone()],
        vec![h.clone(), z.clone(), one.clone(), one.clone()],
        vec![h.clone(), one.clone(), z.clone(), one.clone()],
        vec![h, one.clone(), one, z],
    ];
    let space = super::validate_metric(names, m, false)?;
    let mu = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let u = vec![
        ("p".to_string(), Complex64::new(1.0, 0.0)),
        ("q".to_string(), mu),
        ("r".to_string(), mu.conj()),
    ];
    let restricted = support_restricted_complex_inf(&space, &u, options)?;
    let full = complex_norm_small(&space, &u, options)?;
    let tri = [
        Complex64::zero(),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    let (qp, qv) = weiszfeld(&tri, 1e-15);
    Ok(AppendixReport {
        support_restricted: restricted.value,
        full: full.value,
        full_lower_bound: full.lower_bound,
        full_plan: full.plan,
        fermat_point: restricted.median.expect("three-point support"),
        qi_fermat_point: qp,
        qi_fermat_value: qv,
        qi_sequence: fermat_sequence(&tri, 20),
    })
}
