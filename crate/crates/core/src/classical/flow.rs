use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{rational_coefficients, ClassicalError, MetricSpace};
use crate::scalar::{FieldSpec, Scalar};
use crate::vector::{Decomposition, FreeVector, Term};

/// Transfers `c (from - to)` with their total sum-cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealPlan {
    pub entries: Vec<(String, String, BigRational)>,
    pub cost: BigRational,
}

impl RealPlan {
    pub fn to_decomposition(&self) -> Decomposition {
        Decomposition::new(
            self.entries
                .iter()
                .map(|(a, b, c)| Term::new(Scalar::Rational(c.clone()), a.clone(), b.clone()))
                .collect(),
        )
    }

    /// Checks the balance constraints against `u` and recomputes the cost.
    pub fn check(&self, space: &MetricSpace, u: &FreeVector) -> Result<(), ClassicalError> {
        let field = FieldSpec::real();
        let v = self.to_decomposition().evaluate(&field)?;
        let w = FreeVector::normalize(&field, u.terms().iter().cloned())?;
        if v != w {
            return Err(ClassicalError::Input(format!(
                "plan evaluates to {}, expected {}",
                crate::vector::describe(&v),
                crate::vector::describe(&w)
            )));
        }
        let mut cost = BigRational::zero();
        for (a, b, c) in &self.entries {
            cost += c.abs() * space.distance(a, b)?;
        }
        if cost != self.cost {
            return Err(ClassicalError::Input(format!(
                "plan cost mismatch: {} recorded, {} recomputed",
                self.cost, cost
            )));
        }
        Ok(())
    }
}

struct Arc {
    to: usize,
    cap: Option<BigRational>,
    cost: BigRational,
}

struct Network {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    /// Adds an arc and its zero-capacity reverse; returns the forward index.
    fn add(
        &mut self,
        from: usize,
        to: usize,
        cap: Option<BigRational>,
        cost: BigRational,
    ) -> usize {
        let k = self.arcs.len();
        self.arcs.push(Arc {
            to,
            cap,
            cost: cost.clone(),
        });
        self.arcs.push(Arc {
            to: from,
            cap: Some(BigRational::zero()),
            cost: -cost,
        });
        self.out[from].push(k);
        self.out[to].push(k + 1);
        k
    }

    fn open(&self, k: usize) -> bool {
        self.arcs[k].cap.as_ref().map_or(true, |c| c.is_positive())
    }

    /// Bellman-Ford from `s`; returns the arc path to `t`.
    fn shortest_path(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let n = self.out.len();
        let mut dist: Vec<Option<BigRational>> = vec![None; n];
        let mut via: Vec<Option<usize>> = vec![None; n];
        dist[s] = Some(BigRational::zero());
        for _ in 0..n {
            let mut changed = false;
            for v in 0..n {
                let Some(dv) = dist[v].clone() else { continue };
                for &k in &self.out[v] {
                    if !self.open(k) {
                        continue;
                    }
                    let w = self.arcs[k].to;
                    let cand = &dv + &self.arcs[k].cost;
                    if dist[w].as_ref().map_or(true, |dw| cand < *dw) {
                        dist[w] = Some(cand);
                        via[w] = Some(k);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist[t].as_ref()?;
        let mut path = Vec::new();
        let mut v = t;
        while v != s {
            let k = via[v].expect("reached nodes have a predecessor");
            path.push(k);
            v = self.arcs[k ^ 1].to;
        }
        path.reverse();
        Some(path)
    }

    fn push(&mut self, path: &[usize], amount: &BigRational) {
        for &k in path {
            if let Some(c) = self.arcs[k].cap.as_mut() {
                *c -= amount;
            }
            if let Some(c) = self.arcs[k ^ 1].cap.as_mut() {
                *c += amount;
            }
        }
    }

    fn flow(&self, k: usize) -> BigRational {
        self.arcs[k ^ 1].cap.clone().unwrap_or_default()
    }
}

/// Exact sum-cost norm of a balanced rational vector: successive shortest
/// paths on the complete graph over all points of `space`, with supply
/// `λ_i` at each point.
pub fn kantorovich_real(
    space: &MetricSpace,
    u: &FreeVector,
) -> Result<(BigRational, RealPlan), ClassicalError> {
    let coeffs = rational_coefficients(space, u)?;
    let n = space.len();
    let (s, t) = (n, n + 1);
    let mut net = Network::new(n + 2);
    for (i, q) in &coeffs {
        if q.is_positive() {
            net.add(s, *i, Some(q.clone()), BigRational::zero());
        } else {
            net.add(*i, t, Some(-q), BigRational::zero());
        }
    }
    let mut transfers = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                transfers.push((i, j, net.add(i, j, None, space.dist(i, j).clone())));
            }
        }
    }
    while let Some(path) = net.shortest_path(s, t) {
        let amount = path
            .iter()
            .filter_map(|&k| net.arcs[k].cap.clone())
            .min()
            .expect("source arcs are capacitated");
        net.push(&path, &amount);
    }
    let mut entries = Vec::new();
    let mut cost = BigRational::zero();
    for &(i, j, k) in &transfers {
        if i > j {
            continue;
        }
        let back = transfers
            .iter()
            .find(|&&(a, b, _)| a == j && b == i)
            .map(|&(_, _, k2)| net.flow(k2))
            .unwrap_or_default();
        let f = net.flow(k) - back;
        if f.is_zero() {
            continue;
        }
        cost += f.abs() * space.dist(i, j);
        let (a, b, c) = if f.is_positive() {
            (i, j, f)
        } else {
            (j, i, -f)
        };
        entries.push((space.points()[a].clone(), space.points()[b].clone(), c));
    }
    Ok((cost.clone(), RealPlan { entries, cost }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::validate_metric;
    use crate::rational::int;

    fn space(names: &[&str], rows: &[&[i64]]) -> MetricSpace {
        let m = rows
            .iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect();
        validate_metric(names.iter().map(|s| s.to_string()).collect(), m, false).unwrap()
    }

    #[test]
    fn single_difference() {
        let f = FieldSpec::real();
        let s = space(&["x", "y"], &[&[0, 3], &[3, 0]]);
        let (v, plan) =
            kantorovich_real(&s, &FreeVector::difference(&f, "x", "y").unwrap()).unwrap();
        assert_eq!(v, int(3));
        assert_eq!(plan.entries, vec![("x".into(), "y".into(), int(1))]);
    }

    #[test]
    fn split_supply() {
        let f = FieldSpec::real();
        let s = space(&["a", "b", "c"], &[&[0, 1, 1], &[1, 0, 2], &[1, 2, 0]]);
        let u = FreeVector::normalize(
            &f,
            [
                ("a", f.from_integer(2)),
                ("b", f.from_integer(-1)),
                ("c", f.from_integer(-1)),
            ],
        )
        .unwrap();
        let (v, plan) = kantorovich_real(&s, &u).unwrap();
        assert_eq!(v, int(2));
        plan.check(&s, &u).unwrap();
    }

    #[test]
    fn zero_vector() {
        let s = space(&["a"], &[&[0]]);
        let (v, plan) = kantorovich_real(&s, &FreeVector::zero(&FieldSpec::real())).unwrap();
        assert!(v.is_zero() && plan.entries.is_empty());
    }

    #[test]
    fn unbalanced_is_rejected() {
        let f = FieldSpec::real();
        let s = space(&["a"], &[&[0]]);
        let u = FreeVector::normalize(&f, [("a", f.one())]).unwrap();
        assert!(matches!(
            kantorovich_real(&s, &u),
            Err(ClassicalError::Unbalanced(_))
        ));
    }
}
