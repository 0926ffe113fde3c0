//! Independent re-checking of a [`NormCertificate`].
//!
//! Nothing from the solver is trusted: the clusters are re-enumerated as
//! balls of the support, and every number is recomputed from the instance.

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::norm::{ExtensionOptions, NormCertificate};
use crate::magnitude::{Cost, Magnitude};
use crate::scalar::Scalar;
use crate::ultrametric::{UltraSpace, ZERO_LABEL};
use crate::vector::FreeVector;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &'static str, result: Result<String, String>) {
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(CheckResult {
            name,
            passed,
            detail,
        });
    }
}

struct Instance {
    labels: Vec<String>,
    coeffs: Vec<Scalar>,
    n: usize,
    dist: Vec<Vec<BigRational>>,
}

impl Instance {
    fn index(&self) -> HashMap<&str, usize> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect()
    }
}

/// Runs checks (a)–(e) plus the extension check; failures are report
/// entries, never errors.
///
/// `options` is only consulted for `0̄` distances the certificate does not
/// record itself.
pub fn verify_certificate(
    cert: &NormCertificate,
    space: &UltraSpace,
    u: &FreeVector,
    options: &ExtensionOptions,
) -> VerificationReport {
    let mut report = VerificationReport::default();
    let inst = match rebuild(cert, space, u, options) {
        Ok(i) => {
            report.push("extension", Ok("support distances rebuilt".into()));
            i
        }
        Err(e) => {
            report.push("extension", Err(e));
            return report;
        }
    };
    let field = &cert.field;
    let base = field.base();
    let abs = |s: &Scalar| field.abs(s).unwrap_or(Magnitude::Zero);
    let index = inst.index();
    let m = inst.labels.len();

    // (a) net flow equals the coefficients
    let mut net: Vec<Scalar> = vec![field.zero(); m];
    let mut stray = Vec::new();
    for e in &cert.witness {
        match (index.get(e.from.as_str()), index.get(e.to.as_str())) {
            (Some(&i), Some(&j)) if i != j => {
                net[i] = &net[i] + &e.coeff;
                net[j] = &net[j] - &e.coeff;
            }
            _ => stray.push(format!("{} -> {}", e.from, e.to)),
        }
    }
    let bad: Vec<String> = (0..inst.n)
        .filter(|&i| net[i] != inst.coeffs[i])
        .map(|i| {
            format!(
                "net({}) = {}, expected {}",
                inst.labels[i], net[i], inst.coeffs[i]
            )
        })
        .chain(
            stray
                .iter()
                .map(|s| format!("entry off the support or a loop: {s}")),
        )
        .collect();
    report.push(
        "feasibility",
        if bad.is_empty() {
            Ok(format!(
                "{} entries balance every support point",
                cert.witness.len()
            ))
        } else {
            Err(bad.join("; "))
        },
    );

    // (b) witness cost
    let mut witness_cost = Cost::zero(base);
    let mut cost_errors = Vec::new();
    for e in &cert.witness {
        if let (Some(&i), Some(&j)) = (index.get(e.from.as_str()), index.get(e.to.as_str())) {
            let c = Cost::from_magnitude(&abs(&e.coeff), &inst.dist[i][j], base);
            if e.cost.try_cmp(&c) != Ok(std::cmp::Ordering::Equal) {
                cost_errors.push(format!(
                    "entry {} -> {} records {} but costs {}",
                    e.from, e.to, e.cost, c
                ));
            }
            witness_cost = witness_cost.max_of(c);
        }
    }
    let value_ok = cert.value.try_cmp(&witness_cost) == Ok(std::cmp::Ordering::Equal);
    report.push(
        "witness-cost",
        if value_ok && cost_errors.is_empty() {
            Ok(format!("max entry cost {witness_cost}"))
        } else {
            let mut msgs = cost_errors;
            if !value_ok {
                msgs.push(format!(
                    "witness costs {witness_cost}, value is {}",
                    cert.value
                ));
            }
            Err(msgs.join("; "))
        },
    );

    // (c) cuts: recompute each, then compare with every ball of the support
    let balls = strict_balls(&inst);
    let ball_bound = |members: &BTreeSet<usize>| -> (Scalar, BigRational, Cost) {
        let sum = members
            .iter()
            .fold(field.zero(), |acc, &i| &acc + &inst.coeffs[i]);
        let sep = separation(&inst, members);
        let bound = Cost::from_magnitude(&abs(&sum), &sep, base);
        (sum, sep, bound)
    };
    let mut cut_errors = Vec::new();
    let mut cert_max = Cost::zero(base);
    for cut in &cert.cuts {
        let members: Option<BTreeSet<usize>> = cut
            .cluster
            .iter()
            .map(|l| index.get(l.as_str()).copied())
            .collect();
        let Some(members) = members else {
            cut_errors.push(format!(
                "cut {:?} names points outside the support",
                cut.cluster
            ));
            continue;
        };
        if !balls.contains(&members) {
            cut_errors.push(format!(
                "{:?} is not a proper ball of the support",
                cut.cluster
            ));
            continue;
        }
        let (sum, sep, bound) = ball_bound(&members);
        if sum != cut.sum
            || sep != cut.sep
            || bound.try_cmp(&cut.bound) != Ok(std::cmp::Ordering::Equal)
        {
            cut_errors.push(format!(
                "cut {:?} recomputes to sum {sum}, sep {sep}, bound {bound}",
                cut.cluster
            ));
        }
        cert_max = cert_max.max_of(bound);
    }
    let mut all_max = Cost::zero(base);
    for b in &balls {
        all_max = all_max.max_of(ball_bound(b).2);
    }
    if cert.value != cert_max {
        cut_errors.push(format!(
            "value {} differs from the largest listed cut {cert_max}",
            cert.value
        ));
    }
    if cert.value != all_max {
        cut_errors.push(format!(
            "value {} differs from the largest ball bound {all_max}",
            cert.value
        ));
    }
    if let Some(k) = cert.argmax {
        if cert.cuts.get(k).is_none_or(|c| c.bound != cert.value) {
            cut_errors.push(format!("argmax {k} does not attain the value"));
        }
    }
    report.push(
        "cut-bounds",
        if cut_errors.is_empty() {
            Ok(format!(
                "value equals the largest of {} ball bounds",
                balls.len()
            ))
        } else {
            Err(cut_errors.join("; "))
        },
    );

    // (d) every entry is ± a cluster sum
    let sums: Vec<Scalar> = balls.iter().map(|b| ball_bound(b).0).collect();
    let not_sums: Vec<String> = cert
        .witness
        .iter()
        .filter(|e| !sums.iter().any(|s| *s == e.coeff || *s == -&e.coeff))
        .map(|e| format!("{} -> {}: {}", e.from, e.to, e.coeff))
        .collect();
    report.push(
        "cluster-sums",
        if not_sums.is_empty() {
            Ok("every entry is a cluster sum".into())
        } else {
            Err(format!(
                "entries outside the cluster sums: {}",
                not_sums.join("; ")
            ))
        },
    );

    // (e) r·l₀ ≤ value ≤ r·l₁
    let (lo, hi) = if m < 2 {
        (Cost::zero(base), Cost::zero(base))
    } else {
        let r = inst.coeffs[..inst.n]
            .iter()
            .map(abs)
            .max()
            .unwrap_or(Magnitude::Zero);
        let off: Vec<&BigRational> = (0..m)
            .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
            .map(|(i, j)| &inst.dist[i][j])
            .collect();
        let l0 = off.iter().min().expect("two points");
        let l1 = off.iter().max().expect("two points");
        (
            Cost::from_magnitude(&r, l0, base),
            Cost::from_magnitude(&r, l1, base),
        )
    };
    report.push(
        "bounds",
        if lo <= cert.value && cert.value <= hi {
            Ok(format!("{lo} <= {} <= {hi}", cert.value))
        } else {
            Err(format!("value {} outside [{lo}, {hi}]", cert.value))
        },
    );
    report
}

fn rebuild(
    cert: &NormCertificate,
    space: &UltraSpace,
    u: &FreeVector,
    options: &ExtensionOptions,
) -> Result<Instance, String> {
    if u.field() != &cert.field {
        return Err(format!(
            "certificate is over {}, vector over {}",
            cert.field,
            u.field()
        ));
    }
    let mut labels: Vec<String> = u.points().map(str::to_string).collect();
    let mut coeffs: Vec<Scalar> = u.terms().iter().map(|(_, c)| c.clone()).collect();
    let n = labels.len();
    let mut idx = Vec::with_capacity(n);
    for l in &labels {
        idx.push(
            space
                .index_of(l)
                .ok_or_else(|| format!("unknown point {l}"))?,
        );
    }
    let mut dist: Vec<Vec<BigRational>> = idx
        .iter()
        .map(|&i| idx.iter().map(|&j| space.dist(i, j).clone()).collect())
        .collect();
    let balance = u.balance();
    if u.is_zero() {
        labels.push(ZERO_LABEL.into());
        coeffs.push(balance);
        dist.push(vec![BigRational::zero()]);
    } else if !balance.is_zero() {
        if cert.pointed {
            return Err("pointed certificate for an unbalanced vector".into());
        }
        let recorded: Option<HashMap<&str, &BigRational>> = cert.extension.as_ref().map(|e| {
            e.zero_distances
                .iter()
                .map(|(l, d)| (l.as_str(), d))
                .collect()
        });
        let mut row = Vec::with_capacity(n);
        for (k, l) in labels.iter().enumerate() {
            let d = match (&recorded, &options.zero_distances) {
                (Some(r), _) => r
                    .get(l.as_str())
                    .map(|d| (*d).clone())
                    .ok_or_else(|| format!("no distance from {l} to {ZERO_LABEL} recorded"))?,
                (None, Some(zd)) => zd.get(idx[k]).cloned().ok_or("zero_distances too short")?,
                (None, None) => {
                    let b = options.basepoint.as_deref().unwrap_or(&labels[0]);
                    let bi = space
                        .index_of(b)
                        .ok_or_else(|| format!("unknown basepoint {b}"))?;
                    space.dist(idx[k], bi).clone().max(BigRational::one())
                }
            };
            if !d.is_positive() {
                return Err(format!("d({l}, {ZERO_LABEL}) must be positive"));
            }
            row.push(d);
        }
        // a declared basepoint pins the distances down
        if let Some(b) = cert.extension.as_ref().and_then(|e| e.basepoint.as_deref()) {
            let bi = space
                .index_of(b)
                .ok_or_else(|| format!("unknown basepoint {b}"))?;
            for (k, d) in row.iter().enumerate() {
                if *d != space.dist(idx[k], bi).clone().max(BigRational::one()) {
                    return Err(format!(
                        "d({}, {ZERO_LABEL}) = {d} disagrees with basepoint {b}",
                        labels[k]
                    ));
                }
            }
        }
        for (r, d) in dist.iter_mut().zip(&row) {
            r.push(d.clone());
        }
        row.push(BigRational::zero());
        dist.push(row);
        labels.push(ZERO_LABEL.into());
        coeffs.push(-&balance);
        let m = labels.len();
        for x in 0..m {
            for y in 0..m {
                for z in 0..m {
                    if dist[x][z] > dist[x][y].clone().max(dist[y][z].clone()) {
                        return Err(format!(
                            "extended support violates the strong triangle inequality at ({}, {}, {})",
                            labels[x], labels[y], labels[z]
                        ));
                    }
                }
            }
        }
    }
    if cert.support != labels {
        return Err(format!(
            "certificate support {:?} differs from {:?}",
            cert.support, labels
        ));
    }
    Ok(Instance {
        labels,
        coeffs,
        n,
        dist,
    })
}

/// All closed balls that are neither empty nor the whole support.
fn strict_balls(inst: &Instance) -> BTreeSet<BTreeSet<usize>> {
    let m = inst.labels.len();
    let mut out = BTreeSet::new();
    for x in 0..m {
        for r in inst.dist[x].iter() {
            let ball: BTreeSet<usize> = (0..m).filter(|&y| inst.dist[x][y] <= *r).collect();
            if ball.len() < m {
                out.insert(ball);
            }
        }
    }
    out
}

fn separation(inst: &Instance, members: &BTreeSet<usize>) -> BigRational {
    let m = inst.labels.len();
    members
        .iter()
        .flat_map(|&i| (0..m).filter(|j| !members.contains(j)).map(move |j| (i, j)))
        .map(|(i, j)| inst.dist[i][j].clone())
        .min()
        .unwrap_or_else(BigRational::zero)
}
