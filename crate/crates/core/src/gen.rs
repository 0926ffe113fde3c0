//! Seeded random instances: ultrametrics grown from random dendrograms and
//! vectors over each supported field.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::classical::{validate_metric, MetricSpace};
use crate::instance::{instance_to_json, MetricForm};
use crate::levi_civita::Series;
use crate::na::ExtensionOptions;
use crate::rational::rat;
use crate::scalar::{FieldKind, FieldSpec, Scalar};
use crate::ultrametric::UltraSpace;
use crate::vector::FreeVector;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point labels `x0, x1, ...`.
pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// `k` distinct positive rationals in increasing order.
pub fn random_scales<R: Rng>(rng: &mut R, k: usize) -> Vec<BigRational> {
    let mut set = BTreeSet::new();
    while set.len() < k {
        let num: i64 = rng.gen_range(1..=16);
        let den: i64 = *[1, 2, 3, 4].choose(rng).expect("nonempty");
        set.insert(rat(num, den));
    }
    set.into_iter().collect()
}

/// An ultrametric on `n` points whose dendrogram merges at heights drawn
/// from `k` random scales. With `pseudo`, the lowest scale is zero.
pub fn random_ultrametric<R: Rng>(rng: &mut R, n: usize, k: usize, pseudo: bool) -> UltraSpace {
    assert!(n > 0 && k > 0, "need points and scales");
    let mut scales = random_scales(rng, k);
    if pseudo {
        scales[0] = BigRational::zero();
    }
    let mut clusters: Vec<Vec<String>> = labels(n).into_iter().map(|p| vec![p]).collect();
    let mut merges = Vec::new();
    for (level, h) in scales.iter().enumerate() {
        if clusters.len() == 1 {
            break;
        }
        let groups = if level + 1 == scales.len() {
            1
        } else {
            rng.gen_range(1..=clusters.len())
        };
        let mut buckets: Vec<Vec<String>> = vec![Vec::new(); groups];
        let mut sizes = vec![0usize; groups];
        for c in clusters.drain(..) {
            let g = rng.gen_range(0..groups);
            sizes[g] += 1;
            buckets[g].extend(c);
        }
        for (bucket, size) in buckets.into_iter().zip(sizes) {
            if size == 0 {
                continue;
            }
            if size > 1 {
                merges.push((h.clone(), bucket.clone()));
            }
            clusters.push(bucket);
        }
    }
    UltraSpace::from_merges(labels(n), &merges, pseudo)
        .expect("merge lists from nested partitions are valid")
}

/// All off-diagonal distances equal to `l`.
pub fn equilateral(n: usize, l: &BigRational) -> UltraSpace {
    let dist = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::zero()
                    } else {
                        l.clone()
                    }
                })
                .collect()
        })
        .collect();
    crate::ultrametric::validate_ultrametric(labels(n), dist, false)
        .expect("equilateral spaces are ultrametric")
}

/// A random metric on `n` points: shortest paths over random positive
/// integer edge weights.
pub fn random_metric<R: Rng>(rng: &mut R, n: usize) -> MetricSpace {
    let mut d: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rat(
                rng.gen_range(1..=10),
                *[1, 2].choose(rng).expect("nonempty"),
            );
            d[i][j] = w.clone();
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &d[i][k] + &d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    validate_metric(labels(n), d, false).expect("shortest-path distances are metric")
}

/// The field kinds exercised by the generators.
pub fn standard_fields() -> Vec<FieldSpec> {
    vec![
        FieldSpec::trivial(),
        FieldSpec::p_adic(2).expect("2 is prime"),
        FieldSpec::p_adic(3).expect("3 is prime"),
        FieldSpec::finite(5).expect("5 is prime"),
        FieldSpec::levi_civita(None).expect("default base"),
    ]
}

pub fn random_field<R: Rng>(rng: &mut R) -> FieldSpec {
    standard_fields().choose(rng).expect("nonempty").clone()
}

/// A nonzero scalar of `field` with small height. `p`-adic values carry
/// random powers of `p`; Levi-Civita values use exponents from a fixed small
/// set so that sums stay within a few monomials.
pub fn random_scalar<R: Rng>(rng: &mut R, field: &FieldSpec) -> Scalar {
    loop {
        let s = match field.kind() {
            FieldKind::FiniteField => {
                field.from_integer(rng.gen_range(1..field.prime().expect("prime") as i64))
            }
            FieldKind::LeviCivita => {
                let exps = [rat(-1, 1), rat(0, 1), rat(1, 2), rat(1, 1), rat(2, 1)];
                let terms = rng.gen_range(1..=2);
                let chosen: Vec<&BigRational> = exps.choose_multiple(rng, terms).collect();
                Scalar::Series(Series::from_terms(
                    chosen
                        .into_iter()
                        .map(|e| (e.clone(), rat(nonzero(rng, 5), 1))),
                ))
            }
            FieldKind::PAdicRational => {
                let p = BigInt::from(field.prime().expect("prime"));
                let up = num_traits::pow(p.clone(), rng.gen_range(0..=2));
                let down = num_traits::pow(p, rng.gen_range(0..=1));
                let q = BigRational::new(
                    up * BigInt::from(nonzero(rng, 4)),
                    down * BigInt::from(rng.gen_range(1..=3)),
                );
                Scalar::Rational(q)
            }
            FieldKind::Complex => field
                .from_rational(&rat(nonzero(rng, 6), rng.gen_range(1..=3)))
                .expect("rational embeds"),
            _ => Scalar::Rational(rat(nonzero(rng, 9), rng.gen_range(1..=4))),
        };
        if !s.is_zero() {
            return s;
        }
    }
}

fn nonzero<R: Rng>(rng: &mut R, bound: i64) -> i64 {
    let v = rng.gen_range(1..=bound);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

/// A vector on `support` distinct random points of `points`. With
/// `balanced`, the last coefficient is chosen to cancel the others (the
/// support may then shrink by one if the remainder vanishes).
pub fn random_vector<R: Rng>(
    rng: &mut R,
    field: &FieldSpec,
    points: &[String],
    support: usize,
    balanced: bool,
) -> FreeVector {
    let chosen: Vec<&String> = points
        .choose_multiple(rng, support.min(points.len()))
        .collect();
    let mut terms: Vec<(String, Scalar)> = Vec::with_capacity(chosen.len());
    let mut total = field.zero();
    for (k, p) in chosen.iter().enumerate() {
        let c = if balanced && k + 1 == chosen.len() {
            -&total
        } else {
            random_scalar(rng, field)
        };
        total = &total + &c;
        terms.push(((*p).clone(), c));
    }
    FreeVector::normalize(field, terms).expect("scalars come from the field")
}

/// An integer vector over the trivially valued rationals.
pub fn random_integer_vector<R: Rng>(
    rng: &mut R,
    points: &[String],
    support: usize,
    balanced: bool,
) -> FreeVector {
    let field = FieldSpec::trivial();
    let chosen: Vec<&String> = points
        .choose_multiple(rng, support.min(points.len()))
        .collect();
    let mut total = 0i64;
    let mut terms = Vec::with_capacity(chosen.len());
    for (k, p) in chosen.iter().enumerate() {
        let c = if balanced && k + 1 == chosen.len() {
            -total
        } else {
            nonzero(rng, 6)
        };
        total += c;
        terms.push(((*p).clone(), field.from_integer(c)));
    }
    FreeVector::normalize(&field, terms).expect("integers embed")
}

/// The JSON instance `gen` prints: `n` points, `k` scales, a vector over
/// `field` on up to four points, balanced or not at random.
pub fn generate_instance(seed: u64, n: usize, k: usize, field: &FieldSpec) -> Value {
    let mut rng = rng_from_seed(seed);
    let space = random_ultrametric(&mut rng, n, k, false);
    let support = rng.gen_range(1..=n.min(4));
    let balanced = rng.gen_bool(0.5);
    let u = random_vector(&mut rng, field, space.points(), support, balanced);
    let options = if balanced {
        ExtensionOptions::default()
    } else {
        ExtensionOptions::basepoint(u.points().next().unwrap_or("x0"))
    };
    instance_to_json(field, &space, &u, &options, MetricForm::Dendrogram)
}
