//! Brute-force reference for the max-cost norm.
//!
//! The balance equations are solved for the near-diagonal entries
//! `c_{i,i+1}`; every other entry `c_ij` (`j ≥ i+2`) is free and ranges over
//! the integer combinations `Σ m_k λ_k` with `|m_k| ≤ M`. Rows are filled in
//! order, so each dependent entry is known as soon as its row's free entries
//! are. The search keeps the cheapest plan seen and cuts any branch that
//! cannot beat it; it never consults the dendrogram.
//!
//! Values are handled in a fixed-width integer encoding of the span of the
//! coefficients, and each `|c|·d` is replaced by its rank among all costs the
//! search can meet, so the inner loop only compares integers.

use std::cmp::Ordering;
use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use super::norm::ExtensionOptions;
use super::{check_field, prepare, NaError, Prepared};
use crate::levi_civita::Series;
use crate::magnitude::{Cost, Magnitude};
use crate::rational::int_valuation;
use crate::scalar::{FieldKind, FieldSpec, Scalar};
use crate::ultrametric::UltraSpace;
use crate::vector::FreeVector;

/// Largest support (counting `0̄`) the oracle accepts.
pub const ORACLE_MAX_SUPPORT: usize = 5;

const DIM: usize = 8;
type Enc = [i128; DIM];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("support of size {0} exceeds the oracle limit of {ORACLE_MAX_SUPPORT}")]
    TooLarge(usize),
    #[error("search budget must be at least 1")]
    ZeroBudget,
    #[error("coefficients do not fit the oracle's integer encoding: {0}")]
    Encoding(String),
    #[error(transparent)]
    Na(#[from] NaError),
}

/// Fixed-width encoding of the additive span of the coefficients.
enum Codec {
    /// `N / den`; `prime` set for the `p`-adic valuation.
    Rational {
        den: BigInt,
        prime: Option<u64>,
        vp_den: i64,
    },
    Finite {
        p: u64,
    },
    /// `Σ N_k / den · t^{exps[k]}`.
    Series {
        exps: Vec<BigRational>,
        den: BigInt,
    },
}

impl Codec {
    fn new(field: &FieldSpec, coeffs: &[Scalar]) -> Result<Codec, OracleError> {
        match field.kind() {
            FieldKind::FiniteField => Ok(Codec::Finite {
                p: field.prime().expect("finite field prime"),
            }),
            FieldKind::LeviCivita => {
                let mut exps: Vec<BigRational> = Vec::new();
                let mut den = BigInt::one();
                for c in coeffs {
                    let Scalar::Series(s) = c else {
                        return Err(OracleError::Encoding(c.to_string()));
                    };
                    for (e, q) in s.terms() {
                        if !exps.contains(e) {
                            exps.push(e.clone());
                        }
                        den = den.lcm(q.denom());
                    }
                }
                exps.sort();
                if exps.len() > DIM {
                    return Err(OracleError::Encoding(format!(
                        "{} distinct exponents, at most {DIM} supported",
                        exps.len()
                    )));
                }
                Ok(Codec::Series { exps, den })
            }
            _ => {
                let mut den = BigInt::one();
                for c in coeffs {
                    let Scalar::Rational(q) = c else {
                        return Err(OracleError::Encoding(c.to_string()));
                    };
                    den = den.lcm(q.denom());
                }
                let prime = (field.kind() == FieldKind::PAdicRational)
                    .then(|| field.prime().expect("p-adic prime"));
                let vp_den = prime.map_or(0, |p| int_valuation(&den, p));
                Ok(Codec::Rational { den, prime, vp_den })
            }
        }
    }

    fn encode(&self, s: &Scalar) -> Result<Enc, OracleError> {
        let mut out = [0i128; DIM];
        let as_int = |q: BigRational, den: &BigInt| -> Result<i128, OracleError> {
            let scaled = q * BigRational::from_integer(den.clone());
            if !scaled.is_integer() {
                return Err(OracleError::Encoding(format!("{scaled} is not integral")));
            }
            scaled
                .to_integer()
                .to_i128()
                .filter(|v| v.abs() < 1i128 << 100)
                .ok_or_else(|| OracleError::Encoding("numerator too large".into()))
        };
        match (self, s) {
            (Codec::Rational { den, .. }, Scalar::Rational(q)) => out[0] = as_int(q.clone(), den)?,
            (Codec::Finite { .. }, Scalar::Residue { value, .. }) => out[0] = *value as i128,
            (Codec::Series { exps, den }, Scalar::Series(f)) => {
                for (e, q) in f.terms() {
                    let k = exps.iter().position(|x| x == e).ok_or_else(|| {
                        OracleError::Encoding(format!("exponent {e} outside the span"))
                    })?;
                    out[k] = as_int(q.clone(), den)?;
                }
            }
            _ => return Err(OracleError::Encoding(s.to_string())),
        }
        Ok(out)
    }

    fn decode(&self, v: &Enc) -> Scalar {
        match self {
            Codec::Rational { den, .. } => {
                Scalar::Rational(BigRational::new(BigInt::from(v[0]), den.clone()))
            }
            Codec::Finite { p } => Scalar::Residue {
                value: v[0] as u64,
                modulus: *p,
            },
            Codec::Series { exps, den } => {
                Scalar::Series(Series::from_terms(exps.iter().zip(v.iter()).map(
                    |(e, &n)| (e.clone(), BigRational::new(BigInt::from(n), den.clone())),
                )))
            }
        }
    }

    fn add(&self, a: &Enc, b: &Enc) -> Enc {
        let mut out = [0i128; DIM];
        match self {
            Codec::Finite { p } => out[0] = (a[0] + b[0]).rem_euclid(*p as i128),
            _ => {
                for k in 0..DIM {
                    out[k] = a[k] + b[k];
                }
            }
        }
        out
    }

    fn sub(&self, a: &Enc, b: &Enc) -> Enc {
        let mut out = [0i128; DIM];
        match self {
            Codec::Finite { p } => out[0] = (a[0] - b[0]).rem_euclid(*p as i128),
            _ => {
                for k in 0..DIM {
                    out[k] = a[k] - b[k];
                }
            }
        }
        out
    }

    fn times(&self, a: &Enc, k: i64) -> Enc {
        let mut out = [0i128; DIM];
        match self {
            Codec::Finite { p } => out[0] = (a[0] * k as i128).rem_euclid(*p as i128),
            _ => {
                for i in 0..DIM {
                    out[i] = a[i] * k as i128;
                }
            }
        }
        out
    }

    fn classes(&self) -> usize {
        match self {
            Codec::Rational { prime: Some(_), .. } => 128,
            Codec::Series { exps, .. } => exps.len().max(1),
            _ => 1,
        }
    }

    /// Magnitude class of a nonzero value; `None` for zero.
    fn class(&self, v: &Enc) -> Option<usize> {
        match self {
            Codec::Rational { prime: Some(p), .. } => {
                let mut n = v[0];
                if n == 0 {
                    return None;
                }
                let p = *p as i128;
                let mut k = 0;
                while n % p == 0 {
                    n /= p;
                    k += 1;
                }
                Some(k)
            }
            Codec::Series { .. } => v.iter().position(|&x| x != 0),
            _ => (v[0] != 0).then_some(0),
        }
    }

    fn class_magnitude(&self, class: usize) -> Magnitude {
        match self {
            Codec::Rational {
                prime: Some(_),
                vp_den,
                ..
            } => Magnitude::Positive(BigRational::from_integer(BigInt::from(
                class as i64 - vp_den,
            ))),
            Codec::Series { exps, .. } => Magnitude::Positive(exps[class].clone()),
            _ => Magnitude::one(),
        }
    }
}

/// Exact ranks of every `|c|·d(x_i, x_j)` the search can produce.
struct CostTable {
    /// `rank[pair * classes + class]`; rank 0 is the zero cost.
    rank: Vec<u32>,
    classes: usize,
    /// Representative cost per rank.
    by_rank: Vec<Cost>,
}

impl CostTable {
    fn new(codec: &Codec, prep: &Prepared, pairs: &[(usize, usize)], base: &BigRational) -> Self {
        let classes = codec.classes();
        let mut items: Vec<(Cost, f64, usize)> = Vec::with_capacity(pairs.len() * classes + 1);
        items.push((Cost::zero(base), f64::NEG_INFINITY, usize::MAX));
        for (p, &(i, j)) in pairs.iter().enumerate() {
            for c in 0..classes {
                let cost =
                    Cost::from_magnitude(&codec.class_magnitude(c), prep.space.dist(i, j), base);
                let approx = cost.log2_approx();
                items.push((cost, approx, p * classes + c));
            }
        }
        // floats decide clear cases; near-ties go to the exact comparison
        let cmp = |a: &(Cost, f64, usize), b: &(Cost, f64, usize)| -> Ordering {
            let (x, y) = (a.1, b.1);
            if x.is_finite() && y.is_finite() && (x - y).abs() > 1e-6 {
                return x.partial_cmp(&y).expect("finite");
            }
            a.0.cmp(&b.0)
        };
        items.sort_by(cmp);
        let mut rank = vec![0u32; pairs.len() * classes];
        let mut by_rank: Vec<Cost> = Vec::new();
        for (cost, _, slot) in items {
            if by_rank.last() != Some(&cost) {
                by_rank.push(cost);
            }
            if slot != usize::MAX {
                rank[slot] = (by_rank.len() - 1) as u32;
            }
        }
        CostTable {
            rank,
            classes,
            by_rank,
        }
    }

    fn of(&self, pair: usize, class: Option<usize>) -> u32 {
        match class {
            None => 0,
            Some(c) => self.rank[pair * self.classes + c],
        }
    }
}

struct Search<'a> {
    codec: &'a Codec,
    table: &'a CostTable,
    m: usize,
    /// `pair_index[i][j]` for `i < j`.
    pair_index: Vec<Vec<usize>>,
    coeffs: Vec<Enc>,
    /// Candidate values per pair, sorted by cost rank: `(value, rank)`.
    candidates: Vec<Vec<(Enc, u32)>>,
    values: Vec<Enc>,
    best: u32,
    best_plan: Vec<Enc>,
    prune: bool,
    /// Rank no plan can beat; the pruned search stops once it is reached.
    floor: u32,
    done: bool,
}

impl Search<'_> {
    /// Free entries of row `i` are `(i, j)` for `j ≥ i+2`, visited in order.
    fn row(&mut self, i: usize, j: usize, cur: u32, visit: &mut dyn FnMut(&[Enc], u32)) {
        if self.done {
            return;
        }
        if i + 1 >= self.m {
            if cur < self.best || !self.prune {
                if cur < self.best {
                    self.best = cur;
                    self.best_plan = self.values.clone();
                    self.done = self.prune && cur <= self.floor;
                }
                visit(&self.values, cur);
            }
            return;
        }
        if j < self.m {
            let pair = self.pair_index[i][j];
            for k in 0..self.candidates[pair].len() {
                let (v, r) = self.candidates[pair][k];
                if self.done || (self.prune && r >= self.best) {
                    break;
                }
                self.values[pair] = v;
                self.row(i, j + 1, cur.max(r), visit);
            }
            return;
        }
        // c_{i,i+1} = λ_i + Σ_{j<i} c_ji - Σ_{j>i+1} c_ij
        let mut v = self.coeffs[i];
        for h in 0..i {
            v = self.codec.add(&v, &self.values[self.pair_index[h][i]]);
        }
        for h in (i + 2)..self.m {
            v = self.codec.sub(&v, &self.values[self.pair_index[i][h]]);
        }
        let pair = self.pair_index[i][i + 1];
        let r = self.table.of(pair, self.codec.class(&v));
        if self.prune && r >= self.best {
            return;
        }
        self.values[pair] = v;
        self.row(i + 1, i + 3, cur.max(r), visit);
    }
}

struct OracleSetup {
    prep: Prepared,
    codec: Codec,
    pairs: Vec<(usize, usize)>,
    table: CostTable,
    coeffs: Vec<Enc>,
    candidates: Vec<Vec<(Enc, u32)>>,
}

fn setup(
    space: &UltraSpace,
    u: &FreeVector,
    field: &FieldSpec,
    budget: u32,
    options: &ExtensionOptions,
) -> Result<OracleSetup, OracleError> {
    if budget < 1 {
        return Err(OracleError::ZeroBudget);
    }
    check_field(u, field)?;
    let prep = prepare(space, u, options, true)?;
    let m = prep.space.len();
    if m > ORACLE_MAX_SUPPORT {
        return Err(OracleError::TooLarge(m));
    }
    let codec = Codec::new(field, &prep.coeffs)?;
    let coeffs: Vec<Enc> = prep
        .coeffs
        .iter()
        .map(|c| codec.encode(c))
        .collect::<Result<_, _>>()?;
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let table = CostTable::new(&codec, &prep, &pairs, field.base());

    // {Σ m_k λ_k : |m_k| ≤ M} ∪ {0} over the normal-form coefficients
    let mut span: Vec<Enc> = vec![[0; DIM]];
    for g in &coeffs[..prep.n] {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for s in &span {
            for k in -(budget as i64)..=(budget as i64) {
                let v = codec.add(s, &codec.times(g, k));
                if seen.insert(v) {
                    next.push(v);
                }
            }
        }
        span = next;
    }
    let candidates = pairs
        .iter()
        .enumerate()
        .map(|(p, _)| {
            let mut c: Vec<(Enc, u32)> = span
                .iter()
                .map(|v| (*v, table.of(p, codec.class(v))))
                .collect();
            c.sort_by_key(|&(v, r)| (r, v));
            c
        })
        .collect();
    Ok(OracleSetup {
        prep,
        codec,
        pairs,
        table,
        coeffs,
        candidates,
    })
}

/// For every set `S` of points the entries crossing `S` carry `λ(S)`, so
/// some crossing entry has `|c| ≥ |λ(S)|` and every plan costs at least
/// `|λ(S)|` times the shortest crossing distance.
fn cut_bound(setup: &OracleSetup) -> u32 {
    let m = setup.prep.space.len();
    let codec = &setup.codec;
    let mut floor = 0;
    for mask in 1u32..(1 << m) - 1 {
        let inside = |i: usize| mask & (1 << i) != 0;
        let sum = (0..m)
            .filter(|&i| inside(i))
            .fold([0; DIM], |acc, i| codec.add(&acc, &setup.coeffs[i]));
        let Some(class) = codec.class(&sum) else {
            continue;
        };
        let cheapest = setup
            .pairs
            .iter()
            .enumerate()
            .filter(|(_, &(i, j))| inside(i) != inside(j))
            .map(|(p, _)| setup.table.of(p, Some(class)))
            .min()
            .unwrap_or(0);
        floor = floor.max(cheapest);
    }
    floor
}

fn run(setup: &OracleSetup, prune: bool, visit: &mut dyn FnMut(&[Enc], u32)) -> (u32, Vec<Enc>) {
    let m = setup.prep.space.len();
    let mut pair_index = vec![vec![usize::MAX; m]; m];
    for (p, &(i, j)) in setup.pairs.iter().enumerate() {
        pair_index[i][j] = p;
    }
    let mut search = Search {
        codec: &setup.codec,
        table: &setup.table,
        m,
        pair_index,
        coeffs: setup.coeffs.clone(),
        candidates: setup.candidates.clone(),
        values: vec![[0; DIM]; setup.pairs.len()],
        best: u32::MAX,
        best_plan: Vec::new(),
        prune,
        floor: cut_bound(setup),
        done: false,
    };
    search.row(0, 2, 0, visit);
    (search.best, search.best_plan)
}

fn decode_plan(setup: &OracleSetup, values: &[Enc]) -> Vec<(String, String, Scalar)> {
    let labels = setup.prep.labels();
    setup
        .pairs
        .iter()
        .zip(values)
        .filter(|(_, v)| v.iter().any(|&x| x != 0))
        .map(|(&(i, j), v)| (labels[i].clone(), labels[j].clone(), setup.codec.decode(v)))
        .collect()
}

/// Cheapest plan over the candidate set, with its entries.
///
/// Always an upper bound for the norm; equal to it whenever some optimal
/// plan has all free entries among the candidates.
pub fn na_norm_bruteforce(
    space: &UltraSpace,
    u: &FreeVector,
    field: &FieldSpec,
    budget: u32,
    options: &ExtensionOptions,
) -> Result<(Cost, Vec<(String, String, Scalar)>), OracleError> {
    if u.is_zero() {
        check_field(u, field)?;
        return Ok((Cost::zero(field.base()), Vec::new()));
    }
    let setup = setup(space, u, field, budget, options)?;
    if setup.prep.space.len() < 2 {
        return Ok((Cost::zero(field.base()), Vec::new()));
    }
    let (best, plan) = run(&setup, true, &mut |_, _| {});
    Ok((
        setup.table.by_rank[best as usize].clone(),
        decode_plan(&setup, &plan),
    ))
}

/// Calls `visit` on every feasible plan of the enumeration, without pruning.
/// Returns the number of plans visited.
pub fn for_each_plan(
    space: &UltraSpace,
    u: &FreeVector,
    field: &FieldSpec,
    budget: u32,
    options: &ExtensionOptions,
    visit: &mut dyn FnMut(&[(String, String, Scalar)], &Cost),
) -> Result<u64, OracleError> {
    let setup = setup(space, u, field, budget, options)?;
    if setup.prep.space.len() < 2 {
        return Ok(0);
    }
    let mut count = 0u64;
    run(&setup, false, &mut |values, rank| {
        count += 1;
        visit(
            &decode_plan(&setup, values),
            &setup.table.by_rank[rank as usize],
        );
    });
    Ok(count)
}
