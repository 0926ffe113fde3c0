use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{rational_coefficients, ClassicalError, MetricSpace};
use crate::vector::FreeVector;

/// Largest support the vertex enumeration accepts.
pub const TRANSPORT_MAX_POINTS: usize = 8;

/// Optimal cost of shipping the positive part of `u` onto its negative part,
/// by enumerating every basic feasible solution of the transportation
/// polytope (spanning trees of the complete bipartite graph).
pub fn bipartite_transport(
    space: &MetricSpace,
    u: &FreeVector,
) -> Result<BigRational, ClassicalError> {
    let coeffs = rational_coefficients(space, u)?;
    if coeffs.len() > TRANSPORT_MAX_POINTS {
        return Err(ClassicalError::TooLarge {
            found: coeffs.len(),
            limit: TRANSPORT_MAX_POINTS,
        });
    }
    let supply: Vec<_> = coeffs
        .iter()
        .filter(|(_, q)| q.is_positive())
        .cloned()
        .collect();
    let demand: Vec<_> = coeffs
        .iter()
        .filter(|(_, q)| q.is_negative())
        .map(|(i, q)| (*i, -q))
        .collect();
    if supply.is_empty() {
        return Ok(BigRational::zero());
    }
    let (k, m) = (supply.len(), demand.len());
    let cells: Vec<(usize, usize)> = (0..k).flat_map(|a| (0..m).map(move |b| (a, b))).collect();
    let mut best: Option<BigRational> = None;
    let mut chosen = Vec::with_capacity(k + m - 1);
    choose(&cells, k + m - 1, 0, &mut chosen, &mut |tree| {
        let Some(x) = solve_tree(tree, &supply, &demand) else {
            return;
        };
        let cost: BigRational = tree
            .iter()
            .zip(&x)
            .map(|(&(a, b), v)| v * space.dist(supply[a].0, demand[b].0))
            .sum();
        if best.as_ref().map_or(true, |b| cost < *b) {
            best = Some(cost);
        }
    });
    Ok(best.expect("a balanced transportation problem has a basic solution"))
}

fn choose(
    cells: &[(usize, usize)],
    size: usize,
    start: usize,
    chosen: &mut Vec<(usize, usize)>,
    visit: &mut dyn FnMut(&[(usize, usize)]),
) {
    if chosen.len() == size {
        visit(chosen);
        return;
    }
    for c in start..cells.len() {
        if cells.len() - c < size - chosen.len() {
            break;
        }
        chosen.push(cells[c]);
        choose(cells, size, c + 1, chosen, visit);
        chosen.pop();
    }
}

/// Values on the cells of a spanning tree, or `None` when the cells are not
/// a tree or some value is negative.
fn solve_tree(
    tree: &[(usize, usize)],
    supply: &[(usize, BigRational)],
    demand: &[(usize, BigRational)],
) -> Option<Vec<BigRational>> {
    let k = supply.len();
    let mut rest: Vec<BigRational> = supply
        .iter()
        .chain(demand)
        .map(|(_, q)| q.clone())
        .collect();
    let mut degree = vec![0usize; rest.len()];
    for &(a, b) in tree {
        degree[a] += 1;
        degree[k + b] += 1;
    }
    let mut value = vec![None; tree.len()];
    let mut left = tree.len();
    while left > 0 {
        let (c, leaf) = tree.iter().enumerate().find_map(|(c, &(a, b))| {
            if value[c].is_some() {
                None
            } else if degree[a] == 1 {
                Some((c, a))
            } else if degree[k + b] == 1 {
                Some((c, k + b))
            } else {
                None
            }
        })?;
        let (a, b) = tree[c];
        let other = if leaf == a { k + b } else { a };
        let v = rest[leaf].clone();
        if v.is_negative() {
            return None;
        }
        rest[other] -= &v;
        rest[leaf] = BigRational::zero();
        degree[a] -= 1;
        degree[k + b] -= 1;
        value[c] = Some(v);
        left -= 1;
    }
    if rest.iter().any(|r| !r.is_zero()) || degree.iter().any(|&d| d != 0) {
        return None;
    }
    Some(value.into_iter().map(Option::unwrap).collect())
}
