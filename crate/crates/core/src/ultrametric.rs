//! Ultra-(pseudo)metric spaces on labelled points and their merge trees.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::format_rational;

/// Label of the adjoined zero point.
pub const ZERO_LABEL: &str = "0̄";

/// A triple `(x, y, z)` with `d(x,z) > max(d(x,y), d(y,z))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub x: String,
    pub y: String,
    pub z: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("metric has no points")]
    Empty,
    #[error("matrix is not square: expected {expected} columns in row {row}, found {found}")]
    NotSquare {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("negative distance between {0} and {1}")]
    Negative(String, String),
    #[error("nonzero self-distance at {0}")]
    Diagonal(String),
    #[error("asymmetric distances between {0} and {1}")]
    Asymmetric(String, String),
    #[error("distinct points {0} and {1} at distance zero (pseudometric not allowed)")]
    ZeroDistance(String, String),
    #[error("duplicate point label {0}")]
    DuplicateLabel(String),
    #[error("point label {0} is reserved")]
    ReservedLabel(String),
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("space already carries a zero point")]
    AlreadyExtended,
    #[error(
        "strong triangle inequality fails for {} triple(s); first: d({x},{z}) > max(d({x},{y}), d({y},{z})) at {}",
        .0.len(), .0[0], x = .0[0].x, y = .0[0].y, z = .0[0].z
    )]
    Ultrametric(Vec<Violation>),
    #[error(
        "triangle inequality fails for {} triple(s); first: d({x},{z}) > d({x},{y}) + d({y},{z})",
        .0.len(), x = .0[0].x, y = .0[0].y, z = .0[0].z
    )]
    Triangle(Vec<Violation>),
    #[error("malformed dendrogram: {0}")]
    Dendrogram(String),
}

/// Checks shape, symmetry and sign of a distance matrix.
pub(crate) fn check_matrix(
    points: &[String],
    dist: &[Vec<BigRational>],
    pseudometric_allowed: bool,
) -> Result<(), MetricError> {
    let n = points.len();
    if n == 0 {
        return Err(MetricError::Empty);
    }
    let mut seen = HashMap::new();
    for p in points {
        if p == ZERO_LABEL {
            return Err(MetricError::ReservedLabel(p.clone()));
        }
        if seen.insert(p.as_str(), ()).is_some() {
            return Err(MetricError::DuplicateLabel(p.clone()));
        }
    }
    if dist.len() != n {
        return Err(MetricError::NotSquare {
            row: dist.len(),
            expected: n,
            found: 0,
        });
    }
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(MetricError::NotSquare {
                row: i,
                expected: n,
                found: row.len(),
            });
        }
    }
    for i in 0..n {
        if !dist[i][i].is_zero() {
            return Err(MetricError::Diagonal(points[i].clone()));
        }
        for j in 0..n {
            if dist[i][j].is_negative() {
                return Err(MetricError::Negative(points[i].clone(), points[j].clone()));
            }
            if dist[i][j] != dist[j][i] {
                return Err(MetricError::Asymmetric(
                    points[i].clone(),
                    points[j].clone(),
                ));
            }
            if i != j && !pseudometric_allowed && dist[i][j].is_zero() {
                return Err(MetricError::ZeroDistance(
                    points[i].clone(),
                    points[j].clone(),
                ));
            }
        }
    }
    Ok(())
}

/// A validated ultra-(pseudo)metric on labelled points, possibly extended by
/// the zero point [`ZERO_LABEL`] as its last point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UltraSpace {
    points: Vec<String>,
    dist: Vec<Vec<BigRational>>,
    pseudometric_allowed: bool,
    has_zero_point: bool,
}

/// Validates `dist` and builds the space; every violating triple is reported.
pub fn validate_ultrametric(
    points: Vec<String>,
    dist: Vec<Vec<BigRational>>,
    pseudometric_allowed: bool,
) -> Result<UltraSpace, MetricError> {
    check_matrix(&points, &dist, pseudometric_allowed)?;
    let violations = ultrametric_violations(&points, &dist);
    if !violations.is_empty() {
        return Err(MetricError::Ultrametric(violations));
    }
    Ok(UltraSpace {
        points,
        dist,
        pseudometric_allowed,
        has_zero_point: false,
    })
}

fn ultrametric_violations(points: &[String], dist: &[Vec<BigRational>]) -> Vec<Violation> {
    let n = points.len();
    let mut out = Vec::new();
    for x in 0..n {
        for z in (x + 1)..n {
            for y in 0..n {
                if y == x || y == z {
                    continue;
                }
                if dist[x][z] > dist[x][y] && dist[x][z] > dist[y][z] {
                    out.push(Violation {
                        x: points[x].clone(),
                        y: points[y].clone(),
                        z: points[z].clone(),
                    });
                }
            }
        }
    }
    out
}

impl UltraSpace {
    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> &BigRational {
        &self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<BigRational>] {
        &self.dist
    }

    pub fn pseudometric_allowed(&self) -> bool {
        self.pseudometric_allowed
    }

    pub fn has_zero_point(&self) -> bool {
        self.has_zero_point
    }

    /// Index of the zero point, always the last one when present.
    pub fn zero_index(&self) -> Option<usize> {
        self.has_zero_point.then(|| self.points.len() - 1)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.points.iter().position(|p| p == label)
    }

    pub fn distance(&self, a: &str, b: &str) -> Result<&BigRational, MetricError> {
        let i = self
            .index_of(a)
            .ok_or_else(|| MetricError::UnknownPoint(a.to_string()))?;
        let j = self
            .index_of(b)
            .ok_or_else(|| MetricError::UnknownPoint(b.to_string()))?;
        Ok(&self.dist[i][j])
    }

    pub fn diameter(&self) -> BigRational {
        self.dist
            .iter()
            .flat_map(|row| row.iter())
            .max()
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Appends `0̄` with `d(x, 0̄) = max(d(x, basepoint), 1)`.
    pub fn extend_with_zero(&self, basepoint: &str) -> Result<UltraSpace, MetricError> {
        if self.has_zero_point {
            return Err(MetricError::AlreadyExtended);
        }
        let b = self
            .index_of(basepoint)
            .ok_or_else(|| MetricError::UnknownPoint(basepoint.to_string()))?;
        let one = BigRational::one();
        let zero_row = (0..self.len())
            .map(|x| self.dist[x][b].clone().max(one.clone()))
            .collect();
        self.extend_with_zero_distances(zero_row)
    }

    /// Appends `0̄` with explicitly given distances, one per point.
    pub fn extend_with_zero_distances(
        &self,
        zero_row: Vec<BigRational>,
    ) -> Result<UltraSpace, MetricError> {
        if self.has_zero_point {
            return Err(MetricError::AlreadyExtended);
        }
        if zero_row.len() != self.len() {
            return Err(MetricError::NotSquare {
                row: self.len(),
                expected: self.len() + 1,
                found: zero_row.len() + 1,
            });
        }
        let mut points = self.points.clone();
        let mut dist = self.dist.clone();
        for (row, d) in dist.iter_mut().zip(&zero_row) {
            row.push(d.clone());
        }
        let mut last = zero_row;
        last.push(BigRational::zero());
        dist.push(last);
        points.push(ZERO_LABEL.to_string());
        let n = points.len();
        for x in 0..n - 1 {
            if !dist[x][n - 1].is_positive() {
                return Err(MetricError::ZeroDistance(
                    points[x].clone(),
                    ZERO_LABEL.into(),
                ));
            }
        }
        // the new point can only create violations in triples that contain it
        let violations: Vec<_> = ultrametric_violations(&points, &dist)
            .into_iter()
            .filter(|v| v.x == ZERO_LABEL || v.y == ZERO_LABEL || v.z == ZERO_LABEL)
            .collect();
        if !violations.is_empty() {
            return Err(MetricError::Ultrametric(violations));
        }
        Ok(UltraSpace {
            points,
            dist,
            pseudometric_allowed: self.pseudometric_allowed,
            has_zero_point: true,
        })
    }

    /// Subspace on the given indices, in the given order.
    pub fn restrict(&self, indices: &[usize]) -> UltraSpace {
        let points = indices.iter().map(|&i| self.points[i].clone()).collect();
        let dist = indices
            .iter()
            .map(|&i| indices.iter().map(|&j| self.dist[i][j].clone()).collect())
            .collect();
        UltraSpace {
            points,
            dist,
            pseudometric_allowed: self.pseudometric_allowed,
            has_zero_point: self.has_zero_point && indices.last() == Some(&(self.len() - 1)),
        }
    }

    /// Same space with every distance multiplied by `k > 0`.
    pub fn scaled(&self, k: &BigRational) -> UltraSpace {
        assert!(k.is_positive());
        UltraSpace {
            points: self.points.clone(),
            dist: self
                .dist
                .iter()
                .map(|row| row.iter().map(|d| d * k).collect())
                .collect(),
            pseudometric_allowed: self.pseudometric_allowed,
            has_zero_point: self.has_zero_point,
        }
    }

    /// Builds the space from a list of merges `(height, members)`.
    ///
    /// Each merge names the full member set of the cluster formed at that
    /// height; `d(x, y)` is the lowest height of a merge containing both.
    pub fn from_merges(
        points: Vec<String>,
        merges: &[(BigRational, Vec<String>)],
        pseudometric_allowed: bool,
    ) -> Result<UltraSpace, MetricError> {
        let n = points.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        let index: HashMap<String, usize> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let mut dist: Vec<Vec<Option<BigRational>>> = vec![vec![None; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = Some(BigRational::zero());
        }
        let mut order: Vec<&(BigRational, Vec<String>)> = merges.iter().collect();
        order.sort_by(|a, b| a.0.cmp(&b.0));
        for (h, members) in order {
            if h.is_negative() {
                return Err(MetricError::Dendrogram(format!(
                    "negative height {}",
                    format_rational(h)
                )));
            }
            let mut idx = Vec::with_capacity(members.len());
            for m in members {
                idx.push(
                    *index
                        .get(m)
                        .ok_or_else(|| MetricError::UnknownPoint(m.clone()))?,
                );
            }
            for &a in &idx {
                for &b in &idx {
                    if dist[a][b].is_none() {
                        dist[a][b] = Some(h.clone());
                    }
                }
            }
        }
        let mut full = Vec::with_capacity(n);
        for (i, row) in dist.into_iter().enumerate() {
            let mut r = Vec::with_capacity(n);
            for (j, d) in row.into_iter().enumerate() {
                r.push(d.ok_or_else(|| {
                    MetricError::Dendrogram(format!(
                        "{} and {} are never merged",
                        points[i], points[j]
                    ))
                })?);
            }
            full.push(r);
        }
        let space = validate_ultrametric(points, full, pseudometric_allowed)
            .map_err(|e| MetricError::Dendrogram(format!("merges are not nested: {e}")))?;
        // Round trip: every declared merge must be a cluster of the result.
        let dendro = build_dendrogram(&space);
        for (h, members) in merges {
            let mut idx: Vec<usize> = members.iter().map(|m| index[m]).collect();
            idx.sort_unstable();
            idx.dedup();
            if idx.len() < 2 {
                continue;
            }
            let found = dendro
                .nodes()
                .iter()
                .any(|node| node.leaves == idx && &node.height == h);
            if !found {
                return Err(MetricError::Dendrogram(format!(
                    "merge at height {} is not a cluster of the induced ultrametric",
                    format_rational(h)
                )));
            }
        }
        Ok(space)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DendroNode {
    /// Merge height; zero for leaves.
    pub height: BigRational,
    /// Child node indices ordered by smallest point index.
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    /// Point indices below this node, sorted.
    pub leaves: Vec<usize>,
}

impl DendroNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Single-linkage merge tree. Nodes `0..n` are the leaves (node `i` is
/// point `i`); internal nodes follow in order of creation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dendrogram {
    nodes: Vec<DendroNode>,
    root: usize,
    n_points: usize,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    // keeps the smaller root so roots stay the smallest member index
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Merges all clusters joined at each distinct distance, bottom-up.
pub fn build_dendrogram(space: &UltraSpace) -> Dendrogram {
    let n = space.len();
    let mut nodes: Vec<DendroNode> = (0..n)
        .map(|i| DendroNode {
            height: BigRational::zero(),
            children: Vec::new(),
            parent: None,
            leaves: vec![i],
        })
        .collect();
    let mut by_height: BTreeMap<&BigRational, Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            by_height.entry(space.dist(i, j)).or_default().push((i, j));
        }
    }
    let mut uf = UnionFind::new(n);
    // union-find root (smallest point index) -> current top node
    let mut top: Vec<usize> = (0..n).collect();
    for (h, pairs) in by_height {
        let mut level = UnionFind::new(n);
        for &(i, j) in &pairs {
            let (ri, rj) = (uf.find(i), uf.find(j));
            level.union(ri, rj);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for r in 0..n {
            if uf.find(r) == r {
                groups.entry(level.find(r)).or_default().push(r);
            }
        }
        for (_, roots) in groups {
            if roots.len() < 2 {
                continue;
            }
            let id = nodes.len();
            let children: Vec<usize> = roots.iter().map(|&r| top[r]).collect();
            let mut leaves: Vec<usize> = children
                .iter()
                .flat_map(|&c| nodes[c].leaves.iter().copied())
                .collect();
            leaves.sort_unstable();
            for &c in &children {
                nodes[c].parent = Some(id);
            }
            nodes.push(DendroNode {
                height: h.clone(),
                children,
                parent: None,
                leaves,
            });
            for &r in &roots[1..] {
                uf.union(roots[0], r);
            }
            top[roots[0]] = id;
        }
    }
    let root = top[uf.find(0)];
    Dendrogram {
        nodes,
        root,
        n_points: n,
    }
}

impl Dendrogram {
    pub fn nodes(&self) -> &[DendroNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &DendroNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Internal nodes in creation order, i.e. by nondecreasing height.
    pub fn internal_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.n_points..self.nodes.len()
    }

    pub fn lca(&self, a: usize, b: usize) -> usize {
        let mut ancestors = vec![false; self.nodes.len()];
        let mut x = Some(a);
        while let Some(id) = x {
            ancestors[id] = true;
            x = self.nodes[id].parent;
        }
        let mut y = b;
        while !ancestors[y] {
            y = self.nodes[y].parent.expect("root is a common ancestor");
        }
        y
    }

    /// `d(a, b)` recovered as the height of the lowest common ancestor.
    pub fn distance(&self, a: usize, b: usize) -> BigRational {
        if a == b {
            BigRational::zero()
        } else {
            self.nodes[self.lca(a, b)].height.clone()
        }
    }

    /// Clusters at threshold `t`: classes of `d(x, y) ≤ t`.
    pub fn clusters_at(&self, t: &BigRational) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self
            .nodes
            .iter()
            .filter(|node| {
                let fits = node.is_leaf() || &node.height <= t;
                fits && node.parent.is_none_or(|p| &self.nodes[p].height > t)
            })
            .map(|node| node.leaves.clone())
            .collect();
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn matrix(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect()
    }

    fn abc() -> UltraSpace {
        validate_ultrametric(
            labels(&["a", "b", "c"]),
            matrix(&[&[0, 1, 2], &[1, 0, 2], &[2, 2, 0]]),
            false,
        )
        .unwrap()
    }

    #[test]
    fn accepts_valid_ultrametric() {
        abc();
    }

    #[test]
    fn rejects_strong_triangle_violation() {
        let err = validate_ultrametric(
            labels(&["a", "b", "c"]),
            matrix(&[&[0, 1, 3], &[1, 0, 1], &[3, 1, 0]]),
            false,
        )
        .unwrap_err();
        match err {
            MetricError::Ultrametric(v) => {
                assert_eq!(
                    v,
                    vec![Violation {
                        x: "a".into(),
                        y: "b".into(),
                        z: "c".into()
                    }]
                )
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_distance_needs_pseudometric_flag() {
        let m = matrix(&[&[0, 0], &[0, 0]]);
        assert!(matches!(
            validate_ultrametric(labels(&["a", "b"]), m.clone(), false),
            Err(MetricError::ZeroDistance(_, _))
        ));
        validate_ultrametric(labels(&["a", "b"]), m, true).unwrap();
    }

    #[test]
    fn format_errors() {
        assert!(matches!(
            validate_ultrametric(labels(&["a", "b"]), matrix(&[&[0, 1], &[2, 0]]), false),
            Err(MetricError::Asymmetric(_, _))
        ));
        assert!(matches!(
            validate_ultrametric(labels(&["a", "b"]), matrix(&[&[0, -1], &[-1, 0]]), false),
            Err(MetricError::Negative(_, _))
        ));
        assert!(matches!(
            validate_ultrametric(
                labels(&["a", ZERO_LABEL]),
                matrix(&[&[0, 1], &[1, 0]]),
                false
            ),
            Err(MetricError::ReservedLabel(_))
        ));
    }

    #[test]
    fn zero_extension() {
        let single = validate_ultrametric(labels(&["x"]), matrix(&[&[0]]), false).unwrap();
        let ext = single.extend_with_zero("x").unwrap();
        assert_eq!(ext.distance("x", ZERO_LABEL).unwrap(), &int(1));

        let half = validate_ultrametric(
            labels(&["x", "x0"]),
            vec![vec![int(0), rat(1, 2)], vec![rat(1, 2), int(0)]],
            false,
        )
        .unwrap();
        let ext = half.extend_with_zero("x0").unwrap();
        assert_eq!(ext.distance("x", ZERO_LABEL).unwrap(), &int(1));

        let far =
            validate_ultrametric(labels(&["x", "x0"]), matrix(&[&[0, 3], &[3, 0]]), false).unwrap();
        let ext = far.extend_with_zero("x0").unwrap();
        assert_eq!(ext.distance("x", ZERO_LABEL).unwrap(), &int(3));
        assert_eq!(ext.distance("x0", ZERO_LABEL).unwrap(), &int(1));
        assert_eq!(ext.zero_index(), Some(2));
        assert!(matches!(
            far.extend_with_zero("q"),
            Err(MetricError::UnknownPoint(_))
        ));
    }

    #[test]
    fn dendrogram_of_three_points() {
        let d = build_dendrogram(&abc());
        let root = d.node(d.root());
        assert_eq!(root.height, int(2));
        assert_eq!(root.children.len(), 2);
        let ab = d.node(root.children[0]);
        assert_eq!(ab.leaves, vec![0, 1]);
        assert_eq!(ab.height, int(1));
        assert_eq!(root.children[1], 2);
    }

    #[test]
    fn equilateral_has_one_internal_node() {
        let s = validate_ultrametric(
            labels(&["a", "b", "c", "d"]),
            matrix(&[&[0, 5, 5, 5], &[5, 0, 5, 5], &[5, 5, 0, 5], &[5, 5, 5, 0]]),
            false,
        )
        .unwrap();
        let d = build_dendrogram(&s);
        assert_eq!(d.internal_nodes().count(), 1);
        assert_eq!(d.node(d.root()).children, vec![0, 1, 2, 3]);
    }

    #[test]
    fn pseudometric_merges_at_zero() {
        let s =
            validate_ultrametric(labels(&["a", "b"]), matrix(&[&[0, 0], &[0, 0]]), true).unwrap();
        let d = build_dendrogram(&s);
        assert_eq!(d.node(d.root()).height, int(0));
        assert_eq!(d.node(d.root()).leaves, vec![0, 1]);
    }

    #[test]
    fn thresholds_give_ball_partitions() {
        let d = build_dendrogram(&abc());
        assert_eq!(d.clusters_at(&rat(1, 2)), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(d.clusters_at(&int(1)), vec![vec![0, 1], vec![2]]);
        assert_eq!(d.clusters_at(&int(7)), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn merges_round_trip() {
        let s = UltraSpace::from_merges(
            labels(&["a", "b", "c"]),
            &[
                (int(1), labels(&["a", "b"])),
                (int(2), labels(&["a", "b", "c"])),
            ],
            false,
        )
        .unwrap();
        assert_eq!(s, abc());
        assert!(UltraSpace::from_merges(
            labels(&["a", "b", "c"]),
            &[(int(1), labels(&["a", "b"])), (int(2), labels(&["b", "c"]))],
            false,
        )
        .is_err());
        assert!(UltraSpace::from_merges(labels(&["a", "b"]), &[], false).is_err());
    }
}
