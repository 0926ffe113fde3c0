use std::collections::HashMap;

use num_rational::BigRational;

use crate::rational::rational_to_f64;
use crate::ultrametric::{check_matrix, MetricError, Violation};

/// A finite (pseudo)metric space with rational distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSpace {
    points: Vec<String>,
    dist: Vec<Vec<BigRational>>,
    index: HashMap<String, usize>,
}

/// Validates symmetry, sign and the triangle inequality, listing every
/// violating triple.
pub fn validate_metric(
    points: Vec<String>,
    dist: Vec<Vec<BigRational>>,
    pseudometric_allowed: bool,
) -> Result<MetricSpace, MetricError> {
    check_matrix(&points, &dist, pseudometric_allowed)?;
    let n = points.len();
    let mut bad = Vec::new();
    for x in 0..n {
        for z in (x + 1)..n {
            for y in 0..n {
                if y != x && y != z && dist[x][z] > &dist[x][y] + &dist[y][z] {
                    bad.push(Violation {
                        x: points[x].clone(),
                        y: points[y].clone(),
                        z: points[z].clone(),
                    });
                }
            }
        }
    }
    if !bad.is_empty() {
        return Err(MetricError::Triangle(bad));
    }
    let index = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    Ok(MetricSpace {
        points,
        dist,
        index,
    })
}

impl MetricSpace {
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

    pub fn dist_f64(&self, i: usize, j: usize) -> f64 {
        rational_to_f64(&self.dist[i][j])
    }

    pub fn matrix(&self) -> &[Vec<BigRational>] {
        &self.dist
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
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

    pub fn restrict(&self, indices: &[usize]) -> MetricSpace {
        let points: Vec<String> = indices.iter().map(|&i| self.points[i].clone()).collect();
        let dist = indices
            .iter()
            .map(|&i| indices.iter().map(|&j| self.dist[i][j].clone()).collect())
            .collect();
        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        MetricSpace {
            points,
            dist,
            index,
        }
    }
}

impl From<&crate::ultrametric::UltraSpace> for MetricSpace {
    fn from(u: &crate::ultrametric::UltraSpace) -> Self {
        let points = u.points().to_vec();
        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        MetricSpace {
            points,
            dist: u.matrix().to_vec(),
            index,
        }
    }
}
