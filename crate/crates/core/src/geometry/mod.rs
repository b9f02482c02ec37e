//! Euclidean primitives: points, distances, set diameters, embedded spheres
//! and ball-avoiding detour paths.

mod io;
mod path;
mod sphere;

pub use io::{read_points_csv, read_points_json, write_points_csv, write_points_json};
pub use path::{detour_path, PolylinePath, ARC_MARGIN, SAGITTA_FRACTION};
pub use sphere::SphereEmbedding;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of ℝⁿ with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::input("point must have at least one coordinate"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::input(format!(
                "coordinate {i} is not finite ({})",
                coords[i]
            )));
        }
        Ok(Point(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// Internal constructor for values produced by arithmetic on valid points.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Point(coords)
    }

    pub fn midpoint(&self, other: &Point) -> Result<Point> {
        same_dim(self, other)?;
        Ok(Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        ))
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn same_dim(p: &Point, q: &Point) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    Ok(())
}

/// Euclidean distance between two points of the same dimension.
pub fn distance(p: &Point, q: &Point) -> Result<f64> {
    same_dim(p, q)?;
    Ok(dist(&p.0, &q.0))
}

/// The two points of a set that realise its diameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarthestPair {
    pub first_index: usize,
    pub second_index: usize,
    pub first: Point,
    pub second: Point,
    pub distance: f64,
}

/// Brute-force diameter of a finite point set.
///
/// Ties are broken towards the lexicographically lowest index pair.
pub fn farthest_pair(points: &[Point]) -> Result<FarthestPair> {
    if points.len() < 2 {
        return Err(Error::input(format!(
            "farthest pair needs at least 2 points, got {}",
            points.len()
        )));
    }
    let dim = points[0].dim();
    if let Some(bad) = points.iter().position(|p| p.dim() != dim) {
        return Err(Error::input(format!(
            "point {bad} has dimension {}, expected {dim}",
            points[bad].dim()
        )));
    }

    let (mut bi, mut bj, mut best) = (0, 1, f64::NEG_INFINITY);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = dist_sq(&points[i].0, &points[j].0);
            if d > best {
                best = d;
                bi = i;
                bj = j;
            }
        }
    }
    Ok(FarthestPair {
        first_index: bi,
        second_index: bj,
        first: points[bi].clone(),
        second: points[bj].clone(),
        distance: best.sqrt(),
    })
}

// Slice helpers shared across the crate. Callers guarantee equal lengths.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + s * b`
pub(crate) fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}
