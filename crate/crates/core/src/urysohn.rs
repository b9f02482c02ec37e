//! Fiber geometry of the two-point map `d(x,a)² / (d(x,a)² + d(x,b)²)`.
//!
//! The level `t` is the locus `d(x,a)/d(x,b) = k` with `k² = t/(1−t)`: an
//! Apollonius sphere for `t ≠ ½` and the perpendicular bisector of `ab` for
//! `t = ½`. Spheres for `t < ½` surround `a`, those for `t > ½` surround
//! `b`, and the radius grows without bound as `t → ½`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiberShape {
    Sphere { center: Point, radius: f64 },
    Hyperplane { point: Point, normal: Vec<f64> },
}

/// The exact fiber of the two-point map at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApolloniusFiber {
    pub level: f64,
    pub shape: FiberShape,
}

impl ApolloniusFiber {
    /// Diameter of the fiber; infinite for the bisector.
    pub fn diameter(&self) -> f64 {
        match &self.shape {
            FiberShape::Sphere { radius, .. } => 2.0 * radius,
            FiberShape::Hyperplane { .. } => f64::INFINITY,
        }
    }
}

fn check_pair(a: &Point, b: &Point) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::input("a and b differ in dimension"));
    }
    if a == b {
        return Err(Error::config("a and b must be distinct"));
    }
    Ok(dist(a.coords(), b.coords()))
}

fn check_level(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::input(format!("level must lie in [0, 1], got {t}")));
    }
    Ok(())
}

/// Radius of the level-`t` fiber for points at distance `separation`;
/// infinite at `t = ½`.
pub fn radius_at(separation: f64, t: f64) -> f64 {
    if t == 0.5 {
        return f64::INFINITY;
    }
    branch_radius(separation, t.min(1.0 - t))
}

/// Radius on the branch around the nearer focus, `s = min(t, 1 − t) < ½`.
fn branch_radius(separation: f64, s: f64) -> f64 {
    let k2 = s / (1.0 - s);
    k2.sqrt() * separation / (1.0 - k2)
}

/// Apollonius sphere around `near` at branch parameter `s < ½`:
/// center `(near − k²·far)/(1 − k²)`, `k² = s/(1 − s)`.
fn branch_sphere(near: &Point, far: &Point, separation: f64, s: f64) -> (Point, f64) {
    let k2 = s / (1.0 - s);
    let center = near
        .coords()
        .iter()
        .zip(far.coords())
        .map(|(p, q)| (p - k2 * q) / (1.0 - k2))
        .collect();
    (Point::from_raw(center), branch_radius(separation, s))
}

/// Closed-form fiber at level `t ∈ [0, 1]`. Levels 0 and 1 are the points
/// `a` and `b`, returned as spheres of radius 0.
///
/// Levels above ½ are evaluated as the mirror level `1 − t` with `a` and
/// `b` exchanged, which keeps the center accurate near `t = 1`.
pub fn fiber_geometry(a: &Point, b: &Point, t: f64) -> Result<ApolloniusFiber> {
    let d = check_pair(a, b)?;
    check_level(t)?;
    let shape = if t == 0.5 {
        FiberShape::Hyperplane {
            point: a.midpoint(b)?,
            normal: b
                .coords()
                .iter()
                .zip(a.coords())
                .map(|(p, q)| (p - q) / d)
                .collect(),
        }
    } else {
        let (center, radius) = if t < 0.5 {
            branch_sphere(a, b, d, t)
        } else {
            branch_sphere(b, a, d, 1.0 - t)
        };
        FiberShape::Sphere { center, radius }
    };
    Ok(ApolloniusFiber { level: t, shape })
}

/// An interval of levels with explicit endpoint membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl LevelInterval {
    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_closed {
            t >= self.lo
        } else {
            t > self.lo
        };
        let below = if self.hi_closed {
            t <= self.hi
        } else {
            t < self.hi
        };
        above && below
    }
}

/// Levels whose fibers have diameter below `M`: `[0, t_a)` around `a` and
/// `(t_b, 1]` around `b`.
///
/// The two intervals never meet, since the radius diverges at `t = ½`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallLevels {
    pub near_a: LevelInterval,
    pub near_b: LevelInterval,
    /// Distance of both endpoints from the nearer extreme level.
    pub branch: f64,
}

/// The branch parameter `s ∈ (0, ½)` with `2·radius = M`, by bisection
/// until the bracket stops shrinking.
fn threshold_branch(separation: f64, threshold: f64) -> f64 {
    let (mut small, mut large) = (0.0f64, 0.5f64);
    loop {
        let mid = 0.5 * (small + large);
        if mid <= small || mid >= large {
            return mid;
        }
        if 2.0 * branch_radius(separation, mid) < threshold {
            small = mid;
        } else {
            large = mid;
        }
    }
}

pub fn small_levels(a: &Point, b: &Point, threshold: f64) -> Result<SmallLevels> {
    let d = check_pair(a, b)?;
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::input(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let s = threshold_branch(d, threshold);
    Ok(SmallLevels {
        near_a: LevelInterval {
            lo: 0.0,
            hi: s,
            lo_closed: true,
            hi_closed: false,
        },
        near_b: LevelInterval {
            lo: 1.0 - s,
            hi: 1.0,
            lo_closed: false,
            hi_closed: true,
        },
        branch: s,
    })
}

/// Distance between the closed unions of small fibers around `a` and `b`.
///
/// The spheres of each family are nested, so each union is the ball bounded
/// by the sphere at the interval endpoint, and the gap is the distance of
/// the two centers minus both radii.
pub fn region_separation(a: &Point, b: &Point, threshold: f64) -> Result<f64> {
    let d = check_pair(a, b)?;
    let s = small_levels(a, b, threshold)?.branch;
    let (ca, ra) = branch_sphere(a, b, d, s);
    let (cb, rb) = branch_sphere(b, a, d, s);
    Ok(dist(ca.coords(), cb.coords()) - ra - rb)
}
