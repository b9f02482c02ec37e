use std::f64::consts::PI;

use super::{axpy, dist, dot, norm, sub, Point};
use crate::error::{Error, Result};

/// Relative margin by which detour arcs clear the obstacle ball.
pub const ARC_MARGIN: f64 = 1e-6;

/// Maximum chord sagitta of a discretised arc, relative to the clearance.
pub const SAGITTA_FRACTION: f64 = 1e-7;

/// A piecewise-linear curve, parametrised by arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct PolylinePath {
    vertices: Vec<Point>,
    cumulative: Vec<f64>,
}

impl PolylinePath {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::input("a path needs at least 2 vertices"));
        }
        let dim = vertices[0].dim();
        let mut cumulative = Vec::with_capacity(vertices.len());
        cumulative.push(0.0);
        for (i, w) in vertices.windows(2).enumerate() {
            if w[1].dim() != dim {
                return Err(Error::input(format!(
                    "vertex {} has wrong dimension",
                    i + 1
                )));
            }
            let len = dist(w[0].coords(), w[1].coords());
            if len == 0.0 {
                return Err(Error::input(format!("vertices {i} and {} coincide", i + 1)));
            }
            cumulative.push(cumulative[i] + len);
        }
        Ok(PolylinePath {
            vertices,
            cumulative,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn start(&self) -> &Point {
        &self.vertices[0]
    }

    pub fn end(&self) -> &Point {
        self.vertices.last().expect("at least two vertices")
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().expect("at least two vertices")
    }

    /// The point at arc length `s` (clamped to `[0, length]`). The result
    /// lies on one segment of the polyline.
    pub fn point_at(&self, s: f64) -> Point {
        if !(s > 0.0) {
            return self.vertices[0].clone();
        }
        if s >= self.length() {
            return self.end().clone();
        }
        // first vertex whose cumulative length exceeds s
        let k = self.cumulative.partition_point(|&c| c <= s);
        let (s0, s1) = (self.cumulative[k - 1], self.cumulative[k]);
        let t = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        let (p, q) = (self.vertices[k - 1].coords(), self.vertices[k].coords());
        Point::from_raw(p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect())
    }

    /// Smallest distance from `target` to any point of the path.
    pub fn min_distance_to(&self, target: &Point) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| segment_distance(w[0].coords(), w[1].coords(), target.coords()))
            .fold(f64::INFINITY, f64::min)
    }
}

fn segment_distance(a: &[f64], c: &[f64], b: &[f64]) -> f64 {
    let d = sub(c, a);
    let len_sq = dot(&d, &d);
    let t = if len_sq > 0.0 {
        (dot(&sub(b, a), &d) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(&axpy(a, t, &d), b)
}

/// A path from `a` to `c` that never enters the open ball of radius
/// `clearance` around `obstacle`.
///
/// When the straight segment already stays outside the ball it is returned
/// as is. Otherwise the path runs along the tangent from `a` to a circle of
/// radius `clearance·(1 + ARC_MARGIN)` in the plane through `a`, `c` and
/// the obstacle, follows that circle, and leaves along the tangent to `c`.
/// If the three points are collinear the plane is spanned with the first
/// coordinate axis not parallel to the segment.
pub fn detour_path(a: &Point, c: &Point, obstacle: &Point, clearance: f64) -> Result<PolylinePath> {
    let dim = a.dim();
    if c.dim() != dim || obstacle.dim() != dim {
        return Err(Error::input(
            "detour endpoints and obstacle differ in dimension",
        ));
    }
    if dim < 2 {
        return Err(Error::input("detours need dimension at least 2"));
    }
    if !(clearance.is_finite() && clearance > 0.0) {
        return Err(Error::input(format!(
            "clearance must be positive, got {clearance}"
        )));
    }
    let (pa, pc, pb) = (a.coords(), c.coords(), obstacle.coords());
    let ra = dist(pa, pb);
    let rc = dist(pc, pb);
    if ra < clearance || rc < clearance {
        return Err(Error::input(format!(
            "path endpoints must lie outside the open ball (distances {ra}, {rc}, clearance {clearance})"
        )));
    }
    if pa == pc {
        return Err(Error::input("detour endpoints coincide"));
    }
    if segment_distance(pa, pc, pb) >= clearance {
        return PolylinePath::new(vec![a.clone(), c.clone()]);
    }

    // Orthonormal frame of the detour plane, centered on the obstacle.
    let e1: Vec<f64> = sub(pa, pb).iter().map(|v| v / ra).collect();
    let w = sub(pc, pb);
    let w_perp = axpy(&w, -dot(&w, &e1), &e1);
    let e2 = if norm(&w_perp) > 1e-12 * norm(&w) {
        let l = norm(&w_perp);
        w_perp.iter().map(|v| v / l).collect::<Vec<_>>()
    } else {
        let seg = sub(pc, pa);
        let seg_len = norm(&seg);
        let axis = (0..dim)
            .find(|&k| seg[k].abs() / seg_len < 1.0 - 1e-9)
            .expect("a segment in dimension ≥ 2 is not parallel to every axis");
        let mut ek = vec![0.0; dim];
        ek[axis] = 1.0;
        let v = axpy(&ek, -dot(&ek, &e1), &e1);
        let l = norm(&v);
        v.iter().map(|x| x / l).collect()
    };
    let theta_c = dot(&w, &e2).atan2(dot(&w, &e1)).clamp(0.0, PI);

    let rho = clearance * (1.0 + ARC_MARGIN);
    let tangent_angle = |r: f64| if r > rho { (rho / r).acos() } else { 0.0 };
    let arc_start = tangent_angle(ra);
    let arc_end = (theta_c - tangent_angle(rc)).max(arc_start);

    let max_step = 2.0 * (1.0 - SAGITTA_FRACTION * clearance / rho).acos() * 0.99;
    let pieces = ((arc_end - arc_start) / max_step).ceil().max(1.0) as usize;

    let to_ambient = |angle: f64| -> Point {
        let (s, co) = angle.sin_cos();
        Point::from_raw(
            pb.iter()
                .zip(&e1)
                .zip(&e2)
                .map(|((o, x), y)| o + rho * (co * x + s * y))
                .collect(),
        )
    };

    let mut vertices = Vec::with_capacity(pieces + 3);
    vertices.push(a.clone());
    for i in 0..=pieces {
        let angle = arc_start + (arc_end - arc_start) * (i as f64 / pieces as f64);
        vertices.push(to_ambient(angle));
    }
    vertices.push(c.clone());
    vertices.dedup_by(|q, p| q.coords() == p.coords());
    PolylinePath::new(vertices)
}
