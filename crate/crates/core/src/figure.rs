//! Point sets for plotting fibers: discretized circles of the two-point map
//! and of the axis-tube map.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::sampling::BoxBounds;
use crate::urysohn::{fiber_geometry, FiberShape};

/// Number of vertices used for each discretized circle.
pub const CIRCLE_POINTS: usize = 256;

/// One plotted fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureCurve {
    pub index: usize,
    pub label: String,
    pub points: Vec<Point>,
}

impl FigureCurve {
    /// `fiber_003.csv` for index 3.
    pub fn file_name(&self) -> String {
        format!("fiber_{:03}.csv", self.index)
    }
}

fn circle(center: &[f64], radius: f64, plane: (usize, usize), dim: usize) -> Vec<Point> {
    (0..CIRCLE_POINTS)
        .map(|i| {
            let (s, c) = (TAU * i as f64 / CIRCLE_POINTS as f64).sin_cos();
            let mut x = vec![0.0; dim];
            x[..center.len()].copy_from_slice(center);
            x[plane.0] += radius * c;
            x[plane.1] += radius * s;
            Point::from_raw(x)
        })
        .collect()
}

/// Clips the line `point + s·direction` to a 2-D box (Liang–Barsky).
fn clip_line(point: &[f64], direction: &[f64], plot: &BoxBounds) -> Option<(Point, Point)> {
    let (mut s_min, mut s_max) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..2 {
        if direction[k] == 0.0 {
            if point[k] < plot.lo[k] || point[k] > plot.hi[k] {
                return None;
            }
            continue;
        }
        let s1 = (plot.lo[k] - point[k]) / direction[k];
        let s2 = (plot.hi[k] - point[k]) / direction[k];
        s_min = s_min.max(s1.min(s2));
        s_max = s_max.min(s1.max(s2));
    }
    if s_min > s_max {
        return None;
    }
    let at = |s: f64| {
        Point::from_raw(vec![
            point[0] + s * direction[0],
            point[1] + s * direction[1],
        ])
    };
    Some((at(s_min), at(s_max)))
}

/// Evenly spaced levels `i/(count+1)`, `i = 1..=count`.
pub fn even_levels(count: usize) -> Vec<f64> {
    (1..=count).map(|i| i as f64 / (count + 1) as f64).collect()
}

/// Fibers of the planar two-point map at the given levels.
///
/// Sphere levels become circles of [`CIRCLE_POINTS`] vertices; the level ½
/// becomes the two endpoints of the bisector clipped to `plot` (no points if
/// the bisector misses the box).
pub fn urysohn_figure(
    a: &Point,
    b: &Point,
    levels: &[f64],
    plot: &BoxBounds,
) -> Result<Vec<FigureCurve>> {
    if a.dim() != 2 || plot.dim() != 2 {
        return Err(Error::input(
            "figure data is planar: a, b and the plot box must be 2-D",
        ));
    }
    levels
        .iter()
        .enumerate()
        .map(|(index, &t)| {
            let fiber = fiber_geometry(a, b, t)?;
            let points = match fiber.shape {
                FiberShape::Sphere { center, radius } => circle(center.coords(), radius, (0, 1), 2),
                FiberShape::Hyperplane { point, normal } => {
                    let along = [-normal[1], normal[0]];
                    clip_line(point.coords(), &along, plot)
                        .map(|(p, q)| vec![p, q])
                        .unwrap_or_default()
                }
            };
            Ok(FigureCurve {
                index,
                label: format!("t={t}"),
                points,
            })
        })
        .collect()
}

/// Fibers of the axis-tube map in ℝⁿ over the levels `(x₁, r)`: circles of
/// radius `r` about the x₁ axis, drawn in the `(x₂, x₃)` plane.
pub fn axis_tube_figure(n: usize, levels: &[(f64, f64)]) -> Result<Vec<FigureCurve>> {
    if n < 3 {
        return Err(Error::input("axis-tube circles need n ≥ 3"));
    }
    levels
        .iter()
        .enumerate()
        .map(|(index, &(x1, r))| {
            if !(x1.is_finite() && r.is_finite() && r >= 0.0) {
                return Err(Error::input(format!("invalid axis-tube level ({x1}, {r})")));
            }
            Ok(FigureCurve {
                index,
                label: format!("x1={x1},r={r}"),
                points: circle(&[x1], r, (1, 2), n),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dist;
    use crate::maps::{axis_tube_value, urysohn_value};

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn nine_urysohn_levels() {
        let (a, b) = (p(&[0.0, 0.0]), p(&[4.0, 0.0]));
        let plot = BoxBounds::cube(2, -10.0, 14.0).unwrap();
        let curves = urysohn_figure(&a, &b, &even_levels(9), &plot).unwrap();
        assert_eq!(curves.len(), 9);
        for c in &curves {
            let t = (c.index + 1) as f64 / 10.0;
            if c.index == 4 {
                assert_eq!(c.points, vec![p(&[2.0, -10.0]), p(&[2.0, 14.0])]);
            } else {
                assert_eq!(c.points.len(), CIRCLE_POINTS);
                for x in &c.points {
                    assert!((urysohn_value(&a, &b, x).unwrap() - t).abs() < 1e-12);
                }
            }
        }
        assert_eq!(curves[3].file_name(), "fiber_003.csv");
    }

    #[test]
    fn oblique_bisector_clipping() {
        let (a, b) = (p(&[0.0, 0.0]), p(&[2.0, 2.0]));
        let plot = BoxBounds::cube(2, -1.0, 3.0).unwrap();
        let c = &urysohn_figure(&a, &b, &[0.5], &plot).unwrap()[0];
        // bisector x + y = 2 meets the box at (3, −1) and (−1, 3)
        assert_eq!(c.points.len(), 2);
        let ends: Vec<&[f64]> = c.points.iter().map(|q| q.coords()).collect();
        assert!(dist(ends[0], &[3.0, -1.0]) < 1e-12 || dist(ends[0], &[-1.0, 3.0]) < 1e-12);
        assert!(dist(ends[0], ends[1]) > 5.6);

        let away = BoxBounds::cube(2, 10.0, 11.0).unwrap();
        assert!(urysohn_figure(&a, &b, &[0.5], &away).unwrap()[0]
            .points
            .is_empty());
    }

    #[test]
    fn axis_tube_circles() {
        let curves = axis_tube_figure(3, &[(-5.0, 1.0), (0.0, 2.0), (5.0, 0.5)]).unwrap();
        for (c, (x1, r)) in curves.iter().zip([(-5.0, 1.0), (0.0, 2.0), (5.0, 0.5)]) {
            assert_eq!(c.points.len(), CIRCLE_POINTS);
            for x in &c.points {
                let y = axis_tube_value(x, 2).unwrap();
                assert!((y.coords()[0] - x1).abs() < 1e-12);
                assert!((y.coords()[1] - r).abs() < 1e-12);
            }
        }
        assert!(axis_tube_figure(2, &[(0.0, 1.0)]).is_err());
    }
}
