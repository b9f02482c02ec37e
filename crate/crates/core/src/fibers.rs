//! Approximate fibers and the level-crossing constructions for scalar maps.
//!
//! Exact preimages are numerically thin, so every fiber here is the
//! δ-relaxed set `{x : ‖f(x) − y‖ ≤ δ}` with δ carried alongside the points.
//! Sampling can certify that a fiber is *not* small (two far points in it);
//! it can never certify smallness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{detour_path, dist, farthest_pair, Point, PolylinePath};
use crate::linalg::min_norm_solve;
use crate::maps::MapEval;
use crate::sampling::{BoxBounds, Halton};

const MAX_HALVINGS: usize = 30;
const MAX_IVT_STEPS: usize = 200;

/// Sample points of a δ-approximate fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxFiber {
    pub level: Point,
    pub delta: f64,
    pub points: Vec<Point>,
    /// Identifier of the audited map, e.g. a digest of its descriptor.
    pub map_id: Option<String>,
    /// Number of seed points drawn before filtering.
    pub drawn: usize,
}

/// Parameters of [`sample_approx_fiber`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSampling {
    pub bounds: BoxBounds,
    pub samples: usize,
    pub refine_steps: usize,
    pub seed: u64,
}

fn residual<F: MapEval + ?Sized>(f: &F, x: &[f64], y: &[f64]) -> (Vec<f64>, f64) {
    let r: Vec<f64> = y.iter().zip(f.apply(x)).map(|(a, b)| a - b).collect();
    let n = if r.iter().all(|v| v.is_finite()) {
        r.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        f64::INFINITY
    };
    (r, n)
}

/// Gauss–Newton on `‖f(x) − y‖` with least-norm steps
/// `v = Jᵀ(JJᵀ)⁻¹(y − f(x))`.
fn refine_newton<F: MapEval + ?Sized>(
    f: &F,
    mut x: Vec<f64>,
    y: &[f64],
    delta: f64,
    steps: usize,
) -> Vec<f64> {
    let n = x.len();
    let (mut r, mut rn) = residual(f, &x, y);
    for _ in 0..steps {
        if rn <= 1e-3 * delta || !rn.is_finite() {
            break;
        }
        let mut jac = vec![vec![0.0; n]; y.len()];
        let mut e = vec![0.0; n];
        for k in 0..n {
            e[k] = 1.0;
            let Some(d) = f.directional_derivative(&x, &e) else {
                return x;
            };
            for (row, dv) in jac.iter_mut().zip(d) {
                row[k] = dv;
            }
            e[k] = 0.0;
        }
        let Some(step) = min_norm_solve(&jac, &r) else {
            break;
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + alpha * b).collect();
            let (tr, tn) = residual(f, &trial, y);
            if tn < rn {
                x = trial;
                r = tr;
                rn = tn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    x
}

/// Compass search on `‖f(x) − y‖` along the coordinate axes.
fn refine_compass<F: MapEval + ?Sized>(
    f: &F,
    mut x: Vec<f64>,
    y: &[f64],
    delta: f64,
    steps: usize,
    initial_step: f64,
) -> Vec<f64> {
    let (_, mut rn) = residual(f, &x, y);
    let mut h = initial_step;
    'sweep: for _ in 0..steps {
        if rn <= 1e-3 * delta || h < 1e-300 {
            break;
        }
        for k in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[k] += sign * h;
                let (_, tn) = residual(f, &trial, y);
                if tn < rn {
                    x = trial;
                    rn = tn;
                    continue 'sweep;
                }
            }
        }
        h *= 0.5;
    }
    x
}

/// Draws seeded quasi-random points in the box, refines each towards the
/// level `y`, and keeps those with `‖f(x) − y‖ ≤ δ`.
///
/// Points are processed in parallel and assembled by sample index. The
/// result may be empty: the level may lie outside the range, or every
/// refinement may have failed.
pub fn sample_approx_fiber<F: MapEval + ?Sized>(
    f: &F,
    level: &Point,
    delta: f64,
    sampling: &FiberSampling,
) -> Result<ApproxFiber> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::input(format!("delta must be positive, got {delta}")));
    }
    if level.dim() != f.codomain_dim() {
        return Err(Error::input(format!(
            "level has dimension {}, map codomain is ℝ^{}",
            level.dim(),
            f.codomain_dim()
        )));
    }
    if sampling.bounds.dim() != f.domain_dim() {
        return Err(Error::input(format!(
            "box has dimension {}, map domain is ℝ^{}",
            sampling.bounds.dim(),
            f.domain_dim()
        )));
    }
    if sampling.samples == 0 {
        return Err(Error::input("at least one sample is required"));
    }
    let halton = Halton::new(f.domain_dim(), sampling.seed)?;
    let y = level.coords();
    let smooth = f.has_derivative();
    let side = sampling
        .bounds
        .lo
        .iter()
        .zip(&sampling.bounds.hi)
        .map(|(l, h)| h - l)
        .fold(f64::INFINITY, f64::min);

    let refined: Vec<Option<Point>> = (0..sampling.samples)
        .into_par_iter()
        .map(|i| {
            let x0 = sampling.bounds.scale(&halton.point(i as u64));
            let x = if smooth {
                refine_newton(f, x0, y, delta, sampling.refine_steps)
            } else {
                refine_compass(f, x0, y, delta, sampling.refine_steps, 0.25 * side)
            };
            let (_, rn) = residual(f, &x, y);
            (rn <= delta && x.iter().all(|v| v.is_finite())).then(|| Point::from_raw(x))
        })
        .collect();

    Ok(ApproxFiber {
        level: level.clone(),
        delta,
        points: refined.into_iter().flatten().collect(),
        map_id: None,
        drawn: sampling.samples,
    })
}

/// Largest pairwise distance in the sample, a lower bound on the diameter
/// of the δ-relaxed fiber.
pub fn diameter_lower_bound(fiber: &ApproxFiber) -> Result<f64> {
    Ok(farthest_pair(&fiber.points)?.distance)
}

/// One-sided smallness verdict for a sampled fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FiberClass {
    /// Two sample points at distance at least the threshold.
    NotSmall {
        first: Point,
        second: Point,
        distance: f64,
    },
    /// The sample diameter, which is below the threshold.
    PossiblySmall { diameter_bound: f64 },
}

/// Compares the sample diameter against the threshold `M`.
pub fn classify_small(fiber: &ApproxFiber, threshold: f64) -> Result<FiberClass> {
    match fiber.points.len() {
        0 => Err(Error::input("cannot classify an empty fiber sample")),
        1 => Ok(FiberClass::PossiblySmall {
            diameter_bound: 0.0,
        }),
        _ => {
            let pair = farthest_pair(&fiber.points)?;
            if pair.distance >= threshold {
                Ok(FiberClass::NotSmall {
                    first: pair.first,
                    second: pair.second,
                    distance: pair.distance,
                })
            } else {
                Ok(FiberClass::PossiblySmall {
                    diameter_bound: pair.distance,
                })
            }
        }
    }
}

fn scalar<F: MapEval + ?Sized>(f: &F, x: &Point) -> Result<f64> {
    Ok(f.eval(x)?.coords()[0])
}

fn require_scalar<F: MapEval + ?Sized>(f: &F) -> Result<()> {
    if f.codomain_dim() != 1 {
        return Err(Error::input(format!(
            "this construction needs a real-valued map, got codomain ℝ^{}",
            f.codomain_dim()
        )));
    }
    Ok(())
}

/// A point of `path` where the scalar map crosses `level`, by bisection on
/// the arc-length parameter.
pub fn ivt_level_point<F: MapEval + ?Sized>(
    f: &F,
    path: &PolylinePath,
    level: f64,
    tol: f64,
) -> Result<Point> {
    require_scalar(f)?;
    if path.start().dim() != f.domain_dim() {
        return Err(Error::input("path and map dimensions differ"));
    }
    let g_start = scalar(f, path.start())? - level;
    let g_end = scalar(f, path.end())? - level;
    if !(g_start * g_end < 0.0) {
        return Err(Error::Precondition(format!(
            "map does not cross the level between the path ends (f − level = {g_start}, {g_end})"
        )));
    }
    let (mut lo, mut hi, mut g_lo) = (0.0, path.length(), g_start);
    let mut best: Option<(f64, Point)> = None;
    for _ in 0..MAX_IVT_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let x = path.point_at(mid);
        let g = scalar(f, &x)? - level;
        if best.as_ref().is_none_or(|(b, _)| g.abs() < *b) {
            best = Some((g.abs(), x));
        }
        if g.abs() <= tol {
            break;
        }
        if g.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    match best {
        Some((gap, x)) if gap <= tol => Ok(x),
        Some((gap, _)) => Err(Error::NoConvergence(format!(
            "bracket collapsed with |f − level| = {gap} > {tol}; the map may be discontinuous on the path"
        ))),
        None => Err(Error::NoConvergence("path too short to bisect".into())),
    }
}

/// Two far-apart points with equal values: constructive evidence that the
/// fiber through `partner` is not small.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaWitness {
    pub x: Point,
    pub partner: Point,
    pub distance: f64,
    /// `|f(x) − f(partner)|`.
    pub gap: f64,
    /// True when two of the inputs already had equal values.
    pub direct: bool,
}

fn lemma_from_ordered<F: MapEval + ?Sized>(
    f: &F,
    low: &Point,
    mid: &Point,
    high: &Point,
    threshold: f64,
    tol: f64,
) -> Result<LemmaWitness> {
    let level = scalar(f, mid)?;
    let path = detour_path(low, high, mid, threshold)?;
    let x = ivt_level_point(f, &path, level, tol)?;
    let distance = dist(x.coords(), mid.coords());
    if distance < threshold * (1.0 - 1e-9) {
        return Err(Error::NoConvergence(format!(
            "level point at distance {distance} lies inside the clearance {threshold}"
        )));
    }
    let gap = (scalar(f, &x)? - level).abs();
    Ok(LemmaWitness {
        x,
        partner: mid.clone(),
        distance,
        gap,
        direct: false,
    })
}

/// Among three points pairwise at least `M` apart, finds a point `x` with
/// `f(x) = f(b)` and `d(x, b) ≥ M`, where `b` is the point of middle value.
///
/// The path from the lowest- to the highest-valued point detours around
/// the closed ball of radius `M` about `b`, and the level `f(b)` is found
/// on it by bisection. If two inputs already share a value (within `tol`)
/// they are returned directly.
pub fn lemma_witness<F: MapEval + ?Sized>(
    f: &F,
    points: [&Point; 3],
    threshold: f64,
    tol: f64,
) -> Result<LemmaWitness> {
    require_scalar(f)?;
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::input(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    for p in points {
        if p.dim() != f.domain_dim() {
            return Err(Error::input("point and map dimensions differ"));
        }
    }
    let pairs = [(0, 1), (0, 2), (1, 2)];
    for (i, j) in pairs {
        let d = dist(points[i].coords(), points[j].coords());
        if d < threshold {
            return Err(Error::input(format!(
                "points {i} and {j} are {d} apart, less than the threshold {threshold}"
            )));
        }
    }
    let values = [
        scalar(f, points[0])?,
        scalar(f, points[1])?,
        scalar(f, points[2])?,
    ];
    for (i, j) in pairs {
        let gap = (values[i] - values[j]).abs();
        if gap <= tol {
            return Ok(LemmaWitness {
                x: points[i].clone(),
                partner: points[j].clone(),
                distance: dist(points[i].coords(), points[j].coords()),
                gap,
                direct: true,
            });
        }
    }
    let mut order = [0, 1, 2];
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    lemma_from_ordered(
        f,
        points[order[0]],
        points[order[1]],
        points[order[2]],
        threshold,
        tol,
    )
}

/// Outcome of checking a set of small-fiber points against the two-ball
/// structure forced for real-valued maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum UnionProbe {
    /// Every candidate lies within `M` of the first one.
    Single { center: Point },
    /// Every candidate lies within `M` of one of the two anchors.
    Anchored {
        first_index: usize,
        second_index: usize,
        first: Point,
        second: Point,
    },
    /// A candidate at distance `≥ M` from both anchors. With the anchors it
    /// forms a triple for [`lemma_witness`], so one of the three is not in a
    /// small fiber.
    Violation {
        index: usize,
        point: Point,
        first: Point,
        second: Point,
        witness: Option<LemmaWitness>,
    },
}

/// Checks that candidate points of small fibers lie within `M` of one of two
/// anchors, chosen as the first candidate pair (in input order) at distance
/// at least `M`.
pub fn union_probe<F: MapEval + ?Sized>(
    f: &F,
    candidates: &[Point],
    threshold: f64,
    tol: f64,
) -> Result<UnionProbe> {
    require_scalar(f)?;
    let Some(first) = candidates.first() else {
        return Err(Error::input("union probe needs at least one candidate"));
    };
    if let Some(bad) = candidates.iter().position(|p| p.dim() != f.domain_dim()) {
        return Err(Error::input(format!(
            "candidate {bad} has the wrong dimension"
        )));
    }
    let anchors = (0..candidates.len())
        .flat_map(|i| ((i + 1)..candidates.len()).map(move |j| (i, j)))
        .find(|&(i, j)| dist(candidates[i].coords(), candidates[j].coords()) >= threshold);
    let Some((ai, bi)) = anchors else {
        return Ok(UnionProbe::Single {
            center: first.clone(),
        });
    };
    let (a, b) = (&candidates[ai], &candidates[bi]);
    for (index, x) in candidates.iter().enumerate() {
        if dist(x.coords(), a.coords()) >= threshold && dist(x.coords(), b.coords()) >= threshold {
            let witness = lemma_witness(f, [a, b, x], threshold, tol).ok();
            return Ok(UnionProbe::Violation {
                index,
                point: x.clone(),
                first: a.clone(),
                second: b.clone(),
                witness,
            });
        }
    }
    Ok(UnionProbe::Anchored {
        first_index: ai,
        second_index: bi,
        first: a.clone(),
        second: b.clone(),
    })
}

/// Which side of `f(b)` the map never reached outside the ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundedSide {
    /// No value below `f(b)` was found: consistent with `f` bounded below.
    Below,
    /// No value above `f(b)` was found: consistent with `f` bounded above.
    Above,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum BoundednessOutcome {
    /// Points on both sides of `f(b)` outside the ball, joined by a path
    /// around it that crosses the level `f(b)` at `witness.x`.
    Contradiction {
        a: Point,
        c: Point,
        witness: LemmaWitness,
    },
    ConsistentWithBounded {
        side: BoundedSide,
        checked: usize,
    },
}

/// Grid search outside the closed ball `B(b, M)` for values on both sides
/// of `f(b)`.
///
/// When both are found, the lowest and highest values seen are joined by a
/// path avoiding the ball and the level `f(b)` is located on it, so the
/// fiber through `b` is not small. Otherwise the sample is consistent with
/// the map being bounded on one side.
pub fn boundedness_witness<F: MapEval + ?Sized>(
    f: &F,
    b: &Point,
    threshold: f64,
    grid: &FiberSampling,
    tol: f64,
) -> Result<BoundednessOutcome> {
    require_scalar(f)?;
    if b.dim() != f.domain_dim() || grid.bounds.dim() != f.domain_dim() {
        return Err(Error::input("point, box and map dimensions differ"));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::input(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let fb = scalar(f, b)?;
    let halton = Halton::new(f.domain_dim(), grid.seed)?;
    let scanned: Vec<Option<(Point, f64)>> = (0..grid.samples)
        .into_par_iter()
        .map(|i| {
            let x = grid.bounds.scale(&halton.point(i as u64));
            if dist(&x, b.coords()) <= threshold {
                return Ok(None);
            }
            let x = Point::from_raw(x);
            let v = scalar(f, &x)?;
            Ok(Some((x, v)))
        })
        .collect::<Result<_>>()?;
    let outside: Vec<(Point, f64)> = scanned.into_iter().flatten().collect();

    let mut low: Option<&(Point, f64)> = None;
    let mut high: Option<&(Point, f64)> = None;
    for entry in &outside {
        if entry.1 < fb && low.is_none_or(|l| entry.1 < l.1) {
            low = Some(entry);
        }
        if entry.1 > fb && high.is_none_or(|h| entry.1 > h.1) {
            high = Some(entry);
        }
    }
    match (low, high) {
        (Some((a, _)), Some((c, _))) => {
            let witness = lemma_from_ordered(f, a, b, c, threshold, tol)?;
            Ok(BoundednessOutcome::Contradiction {
                a: a.clone(),
                c: c.clone(),
                witness,
            })
        }
        (low, high) => Ok(BoundednessOutcome::ConsistentWithBounded {
            side: match (low, high) {
                (None, Some(_)) => BoundedSide::Below,
                (Some(_), None) => BoundedSide::Above,
                _ => BoundedSide::Both,
            },
            checked: outside.len(),
        }),
    }
}
