//! Antipodal collision search.
//!
//! For a continuous `f: ℝⁿ → ℝᵐ` and any m-sphere embedded in ℝⁿ, some
//! antipodal pair `x, x′` has `f(x) = f(x′)`; the pair is then a fiber
//! witness of diameter `2·radius`. For scalar maps the odd function
//! `g(θ) = f(x(θ)) − f(x(θ+π))` on a circle is bracketed and bisected. For
//! `m > 1` the squared defect is minimised on the parameter sphere from
//! several quasi-random starts.

use std::cell::Cell;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, dot, norm, Point, SphereEmbedding};
use crate::linalg::min_norm_solve;
use crate::maps::MapEval;
use crate::sampling::{rng_for, SpherePoints, DEFAULT_SEED};

/// Number of equally spaced angles scanned before bisecting.
pub const SCAN_POINTS: usize = 64;

/// Upper bound on bisection steps; floating-point collapse of the bracket
/// normally ends the search long before.
pub const MAX_BISECTION_STEPS: usize = 200;

/// Multistart runs are processed in batches of this size; the search stops
/// after the first batch that contains a converged start.
pub const START_BATCH: usize = 8;

const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    Bisection,
    Multistart,
}

/// Two antipodal points on the search sphere with (nearly) equal images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionWitness {
    pub x: Point,
    pub x_prime: Point,
    /// `d(x, x′)`.
    pub separation: f64,
    /// `‖f(x) − f(x′)‖`.
    pub defect: f64,
    pub converged: bool,
    pub tolerance: f64,
    /// Map evaluations spent; a directional derivative counts as two.
    pub evaluations: u64,
    /// Bisection steps, or descent steps of the winning start.
    pub iterations: usize,
    pub method: SearchMethod,
}

/// Knobs shared by the witness searches.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Defect tolerance; `None` means `1e-9·(1 + ‖f(center)‖)`.
    pub tol: Option<f64>,
    /// Multistart count; `None` means `8·(m+1)`.
    pub starts: Option<usize>,
    /// Evaluation budget per start.
    pub budget: u64,
    pub seed: u64,
    /// Spanning vectors of the carrier subspace; orthonormalised before use.
    pub carrier: Option<Vec<Vec<f64>>>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tol: None,
            starts: None,
            budget: 1000,
            seed: DEFAULT_SEED,
            carrier: None,
        }
    }
}

/// Options of a single multistart run, with every default resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultistartOptions {
    pub tol: f64,
    pub starts: usize,
    pub budget: u64,
    pub seed: u64,
}

fn check_dims<F: MapEval + ?Sized>(f: &F, emb: &SphereEmbedding) -> Result<()> {
    if f.domain_dim() != emb.ambient_dim() {
        return Err(Error::input(format!(
            "map acts on ℝ^{}, sphere lives in ℝ^{}",
            f.domain_dim(),
            emb.ambient_dim()
        )));
    }
    Ok(())
}

fn finite(values: Vec<f64>, at: &Point) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation(format!(
            "non-finite map value at {:?}",
            at.coords()
        )));
    }
    Ok(values)
}

/// `‖f(x) − f(x′)‖` for the antipodal pair named by the unit vector `u`.
pub fn antipodal_defect<F: MapEval + ?Sized>(
    f: &F,
    emb: &SphereEmbedding,
    u: &[f64],
) -> Result<f64> {
    check_dims(f, emb)?;
    let (x, xa) = emb.antipodal_pair(u)?;
    let fx = finite(f.apply(x.coords()), &x)?;
    let fxa = finite(f.apply(xa.coords()), &xa)?;
    Ok(dist(&fx, &fxa))
}

/// Default tolerance `1e-9·(1 + ‖f(center)‖)`.
pub fn default_tolerance<F: MapEval + ?Sized>(f: &F, center: &Point) -> Result<f64> {
    let fc = f.eval(center)?;
    Ok(1e-9 * (1.0 + norm(fc.coords())))
}

struct Probe {
    u: Vec<f64>,
    x: Point,
    x_prime: Point,
    fx: Vec<f64>,
    fx_prime: Vec<f64>,
    defect: f64,
}

/// Evaluation-counting view of a map for one search thread.
struct Tracked<'a, F: ?Sized> {
    f: &'a F,
    emb: &'a SphereEmbedding,
    count: Cell<u64>,
}

impl<'a, F: MapEval + ?Sized> Tracked<'a, F> {
    fn new(f: &'a F, emb: &'a SphereEmbedding) -> Self {
        Tracked {
            f,
            emb,
            count: Cell::new(0),
        }
    }

    fn probe(&self, u: Vec<f64>) -> Result<Probe> {
        let (x, x_prime) = self.emb.antipodal_pair(&u)?;
        self.count.set(self.count.get() + 2);
        let fx = finite(self.f.apply(x.coords()), &x)?;
        let fx_prime = finite(self.f.apply(x_prime.coords()), &x_prime)?;
        let defect = dist(&fx, &fx_prime);
        Ok(Probe {
            u,
            x,
            x_prime,
            fx,
            fx_prime,
            defect,
        })
    }

    fn derivative(&self, x: &Point, v: &[f64]) -> Result<Vec<f64>> {
        self.count.set(self.count.get() + 2);
        let d = self
            .f
            .directional_derivative(x.coords(), v)
            .ok_or_else(|| Error::Evaluation("map has no derivative".into()))?;
        finite(d, x)
    }

    fn evaluations(&self) -> u64 {
        self.count.get()
    }
}

fn witness_from(
    probe: Probe,
    tol: f64,
    evaluations: u64,
    iterations: usize,
    method: SearchMethod,
) -> CollisionWitness {
    CollisionWitness {
        separation: dist(probe.x.coords(), probe.x_prime.coords()),
        converged: probe.defect <= tol,
        defect: probe.defect,
        x: probe.x,
        x_prime: probe.x_prime,
        tolerance: tol,
        evaluations,
        iterations,
        method,
    }
}

fn circle_direction(theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    vec![c, s]
}

/// Bisection for a scalar map on a circle.
///
/// Scans `g(θ) = f(x(θ)) − f(x(θ+π))` at [`SCAN_POINTS`] angles of
/// `[0, π]`; oddness `g(π) = −g(0)` guarantees a sign change, which is then
/// bisected until `|g| ≤ tol` or the bracket collapses.
pub fn find_collision_bisection<F: MapEval + ?Sized>(
    f: &F,
    emb: &SphereEmbedding,
    tol: f64,
) -> Result<CollisionWitness> {
    check_dims(f, emb)?;
    if f.codomain_dim() != 1 {
        return Err(Error::input("bisection needs a scalar-valued map"));
    }
    if emb.carrier_dim() != 2 {
        return Err(Error::input(
            "bisection runs on a circle (carrier of dimension 2)",
        ));
    }
    if !(tol >= 0.0) {
        return Err(Error::input(format!(
            "tolerance must be nonnegative, got {tol}"
        )));
    }
    let tracked = Tracked::new(f, emb);
    let signed = |p: &Probe| p.fx[0] - p.fx_prime[0];

    let step = PI / SCAN_POINTS as f64;
    let first = tracked.probe(circle_direction(0.0))?;
    if first.defect <= tol {
        return Ok(witness_from(
            first,
            tol,
            tracked.evaluations(),
            0,
            SearchMethod::Bisection,
        ));
    }
    let g0 = signed(&first);
    let (mut lo, mut hi, mut g_lo) = (0.0, PI, g0);
    let mut best = first;
    let mut prev = (0.0, g0);
    for i in 1..=SCAN_POINTS {
        // g(π) = −g(0) exactly: x(π) is the antipode of x(0)
        let (theta, g) = if i == SCAN_POINTS {
            (PI, -g0)
        } else {
            let theta = i as f64 * step;
            let p = tracked.probe(circle_direction(theta))?;
            let g = signed(&p);
            if p.defect <= tol {
                return Ok(witness_from(
                    p,
                    tol,
                    tracked.evaluations(),
                    0,
                    SearchMethod::Bisection,
                ));
            }
            if p.defect < best.defect {
                best = p;
            }
            (theta, g)
        };
        if prev.1.signum() != g.signum() {
            lo = prev.0;
            hi = theta;
            g_lo = prev.1;
            break;
        }
        prev = (theta, g);
    }

    let mut iterations = 0;
    while iterations < MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let p = tracked.probe(circle_direction(mid))?;
        let g = signed(&p);
        let done = p.defect <= tol;
        if g.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
        if p.defect < best.defect || done {
            best = p;
        }
        if done {
            break;
        }
    }
    Ok(witness_from(
        best,
        tol,
        tracked.evaluations(),
        iterations,
        SearchMethod::Bisection,
    ))
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let l = norm(v);
    v.iter().map(|c| (c / l).clamp(-1.0, 1.0)).collect()
}

/// Orthonormal basis of the tangent space of the unit sphere at `u`,
/// built from random vectors.
fn random_tangent_frame<R: Rng>(u: &[f64], rng: &mut R) -> Vec<Vec<f64>> {
    let d = u.len();
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    while frame.len() < d - 1 {
        let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            let c = dot(&v, u);
            v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= c * ui);
            for w in &frame {
                let c = dot(&v, w);
                v.iter_mut().zip(w).for_each(|(vi, wi)| *vi -= c * wi);
            }
        }
        let l = norm(&v);
        if l > 1e-6 {
            frame.push(v.iter().map(|c| c / l).collect());
        }
    }
    frame
}

struct StartOutcome {
    probe: Probe,
    evaluations: u64,
    iterations: usize,
}

/// Gauss–Newton steps on the parameter sphere: the tangent step solves
/// `J_g·v = −g, u·v = 0` in the least-norm sense, followed by backtracking
/// until the defect decreases.
fn newton_descent<F: MapEval + ?Sized>(
    tracked: &Tracked<'_, F>,
    u0: Vec<f64>,
    tol: f64,
    budget: u64,
) -> Result<StartOutcome> {
    let emb = tracked.emb;
    let carrier = emb.carrier_dim();
    let m = tracked.f.codomain_dim();
    let mut cur = tracked.probe(u0)?;
    let mut iterations = 0;
    let step_cost = 4 * carrier as u64;

    while cur.defect > tol && tracked.evaluations() + step_cost + 2 <= budget {
        iterations += 1;
        // ∂g/∂u_k = r·(J(x) + J(x′))·b_k
        let mut jac = vec![vec![0.0; carrier]; m + 1];
        for (k, b) in emb.basis().iter().enumerate() {
            let dx = tracked.derivative(&cur.x, b)?;
            let dxp = tracked.derivative(&cur.x_prime, b)?;
            for i in 0..m {
                jac[i][k] = emb.radius() * (dx[i] + dxp[i]);
            }
        }
        jac[m].clone_from(&cur.u);
        let g: Vec<f64> = cur
            .fx
            .iter()
            .zip(&cur.fx_prime)
            .map(|(a, b)| a - b)
            .collect();
        let mut rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        rhs.push(0.0);
        let direction = match min_norm_solve(&jac, &rhs) {
            Some(v) => v,
            None => {
                // steepest descent of ½‖g‖², projected to the tangent space
                let mut grad: Vec<f64> = (0..carrier)
                    .map(|k| -(0..m).map(|i| jac[i][k] * g[i]).sum::<f64>())
                    .collect();
                let c = dot(&grad, &cur.u);
                grad.iter_mut()
                    .zip(&cur.u)
                    .for_each(|(gk, uk)| *gk -= c * uk);
                grad
            }
        };
        if norm(&direction) == 0.0 {
            break;
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            if tracked.evaluations() + 2 > budget {
                break;
            }
            let trial: Vec<f64> = cur
                .u
                .iter()
                .zip(&direction)
                .map(|(u, v)| u + alpha * v)
                .collect();
            let p = tracked.probe(normalize(&trial))?;
            if p.defect < cur.defect {
                accepted = Some(p);
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some(p) => cur = p,
            None => break,
        }
    }
    Ok(StartOutcome {
        probe: cur,
        evaluations: tracked.evaluations(),
        iterations,
    })
}

/// Compass search in randomly oriented tangent frames, for maps without
/// derivatives.
fn compass_descent<F: MapEval + ?Sized, R: Rng>(
    tracked: &Tracked<'_, F>,
    u0: Vec<f64>,
    tol: f64,
    budget: u64,
    rng: &mut R,
) -> Result<StartOutcome> {
    let mut cur = tracked.probe(u0)?;
    let mut step = 0.5;
    let mut iterations = 0;
    let mut frame = random_tangent_frame(&cur.u, rng);
    'outer: while cur.defect > tol && step > 1e-15 {
        iterations += 1;
        for dir in &frame {
            for sign in [1.0, -1.0] {
                if tracked.evaluations() + 2 > budget {
                    break 'outer;
                }
                let trial: Vec<f64> = cur
                    .u
                    .iter()
                    .zip(dir)
                    .map(|(u, d)| u + sign * step * d)
                    .collect();
                let p = tracked.probe(normalize(&trial))?;
                if p.defect < cur.defect {
                    cur = p;
                    frame = random_tangent_frame(&cur.u, rng);
                    continue 'outer;
                }
            }
        }
        step *= 0.5;
    }
    Ok(StartOutcome {
        probe: cur,
        evaluations: tracked.evaluations(),
        iterations,
    })
}

/// Multistart minimisation of the antipodal defect over the sphere.
///
/// Starts are quasi-random points of the parameter sphere. Each start has
/// its own evaluation budget and random stream derived from
/// `(seed, start index)`; the returned witness is the best over all starts
/// run (lowest defect, then lowest index) and does not depend on thread
/// scheduling. A witness with `converged = false` is a valid outcome.
pub fn find_collision_multistart<F: MapEval + ?Sized>(
    f: &F,
    emb: &SphereEmbedding,
    opts: &MultistartOptions,
) -> Result<CollisionWitness> {
    check_dims(f, emb)?;
    if f.codomain_dim() + 1 > emb.carrier_dim() {
        return Err(Error::input(format!(
            "a map to ℝ^{} needs a sphere of dimension at least {}",
            f.codomain_dim(),
            f.codomain_dim()
        )));
    }
    if opts.starts == 0 || opts.budget == 0 {
        return Err(Error::input(
            "multistart needs at least one start and a positive budget",
        ));
    }
    let starts = SpherePoints::new(emb.carrier_dim(), opts.seed)?;
    let smooth = f.has_derivative();

    let run_start = |index: usize| -> Result<StartOutcome> {
        let tracked = Tracked::new(f, emb);
        let u0 = starts.point(index as u64);
        if smooth {
            newton_descent(&tracked, u0, opts.tol, opts.budget)
        } else {
            let mut rng = rng_for(opts.seed, index as u64);
            compass_descent(&tracked, u0, opts.tol, opts.budget, &mut rng)
        }
    };

    let mut best: Option<StartOutcome> = None;
    let mut evaluations = 0;
    let mut first = 0;
    while first < opts.starts {
        let last = (first + START_BATCH).min(opts.starts);
        let batch: Vec<StartOutcome> = (first..last)
            .into_par_iter()
            .map(run_start)
            .collect::<Result<_>>()?;
        let mut any_converged = false;
        for outcome in batch {
            evaluations += outcome.evaluations;
            any_converged |= outcome.probe.defect <= opts.tol;
            if best
                .as_ref()
                .is_none_or(|b| outcome.probe.defect < b.probe.defect)
            {
                best = Some(outcome);
            }
        }
        if any_converged {
            break;
        }
        first = last;
    }
    let best = best.expect("at least one start ran");
    Ok(witness_from(
        best.probe,
        opts.tol,
        evaluations,
        best.iterations,
        SearchMethod::Multistart,
    ))
}

fn resolve_embedding(
    center: Point,
    radius: f64,
    carrier_dim: usize,
    opts: &SearchOptions,
) -> Result<SphereEmbedding> {
    match &opts.carrier {
        Some(vectors) => {
            if vectors.len() < carrier_dim {
                return Err(Error::input(format!(
                    "carrier needs at least {carrier_dim} vectors, got {}",
                    vectors.len()
                )));
            }
            SphereEmbedding::orthonormalized(center, radius, vectors.clone())
        }
        None => SphereEmbedding::standard(center, radius, carrier_dim),
    }
}

fn search_on<F: MapEval + ?Sized>(
    f: &F,
    emb: &SphereEmbedding,
    opts: &SearchOptions,
) -> Result<CollisionWitness> {
    let tol = match opts.tol {
        Some(t) => t,
        None => default_tolerance(f, emb.center())?,
    };
    let m = f.codomain_dim();
    if m == 1 && emb.carrier_dim() == 2 {
        find_collision_bisection(f, emb, tol)
    } else {
        let resolved = MultistartOptions {
            tol,
            starts: opts.starts.unwrap_or(8 * (m + 1)),
            budget: opts.budget,
            seed: opts.seed,
        };
        find_collision_multistart(f, emb, &resolved)
    }
}

fn require_reduction<F: MapEval + ?Sized>(f: &F) -> Result<(usize, usize)> {
    let (n, m) = (f.domain_dim(), f.codomain_dim());
    if n <= m {
        return Err(Error::config(format!(
            "large fibers are only guaranteed for n > m (got n = {n}, m = {m})"
        )));
    }
    Ok((n, m))
}

/// Antipodal pair at distance `2M` with equal images, on the m-sphere of
/// radius `M` centered at the origin.
pub fn large_fiber_witness<F: MapEval + ?Sized>(
    f: &F,
    radius: f64,
    opts: &SearchOptions,
) -> Result<CollisionWitness> {
    let (n, m) = require_reduction(f)?;
    let emb = resolve_embedding(Point::origin(n), radius, m + 1, opts)?;
    search_on(f, &emb, opts)
}

/// Antipodal pair at distance exactly 1 inside the unit cube, on the sphere
/// of diameter 1 centered at `(½, …, ½)`.
pub fn cube_inscribed_sphere_witness<F: MapEval + ?Sized>(
    f: &F,
    opts: &SearchOptions,
) -> Result<CollisionWitness> {
    let (n, m) = require_reduction(f)?;
    let center = Point::from_raw(vec![0.5; n]);
    let emb = resolve_embedding(center, 0.5, m + 1, opts)?;
    search_on(f, &emb, opts)
}
