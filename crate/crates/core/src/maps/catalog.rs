use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::geometry::{dist_sq, Point};

/// `d(x,a)² / (d(x,a)² + d(x,b)²)`: 0 at `a`, 1 at `b`, ½ on the bisector.
pub fn urysohn_value(a: &Point, b: &Point, x: &Point) -> Result<f64> {
    if a.dim() != b.dim() || x.dim() != a.dim() {
        return Err(Error::input("urysohn: a, b and x must share a dimension"));
    }
    if a == b {
        return Err(Error::config("urysohn: a and b must be distinct"));
    }
    Ok(urysohn_raw(a.coords(), b.coords(), x.coords()))
}

pub(crate) fn urysohn_raw(a: &[f64], b: &[f64], x: &[f64]) -> f64 {
    let p = dist_sq(x, a);
    let q = dist_sq(x, b);
    let denom = p + q;
    debug_assert!(denom > 0.0, "denominator vanishes only when a = b");
    p / denom
}

/// Gradient of the two-point map at `x`.
pub fn urysohn_gradient(a: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let p = dist_sq(x, a);
    let q = dist_sq(x, b);
    let s = (p + q) * (p + q);
    // ∇(p/(p+q)) = (q∇p − p∇q)/(p+q)², ∇p = 2(x−a), ∇q = 2(x−b)
    x.iter()
        .zip(a.iter().zip(b))
        .map(|(xi, (ai, bi))| 2.0 * (q * (xi - ai) - p * (xi - bi)) / s)
        .collect()
}

/// `(x₁, ‖(x₂,…,xₙ)‖, 0, …, 0) ∈ ℝᵐ`.
pub fn axis_tube_value(x: &Point, m: usize) -> Result<Point> {
    if x.dim() < 2 {
        return Err(Error::config("axis tube map needs n ≥ 2"));
    }
    if m < 2 {
        return Err(Error::config("axis tube map needs m ≥ 2"));
    }
    Ok(Point::from_raw(axis_tube_raw(x.coords(), m)))
}

pub(crate) fn axis_tube_raw(x: &[f64], m: usize) -> Vec<f64> {
    let mut y = vec![0.0; m];
    y[0] = x[0];
    y[1] = x[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    y
}

/// Derivative of the tube map along `v`; the radial part is one-sided on the axis.
pub(crate) fn axis_tube_derivative(x: &[f64], v: &[f64], m: usize) -> Vec<f64> {
    let mut d = vec![0.0; m];
    d[0] = v[0];
    let r = x[1..].iter().map(|t| t * t).sum::<f64>().sqrt();
    d[1] = if r > 0.0 {
        x[1..].iter().zip(&v[1..]).map(|(t, w)| t * w).sum::<f64>() / r
    } else {
        v[1..].iter().map(|w| w * w).sum::<f64>().sqrt()
    };
    d
}

/// `A·x + amplitude · sin(W·x + φ)`, componentwise sine.
pub fn perturbed_value(
    matrix: &DenseMatrix,
    amplitude: f64,
    frequencies: &DenseMatrix,
    phases: &[f64],
    x: &[f64],
) -> Vec<f64> {
    let lin = matrix.apply(x);
    let arg = frequencies.apply(x);
    lin.iter()
        .zip(arg.iter().zip(phases))
        .map(|(l, (w, p))| l + amplitude * (w + p).sin())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::central_difference;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn urysohn_examples() {
        let (a, b) = (p(&[0.0, 0.0]), p(&[4.0, 0.0]));
        assert_eq!(urysohn_value(&a, &b, &a).unwrap(), 0.0);
        assert_eq!(urysohn_value(&a, &b, &b).unwrap(), 1.0);
        assert_eq!(urysohn_value(&a, &b, &p(&[2.0, 0.0])).unwrap(), 0.5);
        // 64 / (64 + 16)
        assert_eq!(urysohn_value(&a, &b, &p(&[8.0, 0.0])).unwrap(), 0.8);
        assert!(matches!(urysohn_value(&a, &a, &b), Err(Error::Config(_))));
    }

    #[test]
    fn urysohn_bisector_and_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a: Vec<f64> = (0..3).map(|_| rng.random_range(-10.0..10.0)).collect();
            let b: Vec<f64> = (0..3).map(|_| rng.random_range(-10.0..10.0)).collect();
            // random point on the perpendicular bisector: midpoint + v, v ⟂ (b − a)
            let d: Vec<f64> = b.iter().zip(&a).map(|(x, y)| x - y).collect();
            let mut v: Vec<f64> = (0..3).map(|_| rng.random_range(-10.0..10.0)).collect();
            let c = crate::geometry::dot(&v, &d) / crate::geometry::dot(&d, &d);
            v.iter_mut().zip(&d).for_each(|(vi, di)| *vi -= c * di);
            let x: Vec<f64> = a
                .iter()
                .zip(&b)
                .zip(&v)
                .map(|((ai, bi), vi)| 0.5 * (ai + bi) + vi)
                .collect();
            assert!((urysohn_raw(&a, &b, &x) - 0.5).abs() <= 1e-12);

            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-100.0..100.0)).collect();
            let val = urysohn_raw(&a, &b, &y);
            assert!((0.0..=1.0).contains(&val));
        }
    }

    #[test]
    fn urysohn_gradient_matches_finite_difference() {
        let a = [0.0, 0.0, 1.0];
        let b = [4.0, -1.0, 0.0];
        let x = [1.5, 2.0, -0.5];
        let g = urysohn_gradient(&a, &b, &x);
        for k in 0..3 {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            let fd = central_difference(|y| vec![urysohn_raw(&a, &b, y)], &x, &e)[0];
            assert!((g[k] - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn axis_tube_examples() {
        assert_eq!(
            axis_tube_value(&p(&[5.0, 3.0, 4.0]), 3).unwrap().coords(),
            &[5.0, 5.0, 0.0]
        );
        assert_eq!(
            axis_tube_value(&p(&[7.0, 0.0, 0.0, 0.0]), 3)
                .unwrap()
                .coords(),
            &[7.0, 0.0, 0.0]
        );
        assert_eq!(
            axis_tube_value(&p(&[0.0, 1.0, 0.0]), 2).unwrap().coords(),
            &[0.0, 1.0]
        );
        assert!(matches!(
            axis_tube_value(&p(&[1.0]), 2),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn axis_tube_is_rotation_invariant_in_the_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
            // random rotation of (x₂,x₃,x₄) via a product of Givens rotations
            let mut y = x.clone();
            for (i, j) in [(1, 2), (2, 3), (1, 3)] {
                let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let (s, c) = t.sin_cos();
                let (yi, yj) = (y[i], y[j]);
                y[i] = c * yi - s * yj;
                y[j] = s * yi + c * yj;
            }
            let fx = axis_tube_raw(&x, 3);
            let fy = axis_tube_raw(&y, 3);
            for (u, v) in fx.iter().zip(&fy) {
                assert!((u - v).abs() <= 1e-9);
            }
        }
    }
}
