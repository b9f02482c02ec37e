use serde::{Deserialize, Serialize};

use super::{axpy, dot, norm, Point};
use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-9;

/// A round m-sphere isometrically embedded in ℝⁿ.
///
/// The sphere lives in the affine subspace `center + span(basis)`; a unit
/// vector `u ∈ ℝ^{m+1}` names the point `center + radius · Σ uₖ basisₖ`.
/// The antipodal map is the point reflection through `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereEmbedding {
    center: Point,
    radius: f64,
    basis: Vec<Vec<f64>>,
}

impl SphereEmbedding {
    /// Builds an embedding from an already orthonormal basis.
    pub fn new(center: Point, radius: f64, basis: Vec<Vec<f64>>) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::input(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        let n = center.dim();
        if basis.len() < 2 {
            return Err(Error::input(
                "sphere carrier needs at least 2 basis vectors",
            ));
        }
        if basis.len() > n {
            return Err(Error::input(format!(
                "carrier of dimension {} does not fit in ℝ^{n}",
                basis.len()
            )));
        }
        for (i, v) in basis.iter().enumerate() {
            if v.len() != n {
                return Err(Error::input(format!(
                    "basis vector {i} has dimension {}, expected {n}",
                    v.len()
                )));
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::input(format!("basis vector {i} is not finite")));
            }
            for (j, w) in basis.iter().enumerate().take(i + 1) {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (dot(v, w) - expected).abs() > ORTHONORMAL_TOL {
                    return Err(Error::input(format!(
                        "basis vectors {j} and {i} are not orthonormal"
                    )));
                }
            }
        }
        Ok(SphereEmbedding {
            center,
            radius,
            basis,
        })
    }

    /// Sphere in the span of the first `carrier_dim` coordinate axes.
    pub fn standard(center: Point, radius: f64, carrier_dim: usize) -> Result<Self> {
        let axes: Vec<usize> = (0..carrier_dim).collect();
        Self::coordinate(center, radius, &axes)
    }

    /// Sphere in the span of the given coordinate axes.
    pub fn coordinate(center: Point, radius: f64, axes: &[usize]) -> Result<Self> {
        let n = center.dim();
        let mut basis = Vec::with_capacity(axes.len());
        for &axis in axes {
            if axis >= n {
                return Err(Error::input(format!("axis {axis} out of range for ℝ^{n}")));
            }
            let mut e = vec![0.0; n];
            e[axis] = 1.0;
            basis.push(e);
        }
        Self::new(center, radius, basis)
    }

    /// Orthonormalises arbitrary spanning vectors (modified Gram–Schmidt,
    /// two passes) before building the embedding.
    pub fn orthonormalized(center: Point, radius: f64, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
        for (i, v) in vectors.into_iter().enumerate() {
            if v.len() != center.dim() {
                return Err(Error::input(format!(
                    "carrier vector {i} has dimension {}, expected {}",
                    v.len(),
                    center.dim()
                )));
            }
            let scale = norm(&v);
            let mut w = v;
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    w = axpy(&w, -c, b);
                }
            }
            let len = norm(&w);
            if !(len > 1e-10 * scale.max(f64::MIN_POSITIVE)) {
                return Err(Error::input(format!(
                    "carrier vector {i} is linearly dependent on the previous ones"
                )));
            }
            basis.push(w.iter().map(|c| c / len).collect());
        }
        Self::new(center, radius, basis)
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.center.dim()
    }

    /// Number of parameters `m + 1` of a point on the sphere.
    pub fn carrier_dim(&self) -> usize {
        self.basis.len()
    }

    /// Intrinsic dimension m of the sphere.
    pub fn sphere_dim(&self) -> usize {
        self.basis.len() - 1
    }

    fn check_unit(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.carrier_dim() {
            return Err(Error::input(format!(
                "direction has {} components, carrier has {}",
                u.len(),
                self.carrier_dim()
            )));
        }
        let len = norm(u);
        if !((len - 1.0).abs() <= UNIT_TOL) {
            return Err(Error::input(format!(
                "direction is not a unit vector (norm {len})"
            )));
        }
        Ok(())
    }

    /// `radius · Σ uₖ basisₖ`
    fn offset(&self, u: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.ambient_dim()];
        for (uk, bk) in u.iter().zip(&self.basis) {
            for (vi, bi) in v.iter_mut().zip(bk) {
                *vi += uk * bi;
            }
        }
        v.iter_mut().for_each(|c| *c *= self.radius);
        v
    }

    pub fn sphere_point(&self, u: &[f64]) -> Result<Point> {
        self.check_unit(u)?;
        Ok(Point::from_raw(axpy(
            self.center.coords(),
            1.0,
            &self.offset(u),
        )))
    }

    pub fn antipode(&self, u: &[f64]) -> Result<Point> {
        self.check_unit(u)?;
        Ok(Point::from_raw(axpy(
            self.center.coords(),
            -1.0,
            &self.offset(u),
        )))
    }

    /// Both ends of the diameter through `u`, sharing one offset computation
    /// so their midpoint is the center up to a single rounding per coordinate.
    pub fn antipodal_pair(&self, u: &[f64]) -> Result<(Point, Point)> {
        self.check_unit(u)?;
        let off = self.offset(u);
        let c = self.center.coords();
        Ok((
            Point::from_raw(axpy(c, 1.0, &off)),
            Point::from_raw(axpy(c, -1.0, &off)),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn unit_circle_in_r3() {
        let emb = SphereEmbedding::standard(Point::origin(3), 1.0, 2).unwrap();
        assert_eq!(emb.sphere_point(&[1.0, 0.0]).unwrap(), p(&[1.0, 0.0, 0.0]));
        assert_eq!(
            emb.sphere_point(&[-1.0, 0.0]).unwrap(),
            p(&[-1.0, 0.0, 0.0])
        );
        assert_eq!(emb.antipode(&[1.0, 0.0]).unwrap(), p(&[-1.0, 0.0, 0.0]));
        assert_eq!(emb.sphere_dim(), 1);
    }

    #[test]
    fn shifted_sphere_linear_form() {
        let emb = SphereEmbedding::standard(p(&[1.0, 1.0, 1.0]), 2.0, 2).unwrap();
        assert_eq!(emb.sphere_point(&[0.0, 1.0]).unwrap(), p(&[1.0, 3.0, 1.0]));
    }

    #[test]
    fn antipode_is_an_involution_with_center_midpoint() {
        let emb = SphereEmbedding::standard(p(&[0.5, -2.0, 3.0]), 7.0, 3).unwrap();
        let u = [1.0, 0.0, 0.0];
        let x = emb.sphere_point(&u).unwrap();
        let xa = emb.antipode(&u).unwrap();
        let back = emb.antipode(&[-1.0, 0.0, 0.0]).unwrap();
        assert_eq!(back, x);
        assert_eq!(x.midpoint(&xa).unwrap(), *emb.center());
        assert_eq!(distance(&x, &xa).unwrap(), 14.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let emb = SphereEmbedding::standard(Point::origin(3), 1.0, 2).unwrap();
        assert!(emb.sphere_point(&[1.0, 1.0]).is_err());
        assert!(emb.sphere_point(&[1.0]).is_err());
        assert!(SphereEmbedding::standard(Point::origin(3), 0.0, 2).is_err());
        assert!(SphereEmbedding::standard(Point::origin(2), 1.0, 3).is_err());
        assert!(SphereEmbedding::new(
            Point::origin(3),
            1.0,
            vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]]
        )
        .is_err());
        assert!(SphereEmbedding::orthonormalized(
            Point::origin(3),
            1.0,
            vec![vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 0.0]]
        )
        .is_err());
    }

    #[test]
    fn gram_schmidt_carrier() {
        let emb = SphereEmbedding::orthonormalized(
            Point::origin(4),
            3.0,
            vec![
                vec![1.0, 1.0, 0.0, 0.0],
                vec![1.0, 0.0, 1.0, 0.0],
                vec![0.0, 1.0, 1.0, 1.0],
            ],
        )
        .unwrap();
        assert_eq!(emb.sphere_dim(), 2);
    }

    #[test]
    fn random_directions_stay_on_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let n = 3 + trial % 4;
            let center: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
            let vecs: Vec<Vec<f64>> = (0..n - 1)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let radius = rng.random_range(0.1..1e3);
            let emb = SphereEmbedding::orthonormalized(p(&center), radius, vecs).unwrap();
            for _ in 0..500 {
                let mut u: Vec<f64> = (0..emb.carrier_dim())
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect();
                let l = norm(&u);
                u.iter_mut().for_each(|c| *c /= l);
                let (x, xa) = emb.antipodal_pair(&u).unwrap();
                let dc = distance(&x, emb.center()).unwrap();
                assert!((dc - radius).abs() <= 1e-9 * radius);
                let sep = distance(&x, &xa).unwrap();
                assert!((sep - 2.0 * radius).abs() <= 1e-9 * radius);
            }
        }
    }
}
