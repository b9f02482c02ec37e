//! Evaluable maps ℝⁿ → ℝᵐ: the evaluation contract, the catalog of example
//! maps, and the JSON descriptor format.

mod catalog;
mod descriptor;

pub use catalog::{axis_tube_value, perturbed_value, urysohn_gradient, urysohn_value};
pub use descriptor::{parse_descriptor, serialize_descriptor, Affine, MapDescriptor};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, Point};

/// The evaluation contract every audited map satisfies.
///
/// Implementors provide [`MapEval::apply`] on correctly sized slices; the
/// checked [`MapEval::eval`] validates dimensions and finiteness around it.
pub trait MapEval: Send + Sync {
    fn domain_dim(&self) -> usize;

    fn codomain_dim(&self) -> usize;

    /// Evaluates the map. `x.len()` equals `domain_dim()`.
    fn apply(&self, x: &[f64]) -> Vec<f64>;

    fn is_continuous(&self) -> bool {
        true
    }

    /// Whether [`MapEval::directional_derivative`] returns values.
    fn has_derivative(&self) -> bool {
        false
    }

    /// Derivative of the map at `x` along `v`. The default is a central
    /// difference with step `1e-6·(1 + ‖x‖)` when the map declares itself
    /// differentiable.
    fn directional_derivative(&self, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        if !self.has_derivative() {
            return None;
        }
        Some(central_difference(|y| self.apply(y), x, v))
    }

    fn eval(&self, x: &Point) -> Result<Point> {
        if x.dim() != self.domain_dim() {
            return Err(Error::input(format!(
                "map expects dimension {}, got {}",
                self.domain_dim(),
                x.dim()
            )));
        }
        let y = self.apply(x.coords());
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!(
                "map value at {:?} is not finite",
                x.coords()
            )));
        }
        Ok(Point::from_raw(y))
    }
}

pub(crate) fn central_difference<F>(f: F, x: &[f64], v: &[f64]) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let vn = norm(v);
    if vn == 0.0 {
        return vec![0.0; f(x).len()];
    }
    let h = 1e-6 * (1.0 + norm(x)) / vn;
    let fwd: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let bwd: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
    f(&fwd)
        .iter()
        .zip(f(&bwd))
        .map(|(p, q)| (p - q) / (2.0 * h))
        .collect()
}

impl<T: MapEval + ?Sized> MapEval for &T {
    fn domain_dim(&self) -> usize {
        (**self).domain_dim()
    }
    fn codomain_dim(&self) -> usize {
        (**self).codomain_dim()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (**self).apply(x)
    }
    fn is_continuous(&self) -> bool {
        (**self).is_continuous()
    }
    fn has_derivative(&self) -> bool {
        (**self).has_derivative()
    }
    fn directional_derivative(&self, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        (**self).directional_derivative(x, v)
    }
}

/// Adapts a closure to [`MapEval`].
pub struct FnMap<F> {
    n: usize,
    m: usize,
    smooth: bool,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(n: usize, m: usize, f: F) -> Self {
        FnMap {
            n,
            m,
            smooth: false,
            f,
        }
    }

    /// Declares the closure differentiable so searches may use
    /// finite-difference derivatives.
    pub fn smooth(mut self) -> Self {
        self.smooth = true;
        self
    }
}

impl<F> MapEval for FnMap<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn domain_dim(&self) -> usize {
        self.n
    }
    fn codomain_dim(&self) -> usize {
        self.m
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
    fn has_derivative(&self) -> bool {
        self.smooth
    }
}

/// A dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::config("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::config(format!(
                "matrix {rows}×{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("matrix entries must be finite"));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::config("matrix rows have unequal lengths"));
        }
        Self::new(r, c, rows.concat())
    }

    /// The projection ℝⁿ → ℝᵐ onto the first m coordinates.
    pub fn projection(m: usize, n: usize) -> Result<Self> {
        let mut data = vec![0.0; m * n];
        for i in 0..m.min(n) {
            data[i * n + i] = 1.0;
        }
        Self::new(m, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fn_map_checked_eval() {
        let f = FnMap::new(2, 1, |x| vec![x[0] * x[1]]);
        let y = f.eval(&Point::new(vec![2.0, 3.0]).unwrap()).unwrap();
        assert_eq!(y.coords(), &[6.0]);
        assert!(f.eval(&Point::new(vec![1.0]).unwrap()).is_err());
        assert!(f.directional_derivative(&[1.0, 1.0], &[1.0, 0.0]).is_none());

        let g = FnMap::new(1, 1, |x| vec![1.0 / x[0]]);
        assert!(matches!(
            g.eval(&Point::new(vec![0.0]).unwrap()),
            Err(Error::Evaluation(_))
        ));
    }

    #[test]
    fn finite_difference_derivative() {
        let f = FnMap::new(2, 1, |x| vec![x[0].sin() * x[1]]).smooth();
        let d = f.directional_derivative(&[0.3, 2.0], &[1.0, 1.0]).unwrap();
        let exact = 0.3f64.cos() * 2.0 + 0.3f64.sin();
        assert!((d[0] - exact).abs() < 1e-8);
    }

    #[test]
    fn matrix_shapes() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        let p = DenseMatrix::projection(2, 3).unwrap();
        assert_eq!(p.apply(&[1.0, 2.0, 3.0]), vec![1.0, 2.0]);
        assert!(DenseMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
