//! Small dense solves backing the local searches.

use nalgebra::{DMatrix, DVector};

/// Relative cutoff below which singular values are treated as zero.
const RANK_CUTOFF: f64 = 1e-10;

/// Minimum-norm least-squares solution of `J·v = r`, where `J` has one row
/// per equation. Directions with singular value below `1e-10·σ_max` are
/// dropped, so rank-deficient systems still give a usable step.
pub(crate) fn min_norm_solve(jac: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = rhs.len();
    let n = jac.first()?.len();
    let j = DMatrix::from_fn(m, n, |i, k| jac[i][k]);
    let svd = j.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || !smax.is_finite() {
        return None;
    }
    let v = svd
        .solve(&DVector::from_column_slice(rhs), RANK_CUTOFF * smax)
        .ok()?;
    v.iter()
        .all(|x| x.is_finite())
        .then(|| v.iter().copied().collect())
}
