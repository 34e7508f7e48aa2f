//! Small dense complex linear algebra on top of `nalgebra`.
//!
//! Everything in the toolkit is dense and of size `n + m` (the number of
//! boundary slots), so these helpers favour clarity over blocking tricks.
//! Ranks and nullities are always decided from singular values.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Safety factor in the default rank threshold `σ_max · dim · ε · 64`.
pub const RANK_SAFETY: f64 = 64.0;

/// Reciprocal condition numbers below this are treated as singular by [`solve`].
pub const SINGULAR_RCOND: f64 = 1e3 * f64::EPSILON;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diag(entries: &[Complex64]) -> CMatrix {
    let n = entries.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &v) in entries.iter().enumerate() {
        m[(i, i)] = v;
    }
    m
}

pub fn from_rows(rows: &[Vec<Complex64>]) -> CMatrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j])
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(nrows, ncols, |i, j| c(rows[i][j], 0.0))
}

/// `[left | right]`
pub fn hstack(left: &CMatrix, right: &CMatrix) -> CMatrix {
    assert_eq!(left.nrows(), right.nrows(), "hstack: row mismatch");
    let (r, cl, cr) = (left.nrows(), left.ncols(), right.ncols());
    let mut out = CMatrix::zeros(r, cl + cr);
    out.view_mut((0, 0), (r, cl)).copy_from(left);
    out.view_mut((0, cl), (r, cr)).copy_from(right);
    out
}

/// `[top; bottom]`
pub fn vstack(top: &CMatrix, bottom: &CMatrix) -> CMatrix {
    assert_eq!(top.ncols(), bottom.ncols(), "vstack: column mismatch");
    let (rt, rb, cols) = (top.nrows(), bottom.nrows(), top.ncols());
    let mut out = CMatrix::zeros(rt + rb, cols);
    out.view_mut((0, 0), (rt, cols)).copy_from(top);
    out.view_mut((rt, 0), (rb, cols)).copy_from(bottom);
    out
}

pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

/// Sub-matrix with the given rows and columns, in the given order.
pub fn select(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn fro_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation between two matrices of equal shape.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Default rank threshold for a matrix with largest singular value `sigma_max`.
pub fn rank_tolerance(sigma_max: f64, dim: usize) -> f64 {
    sigma_max * dim.max(1) as f64 * f64::EPSILON * RANK_SAFETY
}

/// Numerical rank with the threshold `σ_max · max(rows, cols) · ε · 64`.
pub fn numerical_rank(m: &CMatrix) -> usize {
    let sv = singular_values(m);
    let Some(&smax) = sv.first() else { return 0 };
    let tol = rank_tolerance(smax, m.nrows().max(m.ncols()));
    sv.iter().filter(|&&s| s > tol).count()
}

/// Dimension of the kernel, counting singular values `≤ rel_tol · σ_max`.
pub fn nullity(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let Some(&smax) = sv.first() else {
        return m.ncols();
    };
    if smax == 0.0 {
        return m.ncols();
    }
    let small = sv.iter().filter(|&&s| s <= rel_tol * smax).count();
    // wide matrices have ncols - nrows extra kernel directions
    small + m.ncols().saturating_sub(sv.len())
}

/// Orthonormal basis (as columns) of the kernel of `m`.
///
/// `rel_tol` is relative to the largest singular value; `None` selects the
/// default rank threshold.
pub fn null_space(m: &CMatrix, rel_tol: Option<f64>) -> CMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    // pad wide matrices so the SVD yields a full set of right singular vectors
    let padded = if m.nrows() < cols {
        vstack(m, &CMatrix::zeros(cols - m.nrows(), cols))
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let tol = match rel_tol {
        Some(r) => r * smax,
        None => rank_tolerance(smax, m.nrows().max(cols)),
    };
    let picked: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= tol).collect();
    let mut basis = CMatrix::zeros(cols, picked.len());
    for (j, &i) in picked.iter().enumerate() {
        for r in 0..cols {
            basis[(r, j)] = v_t[(i, r)].conj();
        }
    }
    basis
}

/// Orthonormal basis (as rows) of the row space of `m`, using the default rank threshold.
pub fn row_space(m: &CMatrix) -> CMatrix {
    let cols = m.ncols();
    if m.is_empty() {
        return CMatrix::zeros(0, cols);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let tol = rank_tolerance(smax, m.nrows().max(cols));
    let picked: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > tol).collect();
    CMatrix::from_fn(picked.len(), cols, |i, j| v_t[(picked[i], j)])
}

/// `σ_min / σ_max` of a square matrix (zero for singular or empty input).
pub fn rcond(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = singular_values(m);
    let smax = sv[0];
    if smax == 0.0 {
        return 0.0;
    }
    sv[sv.len() - 1] / smax
}

/// Solve `m x = rhs` by LU with partial pivoting.
///
/// Returns `None` when `m` is numerically singular (`rcond < 1e3·ε`).
pub fn solve(m: &CMatrix, rhs: &CMatrix) -> Option<CMatrix> {
    if m.nrows() != m.ncols() || m.nrows() != rhs.nrows() {
        return None;
    }
    if m.is_empty() {
        return Some(CMatrix::zeros(0, rhs.ncols()));
    }
    if rcond(m) < SINGULAR_RCOND {
        return None;
    }
    m.clone().lu().solve(rhs)
}

pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    solve(m, &identity(m.nrows()))
}

pub fn determinant(m: &CMatrix) -> Complex64 {
    if m.is_empty() {
        return ONE;
    }
    m.clone().lu().determinant()
}

/// Moore–Penrose pseudo-inverse with the default rank threshold.
pub fn pseudo_inverse(m: &CMatrix) -> CMatrix {
    if m.is_empty() {
        return CMatrix::zeros(m.ncols(), m.nrows());
    }
    let sv = singular_values(m);
    let tol = rank_tolerance(sv[0], m.nrows().max(m.ncols()));
    m.clone()
        .pseudo_inverse(tol.max(f64::MIN_POSITIVE))
        .expect("non-negative epsilon")
}

/// Orthogonal projector onto the column span of an orthonormal basis.
pub fn projector_onto(basis: &CMatrix) -> CMatrix {
    basis * basis.adjoint()
}

/// `‖U* U − 1‖_F`
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    fro_norm(&(u.adjoint() * u - identity(n)))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_nullity_of_rank_one() {
        let m = from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(numerical_rank(&m), 1);
        assert_eq!(nullity(&m, 1e-10), 1);
        let ns = null_space(&m, None);
        assert_eq!(ns.ncols(), 1);
        assert!(max_abs(&(&m * &ns)) < 1e-14);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = from_real_rows(&[&[1.0, 0.0, 0.0]]);
        let ns = null_space(&m, None);
        assert_eq!(ns.ncols(), 2);
        assert_eq!(nullity(&m, 1e-12), 2);
        assert!(max_abs(&(&m * &ns)) < 1e-14);
        assert!(max_abs_diff(&(ns.adjoint() * &ns), &identity(2)) < 1e-14);
    }

    #[test]
    fn solve_refuses_singular() {
        let m = from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(solve(&m, &identity(2)).is_none());
        let m = from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let x = solve(&m, &identity(2)).unwrap();
        assert!(max_abs_diff(&(&m * &x), &identity(2)) < 1e-14);
    }

    #[test]
    fn pseudo_inverse_of_projector_is_itself() {
        let p = from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(max_abs_diff(&pseudo_inverse(&p), &p) < 1e-14);
    }

    #[test]
    fn row_space_is_orthonormal() {
        let m = from_real_rows(&[&[1.0, 2.0, 0.0], &[2.0, 4.0, 0.0], &[0.0, 0.0, 1e6]]);
        let q = row_space(&m);
        assert_eq!(q.nrows(), 2);
        assert!(max_abs_diff(&(&q * q.adjoint()), &identity(2)) < 1e-14);
    }

    #[test]
    fn determinant_of_empty_is_one() {
        assert_eq!(determinant(&CMatrix::zeros(0, 0)), ONE);
    }
}
