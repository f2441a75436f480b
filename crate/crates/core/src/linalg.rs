//! Dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, SzegoError};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigenvalues of a general complex matrix via the complex Schur form.
pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| SzegoError::LinearAlgebra("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Eigenvalues and unit right eigenvectors (columns) of a complex matrix.
///
/// Eigenvectors come from back-substitution on the Schur form, followed by
/// one step of inverse iteration on the original matrix.
pub fn eig(a: &CMat) -> Result<(Vec<Complex64>, CMat)> {
    let n = a.nrows();
    let schur = nalgebra::Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| SzegoError::LinearAlgebra("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let mut vals = Vec::with_capacity(n);
    let mut vecs = CMat::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        vals.push(lam);
        // Solve (T - lam) y = 0 with y_k = 1, y_i = 0 for i > k.
        let mut y = CVec::zeros(n);
        y[k] = ONE;
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[j];
            }
            let mut d = t[(i, i)] - lam;
            if d.norm() < 1e-14 * scale {
                d = Complex64::new(1e-14 * scale, 0.0);
            }
            y[i] = -s / d;
        }
        let mut v = &q * y;
        let nv = v.norm();
        v /= Complex64::new(nv, 0.0);
        vecs.set_column(k, &v);
    }
    Ok((vals, vecs))
}

/// Hermitian eigendecomposition, eigenvalues ascending.
pub fn hermitian_eig(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let sym = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let se = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let vals = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Solve `a x = b` by partial-pivot LU; returns the solution and the
/// relative residual `|a x - b| / (|a| |x| + |b|)`.
pub fn solve(a: &CMat, b: &CVec) -> Result<(CVec, f64)> {
    let x = a
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| SzegoError::LinearAlgebra("singular system".into()))?;
    let r = (a * &x - b).norm();
    let denom = a.norm() * x.norm() + b.norm();
    let rel = if denom > 0.0 { r / denom } else { 0.0 };
    Ok((x, rel))
}

/// Least-squares solution of an overdetermined system via SVD.
pub fn least_squares(a: &CMat, b: &CVec) -> Result<CVec> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, 1e-14 * svd.singular_values.max())
        .map_err(|e| SzegoError::LinearAlgebra(e.to_string()))
}

/// Orthonormal basis (columns) of the real null space of a real matrix,
/// using singular values below `tol * σ_max` as the cut.
pub fn real_null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    // Pad to square so the full right singular basis is returned.
    let rows = a.nrows().max(n);
    let mut sq = DMatrix::<f64>::zeros(rows, n);
    sq.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max().max(1.0);
    let cols: Vec<_> = (0..n)
        .filter(|&i| svd.singular_values[i] <= tol * smax)
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Conjugate every entry.
pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

pub fn conj_vec(v: &CVec) -> CVec {
    v.map(|z| z.conj())
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
