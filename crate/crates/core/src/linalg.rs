//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Builds a `rows x cols` matrix from row-major data.
pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Matrix> {
    if data.len() != rows * cols {
        return invalid(format!(
            "expected {} entries for a {rows}x{cols} matrix, got {}",
            rows * cols,
            data.len()
        ));
    }
    Ok(Matrix::from_row_slice(rows, cols, data))
}

pub fn to_row_major(m: &Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn frobenius(m: &Matrix) -> f64 {
    m.norm()
}

pub fn is_symmetric(m: &Matrix, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).norm() <= tol
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted
/// ascending and eigenvectors as matching columns.
///
/// nalgebra's solver can stop with residuals near 1e-9 relative; a few
/// cyclic Jacobi sweeps on `Vᵗ M V` bring them down to roundoff.
pub fn sorted_sym_eigen(m: &Matrix) -> (Vector, Matrix) {
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym.clone());
    let mut v = eig.eigenvectors;
    let mut b = symmetrize(&(v.transpose() * &sym * &v));
    jacobi_polish(&mut b, &mut v);
    let n = b.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| b[(i, i)]));
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    (values, vectors)
}

fn jacobi_polish(b: &mut Matrix, v: &mut Matrix) {
    let n = b.nrows();
    for _ in 0..8 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = b[(p, q)];
                if apq.abs() <= f64::EPSILON * 1e-3 * (b[(p, p)].abs() + b[(q, q)].abs()) || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let theta = (b[(q, q)] - b[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (bkp, bkq) = (b[(k, p)], b[(k, q)]);
                    b[(k, p)] = c * bkp - s * bkq;
                    b[(k, q)] = s * bkp + c * bkq;
                }
                for k in 0..n {
                    let (bpk, bqk) = (b[(p, k)], b[(q, k)]);
                    b[(p, k)] = c * bpk - s * bqk;
                    b[(q, k)] = s * bpk + c * bqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    sorted_sym_eigen(m).0[0]
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_fn(m: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let (values, vectors) = sorted_sym_eigen(m);
    let mapped = Vector::from_iterator(values.len(), values.iter().map(|&x| f(x)));
    &vectors * Matrix::from_diagonal(&mapped) * vectors.transpose()
}

/// Principal square root of a symmetric positive semidefinite matrix;
/// tiny negative eigenvalues from roundoff are clamped to zero.
pub fn sqrt_psd(m: &Matrix) -> Matrix {
    sym_fn(m, |x| x.max(0.0).sqrt())
}

/// A factor `L` with `L Lᵗ = m` for symmetric PSD `m`. Cholesky when it
/// succeeds, otherwise the symmetric square root (handles singular `m`).
pub fn psd_factor(m: &Matrix) -> Matrix {
    match m.clone().cholesky() {
        Some(c) => c.l(),
        None => sqrt_psd(m),
    }
}

/// `log det` of a symmetric positive definite matrix via Cholesky.
pub fn logdet_pd(m: &Matrix) -> Result<f64> {
    let chol = symmetrize(m)
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("matrix is not positive definite".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Inverse via partial-pivot LU; nalgebra's closed-form small-size
/// inverses lose accuracy on moderately conditioned input.
pub fn inverse(m: &Matrix) -> Result<Matrix> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular matrix".into()))
}

/// Sample covariance (denominator n - 1) of row vectors.
pub fn sample_covariance(rows: &[Vector]) -> Result<Matrix> {
    let n = rows.len();
    if n < 2 {
        return invalid("need at least two samples for a covariance");
    }
    let d = rows[0].len();
    let mut mean = Vector::zeros(d);
    for r in rows {
        mean += r;
    }
    mean /= n as f64;
    let mut cov = Matrix::zeros(d, d);
    for r in rows {
        let c = r - &mean;
        cov.ger(1.0, &c, &c, 1.0);
    }
    Ok(cov / (n as f64 - 1.0))
}

pub fn sample_mean(rows: &[Vector]) -> Vector {
    let d = rows.first().map_or(0, |r| r.len());
    let mut mean = Vector::zeros(d);
    for r in rows {
        mean += r;
    }
    mean / rows.len().max(1) as f64
}
