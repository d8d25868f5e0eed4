//! Householder QR with column pivoting for dense least squares.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Least-squares solution of `X β ≈ y` together with the diagonal of
/// `(XᵀX)⁻¹`.
pub(crate) struct LeastSquares<T> {
    pub beta: Vec<T>,
    pub inv_gram_diag: Vec<T>,
}

/// Solves a full-rank least-squares problem. `columns` holds the design
/// column-major. Columns are scaled to unit norm first, so the rank test is
/// relative to the best-conditioned direction.
#[allow(clippy::needless_range_loop)]
pub(crate) fn solve<T: Real>(mut columns: Vec<Vec<T>>, mut y: Vec<T>) -> Result<LeastSquares<T>> {
    let p = columns.len();
    let n = y.len();
    if p == 0 || columns.iter().any(|c| c.len() != n) || n < p {
        return Err(Error::InvalidInput("design matrix shape is inconsistent".into()));
    }

    let mut scale = Vec::with_capacity(p);
    for (j, col) in columns.iter_mut().enumerate() {
        let norm = col.iter().map(|&v| v * v).sum::<T>().sqrt();
        if !(norm.is_finite() && norm > T::zero()) {
            return Err(Error::SingularDesign(format!("design column {j} is identically zero")));
        }
        col.iter_mut().for_each(|v| *v = *v / norm);
        scale.push(norm);
    }

    let tol = T::epsilon() * T::of_usize(n.max(p)) * T::lit(100.0);
    let mut perm: Vec<usize> = (0..p).collect();
    let mut diag = vec![T::zero(); p];
    for k in 0..p {
        let tail_norm2 = |c: &Vec<T>| c[k..].iter().map(|&v| v * v).sum::<T>();
        let (best, best_norm2) = (k..p)
            .map(|j| (j, tail_norm2(&columns[j])))
            .fold((k, -T::one()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        columns.swap(k, best);
        perm.swap(k, best);

        let norm = best_norm2.sqrt();
        if norm <= tol {
            return Err(Error::SingularDesign(format!(
                "design matrix has rank {k} < {p} columns (collinear regressors)"
            )));
        }
        let x0 = columns[k][k];
        let alpha = if x0 >= T::zero() { -norm } else { norm };
        let mut v: Vec<T> = columns[k][k..].to_vec();
        v[0] = v[0] - alpha;
        let vtv: T = v.iter().map(|&a| a * a).sum();
        let reflect = |target: &mut [T]| {
            let dot: T = v.iter().zip(target.iter()).map(|(&a, &b)| a * b).sum();
            let f = T::lit(2.0) * dot / vtv;
            for (t, &a) in target.iter_mut().zip(&v) {
                *t = *t - f * a;
            }
        };
        for col in columns.iter_mut().skip(k + 1) {
            reflect(&mut col[k..]);
        }
        reflect(&mut y[k..]);
        diag[k] = alpha;
    }

    // r[i][j] for i ≤ j: diagonal from `diag`, above it from the columns
    let r = |i: usize, j: usize| if i == j { diag[i] } else { columns[j][i] };

    let mut z = vec![T::zero(); p];
    for i in (0..p).rev() {
        let s: T = (i + 1..p).map(|j| r(i, j) * z[j]).sum();
        z[i] = (y[i] - s) / r(i, i);
    }

    // Rows of R⁻¹ give diag((RᵀR)⁻¹) as squared row norms.
    let mut rinv = vec![vec![T::zero(); p]; p];
    for j in 0..p {
        rinv[j][j] = T::one() / r(j, j);
        for i in (0..j).rev() {
            let s: T = (i + 1..=j).map(|k| r(i, k) * rinv[k][j]).sum();
            rinv[i][j] = -s / r(i, i);
        }
    }

    let mut beta = vec![T::zero(); p];
    let mut inv_gram_diag = vec![T::zero(); p];
    for (k, &orig) in perm.iter().enumerate() {
        let s = scale[orig];
        beta[orig] = z[k] / s;
        let row2: T = rinv[k].iter().map(|&v| v * v).sum();
        inv_gram_diag[orig] = row2 / (s * s);
    }
    Ok(LeastSquares { beta, inv_gram_diag })
}
