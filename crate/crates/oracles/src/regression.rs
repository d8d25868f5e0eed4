//! Least squares by forming and solving the normal equations directly.

/// Solves `min ‖y − Xβ‖` via `XᵀX β = Xᵀy`. `rows` holds the design rows,
/// intercept column included by the caller.
///
/// Columns are standardized before the Gram matrix is formed (otherwise the
/// squared conditioning of raw sensor × RH products swamps f64), the system
/// is solved by Gaussian elimination with partial pivoting, and two rounds
/// of iterative refinement on the normal equations polish the result.
pub fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let n = rows.len();
    let p = rows.first()?.len();
    if n < p || y.len() != n {
        return None;
    }
    let scale: Vec<f64> = (0..p)
        .map(|j| (rows.iter().map(|r| r[j] * r[j]).sum::<f64>() / n as f64).sqrt())
        .collect();
    if scale.contains(&0.0) {
        return None;
    }
    let z: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(&scale).map(|(v, s)| v / s).collect())
        .collect();

    let mut gram = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    for (row, &yi) in z.iter().zip(y) {
        for a in 0..p {
            rhs[a] += row[a] * yi;
            for b in 0..p {
                gram[a][b] += row[a] * row[b];
            }
        }
    }

    let mut beta = gauss_solve(&gram, &rhs)?;
    for _ in 0..2 {
        // residual of the normal equations: Zᵀ(y − Zβ)
        let mut r = vec![0.0; p];
        for (row, &yi) in z.iter().zip(y) {
            let fit: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let e = yi - fit;
            for a in 0..p {
                r[a] += row[a] * e;
            }
        }
        let delta = gauss_solve(&gram, &r)?;
        for (b, d) in beta.iter_mut().zip(delta) {
            *b += d;
        }
    }
    Some(beta.iter().zip(&scale).map(|(b, s)| b / s).collect())
}

fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let p = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for row in col + 1..p {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col].clone();
            for (dst, src) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
        }
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][p] - s) / m[i][i];
    }
    Some(x)
}

/// Two-sided OLS prediction interval `(lower, upper)` at `x0`, from the
/// textbook formula ŷ ± t·s·√(1 + 1/n + (x0 − x̄)²/Sxx). `t` is supplied by
/// the caller.
pub fn ols_prediction_interval(x: &[f64], y: &[f64], x0: f64, t: f64) -> (f64, f64) {
    let n = x.len() as f64;
    let xbar = x.iter().sum::<f64>() / n;
    let ybar = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xbar).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xbar) * (b - ybar)).sum();
    let slope = sxy / sxx;
    let icpt = ybar - slope * xbar;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let s = (sse / (n - 2.0)).sqrt();
    let yhat = icpt + slope * x0;
    let half = t * s * (1.0 + 1.0 / n + (x0 - xbar).powi(2) / sxx).sqrt();
    (yhat - half, yhat + half)
}
