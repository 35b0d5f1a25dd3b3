//! Small dense and banded solvers for desk-scale systems.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {0:.3e} at row {1})")]
    NotPositiveDefinite(f64, usize),
    #[error("tridiagonal pivot vanished at row {0}")]
    SingularTridiagonal(usize),
    #[error("Jacobi sweep limit reached")]
    JacobiNoConvergence,
}

/// Solve A x = b for symmetric positive definite dense A (row-major).
pub fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = b.len();
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(LinalgError::NotPositiveDefinite(s, i));
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0f64; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Ok(x)
}

/// Full eigensystem of a symmetric dense matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending with matching orthonormal eigenvectors.
pub fn jacobi_eigen(mat: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>), LinalgError> {
    let n = mat.len();
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    let mut v = vec![vec![0.0f64; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() < 1e-14 * frobenius(&a).max(1e-300) {
            let mut evals: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| evals[x].partial_cmp(&evals[y]).unwrap());
            let vecs: Vec<Vec<f64>> = order
                .iter()
                .map(|&j| (0..n).map(|k| v[k][j]).collect())
                .collect();
            evals.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return Ok((evals, vecs));
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(LinalgError::JacobiNoConvergence)
}

fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}

/// Thomas algorithm for a general tridiagonal system.
pub fn thomas_solve(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, LinalgError> {
    let n = diag.len();
    assert!(n > 0 && sub.len() + 1 == n && sup.len() + 1 == n && rhs.len() == n);
    let mut c = vec![0.0f64; n];
    let mut d = vec![0.0f64; n];
    let mut denom = diag[0];
    if denom.abs() < 1e-300 {
        return Err(LinalgError::SingularTridiagonal(0));
    }
    if n > 1 {
        c[0] = sup[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i - 1] * c[i - 1];
        if denom.abs() < 1e-300 || !denom.is_finite() {
            return Err(LinalgError::SingularTridiagonal(i));
        }
        if i + 1 < n {
            c[i] = sup[i] / denom;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0f64; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_small_system() {
        let a = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let x = cholesky_solve(&a, &[8.0, 7.0]).unwrap();
        assert!((x[0] - 1.25).abs() < 1e-14);
        assert!((x[1] - 1.5).abs() < 1e-14);
        let bad = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(cholesky_solve(&bad, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn jacobi_reproduces_spectrum() {
        let a = vec![
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ];
        let (evals, evecs) = jacobi_eigen(&a).unwrap();
        let sqrt2 = 2.0f64.sqrt();
        for (got, want) in evals.iter().zip([2.0 - sqrt2, 2.0, 2.0 + sqrt2]) {
            assert!((got - want).abs() < 1e-12);
        }
        for (j, vec) in evecs.iter().enumerate() {
            for i in 0..3 {
                let av: f64 = (0..3).map(|k| a[i][k] * vec[k]).sum();
                assert!((av - evals[j] * vec[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn thomas_matches_dense() {
        let sub = [1.0, -2.0, 0.5];
        let diag = [4.0, 5.0, 6.0, 5.0];
        let sup = [-1.0, 2.0, 1.5];
        let x = thomas_solve(&sub, &diag, &sup, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        // residual check
        let n = 4;
        let b = [1.0, 2.0, 3.0, 4.0];
        for i in 0..n {
            let mut r = diag[i] * x[i] - b[i];
            if i > 0 {
                r += sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                r += sup[i] * x[i + 1];
            }
            assert!(r.abs() < 1e-13);
        }
    }
}
