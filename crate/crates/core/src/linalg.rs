//! Minimal dense linear algebra: k-dimensional Newton systems, small
//! least-squares fits, independent-row selection, and null-space bases.
//! Solver systems here are tiny (k ≤ |X|, both small), so simplicity wins
//! over factorization libraries.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
/// `None` when a pivot falls below the relative singularity threshold.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let scale = a
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let tol = scale * 1e-13;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < tol {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for j in col..n {
                    a[row][j] -= factor * a[col][j];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in row + 1..n {
            acc -= a[row][j] * x[j];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Least squares `min ‖A x − b‖₂` (m×n, m ≥ n or not) via normal equations,
/// retried with a small ridge when the Gram matrix is singular.
pub(crate) fn lstsq(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = a.len();
    if m == 0 {
        return None;
    }
    let n = a[0].len();
    let mut gram = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for i in 0..m {
        for j in 0..n {
            rhs[j] += a[i][j] * b[i];
            for l in j..n {
                gram[j][l] += a[i][j] * a[i][l];
            }
        }
    }
    for j in 0..n {
        for l in 0..j {
            gram[j][l] = gram[l][j];
        }
    }
    if let Some(x) = solve(gram.clone(), rhs.clone()) {
        return Some(x);
    }
    let trace: f64 = (0..n).map(|j| gram[j][j]).sum();
    let ridge = trace / n as f64 * 1e-12 + 1e-300;
    for (j, row) in gram.iter_mut().enumerate() {
        row[j] += ridge;
    }
    solve(gram, rhs)
}

/// Indices of a maximal linearly independent subset of rows, first row wins,
/// by modified Gram-Schmidt with re-orthogonalization.
pub(crate) fn independent_rows(rows: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut retained = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if let Some(unit) = orthogonal_residual(row, &basis, tol) {
            basis.push(unit);
            retained.push(i);
        }
    }
    retained
}

/// Orthonormal basis of the orthogonal complement of span(rows) in ℝⁿ.
pub(crate) fn null_space(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        if let Some(unit) = orthogonal_residual(row, &basis, 1e-10) {
            basis.push(unit);
        }
    }
    let rank = basis.len();
    let mut complement = Vec::new();
    for j in 0..n {
        if rank + complement.len() == n {
            break;
        }
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let mut all = basis.clone();
        all.extend(complement.iter().cloned());
        if let Some(unit) = orthogonal_residual(&e, &all, 1e-8) {
            complement.push(unit);
        }
    }
    complement
}

/// Residual of `v` against an orthonormal `basis`, re-orthogonalized once;
/// `None` when the residual norm is at or below `tol`.
fn orthogonal_residual(v: &[f64], basis: &[Vec<f64>], tol: f64) -> Option<Vec<f64>> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = dot(&r, b);
            for (ri, bi) in r.iter_mut().zip(b.iter()) {
                *ri -= c * bi;
            }
        }
    }
    let nr = norm(&r);
    if nr <= tol {
        return None;
    }
    for ri in r.iter_mut() {
        *ri /= nr;
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(a, vec![5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn solve_detects_singularity() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(a, vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn lstsq_overdetermined() {
        // fit y = 2x + 1 through exact points
        let a = vec![
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![2.0, 1.0],
            vec![3.0, 1.0],
        ];
        let b = vec![1.0, 3.0, 5.0, 7.0];
        let x = lstsq(&a, &b).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-10);
        assert!((x[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn independent_rows_drops_duplicates() {
        let rows = vec![
            vec![1.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert_eq!(independent_rows(&rows, 1e-10), vec![0, 2]);
    }

    #[test]
    fn null_space_dimensions_and_orthogonality() {
        let rows = vec![vec![1.0, 1.0, 1.0, 1.0], vec![1.0, -1.0, 0.0, 0.0]];
        let ns = null_space(&rows, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((norm(v) - 1.0).abs() < 1e-12);
            for r in &rows {
                assert!(dot(v, r).abs() < 1e-10);
            }
        }
        assert!(dot(&ns[0], &ns[1]).abs() < 1e-10);
    }
}
