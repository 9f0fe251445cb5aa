//! Dense solves for the tiny systems this crate needs (dimension p+1, so
//! usually 2 or 3). Gaussian elimination with partial pivoting is plenty.

/// Solves `a x = b` in place. Returns `None` when a pivot collapses relative
/// to the row scale, which callers surface as a rank-deficiency error.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let dim = b.len();
    debug_assert!(a.len() == dim && a.iter().all(|row| row.len() == dim));

    let scale: f64 = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1e-300);

    for col in 0..dim {
        let pivot_row = (col..dim)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);

        for row in col + 1..dim {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..dim {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }

    let mut x = vec![0.0; dim];
    for col in (0..dim).rev() {
        let mut acc = b[col];
        for k in col + 1..dim {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Least squares `min ||X beta - y||` via normal equations, with optional
/// per-row weights. Rows come from a callback so callers avoid materializing
/// the design twice.
pub(crate) fn weighted_least_squares(
    n_rows: usize,
    dim: usize,
    mut row: impl FnMut(usize, &mut Vec<f64>),
    y: &[f64],
    weight: impl Fn(usize) -> f64,
) -> Option<Vec<f64>> {
    debug_assert_eq!(y.len(), n_rows);
    let mut xtx = vec![vec![0.0; dim]; dim];
    let mut xty = vec![0.0; dim];
    let mut buf = Vec::with_capacity(dim);
    for t in 0..n_rows {
        buf.clear();
        row(t, &mut buf);
        debug_assert_eq!(buf.len(), dim);
        let w = weight(t);
        for i in 0..dim {
            let wi = w * buf[i];
            xty[i] += wi * y[t];
            for j in i..dim {
                xtx[i][j] += wi * buf[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            xtx[i][j] = xtx[j][i];
        }
    }
    solve(xtx, xty)
}

/// A unit vector in the null space of the (rows x dim) matrix `mat`, for
/// rows < dim. Returns `None` when elimination finds no free direction
/// (numerically full column rank on the pivoted columns).
pub(crate) fn null_vector(mut mat: Vec<Vec<f64>>, dim: usize) -> Option<Vec<f64>> {
    let rows = mat.len();
    debug_assert!(rows < dim);
    let scale: f64 = mat
        .iter()
        .flatten()
        .fold(1e-300f64, |acc, &v| acc.max(v.abs()));

    // Row-echelon with column pivot bookkeeping.
    let mut pivot_col = vec![usize::MAX; rows];
    let mut rank = 0;
    for col in 0..dim {
        if rank == rows {
            break;
        }
        let best = (rank..rows).max_by(|&i, &j| mat[i][col].abs().total_cmp(&mat[j][col].abs()))?;
        if mat[best][col].abs() <= 1e-12 * scale {
            continue;
        }
        mat.swap(rank, best);
        pivot_col[rank] = col;
        for r in rank + 1..rows {
            let f = mat[r][col] / mat[rank][col];
            if f != 0.0 {
                for k in col..dim {
                    mat[r][k] -= f * mat[rank][k];
                }
            }
        }
        rank += 1;
    }

    // Free column: first column that is no row's pivot.
    let free = (0..dim).find(|c| !pivot_col[..rank].contains(c))?;
    let mut v = vec![0.0; dim];
    v[free] = 1.0;
    for r in (0..rank).rev() {
        let pc = pivot_col[r];
        let mut acc = 0.0;
        for k in pc + 1..dim {
            acc += mat[r][k] * v[k];
        }
        v[pc] = -acc / mat[r][pc];
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    Some(v)
}
