//! Small dense linear algebra: one-sided Jacobi SVD and an LU determinant.
//! Only used for the 12x12 identifiability matrices, so simplicity and
//! accuracy beat asymptotics here.

/// Singular values of a square matrix, descending. One-sided Jacobi:
/// orthogonalize column pairs by plane rotations until every pair is
/// numerically orthogonal; the column norms are then the singular values.
/// Relative accuracy is near machine precision even for graded matrices.
pub fn singular_values<const N: usize>(a: &[[f64; N]; N]) -> [f64; N] {
    // Work on columns: cols[j][i] = a[i][j].
    let mut cols = [[0.0f64; N]; N];
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            cols[j][i] = *v;
        }
    }

    let eps = f64::EPSILON;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..N {
            for q in (p + 1)..N {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for (vp, vq) in cols[p].iter().zip(&cols[q]) {
                    app += vp * vp;
                    aqq += vq * vq;
                    apq += vp * vq;
                }
                if apq.abs() <= eps * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (head, tail) = cols.split_at_mut(q);
                for (vp, vq) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (a, b) = (*vp, *vq);
                    *vp = c * a - s * b;
                    *vq = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv = [0.0f64; N];
    for (j, col) in cols.iter().enumerate() {
        sv[j] = col.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Determinant by LU with partial pivoting. Exactly zero when elimination
/// produces a zero pivot (e.g. repeated rows cancel exactly).
pub fn determinant<const N: usize>(a: &[[f64; N]; N]) -> f64 {
    let mut m = *a;
    let mut det = 1.0f64;
    for col in 0..N {
        let mut pivot = col;
        for row in (col + 1)..N {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in (col + 1)..N {
            let factor = m[row][col] / m[col][col];
            if factor != 0.0 {
                let (pivot_rows, rest) = m.split_at_mut(row);
                let pivot_row = &pivot_rows[col];
                for (v, pv) in rest[0][col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= factor * pv;
                }
            }
        }
    }
    det
}
