//! Dense tableau simplex for `max cᵀz  s.t.  A z ≤ b, z ≥ 0` with `b ≥ 0`.
//!
//! The slack basis is feasible when `b ≥ 0`, so no phase one is needed.
//! Bland's rule keeps the (very degenerate) regular-polygon instances from
//! cycling.

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpError {
    NegativeRhs(usize),
    Unbounded,
    IterationLimit(usize),
}

pub(crate) fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>, LpError> {
    let m = a.len();
    let n = c.len();
    if let Some(i) = b.iter().position(|&v| v < 0.0) {
        return Err(LpError::NegativeRhs(i));
    }
    let width = n + m + 1;
    // Rows 0..m are constraints, row m is the objective row (reduced costs).
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&a[i]);
        row[n + i] = 1.0;
        row[width - 1] = b[i];
    }
    for j in 0..n {
        t[m * width + j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let scale = b.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let eps = 1e-12;
    let max_iter = 50 * (n + m) + 100;

    for _ in 0..max_iter {
        // Bland: lowest-index column with negative reduced cost enters.
        let entering = (0..n + m).find(|&j| t[m * width + j] < -eps);
        let Some(col) = entering else {
            let mut z = vec![0.0; n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    z[bv] = t[i * width + width - 1];
                }
            }
            return Ok(z);
        };

        let mut pivot: Option<(usize, f64)> = None;
        for i in 0..m {
            let aij = t[i * width + col];
            if aij > eps {
                let ratio = t[i * width + width - 1] / aij;
                match pivot {
                    None => pivot = Some((i, ratio)),
                    Some((pi, pr)) => {
                        let tie = (ratio - pr).abs() <= eps * scale;
                        if ratio < pr - eps * scale || (tie && basis[i] < basis[pi]) {
                            pivot = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = pivot else {
            return Err(LpError::Unbounded);
        };

        let p = t[row * width + col];
        for k in 0..width {
            t[row * width + k] /= p;
        }
        let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
        for i in 0..=m {
            if i == row {
                continue;
            }
            let f = t[i * width + col];
            if f != 0.0 {
                let r = &mut t[i * width..(i + 1) * width];
                for k in 0..width {
                    r[k] -= f * pivot_row[k];
                }
            }
        }
        basis[row] = col;
    }
    Err(LpError::IterationLimit(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), value 36
        let z = maximize(
            &[3.0, 5.0],
            &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            &[4.0, 12.0, 18.0],
        )
        .unwrap();
        assert!((z[0] - 2.0).abs() < 1e-12 && (z[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        let r = maximize(&[1.0, 0.0], &[vec![-1.0, 1.0]], &[1.0]);
        assert_eq!(r, Err(LpError::Unbounded));
    }

    #[test]
    fn negative_rhs_rejected() {
        let r = maximize(&[1.0], &[vec![1.0]], &[-1.0]);
        assert_eq!(r, Err(LpError::NegativeRhs(0)));
    }
}
