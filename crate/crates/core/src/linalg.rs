//! Dense least squares via Householder QR, sized for the small
//! Vandermonde-type systems the recovery stage produces (thousands of rows,
//! a few dozen columns).

/// Column-major dense matrix.
#[derive(Clone, Debug)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[c * self.rows + r] = v;
    }

    fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    fn column_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }
}

/// Solution of a least-squares problem, with the numerical rank seen during
/// factorization and the achieved residual norm per right-hand side.
pub struct LstsqOutcome {
    /// One coefficient vector per right-hand side.
    pub solutions: Vec<Vec<f64>>,
    pub rank: usize,
    pub residual_norms: Vec<f64>,
}

/// Minimize `‖A x − b‖₂` for several right-hand sides sharing the matrix.
///
/// Columns are scaled to unit norm before factorization and the solution is
/// unscaled afterwards, which keeps wildly different column magnitudes (the
/// decay-rate prefactors) from wrecking the rank test. The rank is judged
/// against `rank_tol` relative to the largest diagonal of R.
pub fn lstsq(a: &DenseMatrix, rhs: &[Vec<f64>], rank_tol: f64) -> LstsqOutcome {
    let rows = a.rows;
    let cols = a.cols;
    assert!(rows >= 1 && cols >= 1);
    for b in rhs {
        assert_eq!(b.len(), rows);
    }

    // Column scaling.
    let mut scales = vec![1.0f64; cols];
    let mut work = a.clone();
    for c in 0..cols {
        let norm = work.column(c).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            scales[c] = norm;
            for v in work.column_mut(c) {
                *v /= norm;
            }
        }
    }

    let mut b_work: Vec<Vec<f64>> = rhs.to_vec();
    let steps = cols.min(rows);

    // Householder QR, applying reflectors to all right-hand sides as we go.
    for k in 0..steps {
        let mut norm2 = 0.0;
        for r in k..rows {
            let v = work.get(r, k);
            norm2 += v * v;
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if work.get(k, k) >= 0.0 { -norm } else { norm };
        // v = x − alpha e_k, stored in place below the diagonal.
        let vk = work.get(k, k) - alpha;
        work.set(k, k, alpha);
        let mut vnorm2 = vk * vk;
        for r in (k + 1)..rows {
            let v = work.get(r, k);
            vnorm2 += v * v;
        }
        if vnorm2 == 0.0 {
            continue;
        }
        // Apply H = I − 2 v vᵀ / (vᵀv) to the remaining columns and rhs.
        let mut reflector = vec![0.0; rows - k];
        reflector[0] = vk;
        for r in (k + 1)..rows {
            reflector[r - k] = work.get(r, k);
            work.set(r, k, 0.0);
        }
        for c in (k + 1)..cols {
            let mut dot = 0.0;
            for r in k..rows {
                dot += reflector[r - k] * work.get(r, c);
            }
            let coef = 2.0 * dot / vnorm2;
            for r in k..rows {
                let v = work.get(r, c) - coef * reflector[r - k];
                work.set(r, c, v);
            }
        }
        for b in b_work.iter_mut() {
            let mut dot = 0.0;
            for r in k..rows {
                dot += reflector[r - k] * b[r];
            }
            let coef = 2.0 * dot / vnorm2;
            for r in k..rows {
                b[r] -= coef * reflector[r - k];
            }
        }
    }

    // Rank from the diagonal of R.
    let diag_max = (0..steps)
        .map(|k| work.get(k, k).abs())
        .fold(0.0f64, f64::max);
    let threshold = rank_tol * diag_max.max(f64::MIN_POSITIVE);
    let rank = (0..steps)
        .filter(|&k| work.get(k, k).abs() > threshold)
        .count();

    // Back substitution (rank-deficient pivots get zero coefficients).
    let mut solutions = Vec::with_capacity(rhs.len());
    let mut residual_norms = Vec::with_capacity(rhs.len());
    for b in &b_work {
        let mut x = vec![0.0; cols];
        for k in (0..steps).rev() {
            let rkk = work.get(k, k);
            if rkk.abs() <= threshold {
                continue;
            }
            let mut sum = b[k];
            for c in (k + 1)..cols {
                sum -= work.get(k, c) * x[c];
            }
            x[k] = sum / rkk;
        }
        for (xi, s) in x.iter_mut().zip(&scales) {
            *xi /= s;
        }
        let tail: f64 = b[steps..].iter().map(|v| v * v).sum::<f64>();
        // Residual includes skipped rank-deficient pivot rows.
        let skipped: f64 = (0..steps)
            .filter(|&k| work.get(k, k).abs() <= threshold)
            .map(|k| b[k] * b[k])
            .sum();
        residual_norms.push((tail + skipped).sqrt());
        solutions.push(x);
    }

    LstsqOutcome {
        solutions,
        rank,
        residual_norms,
    }
}
