//! Dense LU factorisation with partial pivoting.
//!
//! Storage is dense, but exact zeros are skipped during elimination and the
//! factors are compacted into per-row nonzero lists, so banded systems (the
//! ladder benches) solve in time proportional to the fill rather than `n²`.

#[derive(Debug, Clone)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] += v;
    }

    pub fn copy_from(&mut self, other: &DenseMatrix) {
        self.data.copy_from_slice(&other.data);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c) * x[c]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("matrix is singular at pivot column {column}")]
pub struct SingularMatrix {
    pub column: usize,
}

/// Factors `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    perm: Vec<usize>,
    // Strict lower part of L (unit diagonal implied), per row.
    lower: Vec<Vec<(usize, f64)>>,
    // Upper part excluding diagonal, per row.
    upper: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
}

impl LuFactors {
    pub fn factor(a: &DenseMatrix) -> Result<Self, SingularMatrix> {
        let n = a.n;
        let mut m = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut pivot_cols: Vec<usize> = Vec::with_capacity(n);

        let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let tiny = scale * f64::EPSILON * 1e-6;

        for k in 0..n {
            let (mut best, mut best_val) = (k, m[k * n + k].abs());
            for r in (k + 1)..n {
                let v = m[r * n + k].abs();
                if v > best_val {
                    best = r;
                    best_val = v;
                }
            }
            if best_val <= tiny || !best_val.is_finite() {
                return Err(SingularMatrix { column: k });
            }
            if best != k {
                for c in 0..n {
                    m.swap(k * n + c, best * n + c);
                }
                perm.swap(k, best);
            }
            let pivot = m[k * n + k];
            pivot_cols.clear();
            pivot_cols.extend(((k + 1)..n).filter(|&c| m[k * n + c] != 0.0));
            for r in (k + 1)..n {
                let entry = m[r * n + k];
                if entry == 0.0 {
                    continue;
                }
                let factor = entry / pivot;
                m[r * n + k] = factor;
                for &c in &pivot_cols {
                    m[r * n + c] -= factor * m[k * n + c];
                }
            }
        }

        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        for r in 0..n {
            let row = &m[r * n..(r + 1) * n];
            lower.push(
                (0..r)
                    .filter(|&c| row[c] != 0.0)
                    .map(|c| (c, row[c]))
                    .collect(),
            );
            upper.push(
                ((r + 1)..n)
                    .filter(|&c| row[c] != 0.0)
                    .map(|c| (c, row[c]))
                    .collect(),
            );
            diag.push(row[r]);
        }
        Ok(Self {
            n,
            perm,
            lower,
            upper,
            diag,
        })
    }

    /// Solves `A·x = b` in place of a fresh vector.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        for r in 0..n {
            let mut s = b[self.perm[r]];
            for &(c, v) in &self.lower[r] {
                s -= v * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for &(c, v) in &self.upper[r] {
                s -= v * x[c];
            }
            x[r] = s / self.diag[r];
        }
    }
}
