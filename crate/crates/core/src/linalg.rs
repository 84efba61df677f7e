//! Small dense complex linear algebra: LU with partial pivoting,
//! Householder QR, triangular solves and pairwise summation.
//!
//! Matrices are column-major. Sizes here are desk scale (a few hundred),
//! so everything is straightforward loops.

use num_complex::Complex64;
use num_traits::Zero;

/// Column-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "column length");
            data.extend_from_slice(c);
        }
        CMatrix { rows, cols: columns.len(), data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn set_col(&mut self, j: usize, values: &[Complex64]) {
        self.col_mut(j).copy_from_slice(values);
    }

    pub fn conj_transpose(&self) -> CMatrix {
        let mut t = CMatrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b.is_zero() {
                    continue;
                }
                let a = self.col(k);
                let o = out.col_mut(j);
                for i in 0..a.len() {
                    o[i] += a[i] * b;
                }
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise maximum of `|self - other|`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[j * self.rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[j * self.rows + i]
    }
}

/// `PA = LU` with partial pivoting; the log-modulus of the determinant is
/// accumulated from the pivots.
#[derive(Clone, Debug)]
pub struct LuFactor {
    lu: CMatrix,
    /// Row `i` of `PA` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    log_abs_det: f64,
    singular: bool,
}

impl LuFactor {
    pub fn new(mut a: CMatrix) -> Self {
        let n = a.rows;
        assert_eq!(n, a.cols, "LU needs a square matrix");
        let mut perm: Vec<usize> = (0..n).collect();
        let mut log_abs_det = 0.0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = a[(p, j)];
                    a[(p, j)] = a[(k, j)];
                    a[(k, j)] = t;
                }
            }
            let pivot = a[(k, k)];
            log_abs_det += pmax.ln();
            for i in k + 1..n {
                a[(i, k)] /= pivot;
            }
            for j in k + 1..n {
                let akj = a[(k, j)];
                if akj.is_zero() {
                    continue;
                }
                for i in k + 1..n {
                    let l = a[(i, k)];
                    a[(i, j)] -= l * akj;
                }
            }
        }
        if singular {
            log_abs_det = f64::NEG_INFINITY;
        }
        LuFactor { lu: a, perm, log_abs_det, singular }
    }

    /// `log|det A|`, or `-inf` when a zero pivot column was met.
    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.rows;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                x[i] = x[i] - l * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                x[i] = x[i] - u * x[k];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    /// Solves `Aᵀ x = b` (plain transpose, no conjugation).
    pub fn solve_transpose(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.rows;
        let mut t = b.to_vec();
        // Uᵀ s = b
        for i in 0..n {
            for k in 0..i {
                let u = self.lu[(k, i)];
                t[i] = t[i] - u * t[k];
            }
            t[i] /= self.lu[(i, i)];
        }
        // Lᵀ t = s
        for i in (0..n).rev() {
            for k in i + 1..n {
                let l = self.lu[(k, i)];
                t[i] = t[i] - l * t[k];
            }
        }
        let mut x = vec![Complex64::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = t[i];
        }
        x
    }
}

/// Upper-triangular factor of a Householder QR of an `m × k` matrix,
/// normalized so the diagonal is real and nonnegative. Rows beyond `m`
/// (when `m < k`) are zero.
pub fn householder_r(mut a: CMatrix) -> CMatrix {
    let m = a.rows;
    let k = a.cols;
    let mut r = CMatrix::zeros(k, k);
    for j in 0..k.min(m) {
        let norm = a.col(j)[j..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(j, j)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = a.col(j)[j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 > 0.0 {
            for c in j..k {
                let col = &mut a.col_mut(c)[j..];
                let s: Complex64 = v.iter().zip(col.iter()).map(|(vi, ci)| vi.conj() * ci).sum();
                let f = s * (2.0 / vnorm2);
                for (ci, vi) in col.iter_mut().zip(&v) {
                    *ci -= vi * f;
                }
            }
        }
        a[(j, j)] = alpha;
    }
    for j in 0..k {
        for i in 0..=j.min(m.saturating_sub(1)) {
            if i < m {
                r[(i, j)] = a[(i, j)];
            }
        }
    }
    for i in 0..k {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            let ph = (d / d.norm()).conj();
            for j in i..k {
                r[(i, j)] *= ph;
            }
            r[(i, i)] = Complex64::new(r[(i, i)].re, 0.0);
        }
    }
    r
}

/// Solves the row system `y R = m` for upper-triangular `R`.
pub fn solve_row_upper(r: &CMatrix, m: &[Complex64]) -> Vec<Complex64> {
    let k = r.cols;
    let mut y = m.to_vec();
    for j in 0..k {
        let mut s = y[j];
        for i in 0..j {
            s -= y[i] * r[(i, j)];
        }
        y[j] = s / r[(j, j)];
    }
    y
}

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation; fixed association order, so results do
/// not depend on how the terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..n` without materializing the terms
/// when `n` is small; same association as [`pairwise_sum`].
pub fn pairwise_sum_by(n: usize, f: &dyn Fn(usize) -> f64) -> f64 {
    fn rec(lo: usize, hi: usize, f: &dyn Fn(usize) -> f64) -> f64 {
        if hi - lo <= PAIRWISE_BLOCK {
            return (lo..hi).map(f).sum();
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, f)
}
