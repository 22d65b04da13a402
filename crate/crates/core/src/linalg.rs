//! Dense real matrix kernels.
//!
//! Everything is stored full and row-major, symmetric matrices included.
//! General products go through `matrixmultiply`'s blocked GEMM; the
//! factorizations and solves are written out here.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// A pivot at or below this multiple of the largest diagonal entry marks the
/// matrix as not positive definite.
pub const PD_PIVOT_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major values, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Convenience constructor from nested rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        gemm(
            (self.rows, self.cols, other.cols),
            (&self.data, self.cols as isize, 1),
            (&other.data, other.cols as isize, 1),
            &mut out.data,
        );
        out
    }

    /// `selfᵀ * other` without materializing the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.rows, other.rows,
            "tr_matmul: ({}x{})ᵀ * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.cols, other.cols);
        gemm(
            (self.cols, self.rows, other.cols),
            (&self.data, 1, self.cols as isize),
            (&other.data, other.cols as isize, 1),
            &mut out.data,
        );
        out
    }

    /// `self * otherᵀ` without materializing the transpose.
    pub fn matmul_tr(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.cols,
            "matmul_tr: {}x{} * ({}x{})ᵀ",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.rows);
        gemm(
            (self.rows, self.cols, other.rows),
            (&self.data, self.cols as isize, 1),
            (&other.data, 1, other.cols as isize),
            &mut out.data,
        );
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Euclidean inner product `Σᵢⱼ AᵢⱼBᵢⱼ`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "inner dimension"
        );
        dot(&self.data, &other.data)
    }

    pub fn frobenius(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale_mut(s);
        out
    }

    pub fn scale_mut(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "axpy dimension"
        );
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// `self + s * other` as a new matrix.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(s, other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-1.0, other)
    }

    pub fn add_to_diagonal(&mut self, s: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += s;
        }
    }

    pub fn zero_diagonal(&mut self) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] = 0.0;
        }
    }

    /// Replaces a square matrix with `(M + Mᵀ)/2`.
    pub fn symmetrize(&mut self) {
        assert!(self.is_square(), "symmetrize needs a square matrix");
        let n = self.rows;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    /// Largest `|Mᵢⱼ − Mⱼᵢ|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square(), "asymmetry needs a square matrix");
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.is_square() && self.asymmetry() <= rel_tol
    }

    /// Largest 2-norm over the columns, `‖M‖_{2,∞}`.
    pub fn max_column_norm(&self) -> f64 {
        let mut sq = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (acc, v) in sq.iter_mut().zip(self.row(i)) {
                *acc += v * v;
            }
        }
        sq.into_iter().fold(0.0_f64, f64::max).sqrt()
    }

    /// Writes the matrix CSV format: a `rows,cols` header then one line per row.
    /// `f64`'s `Display` is the shortest round-tripping decimal, so a read back
    /// is bit-exact.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{},{}", self.rows, self.cols)?;
        let mut line = String::new();
        for i in 0..self.rows {
            line.clear();
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                // -0.0 prints as "-0", which parses back to -0.0
                line.push_str(&v.to_string());
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (rows, cols) = match lines.next() {
            Some((_, line)) => {
                let line = line?;
                let fields: Vec<&str> = line.trim().split(',').collect();
                if fields.len() != 2 {
                    return Err(malformed(1, 1, "header must be \"rows,cols\""));
                }
                let parse_dim = |s: &str, column: usize| -> Result<usize> {
                    match s.trim().parse::<usize>() {
                        Ok(v) if v > 0 => Ok(v),
                        _ => Err(malformed(1, column, &format!("invalid dimension {s:?}"))),
                    }
                };
                (parse_dim(fields[0], 1)?, parse_dim(fields[1], 2)?)
            }
            None => return Err(malformed(1, 1, "empty file")),
        };

        let mut data = Vec::with_capacity(rows * cols);
        let mut seen = 0;
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            if seen == rows {
                return Err(malformed(lineno, 1, &format!("more than {rows} data rows")));
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != cols {
                return Err(malformed(
                    lineno,
                    fields.len().min(cols) + 1,
                    &format!("expected {cols} values, found {}", fields.len()),
                ));
            }
            for (j, field) in fields.iter().enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| malformed(lineno, j + 1, &format!("not a number: {field:?}")))?;
                if !v.is_finite() {
                    return Err(malformed(lineno, j + 1, "non-finite value"));
                }
                data.push(v);
            }
            seen += 1;
        }
        if seen != rows {
            return Err(malformed(
                seen + 2,
                1,
                &format!("expected {rows} data rows, found {seen}"),
            ));
        }
        Ok(Self { rows, cols, data })
    }
}

fn malformed(line: usize, column: usize, message: &str) -> Error {
    Error::MalformedFile {
        line,
        column,
        message: message.to_string(),
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators let the compiler vectorize the reduction
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

/// `c = a * b` for `(m, k, n)` shaped operands given as (data, row stride, col stride).
fn gemm(
    (m, k, n): (usize, usize, usize),
    (a, rsa, csa): (&[f64], isize, isize),
    (b, rsb, csb): (&[f64], isize, isize),
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() == m * n);
    // SAFETY: the strides describe exactly the m×k, k×n and m×n row/column
    // major layouts of the slices, whose lengths were checked by the callers.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Lower-triangular `L` with `L·Lᵀ = M`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    lower: DenseMatrix,
}

/// Cholesky factorization of a symmetric matrix. Only the lower triangle of
/// `m` is read.
///
/// Fails with [`Error::NotPositiveDefinite`] as soon as a pivot drops to
/// `PD_PIVOT_TOL` times the largest diagonal entry or below.
pub fn cholesky(m: &DenseMatrix) -> Result<CholeskyFactor> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cholesky of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let max_diag = m.diagonal().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !(max_diag > 0.0) {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            pivot: max_diag,
        });
    }
    let threshold = PD_PIVOT_TOL * max_diag;

    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let row_j = &l.data[j * n..j * n + j];
        let pivot = m[(j, j)] - dot(row_j, row_j);
        if !(pivot > threshold) {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let ljj = pivot.sqrt();
        l.data[j * n + j] = ljj;
        let inv = 1.0 / ljj;
        for i in (j + 1)..n {
            let (upper, lower) = l.data.split_at_mut(i * n);
            let row_j = &upper[j * n..j * n + j];
            let row_i = &mut lower[..n];
            let s = m[(i, j)] - dot(&row_i[..j], row_j);
            row_i[j] = s * inv;
        }
    }
    Ok(CholeskyFactor { lower: l })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    pub fn into_lower(self) -> DenseMatrix {
        self.lower
    }

    /// `L·Lᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.lower.matmul_tr(&self.lower)
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let row = self.lower.row(i);
            y[i] = (b[i] - dot(&row[..i], &y[..i])) / row[i];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(y.len(), n);
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            x[i] /= self.lower[(i, i)];
            let xi = x[i];
            let row = self.lower.row(i);
            for k in 0..i {
                x[k] -= row[k] * xi;
            }
        }
        x
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `L⁻¹`, lower triangular, built one row at a time.
    pub fn lower_inverse(&self) -> DenseMatrix {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut acc = vec![0.0; n];
        for i in 0..n {
            acc[..=i].iter_mut().for_each(|v| *v = 0.0);
            acc[i] = 1.0;
            let row = self.lower.row(i);
            for k in 0..i {
                let lik = row[k];
                if lik != 0.0 {
                    let inv_row = &inv.data[k * n..k * n + k + 1];
                    for (a, v) in acc[..=k].iter_mut().zip(inv_row) {
                        *a -= lik * v;
                    }
                }
            }
            let d = 1.0 / row[i];
            for (dst, a) in inv.row_mut(i)[..=i].iter_mut().zip(&acc[..=i]) {
                *dst = a * d;
            }
        }
        inv
    }

    /// `M⁻¹ = L⁻ᵀ·L⁻¹`, returned exactly symmetric.
    pub fn inverse(&self) -> DenseMatrix {
        let linv = self.lower_inverse();
        let mut inv = linv.tr_matmul(&linv);
        inv.symmetrize();
        inv
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.lower.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    pub fn determinant(&self) -> f64 {
        self.log_det().exp()
    }
}

/// Inverse of a symmetric positive definite matrix through its Cholesky factor.
pub fn chol_inverse(f: &CholeskyFactor) -> DenseMatrix {
    f.inverse()
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, eigenvectors as
/// the columns of `vectors` in matching order.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Cyclic Jacobi eigensolver.
///
/// Meant for diagnostics and bound computations on small matrices; it costs
/// several `n³` sweeps. Panics if it fails to converge within 100 sweeps,
/// which would indicate a defect rather than a property of the input.
pub fn sym_eigen(m: &DenseMatrix) -> SymEigen {
    assert!(m.is_square(), "sym_eigen needs a square matrix");
    let n = m.rows();
    let mut a = m.clone();
    a.symmetrize();
    let mut v = DenseMatrix::identity(n);
    let target = JACOBI_TOL * a.frobenius();

    let off_norm = |a: &DenseMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= target;
    let mut sweep = 0;
    while !converged {
        if sweep == JACOBI_MAX_SWEEPS {
            panic!("Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps");
        }
        sweep += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_norm(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        DenseMatrix::from_fn(rows, cols, |_, _| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    fn random_spd(n: usize, seed: u64) -> DenseMatrix {
        let b = lcg_matrix(n, n, seed);
        let mut m = b.tr_matmul(&b);
        m.add_to_diagonal(0.5);
        m.symmetrize();
        m
    }

    fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
            (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
        })
    }

    #[test]
    fn cholesky_identity() {
        let f = cholesky(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(f.lower(), &DenseMatrix::identity(2));
    }

    #[test]
    fn cholesky_hand_checked() {
        let m = DenseMatrix::from_rows(&[[4.0, 2.0], [2.0, 5.0]]);
        let f = cholesky(&m).unwrap();
        assert_eq!(
            f.lower(),
            &DenseMatrix::from_rows(&[[2.0, 0.0], [1.0, 2.0]])
        );
        assert_eq!(f.reconstruct(), m);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]);
        assert!(matches!(
            cholesky(&m),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn cholesky_rejects_singular_and_non_square() {
        let singular = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        assert!(cholesky(&singular).is_err());
        assert!(cholesky(&DenseMatrix::zeros(2, 3)).is_err());
        assert!(cholesky(&DenseMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn inverse_examples() {
        let f = cholesky(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(chol_inverse(&f), DenseMatrix::identity(3));

        let f = cholesky(&DenseMatrix::from_rows(&[[4.0, 0.0], [0.0, 1.0]])).unwrap();
        assert_eq!(
            chol_inverse(&f),
            DenseMatrix::from_rows(&[[0.25, 0.0], [0.0, 1.0]])
        );
    }

    #[test]
    fn inverse_random_spd_multiplies_back() {
        let m = random_spd(5, 3);
        let p = chol_inverse(&cholesky(&m).unwrap());
        let err = p.matmul(&m).sub(&DenseMatrix::identity(5)).frobenius();
        assert!(err < 1e-8, "{err}");
        assert_eq!(p.asymmetry(), 0.0);
    }

    #[test]
    fn triangular_solves() {
        let m = random_spd(7, 11);
        let f = cholesky(&m).unwrap();
        let b: Vec<f64> = (0..7).map(|i| i as f64 - 3.0).collect();
        let x = f.solve(&b);
        let r = m.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-10);
        }
    }

    #[test]
    fn eigen_examples() {
        let e = sym_eigen(&DenseMatrix::identity(2));
        assert_eq!(e.values, vec![1.0, 1.0]);

        let e = sym_eigen(&DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]));
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_reconstructs_random_symmetric() {
        let mut m = lcg_matrix(6, 6, 42);
        m.symmetrize();
        let e = sym_eigen(&m);
        let q = &e.vectors;
        let lambda = DenseMatrix::from_diagonal(&e.values);
        let recon = q.matmul(&lambda).matmul_tr(q);
        assert!(recon.sub(&m).frobenius() < 1e-8);
        let qtq = q.tr_matmul(q);
        assert!(qtq.sub(&DenseMatrix::identity(6)).frobenius() < 1e-8);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        for (i, &l) in e.values.iter().enumerate() {
            let v: Vec<f64> = (0..6).map(|r| q[(r, i)]).collect();
            let mv = m.matvec(&v);
            for r in 0..6 {
                assert!((mv[r] - l * v[r]).abs() < 1e-8 * m.frobenius());
            }
        }
    }

    #[test]
    fn product_helpers() {
        let b = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(DenseMatrix::identity(2).matmul(&b), b);
        let d = DenseMatrix::from_rows(&[[3.0, 0.0], [0.0, 4.0]]);
        assert_eq!(DenseMatrix::identity(2).inner(&d), 7.0);
        assert_eq!(
            DenseMatrix::from_rows(&[[3.0, 4.0], [0.0, 0.0]]).frobenius(),
            5.0
        );
        assert_eq!(
            b.transpose(),
            DenseMatrix::from_rows(&[[1.0, 3.0], [2.0, 4.0]])
        );
    }

    #[test]
    fn gemm_variants_match_naive() {
        let a = lcg_matrix(7, 5, 1);
        let b = lcg_matrix(5, 9, 2);
        let c = lcg_matrix(7, 9, 3);
        let reference = naive_matmul(&a, &b);
        assert!(a.matmul(&b).sub(&reference).max_abs() < 1e-13);
        assert!(a.transpose().tr_matmul(&b).sub(&reference).max_abs() < 1e-13);
        assert!(a.matmul_tr(&b.transpose()).sub(&reference).max_abs() < 1e-13);
        assert!(
            a.tr_matmul(&c)
                .sub(&naive_matmul(&a.transpose(), &c))
                .max_abs()
                < 1e-13
        );
    }

    #[test]
    fn column_norm() {
        let a = DenseMatrix::from_rows(&[[3.0, 1.0], [4.0, 0.0]]);
        assert_eq!(a.max_column_norm(), 5.0);
    }

    #[test]
    fn csv_errors_carry_position() {
        let bad = "2,3\n1,2\n";
        match DenseMatrix::read_csv(bad.as_bytes()) {
            Err(Error::MalformedFile { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let bad = "1,2\n1,x\n";
        match DenseMatrix::read_csv(bad.as_bytes()) {
            Err(Error::MalformedFile { line, column, .. }) => assert_eq!((line, column), (2, 2)),
            other => panic!("{other:?}"),
        }
        assert!(DenseMatrix::read_csv("0,2\n".as_bytes()).is_err());
        assert!(DenseMatrix::read_csv("2,1\n1\n".as_bytes()).is_err());
        assert!(DenseMatrix::read_csv("".as_bytes()).is_err());
    }

    #[test]
    fn from_row_major_rejects_nan() {
        assert!(DenseMatrix::from_row_major(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::from_row_major(1, 2, vec![1.0]).is_err());
    }
}
