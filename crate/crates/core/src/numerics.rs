//! Dense complex linear algebra.
//!
//! Everything in this crate lives on small truncated Hilbert spaces (a few
//! dozen states, a few hundred Liouville-space components), so a plain
//! row-major matrix with an LU factorization is all that is needed.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative pivot threshold, measured against the largest initial row norm.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting bad shapes and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "empty matrix {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
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

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest row sum of moduli (the induced ∞-norm).
    pub fn max_row_norm(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |A - A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..=i {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale(Complex64::new(0.5, 0.0))
    }

    /// Column-stacking vectorization: `vec(X)[i + j*rows] = X[i, j]`.
    pub fn vectorize(&self) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.rows * self.cols];
        for j in 0..self.cols {
            for i in 0..self.rows {
                v[i + j * self.rows] = self[(i, j)];
            }
        }
        v
    }

    /// Inverse of [`ComplexMatrix::vectorize`] for a `d×d` matrix.
    pub fn unvectorize(v: &[Complex64], d: usize) -> Result<Self> {
        if v.len() != d * d || d == 0 {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} is not a {d}x{d} matrix",
                v.len()
            )));
        }
        Ok(Self::from_fn(d, d, |i, j| v[i + j * d]))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert!(self.is_square());
        let h = self.hermitian_part();
        let m = nalgebra::DMatrix::from_fn(h.rows, h.cols, |r, c| h[(r, c)]);
        let mut eig: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        eig
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl LuFactorization {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                a.rows, a.cols
            )));
        }
        Self::from_row_major(a.rows, a.data.clone(), a.max_row_norm())
    }

    fn from_row_major(n: usize, mut lu: Vec<Complex64>, scale: f64) -> Result<Self> {
        let threshold = PIVOT_TOLERANCE * scale;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot_abs) = (k..n)
                .map(|r| (r, lu[r * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs < threshold || pivot_abs == 0.0 {
                return Err(Error::SingularMatrix {
                    pivot: pivot_abs,
                    threshold,
                });
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot_inv = ONE / lu[k * n + k];
            let (upper, lower) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n..];
            for r in 0..(n - k - 1) {
                let row = &mut lower[r * n..(r + 1) * n];
                let factor = row[k] * pivot_inv;
                if factor == ZERO {
                    continue;
                }
                row[k] = factor;
                for c in (k + 1)..n {
                    row[c] -= factor * pivot_row[c];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n, "rhs length mismatch");
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 1..n {
            let row = &self.lu[r * n..r * n + r];
            let s: Complex64 = row.iter().zip(&x[..r]).map(|(l, y)| l * y).sum();
            x[r] -= s;
        }
        for r in (0..n).rev() {
            let row = &self.lu[r * n..(r + 1) * n];
            let s: Complex64 = row[r + 1..].iter().zip(&x[r + 1..]).map(|(u, y)| u * y).sum();
            x[r] = (x[r] - s) / row[r];
        }
        x
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn solve_dense(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if !a.is_square() || b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "system {}x{} with rhs of length {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    Ok(LuFactorization::new(a)?.solve(b))
}

/// Index of the diagonal element `ρ[k,k]` in a column-stacked `vec(ρ)`.
#[inline]
pub fn diagonal_index(k: usize, d: usize) -> usize {
    k * (d + 1)
}

fn check_generator(l: &ComplexMatrix, d: usize) -> Result<()> {
    if !l.is_square() || l.rows != d * d {
        return Err(Error::DimensionMismatch(format!(
            "generator of size {}x{} for a {d}-dimensional space",
            l.rows, l.cols
        )));
    }
    Ok(())
}

/// Solves `L x = rhs` subject to `Tr(x) = trace`, replacing the equation for
/// the diagonal entry `(k, k)` with the trace functional.
///
/// The trace functional annihilates a trace-preserving generator, so the
/// diagonal rows of `L` are linearly dependent and any one of them can be
/// traded for the constraint.
pub fn solve_trace_constrained(
    l: &ComplexMatrix,
    d: usize,
    rhs: &[Complex64],
    trace: Complex64,
    k: usize,
) -> Result<Vec<Complex64>> {
    check_generator(l, d)?;
    if rhs.len() != d * d || k >= d {
        return Err(Error::DimensionMismatch(format!(
            "rhs length {} / replaced diagonal {k} for dimension {d}",
            rhs.len()
        )));
    }
    let row = diagonal_index(k, d);
    let n = d * d;
    let mut data = l.data.clone();
    data[row * n..(row + 1) * n].fill(ZERO);
    for j in 0..d {
        data[row * n + diagonal_index(j, d)] = ONE;
    }
    let mut b = rhs.to_vec();
    b[row] = trace;
    let scale = (0..n)
        .map(|r| data[r * n..(r + 1) * n].iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    match LuFactorization::from_row_major(n, data, scale) {
        Ok(lu) => Ok(lu.solve(&b)),
        Err(Error::SingularMatrix { .. }) => Err(Error::DegenerateSteadyState),
        Err(e) => Err(e),
    }
}

/// Trace-normalized null vector of a trace-preserving generator, i.e. the
/// column-stacked steady state `vec(ρ)` with `L vec(ρ) = 0` and `Tr ρ = 1`.
pub fn null_vector_trace_normalized(l: &ComplexMatrix, d: usize) -> Result<Vec<Complex64>> {
    null_vector_trace_normalized_at(l, d, 0)
}

/// As [`null_vector_trace_normalized`], replacing the equation of the
/// diagonal entry `(k, k)`.
pub fn null_vector_trace_normalized_at(l: &ComplexMatrix, d: usize, k: usize) -> Result<Vec<Complex64>> {
    let rhs = vec![ZERO; d * d];
    let v = solve_trace_constrained(l, d, &rhs, ONE, k)?;
    let rho = ComplexMatrix::unvectorize(&v, d)?.hermitian_part();
    let tr = rho.trace();
    Ok(rho.scale(ONE / tr).vectorize())
}

/// Smallest index set containing `seed` and closed under the sparsity
/// pattern of `l`: column `j` in the set pulls in every row `i` with
/// `l[i, j] ≠ 0`.
pub fn invariant_closure(l: &ComplexMatrix, seed: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let n = l.rows;
    let mut member = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    for s in seed {
        if !member[s] {
            member[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(j) = queue.pop_front() {
        for i in 0..n {
            if !member[i] && l.data[i * n + j] != ZERO {
                member[i] = true;
                queue.push_back(i);
            }
        }
    }
    (0..n).filter(|&i| member[i]).collect()
}

/// As [`null_vector_trace_normalized`], but solved only on the invariant
/// subspace generated by the diagonal entries, which contains the steady
/// state of a trace-preserving generator.
pub fn sector_null_vector(l: &ComplexMatrix, d: usize) -> Result<Vec<Complex64>> {
    check_generator(l, d)?;
    let sector = invariant_closure(l, (0..d).map(|k| diagonal_index(k, d)));
    let m = sector.len();
    let mut data = Vec::with_capacity(m * m);
    for &r in &sector {
        data.extend(sector.iter().map(|&c| l[(r, c)]));
    }
    let row = sector.iter().position(|&k| k == diagonal_index(0, d)).expect("seeded");
    for (c, &k) in sector.iter().enumerate() {
        data[row * m + c] = if k % (d + 1) == 0 { ONE } else { ZERO };
    }
    let scale = (0..m)
        .map(|r| data[r * m..(r + 1) * m].iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let lu = match LuFactorization::from_row_major(m, data, scale) {
        Ok(lu) => lu,
        Err(Error::SingularMatrix { .. }) => return Err(Error::DegenerateSteadyState),
        Err(e) => return Err(e),
    };
    let mut b = vec![ZERO; m];
    b[row] = ONE;
    let x = lu.solve(&b);
    let mut v = vec![ZERO; d * d];
    for (&k, xk) in sector.iter().zip(x) {
        v[k] = xk;
    }
    let rho = ComplexMatrix::unvectorize(&v, d)?.hermitian_part();
    let tr = rho.trace();
    Ok(rho.scale(ONE / tr).vectorize())
}
