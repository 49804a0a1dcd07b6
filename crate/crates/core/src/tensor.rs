//! Dense complex matrices, Kronecker products, chain embeddings and eigenvalues.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Default absolute tolerance for [`ComplexMatrix::approx_eq`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// Local dimension of every chain in this crate.
pub const LOCAL_DIM: usize = 4;

#[inline]
pub fn cplx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("dimension mismatch: {0}x{1} against {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("operator dimension {0} is not a power of the local dimension")]
    NotLocal(usize),
    #[error("site {site} out of range for a chain of length {length}")]
    SiteOutOfRange { site: usize, length: usize },
    #[error("operator of range {range} does not fit in a chain of length {length}")]
    RangeTooLarge { range: usize, length: usize },
    #[error("operator at site {site} wraps the boundary of an open chain")]
    WrapWithoutPeriodic { site: usize },
    #[error("chain matrix has dimension {got}, expected 4^{length} = {expected}")]
    ChainDimension { length: usize, expected: usize, got: usize },
    #[error("swap operator is not a signed permutation")]
    NotSignedPermutation,
    #[error("eigenvalue iteration did not converge for a {dim}x{dim} matrix within {iterations} iterations")]
    NoConvergence { dim: usize, iterations: usize },
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(16) {
            write!(f, "  ")?;
            for c in 0..self.cols.min(16) {
                let z = self[(r, c)];
                write!(f, "{:>7.3}{:+.3}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = real(1.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, TensorError> {
        if data.len() != rows * cols {
            return Err(TensorError::EntryCount { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self, TensorError> {
        Self::from_vec(rows, cols, values.iter().map(|&x| real(x)).collect())
    }

    /// Square matrix built by accumulating `(row, col, value)` triples.
    pub fn from_entries(n: usize, entries: &[(usize, usize, C64)]) -> Self {
        let mut m = Self::zeros(n, n);
        for &(r, c, v) in entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self, TensorError> {
        if self.cols != other.rows {
            return Err(TensorError::DimensionMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![C64::new(0.0, 0.0); n * p];
        for i in 0..n {
            let row = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let orow = &other.data[k * p..(k + 1) * p];
                for (o, &b) in row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { rows: n, cols: p, data: out })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(real(s))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_same(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_same(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &Self, s: C64) {
        assert!(self.rows == other.rows && self.cols == other.cols, "add_scaled: shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    fn check_same(&self, other: &Self) -> Result<(), TensorError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(TensorError::DimensionMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise distance; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (r..self.cols).all(|c| (self[(r, c)] - self[(c, r)].conj()).norm() <= tol))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    /// Inverse through LU; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        self.to_nalgebra().try_inverse().map(|m| Self::from_nalgebra(&m))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

/// Kronecker product, `(A⊗B)[d i + k, d j + l] = A[i,j] B[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows, b.cols);
    let mut out = ComplexMatrix::zeros(a.rows * br, a.cols * bc);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a[(i, j)];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Permutation operator on `C^d ⊗ C^d`.
pub fn permutation_operator(d: usize) -> ComplexMatrix {
    assert!(d >= 1, "local dimension must be positive");
    let mut p = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            p[(i * d + j, j * d + i)] = real(1.0);
        }
    }
    p
}

/// Matrix unit `E^i_j` of size d.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(i, j)] = real(1.0);
    m
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, TensorError> {
    if !a.is_square() || a.rows != b.rows || a.cols != b.cols {
        return Err(TensorError::DimensionMismatch(a.rows, a.cols, b.rows, b.cols));
    }
    (a * b).try_sub(&(b * a))
}

pub(crate) fn ipow(base: usize, exp: usize) -> usize {
    base.pow(exp as u32)
}

/// Number of sites `k` with `d^k = n`.
pub fn range_of(n: usize, d: usize) -> Result<usize, TensorError> {
    let mut k = 0;
    let mut p = 1;
    while p < n {
        p *= d;
        k += 1;
    }
    if p == n && n > 0 {
        Ok(k)
    } else {
        Err(TensorError::NotLocal(n))
    }
}

/// Operator `S` with `S e_i = sign[i] e_{image[i]}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedPermutation {
    image: Vec<usize>,
    sign: Vec<f64>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        Self { image: (0..n).collect(), sign: vec![1.0; n] }
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self, TensorError> {
        if !m.is_square() {
            return Err(TensorError::NotSquare(m.rows, m.cols));
        }
        let n = m.rows;
        let mut image = vec![usize::MAX; n];
        let mut sign = vec![0.0; n];
        for c in 0..n {
            for r in 0..n {
                let z = m[(r, c)];
                if z.norm() > 1e-14 {
                    if image[c] != usize::MAX || z.im.abs() > 1e-14 || (z.re.abs() - 1.0).abs() > 1e-14 {
                        return Err(TensorError::NotSignedPermutation);
                    }
                    image[c] = r;
                    sign[c] = z.re.signum();
                }
            }
            if image[c] == usize::MAX {
                return Err(TensorError::NotSignedPermutation);
            }
        }
        Ok(Self { image, sign })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Self) -> Self {
        let image = first.image.iter().map(|&j| self.image[j]).collect();
        let sign = first.image.iter().zip(&first.sign).map(|(&j, &s)| s * self.sign[j]).collect();
        Self { image, sign }
    }

    pub fn inverse(&self) -> Self {
        let mut image = vec![0; self.len()];
        let mut sign = vec![0.0; self.len()];
        for (i, (&t, &s)) in self.image.iter().zip(&self.sign).enumerate() {
            image[t] = i;
            sign[t] = s;
        }
        Self { image, sign }
    }

    /// `S M S^{-1}`.
    pub fn conjugate(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let n = self.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                if z != C64::new(0.0, 0.0) {
                    out[(self.image[i], self.image[j])] = z * (self.sign[i] * self.sign[j]);
                }
            }
        }
        out
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let n = self.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            out[(self.image[i], i)] = real(self.sign[i]);
        }
        out
    }
}

/// Two-site signed permutation lifted to sites `(k, k+1)` (0-based) of a chain.
fn lift_swap(swap: &SignedPermutation, d: usize, k: usize, length: usize) -> SignedPermutation {
    let n = ipow(d, length);
    let left = ipow(d, k);
    let right = ipow(d, length - k - 2);
    let mut image = vec![0; n];
    let mut sign = vec![1.0; n];
    for a in 0..left {
        for pair in 0..d * d {
            for b in 0..right {
                let i = (a * d * d + pair) * right + b;
                image[i] = (a * d * d + swap.image[pair]) * right + b;
                sign[i] = swap.sign[pair];
            }
        }
    }
    SignedPermutation { image, sign }
}

/// Translation `T` with `T O_{n} T^{-1} = O_{n+1}`, built from adjacent swaps.
pub fn translation(swap: &ComplexMatrix, length: usize) -> Result<SignedPermutation, TensorError> {
    let d = (swap.rows() as f64).sqrt().round() as usize;
    if d * d != swap.rows() {
        return Err(TensorError::NotLocal(swap.rows()));
    }
    let s = SignedPermutation::from_matrix(swap)?;
    let mut t = SignedPermutation::identity(ipow(d, length));
    // T = σ_{12} σ_{23} ... σ_{L-1,L}
    for k in (0..length.saturating_sub(1)).rev() {
        t = lift_swap(&s, d, k, length).after(&t);
    }
    Ok(t)
}

/// `I_{left} ⊗ op ⊗ I_{right}` without forming the identities.
fn pad(op: &ComplexMatrix, left: usize, right: usize) -> ComplexMatrix {
    let k = op.rows();
    let n = left * k * right;
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..k {
        for c in 0..k {
            let z = op[(r, c)];
            if z == C64::new(0.0, 0.0) {
                continue;
            }
            for a in 0..left {
                for b in 0..right {
                    out[((a * k + r) * right + b, (a * k + c) * right + b)] = z;
                }
            }
        }
    }
    out
}

/// Embed a `k`-site operator at 1-based `site` of a chain, with the wrap handled by
/// conjugating with the translation generated by `swap`.
pub fn embed_with_swap(
    op: &ComplexMatrix,
    local_dim: usize,
    site: usize,
    length: usize,
    periodic: bool,
    swap: &ComplexMatrix,
) -> Result<ComplexMatrix, TensorError> {
    if !op.is_square() {
        return Err(TensorError::NotSquare(op.rows(), op.cols()));
    }
    let k = range_of(op.rows(), local_dim)?;
    if site == 0 || site > length {
        return Err(TensorError::SiteOutOfRange { site, length });
    }
    if k > length {
        return Err(TensorError::RangeTooLarge { range: k, length });
    }
    let n0 = site - 1;
    if n0 + k <= length {
        return Ok(pad(op, ipow(local_dim, n0), ipow(local_dim, length - n0 - k)));
    }
    if !periodic {
        return Err(TensorError::WrapWithoutPeriodic { site });
    }
    let base = pad(op, 1, ipow(local_dim, length - k));
    let t = translation(swap, length)?;
    let mut shift = SignedPermutation::identity(ipow(local_dim, length));
    for _ in 0..n0 {
        shift = t.after(&shift);
    }
    Ok(shift.conjugate(&base))
}

/// Operator on `(C^4)^{⊗L}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainOperator {
    length: usize,
    matrix: ComplexMatrix,
}

impl ChainOperator {
    pub fn new(length: usize, matrix: ComplexMatrix) -> Result<Self, TensorError> {
        let expected = ipow(LOCAL_DIM, length);
        if !matrix.is_square() || matrix.rows() != expected {
            return Err(TensorError::ChainDimension { length, expected, got: matrix.rows() });
        }
        Ok(Self { length, matrix })
    }

    pub fn zeros(length: usize) -> Self {
        let n = ipow(LOCAL_DIM, length);
        Self { length, matrix: ComplexMatrix::zeros(n, n) }
    }

    pub fn identity(length: usize) -> Self {
        Self { length, matrix: ComplexMatrix::identity(ipow(LOCAL_DIM, length)) }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn local_dim(&self) -> usize {
        LOCAL_DIM
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn add_assign(&mut self, other: &ChainOperator) -> Result<(), TensorError> {
        if other.length != self.length {
            let (a, b) = (self.matrix.rows(), other.matrix.rows());
            return Err(TensorError::DimensionMismatch(a, a, b, b));
        }
        self.matrix.add_scaled(&other.matrix, real(1.0));
        Ok(())
    }

    pub fn commutator(&self, other: &ChainOperator) -> Result<ChainOperator, TensorError> {
        let m = commutator(&self.matrix, &other.matrix)?;
        Ok(ChainOperator { length: self.length, matrix: m })
    }
}

/// Embed a local operator on `C^4` sites at 1-based `site`; wraparound conjugates with
/// cyclic shifts built from the ordinary permutation.
pub fn embed_local(op: &ComplexMatrix, site: usize, length: usize, periodic: bool) -> Result<ChainOperator, TensorError> {
    let m = embed_with_swap(op, LOCAL_DIM, site, length, periodic, &permutation_operator(LOCAL_DIM))?;
    ChainOperator::new(length, m)
}

/// Nonzero columns of a local operator, for applying it to basis states of long chains.
///
/// Entries may be numbers or any coefficient type, e.g. symbolic polynomials.
#[derive(Clone, Debug)]
pub struct LocalAction<T = C64> {
    range: usize,
    local_dim: usize,
    columns: Vec<Vec<(usize, T)>>,
}

impl LocalAction<C64> {
    pub fn new(op: &ComplexMatrix, local_dim: usize) -> Result<Self, TensorError> {
        let range = range_of(op.rows(), local_dim)?;
        let columns = (0..op.cols())
            .map(|c| (0..op.rows()).filter(|&r| op[(r, c)].norm() > 0.0).map(|r| (r, op[(r, c)])).collect())
            .collect();
        Ok(Self { range, local_dim, columns })
    }
}

impl<T> LocalAction<T> {
    /// From explicit sparse columns of a `d^k x d^k` operator.
    pub fn from_columns(local_dim: usize, columns: Vec<Vec<(usize, T)>>) -> Result<Self, TensorError> {
        let range = range_of(columns.len(), local_dim)?;
        if let Some((r, _)) = columns.iter().flatten().find(|(r, _)| *r >= columns.len()) {
            return Err(TensorError::EntryCount { expected: columns.len(), got: r + 1 });
        }
        Ok(Self { range, local_dim, columns })
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn columns(&self) -> &[Vec<(usize, T)>] {
        &self.columns
    }

    /// Apply to basis state `index`, with leg `m` of the operator on chain site `sites[m]` (0-based).
    pub fn apply(&self, index: usize, sites: &[usize], length: usize, mut emit: impl FnMut(usize, &T)) {
        let d = self.local_dim;
        let mut local = 0;
        let mut base = index;
        let mut weights = [0usize; 8];
        for (m, &s) in sites.iter().enumerate() {
            let w = ipow(d, length - 1 - s);
            weights[m] = w;
            let digit = (index / w) % d;
            local = local * d + digit;
            base -= digit * w;
        }
        for (r, z) in &self.columns[local] {
            let mut out = base;
            let mut rem = *r;
            for m in (0..sites.len()).rev() {
                out += (rem % d) * weights[m];
                rem /= d;
            }
            emit(out, z);
        }
    }
}

/// Sites touched by a range-`k` term starting at 0-based `n` of a periodic chain.
pub fn periodic_sites(n: usize, k: usize, length: usize) -> Vec<usize> {
    (0..k).map(|m| (n + m) % length).collect()
}

fn hermitian_scale(a: &ComplexMatrix) -> f64 {
    a.max_abs().max(1.0)
}

/// All eigenvalues of a square complex matrix.
///
/// Hermitian input goes through the symmetric solver and returns real values.
pub fn eigen_spectrum(a: &ComplexMatrix) -> Result<Vec<C64>, TensorError> {
    if !a.is_square() {
        return Err(TensorError::NotSquare(a.rows(), a.cols()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let iterations = 200 * n.max(10);
    if a.is_hermitian(1e-14 * hermitian_scale(a)) {
        let eig = nalgebra::SymmetricEigen::try_new(a.to_nalgebra(), f64::EPSILON, iterations)
            .ok_or(TensorError::NoConvergence { dim: n, iterations })?;
        return Ok(eig.eigenvalues.iter().map(|&x| real(x)).collect());
    }
    let m = faer::Mat::<C64>::from_fn(n, n, |i, j| a[(i, j)]);
    m.eigenvalues().map_err(|_| TensorError::NoConvergence { dim: n, iterations })
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: C64,
    pub vector: Vec<C64>,
    pub residual: f64,
}

fn normalize(v: &mut [C64]) -> f64 {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    norm
}

fn residual(a: &ComplexMatrix, lambda: C64, v: &[C64]) -> f64 {
    a.mul_vec(v).iter().zip(v).map(|(av, x)| (av - lambda * x).norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenpairs by inverse iteration on each eigenvalue, with the value polished by the
/// Rayleigh quotient of the converged vector.
pub fn eigen_pairs(a: &ComplexMatrix) -> Result<Vec<EigenPair>, TensorError> {
    let values = eigen_spectrum(a)?;
    let n = a.rows();
    let scale = hermitian_scale(a);
    let am = a.to_nalgebra();
    let mut out = Vec::with_capacity(n);
    for (idx, &lambda) in values.iter().enumerate() {
        let shift = lambda + cplx(1e-10 * scale, 1e-10 * scale);
        let mut m = am.clone();
        for i in 0..n {
            m[(i, i)] -= shift;
        }
        let lu = m.lu();
        let mut v: Vec<C64> = (0..n).map(|i| cplx(1.0 + ((i * 7 + idx * 3) % 11) as f64 * 0.01, 0.0)).collect();
        normalize(&mut v);
        for _ in 0..4 {
            let b = nalgebra::DVector::from_column_slice(&v);
            match lu.solve(&b) {
                Some(x) => {
                    v = x.iter().copied().collect();
                    if normalize(&mut v) == 0.0 || !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                        break;
                    }
                }
                None => break,
            }
        }
        let av = a.mul_vec(&v);
        let rq: C64 = v.iter().zip(&av).map(|(x, y)| x.conj() * y).sum();
        let value = if residual(a, rq, &v) <= residual(a, lambda, &v) { rq } else { lambda };
        let res = residual(a, value, &v);
        out.push(EigenPair { value, vector: v, residual: res });
    }
    Ok(out)
}

/// Orthonormal basis of the numerical kernel of `a` (singular values below `tol`).
pub fn null_space(a: &ComplexMatrix, tol: f64) -> Vec<Vec<C64>> {
    let n = a.cols();
    let m = a.to_nalgebra();
    // Pad to square so V^H carries the full right singular basis.
    let sq = if a.rows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.rows(), n)).copy_from(&m);
        p
    } else {
        m
    };
    let svd = nalgebra::SVD::new(sq, false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            out.push((0..n).map(|j| vt[(i, j)].conj()).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma(k: usize) -> ComplexMatrix {
        match k {
            1 => ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap(),
            2 => ComplexMatrix::from_vec(2, 2, vec![real(0.0), cplx(0.0, -1.0), cplx(0.0, 1.0), real(0.0)]).unwrap(),
            _ => ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap(),
        }
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let k = kron(&sigma(1), &sigma(3));
        assert_eq!((k.rows(), k.cols()), (4, 4));
    }

    #[test]
    fn kron_index_formula() {
        let a = ComplexMatrix::from_fn(2, 3, |r, c| cplx(r as f64 + 0.5, c as f64));
        let b = ComplexMatrix::from_fn(3, 2, |r, c| cplx(c as f64 - r as f64, 1.0));
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..3 {
                for p in 0..3 {
                    for q in 0..2 {
                        assert_eq!(k[(3 * i + p, 2 * j + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
        let s = kron(&sigma(1), &sigma(1));
        let ss = &s * &s;
        assert!(ss.approx_eq(&ComplexMatrix::identity(4), 0.0));
    }

    #[test]
    fn permutation_action_and_units() {
        let p = permutation_operator(2);
        let e12: Vec<C64> = vec![real(0.0), real(1.0), real(0.0), real(0.0)];
        assert_eq!(p.mul_vec(&e12), vec![real(0.0), real(0.0), real(1.0), real(0.0)]);
        let p4 = permutation_operator(4);
        assert!((&p4 * &p4).approx_eq(&ComplexMatrix::identity(16), 0.0));
        let mut sum = ComplexMatrix::zeros(16, 16);
        for i in 0..4 {
            for j in 0..4 {
                sum.add_scaled(&kron(&matrix_unit(4, i, j), &matrix_unit(4, j, i)), real(1.0));
            }
        }
        assert!(sum.approx_eq(&p4, 0.0));
    }

    #[test]
    fn embedding_basics() {
        let id = ComplexMatrix::identity(16);
        let e = embed_local(&id, 2, 3, false).unwrap();
        assert!(e.matrix().approx_eq(&ComplexMatrix::identity(64), 0.0));
        let op = ComplexMatrix::from_fn(16, 16, |r, c| cplx((r * 3 + c) as f64, (r as f64) - (c as f64)));
        let e = embed_local(&op, 1, 2, false).unwrap();
        assert!(e.matrix().approx_eq(&op, 0.0));
        assert!(matches!(embed_local(&op, 3, 3, false), Err(TensorError::WrapWithoutPeriodic { .. })));
        assert!(matches!(embed_local(&op, 4, 3, true), Err(TensorError::SiteOutOfRange { .. })));
    }

    #[test]
    fn wrapped_diagonal_has_same_spectrum() {
        let diag: Vec<C64> = (0..16).map(|i| real((i * i % 7) as f64)).collect();
        let op = ComplexMatrix::diagonal(&diag);
        let a = embed_local(&op, 3, 3, true).unwrap();
        let b = embed_local(&op, 1, 3, true).unwrap();
        let mut x: Vec<f64> = (0..64).map(|i| a.matrix()[(i, i)].re).collect();
        let mut y: Vec<f64> = (0..64).map(|i| b.matrix()[(i, i)].re).collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        assert_eq!(x, y);
    }

    #[test]
    fn wrap_matches_index_oracle() {
        let op = ComplexMatrix::from_fn(16, 16, |r, c| cplx((r + 2 * c) as f64, (r * c % 5) as f64));
        let e = embed_local(&op, 3, 3, true).unwrap();
        // leg 1 on site 3, leg 2 on site 1
        let want = ComplexMatrix::from_fn(64, 64, |r, c| {
            let (r1, r2, r3) = (r / 16, (r / 4) % 4, r % 4);
            let (c1, c2, c3) = (c / 16, (c / 4) % 4, c % 4);
            if r2 != c2 {
                return real(0.0);
            }
            op[(r3 * 4 + r1, c3 * 4 + c1)]
        });
        assert!(e.matrix().approx_eq(&want, 0.0));
    }

    #[test]
    fn commutator_of_paulis() {
        let i2 = ComplexMatrix::identity(2);
        let a = ChainOperator { length: 1, matrix: kron(&sigma(1), &i2) };
        let b = ChainOperator { length: 1, matrix: kron(&sigma(2), &i2) };
        let c = a.commutator(&b).unwrap();
        let want = kron(&sigma(3), &i2).scale(cplx(0.0, 2.0));
        assert!(c.matrix().approx_eq(&want, 1e-15));
        assert!(a.commutator(&a).unwrap().matrix().max_abs() == 0.0);
        assert!(commutator(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn eigen_examples() {
        let d = ComplexMatrix::diagonal(&[real(3.0), real(-1.0), cplx(0.0, 2.0)]);
        let mut e = eigen_spectrum(&d).unwrap();
        e.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        assert!((e[0] - real(-1.0)).norm() < 1e-14);
        assert!((e[1] - cplx(0.0, 2.0)).norm() < 1e-14);
        assert!((e[2] - real(3.0)).norm() < 1e-14);
        let rot = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        let e = eigen_spectrum(&rot).unwrap();
        assert!(e.iter().any(|z| (z - cplx(0.0, 1.0)).norm() < 1e-14));
        assert!(e.iter().any(|z| (z - cplx(0.0, -1.0)).norm() < 1e-14));
        let p = permutation_operator(4);
        let e = eigen_spectrum(&p).unwrap();
        assert_eq!(e.iter().filter(|z| (*z - real(1.0)).norm() < 1e-12).count(), 10);
        assert_eq!(e.iter().filter(|z| (*z - real(-1.0)).norm() < 1e-12).count(), 6);
    }

    #[test]
    fn eigen_pairs_residuals() {
        let a = ComplexMatrix::from_fn(7, 7, |r, c| cplx(((r * 5 + c * 3) % 7) as f64 - 3.0, ((r + c) % 3) as f64));
        for pair in eigen_pairs(&a).unwrap() {
            assert!(pair.residual <= 1e-9 * a.frobenius(), "residual {}", pair.residual);
        }
    }

    #[test]
    fn null_space_of_jordan_block() {
        let j = ComplexMatrix::from_real(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let ns = null_space(&j, 1e-12);
        assert_eq!(ns.len(), 1);
        assert!((ns[0][0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn local_action_matches_embedding() {
        let op = ComplexMatrix::from_fn(16, 16, |r, c| if (r + c) % 3 == 0 { cplx(r as f64, -(c as f64)) } else { real(0.0) });
        let la = LocalAction::new(&op, 4).unwrap();
        let length = 3;
        for n in 0..length {
            let dense = embed_local(&op, n + 1, length, true).unwrap();
            let mut m = ComplexMatrix::zeros(64, 64);
            for col in 0..64 {
                la.apply(col, &periodic_sites(n, 2, length), length, |row, z| m[(row, col)] += *z);
            }
            assert!(m.approx_eq(dense.matrix(), 0.0), "site {n}");
        }
    }
}
