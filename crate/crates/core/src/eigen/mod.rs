//! Sparse Hermitian matrices and lowest-eigenpair solvers.
//!
//! Small problems go through a dense symmetric eigendecomposition. Larger
//! ones use restarted Lanczos with full reorthogonalization, either on the
//! matrix itself or, when a banded Cholesky factorization is affordable, on
//! the shifted inverse. Block problems with a good preconditioner (the 3D
//! tube) use LOBPCG.

mod banded;
mod cg;
mod dense;
mod krylov;
mod lobpcg;

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub use banded::{rcm_ordering, BandedCholesky};
pub use cg::solve_shifted;
pub use dense::dense_eigenpairs;
pub(crate) use dense::dense_hermitian;
pub use krylov::krylov_schur;
pub use lobpcg::{lobpcg, IdentityPreconditioner, Preconditioner};

/// Matrices up to this dimension are diagonalized densely.
pub const DENSE_THRESHOLD: usize = 2048;
/// Default relative residual tolerance.
pub const SOLVER_TOL: f64 = 1e-9;

/// Field of matrix entries: `f64` for real-symmetric, `Complex64` for
/// complex-Hermitian problems.
pub trait Scalar:
    nalgebra::ComplexField<RealField = f64> + Copy + Default + Send + Sync + 'static
{
    const COMPLEX: bool;
    fn from_parts(re: f64, im: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn norm_sqr(self) -> f64;
}

impl Scalar for f64 {
    const COMPLEX: bool = false;
    #[inline]
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        self * self
    }
}

impl Scalar for Complex64 {
    const COMPLEX: bool = true;
    #[inline]
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::new(self.re, -self.im)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// `<a, b> = sum conj(a_i) b_i`.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * *y;
    }
    acc
}

pub fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += alpha * x`.
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

pub(crate) fn random_vector<T: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = if T::COMPLEX { rng.random_range(-1.0..1.0) } else { 0.0 };
            T::from_parts(re, im)
        })
        .collect()
}

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Compressed-row Hermitian matrix; both triangles are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<T>,
}

const PAR_MATVEC_MIN: usize = 8192;

impl<T: Scalar> SparseHermitian<T> {
    /// Build from `(row, col, value)` triplets; duplicates are summed. The
    /// caller is responsible for supplying both triangles.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::with_capacity(triplets.len());
        let mut val: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) out of range for n = {n}");
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseHermitian { n, row_ptr, col, val }
    }

    pub fn from_dense(a: &nalgebra::DMatrix<T>) -> Self {
        let n = a.nrows();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if a[(i, j)] != T::zero() {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col[r.clone()], &self.val[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Iterate over stored `(row, col, value)` entries in row order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let row = |i: usize| {
            let mut acc = T::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[p] * x[self.col[p]];
            }
            acc
        };
        if self.n >= PAR_MATVEC_MIN {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row(i);
            }
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Largest `|a_ij - conj(a_ji)|` over the stored pattern.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, j, v) in self.entries() {
            let d = (v - self.get(j, i).conj()).modulus();
            worst = worst.max(d);
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.entries().all(|(i, j, v)| v == self.get(j, i).conj())
    }

    pub fn bandwidth(&self) -> usize {
        self.entries()
            .map(|(i, j, _)| i.abs_diff(j))
            .max()
            .unwrap_or(0)
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            let mut d = 0.0;
            let mut off = 0.0;
            for (&j, x) in c.iter().zip(v) {
                if j == i {
                    d = x.re();
                } else {
                    off += x.modulus();
                }
            }
            lo = lo.min(d - off);
            hi = hi.max(d + off);
        }
        if self.n == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    /// Max absolute row sum, an upper bound on the spectral norm.
    pub fn norm_estimate(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).1.iter().map(|x| x.modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Symmetric permutation: entry `(i, j)` moves to `(inv[i], inv[j])`
    /// where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0usize; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let t = self.entries().map(|(i, j, v)| (inv[i], inv[j], v)).collect();
        Self::from_triplets(self.n, t)
    }

    /// `D A D` for a real diagonal `D`.
    pub fn scaled(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for p in out.row_ptr[i]..out.row_ptr[i + 1] {
                out.val[p] = out.val[p].scale(d[i] * d[out.col[p]]);
            }
        }
        out
    }

    /// `A + s I`.
    pub fn shifted(&self, s: f64) -> Self {
        let mut t: Vec<_> = self.entries().collect();
        t.extend((0..self.n).map(|i| (i, i, T::from_real(s))));
        Self::from_triplets(self.n, t)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<T> {
        let mut a = nalgebra::DMatrix::<T>::zeros(self.n, self.n);
        for (i, j, v) in self.entries() {
            a[(i, j)] = v;
        }
        a
    }

    /// Matrix Market coordinate format (`hermitian` or `symmetric`, lower
    /// triangle, 1-based).
    pub fn to_matrix_market(&self) -> String {
        let lower: Vec<_> = self.entries().filter(|(i, j, _)| j <= i).collect();
        let mut s = String::new();
        if T::COMPLEX {
            s.push_str("%%MatrixMarket matrix coordinate complex hermitian\n");
        } else {
            s.push_str("%%MatrixMarket matrix coordinate real symmetric\n");
        }
        let _ = writeln!(s, "{} {} {}", self.n, self.n, lower.len());
        for (i, j, v) in lower {
            if T::COMPLEX {
                let _ = writeln!(s, "{} {} {:e} {:e}", i + 1, j + 1, v.re(), v.im());
            } else {
                let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v.re());
            }
        }
        s
    }

    /// Parse the output of [`to_matrix_market`](Self::to_matrix_market).
    pub fn from_matrix_market(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix market input".into()))?;
        let symmetric = header.contains("hermitian") || header.contains("symmetric");
        let complex = header.contains("complex");
        let mut size = None;
        let mut t = Vec::new();
        for line in lines {
            if line.starts_with('%') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let num = |k: usize| -> Result<f64> {
                f.get(k)
                    .ok_or_else(|| Error::Parse(format!("short matrix market line `{line}`")))?
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number in `{line}`")))
            };
            if size.is_none() {
                size = Some(num(0)? as usize);
                continue;
            }
            let i = num(0)? as usize - 1;
            let j = num(1)? as usize - 1;
            let v = T::from_parts(num(2)?, if complex { num(3)? } else { 0.0 });
            t.push((i, j, v));
            if symmetric && i != j {
                t.push((j, i, v.conj()));
            }
        }
        let n = size.ok_or_else(|| Error::Parse("missing size line".into()))?;
        Ok(Self::from_triplets(n, t))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    /// Dense for tiny problems, shift-invert when a banded factorization is
    /// cheap, dense up to [`DENSE_THRESHOLD`], plain Lanczos otherwise.
    #[default]
    Auto,
    Dense,
    Lanczos,
    ShiftInvert,
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
    pub method: Method,
    /// Shift for [`Method::ShiftInvert`]; defaults to just below the
    /// Gershgorin lower bound.
    pub shift: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: SOLVER_TOL,
            max_restarts: 400,
            seed: 0x5eed,
            method: Method::Auto,
            shift: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenResult<T> {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<T>>,
    /// `||A v - lambda v||` for each pair.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub method: Method,
}

/// Lowest `k` eigenpairs with default options and tolerance `tol`.
pub fn lowest_eigenpairs<T: Scalar>(
    a: &SparseHermitian<T>,
    k: usize,
    tol: f64,
) -> Result<EigenResult<T>> {
    let opts = EigenOptions {
        tol,
        ..EigenOptions::default()
    };
    lowest_eigenpairs_with(a, k, &opts)
}

/// Below this size dense diagonalization is always used.
const SMALL_DENSE: usize = 256;
/// Budget of `n * bandwidth^2` flops under which shift-invert is chosen.
const BANDED_BUDGET: f64 = 6e9;

pub fn lowest_eigenpairs_with<T: Scalar>(
    a: &SparseHermitian<T>,
    k: usize,
    opts: &EigenOptions,
) -> Result<EigenResult<T>> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "requested {k} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let method = match opts.method {
        Method::Auto if n <= SMALL_DENSE => Method::Dense,
        Method::Auto => {
            let perm = rcm_ordering(a);
            let b = a.permuted(&perm).bandwidth().min(a.bandwidth());
            if (n as f64) * (b as f64).powi(2) <= BANDED_BUDGET {
                Method::ShiftInvert
            } else if n <= DENSE_THRESHOLD {
                Method::Dense
            } else {
                Method::Lanczos
            }
        }
        m => m,
    };
    let (values, vectors, iterations) = match method {
        Method::Dense => {
            let (v, x) = dense_eigenpairs(a, k);
            (v, x, 1)
        }
        Method::Lanczos => {
            let m = krylov_dim(k, n);
            let (vals, vecs, it) = krylov_schur(
                n,
                k,
                m,
                |x: &[T], y: &mut [T]| a.matvec(x, y),
                false,
                opts.tol,
                a.norm_estimate(),
                opts.max_restarts,
                opts.seed,
            )?;
            (vals, vecs, it)
        }
        Method::ShiftInvert => shift_invert(a, k, opts)?,
        Method::Auto => unreachable!(),
    };
    let residuals = vectors
        .iter()
        .zip(&values)
        .map(|(v, &l)| residual_norm(a, v, l))
        .collect();
    Ok(EigenResult {
        values,
        vectors,
        residuals,
        iterations,
        method,
    })
}

fn krylov_dim(k: usize, n: usize) -> usize {
    (2 * k + 24).max(40).min(n)
}

fn shift_invert<T: Scalar>(
    a: &SparseHermitian<T>,
    k: usize,
    opts: &EigenOptions,
) -> Result<(Vec<f64>, Vec<Vec<T>>, usize)> {
    let n = a.dim();
    let mut shift = opts.shift.unwrap_or_else(|| {
        let (lo, hi) = a.gershgorin();
        lo - 1e-6 * (hi - lo).abs().max(1e-12)
    });
    let mut attempts = 0;
    let chol = loop {
        match BandedCholesky::factor(a, shift) {
            Ok(c) => break c,
            Err(Error::ShiftSingular) if attempts < 8 => {
                let (lo, hi) = a.gershgorin();
                shift -= 0.1 * (hi - lo).abs().max(1.0) * 2f64.powi(attempts);
                attempts += 1;
            }
            Err(e) => return Err(e),
        }
    };
    let m = krylov_dim(k, n);
    let (nu, vecs, it) = krylov_schur(
        n,
        k,
        m,
        |x: &[T], y: &mut [T]| chol.solve_into(x, y),
        true,
        opts.tol,
        0.0,
        opts.max_restarts,
        opts.seed,
    )?;
    // Rayleigh quotients with the original matrix are more accurate than
    // shift + 1/nu when the shift is far from the spectrum.
    let mut pairs: Vec<(f64, Vec<T>)> = vecs
        .into_iter()
        .zip(nu)
        .map(|(v, _)| {
            let av = a.apply(&v);
            (dot(&v, &av).re() / dot(&v, &v).re(), v)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (values, vectors) = pairs.into_iter().unzip();
    Ok((values, vectors, it))
}

pub fn residual_norm<T: Scalar>(a: &SparseHermitian<T>, v: &[T], lambda: f64) -> f64 {
    let av = a.apply(v);
    let r: f64 = av
        .iter()
        .zip(v)
        .map(|(x, y)| (*x - y.scale(lambda)).norm_sqr())
        .sum();
    r.sqrt() / norm(v).max(f64::MIN_POSITIVE)
}
