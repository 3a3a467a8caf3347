use nalgebra::DMatrix;

use super::dense::dense_hermitian;
use super::{axpy, dot, norm, random_vector, seeded_rng, Scalar};
use crate::error::{Error, Result};

/// Approximate inverse used to precondition residuals.
pub trait Preconditioner<T>: Sync {
    fn apply(&self, r: &[T], out: &mut [T]);
}

pub struct IdentityPreconditioner;

impl<T: Scalar> Preconditioner<T> for IdentityPreconditioner {
    fn apply(&self, r: &[T], out: &mut [T]) {
        out.copy_from_slice(r);
    }
}

/// Columns of a basis together with their images under the operator.
struct Tracked<T> {
    q: Vec<Vec<T>>,
    hq: Vec<Vec<T>>,
}

impl<T: Scalar> Tracked<T> {
    /// Orthogonalize `v` against the accepted columns (two passes), carrying
    /// `hv` along; accept it unless it is numerically dependent.
    fn push(&mut self, mut v: Vec<T>, mut hv: Vec<T>) -> bool {
        let n0 = norm(&v);
        if n0 == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for (qi, hqi) in self.q.iter().zip(&self.hq) {
                let c = dot(qi, &v);
                axpy(-c, qi, &mut v);
                axpy(-c, hqi, &mut hv);
            }
        }
        let nv = norm(&v);
        if nv <= 1e-10 * n0 {
            return false;
        }
        let s = 1.0 / nv;
        v.iter_mut().for_each(|x| *x = x.scale(s));
        hv.iter_mut().for_each(|x| *x = x.scale(s));
        self.q.push(v);
        self.hq.push(hv);
        true
    }
}

fn combine<T: Scalar>(cols: &[Vec<T>], c: &DMatrix<T>, j: usize, rows: std::ops::Range<usize>) -> Vec<T> {
    let n = cols[0].len();
    let mut out = vec![T::zero(); n];
    for i in rows {
        axpy(c[(i, j)], &cols[i], &mut out);
    }
    out
}

/// Locally optimal block preconditioned conjugate gradient for the `k`
/// lowest eigenpairs of a Hermitian operator, with `guard` extra block
/// vectors that are iterated but not required to converge.
///
/// Convergence is `||A x - theta x|| <= tol * max(|theta|, 1)`.
#[allow(clippy::too_many_arguments)]
pub fn lobpcg<T, F, P>(
    n: usize,
    k: usize,
    guard: usize,
    op: F,
    prec: &P,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<T>>, usize)>
where
    T: Scalar,
    F: Fn(&[T], &mut [T]),
    P: Preconditioner<T> + ?Sized,
{
    let bs = (k + guard).min(n);
    let mut rng = seeded_rng(seed);
    let apply = |v: &[T]| {
        let mut out = vec![T::zero(); n];
        op(v, &mut out);
        out
    };

    let mut basis = Tracked {
        q: Vec::new(),
        hq: Vec::new(),
    };
    while basis.q.len() < bs {
        let v: Vec<T> = random_vector(n, &mut rng);
        let hv = apply(&v);
        basis.push(v, hv);
    }
    let (mut theta, mut x, mut hx) = rayleigh_ritz(&basis, bs);
    let mut p: Vec<Vec<T>> = Vec::new();
    let mut hp: Vec<Vec<T>> = Vec::new();
    let mut best = f64::INFINITY;

    for it in 0..max_iter {
        let mut res = Vec::with_capacity(bs);
        let mut rvecs = Vec::with_capacity(bs);
        for j in 0..bs {
            let mut r = hx[j].clone();
            axpy(T::from_real(-theta[j]), &x[j], &mut r);
            res.push(norm(&r) / theta[j].abs().max(1.0));
            rvecs.push(r);
        }
        let worst = res[..k].iter().cloned().fold(0.0, f64::max);
        best = best.min(worst);
        if worst <= tol {
            return Ok((theta[..k].to_vec(), x.into_iter().take(k).collect(), it));
        }
        let active: Vec<usize> = (0..bs).filter(|&j| res[j] > tol).collect();

        let mut tr = Tracked {
            q: Vec::new(),
            hq: Vec::new(),
        };
        for j in 0..bs {
            tr.push(x[j].clone(), hx[j].clone());
        }
        let nx = tr.q.len();
        for &j in &active {
            let mut w = vec![T::zero(); n];
            prec.apply(&rvecs[j], &mut w);
            let hw = apply(&w);
            tr.push(w, hw);
        }
        for (pj, hpj) in p.iter().zip(&hp) {
            tr.push(pj.clone(), hpj.clone());
        }
        let (t_new, c) = {
            let m = tr.q.len();
            let g = DMatrix::from_fn(m, m, |i, j| dot(&tr.q[i], &tr.hq[j]));
            let g = (&g + g.adjoint()).scale(0.5);
            dense_hermitian(g)
        };
        let m = tr.q.len();
        let mut new_x = Vec::with_capacity(bs);
        let mut new_hx = Vec::with_capacity(bs);
        let mut new_p = Vec::new();
        let mut new_hp = Vec::new();
        for j in 0..bs {
            new_x.push(combine(&tr.q, &c, j, 0..m));
            new_hx.push(combine(&tr.hq, &c, j, 0..m));
            if m > nx && active.contains(&j) {
                new_p.push(combine(&tr.q, &c, j, nx..m));
                new_hp.push(combine(&tr.hq, &c, j, nx..m));
            }
        }
        theta = t_new[..bs].to_vec();
        x = new_x;
        hx = new_hx;
        p = new_p;
        hp = new_hp;
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: best,
    })
}

fn rayleigh_ritz<T: Scalar>(b: &Tracked<T>, bs: usize) -> (Vec<f64>, Vec<Vec<T>>, Vec<Vec<T>>) {
    let m = b.q.len();
    let g = DMatrix::from_fn(m, m, |i, j| dot(&b.q[i], &b.hq[j]));
    let g = (&g + g.adjoint()).scale(0.5);
    let (t, c) = dense_hermitian(g);
    let x = (0..bs).map(|j| combine(&b.q, &c, j, 0..m)).collect();
    let hx = (0..bs).map(|j| combine(&b.hq, &c, j, 0..m)).collect();
    (t[..bs].to_vec(), x, hx)
}

#[cfg(test)]
mod tests {
    use super::super::SparseHermitian;
    use super::*;

    struct Jacobi(Vec<f64>);

    impl Preconditioner<f64> for Jacobi {
        fn apply(&self, r: &[f64], out: &mut [f64]) {
            for i in 0..r.len() {
                out[i] = r[i] / self.0[i];
            }
        }
    }

    #[test]
    fn oscillator_with_jacobi() {
        let n = 800;
        let h = 20.0 / (n + 1) as f64;
        let mut t = Vec::new();
        let mut d = Vec::new();
        for i in 0..n {
            let x = -10.0 + (i + 1) as f64 * h;
            d.push(2.0 / (h * h) + x * x);
            t.push((i, i, 2.0 / (h * h) + x * x));
            if i + 1 < n {
                t.push((i, i + 1, -1.0 / (h * h)));
                t.push((i + 1, i, -1.0 / (h * h)));
            }
        }
        let a = SparseHermitian::from_triplets(n, t);
        let (vals, vecs, _) =
            lobpcg(n, 3, 2, |x: &[f64], y: &mut [f64]| a.matvec(x, y), &Jacobi(d), 1e-9, 2000, 1)
                .unwrap();
        for (j, l) in vals.iter().enumerate() {
            assert!((l - (2 * j + 1) as f64).abs() < 1e-3, "{l}");
        }
        for (v, l) in vecs.iter().zip(&vals) {
            assert!(super::super::residual_norm(&a, v, *l) < 1e-7);
        }
    }
}
