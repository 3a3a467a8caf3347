use nalgebra::DMatrix;

use super::dense::dense_hermitian;
use super::{axpy, dot, norm, random_vector, seeded_rng, Scalar};
use crate::error::{Error, Result};

/// Restarted Lanczos (Krylov-Schur form) with full reorthogonalization for
/// a Hermitian operator given as `op(x, y): y = A x`.
///
/// Returns the `k` extremal Ritz values (ascending when `largest` is false,
/// descending otherwise), their Ritz vectors and the number of restarts.
/// Convergence is `||A y - theta y|| <= tol * (|theta| + norm_scale)`.
#[allow(clippy::too_many_arguments)]
pub fn krylov_schur<T, F>(
    n: usize,
    k: usize,
    m: usize,
    op: F,
    largest: bool,
    tol: f64,
    norm_scale: f64,
    max_restarts: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<T>>, usize)>
where
    T: Scalar,
    F: Fn(&[T], &mut [T]),
{
    let m = m.min(n).max(k.min(n));
    let mut rng = seeded_rng(seed);
    let mut v0: Vec<T> = random_vector(n, &mut rng);
    let s = 1.0 / norm(&v0);
    v0.iter_mut().for_each(|x| *x = x.scale(s));

    // Basis V (one pending vector beyond those with images in W) and the
    // projected matrix H = V^* A V on the completed part.
    let mut basis: Vec<Vec<T>> = vec![v0];
    let mut images: Vec<Vec<T>> = Vec::new();
    let mut h: Vec<Vec<T>> = Vec::new();
    let mut best = f64::INFINITY;

    for restart in 0..=max_restarts {
        while images.len() < m {
            let j = images.len();
            let mut w = vec![T::zero(); n];
            op(&basis[j], &mut w);
            let mut col = vec![T::zero(); j + 1];
            for (i, vi) in basis.iter().enumerate().take(j + 1) {
                col[i] = dot(vi, &w);
            }
            col[j] = T::from_real(col[j].re());
            let mut f = w.clone();
            for (i, vi) in basis.iter().enumerate().take(j + 1) {
                axpy(-col[i], vi, &mut f);
            }
            // second pass of classical Gram-Schmidt
            for vi in basis.iter().take(j + 1) {
                let c = dot(vi, &f);
                axpy(-c, vi, &mut f);
            }
            images.push(w);
            // h[i][j] = <v_i, A v_j> = col[i], Hermitian completion in row j.
            for (i, row) in h.iter_mut().enumerate() {
                row.push(col[i]);
            }
            h.push(col.iter().map(|c| c.conj()).collect());
            let beta = norm(&f);
            let scale_ref = norm(&images[j]).max(f64::MIN_POSITIVE);
            if images.len() == n {
                break;
            }
            if beta <= 1e-12 * scale_ref {
                // Invariant subspace: continue with a fresh random direction.
                let mut r: Vec<T> = random_vector(n, &mut rng);
                for _ in 0..2 {
                    for vi in basis.iter().take(j + 1) {
                        let c = dot(vi, &r);
                        axpy(-c, vi, &mut r);
                    }
                }
                let nr = norm(&r);
                if nr <= 1e-10 {
                    break;
                }
                r.iter_mut().for_each(|x| *x = x.scale(1.0 / nr));
                basis.push(r);
            } else {
                f.iter_mut().for_each(|x| *x = x.scale(1.0 / beta));
                basis.push(f);
            }
        }

        let p = images.len();
        let hm = DMatrix::from_fn(p, p, |i, j| h[i][j]);
        let (theta, s) = dense_hermitian(hm);
        let order: Vec<usize> = if largest {
            (0..p).rev().collect()
        } else {
            (0..p).collect()
        };
        let want = k.min(p);

        let ritz = |idx: usize, src: &[Vec<T>]| -> Vec<T> {
            let mut y = vec![T::zero(); n];
            for (i, vi) in src.iter().enumerate().take(p) {
                axpy(s[(i, idx)], vi, &mut y);
            }
            y
        };

        let mut all_ok = true;
        let mut worst = 0.0f64;
        for &idx in order.iter().take(want) {
            let y = ritz(idx, &basis);
            let ay = ritz(idx, &images);
            let r: f64 = ay
                .iter()
                .zip(&y)
                .map(|(a, b)| (*a - b.scale(theta[idx])).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let rel = r / (theta[idx].abs() + norm_scale).max(1e-300);
            worst = worst.max(rel);
            if rel > tol {
                all_ok = false;
            }
        }
        best = best.min(worst);

        if all_ok || p == n || basis.len() == p {
            if !all_ok && p < n {
                // Could not extend the basis further.
                return Err(Error::NotConverged {
                    iterations: restart,
                    residual: best,
                });
            }
            let mut vals = Vec::with_capacity(want);
            let mut vecs = Vec::with_capacity(want);
            for &idx in order.iter().take(want) {
                let mut y = ritz(idx, &basis);
                let ny = norm(&y);
                y.iter_mut().for_each(|x| *x = x.scale(1.0 / ny));
                vals.push(theta[idx]);
                vecs.push(y);
            }
            return Ok((vals, vecs, restart));
        }

        if restart == max_restarts {
            break;
        }

        // Thick restart: keep the best Ritz vectors plus the pending vector.
        let keep = (want + (m - want) / 2).clamp(want, m - 1);
        let pending = basis.pop().expect("pending Lanczos vector");
        let mut new_basis = Vec::with_capacity(m + 1);
        let mut new_images = Vec::with_capacity(m);
        let mut new_theta = Vec::with_capacity(keep);
        for &idx in order.iter().take(keep) {
            new_basis.push(ritz(idx, &basis));
            new_images.push(ritz(idx, &images));
            new_theta.push(theta[idx]);
        }
        basis = new_basis;
        images = new_images;
        basis.push(pending);
        h = (0..keep)
            .map(|i| {
                (0..keep)
                    .map(|j| {
                        if i == j {
                            T::from_real(new_theta[i])
                        } else {
                            T::zero()
                        }
                    })
                    .collect()
            })
            .collect();
    }
    Err(Error::NotConverged {
        iterations: max_restarts,
        residual: best,
    })
}
