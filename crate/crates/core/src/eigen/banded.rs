use std::collections::VecDeque;

use super::{Scalar, SparseHermitian};
use crate::error::{Error, Result};

/// Reverse Cuthill-McKee ordering of the sparsity graph; `perm[new] = old`.
pub fn rcm_ordering<T: Scalar>(a: &SparseHermitian<T>) -> Vec<usize> {
    let n = a.dim();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).0.iter().copied().filter(|&j| j != i).collect())
        .collect();
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, seen: &mut Vec<bool>| -> Vec<usize> {
        let mut out = vec![start];
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(u) = q.pop_front() {
            let mut nb: Vec<usize> = adj[u].iter().copied().filter(|&v| !seen[v]).collect();
            nb.sort_by_key(|&v| (deg[v], v));
            for v in nb {
                seen[v] = true;
                out.push(v);
                q.push_back(v);
            }
        }
        out
    };

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start: the last node of a BFS from a min-degree
        // node of this component, repeated twice
        let mut scratch = visited.clone();
        let comp = bfs_levels(seed, &mut scratch);
        let mut start = *comp.iter().min_by_key(|&&v| (deg[v], v)).unwrap();
        for _ in 0..2 {
            let mut s2 = visited.clone();
            let lv = bfs_levels(start, &mut s2);
            start = *lv.last().unwrap();
        }
        let comp_order = bfs_levels(start, &mut visited);
        order.extend(comp_order);
    }
    order.reverse();
    order
}

/// Cholesky factor `L L^* = P (A - s I) P^T` stored as a lower band.
pub struct BandedCholesky<T> {
    n: usize,
    b: usize,
    band: Vec<T>,
    perm: Option<Vec<usize>>,
}

impl<T: Scalar> BandedCholesky<T> {
    /// Factor `A - shift I`, choosing natural or RCM ordering by bandwidth.
    /// Fails with `ShiftSingular` if the shifted matrix is not positive
    /// definite.
    pub fn factor(a: &SparseHermitian<T>, shift: f64) -> Result<Self> {
        let natural = a.bandwidth();
        let perm = rcm_ordering(a);
        let pa = a.permuted(&perm);
        if pa.bandwidth() < natural {
            let mut c = Self::factor_natural(&pa, shift)?;
            c.perm = Some(perm);
            Ok(c)
        } else {
            Self::factor_natural(a, shift)
        }
    }

    fn factor_natural(a: &SparseHermitian<T>, shift: f64) -> Result<Self> {
        let n = a.dim();
        let b = a.bandwidth();
        let w = b + 1;
        let mut band = vec![T::zero(); n * w];
        // row i holds columns i-b..=i at offsets 0..=b
        for (i, j, v) in a.entries() {
            if j <= i {
                band[i * w + b + j - i] = v;
            }
        }
        for i in 0..n {
            band[i * w + b] -= T::from_real(shift);
        }
        for i in 0..n {
            let lo_i = i.saturating_sub(b);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(b));
                let mut s = band[i * w + b + j - i];
                let ri = i * w + b - i;
                let rj = j * w + b - j;
                for k in lo..j {
                    s -= band[ri + k] * band[rj + k].conj();
                }
                if i == j {
                    let d = s.re();
                    if !(d > 0.0) || !d.is_finite() {
                        return Err(Error::ShiftSingular);
                    }
                    band[ri + i] = T::from_real(d.sqrt());
                } else {
                    band[ri + j] = s.scale(1.0 / band[rj + j].re());
                }
            }
        }
        Ok(BandedCholesky {
            n,
            b,
            band,
            perm: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.b
    }

    /// `y = (A - shift I)^{-1} x`.
    pub fn solve_into(&self, x: &[T], y: &mut [T]) {
        let n = self.n;
        let w = self.b + 1;
        let b = self.b;
        let mut z: Vec<T> = match &self.perm {
            Some(p) => p.iter().map(|&old| x[old]).collect(),
            None => x.to_vec(),
        };
        // forward: L z = x
        for i in 0..n {
            let ri = i * w + b - i;
            let mut s = z[i];
            for k in i.saturating_sub(b)..i {
                s -= self.band[ri + k] * z[k];
            }
            z[i] = s.scale(1.0 / self.band[ri + i].re());
        }
        // backward: L^* y = z
        for i in (0..n).rev() {
            let ri = i * w + b - i;
            let yi = z[i].scale(1.0 / self.band[ri + i].re());
            z[i] = yi;
            for k in i.saturating_sub(b)..i {
                let l = self.band[ri + k].conj();
                z[k] -= l * yi;
            }
        }
        match &self.perm {
            Some(p) => {
                for (new, &old) in p.iter().enumerate() {
                    y[old] = z[new];
                }
            }
            None => y.copy_from_slice(&z),
        }
    }

    pub fn solve(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.solve_into(x, &mut y);
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn solves_shifted_complex_ring() {
        let n = 50;
        let u = Complex64::from_polar(1.0, 0.3);
        let mut t = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            t.push((i, i, Complex64::new(2.0 + 0.01 * i as f64, 0.0)));
            t.push((i, j, -u));
            t.push((j, i, -u.conj()));
        }
        let a = SparseHermitian::from_triplets(n, t);
        let c = BandedCholesky::factor(&a, -0.5).unwrap();
        assert!(c.bandwidth() <= 2);
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let y = c.solve(&x);
        let back = a.apply(&y);
        for i in 0..n {
            let r = back[i] + y[i] * 0.5 - x[i];
            assert!(r.norm() < 1e-10);
        }
    }

    #[test]
    fn indefinite_shift_is_rejected() {
        let a = SparseHermitian::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 3.0)]);
        assert!(matches!(
            BandedCholesky::factor(&a, 2.0),
            Err(Error::ShiftSingular)
        ));
    }
}
