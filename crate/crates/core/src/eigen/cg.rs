use super::{axpy, dot, norm, Scalar, SparseHermitian};
use crate::error::{Error, Result};

fn project_out<T: Scalar>(v: &mut [T], deflate: &[Vec<T>]) {
    for _ in 0..2 {
        for z in deflate {
            let c = dot(z, v) / T::from_real(dot(z, z).re());
            axpy(-c, z, v);
        }
    }
}

/// Conjugate-gradient solve of `(A - shift) v = rhs` on the orthogonal
/// complement of `deflate`. The right-hand side is projected first; the
/// result is orthogonal to every deflation vector.
///
/// Returns `ShiftSingular` when the deflated shifted operator is found to be
/// indefinite or singular, `NotConverged` if the relative residual does not
/// drop below `tol` within `max_iter` iterations.
pub fn solve_shifted<T: Scalar>(
    a: &SparseHermitian<T>,
    shift: f64,
    rhs: &[T],
    deflate: &[Vec<T>],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<T>> {
    let n = a.dim();
    let mut b = rhs.to_vec();
    project_out(&mut b, deflate);
    let bnorm = norm(&b);
    let mut x = vec![T::zero(); n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let apply = |v: &[T], out: &mut [T]| {
        a.matvec(v, out);
        axpy(T::from_real(-shift), v, out);
        project_out(out, deflate);
    };
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re();
    let mut ap = vec![T::zero(); n];
    let scale = a.norm_estimate() + shift.abs();
    for it in 0..max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap).re();
        if !(pap > 1e-14 * scale * dot(&p, &p).re()) {
            return Err(Error::ShiftSingular);
        }
        let alpha = rr / pap;
        axpy(T::from_real(alpha), &p, &mut x);
        axpy(T::from_real(-alpha), &ap, &mut r);
        let rr_new = dot(&r, &r).re();
        if rr_new.sqrt() <= tol * bnorm {
            // recompute the true residual once to guard against drift
            let mut tr = vec![T::zero(); n];
            apply(&x, &mut tr);
            for (t, bi) in tr.iter_mut().zip(&b) {
                *t = *bi - *t;
            }
            if norm(&tr) <= 10.0 * tol * bnorm {
                project_out(&mut x, deflate);
                return Ok(x);
            }
            r = tr;
            rr = dot(&r, &r).re();
            p = r.clone();
            continue;
        }
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = *ri + pi.scale(beta);
        }
        rr = rr_new;
        if it + 1 == max_iter {
            break;
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: rr.sqrt() / bnorm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_division() {
        let a = SparseHermitian::from_triplets(3, vec![(0, 0, 2.0), (1, 1, 4.0), (2, 2, 5.0)]);
        let x = solve_shifted(&a, 0.0, &[2.0, 2.0, 10.0], &[], 1e-14, 10).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 0.5).abs() < 1e-14);
        assert!((x[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn deflated_pseudo_inverse() {
        // A = [[1,-1,0],[-1,2,-1],[0,-1,1]] has kernel (1,1,1)/sqrt3.
        // For rhs = (1,0,-1) the pseudo-inverse solution is (1,0,-1)/... :
        // A (1,0,-1) = (1,0,-1), so A^+ (1,0,-1) = (1,0,-1).
        let a = SparseHermitian::from_triplets(
            3,
            vec![
                (0, 0, 1.0),
                (0, 1, -1.0),
                (1, 0, -1.0),
                (1, 1, 2.0),
                (1, 2, -1.0),
                (2, 1, -1.0),
                (2, 2, 1.0),
            ],
        );
        let k = vec![vec![1.0, 1.0, 1.0]];
        let x = solve_shifted(&a, 0.0, &[1.0, 0.0, -1.0], &k, 1e-13, 50).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1].abs() < 1e-12 && (x[2] + 1.0).abs() < 1e-12);
        // rhs (1,-2,1) = A (0,-1,0) + kernel part; A^+ gives (1,-2,1)/3.
        let x = solve_shifted(&a, 0.0, &[1.0, -2.0, 1.0], &k, 1e-13, 50).unwrap();
        for (xi, e) in x.iter().zip([1.0 / 3.0, -2.0 / 3.0, 1.0 / 3.0]) {
            assert!((xi - e).abs() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn indefinite_shift_detected() {
        let a = SparseHermitian::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 3.0)]);
        assert!(matches!(
            solve_shifted(&a, 2.0, &[1.0, 1.0], &[], 1e-12, 10),
            Err(Error::ShiftSingular)
        ));
    }
}
