use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{base_grid, check_admissible, check_budget, FullOperatorAssembly, FullOptions, TubeKind, TubeMap};
use crate::curve::FrameField;
use crate::eigen::SparseHermitian;
use crate::error::{Error, Result};
use crate::fiber::FiberSpec;
use crate::magnetics::VectorPotential;

type Triplet = (usize, usize, Complex64);

/// Hollow tube surface `Psi(x, y) = c + eps l (cos y e1 + sin y e2)`.
///
/// Quadratic form `int eps^2 l h^{-1/2} |D_x u|^2 + l^{-1} h^{1/2} |D_y u|^2`
/// with mass `l h^{1/2}`, `h = (1 - eps l k)^2 + eps^2 l'^2` and
/// `k = kappa1 cos y + kappa2 sin y`. Periodic in `y`; Dirichlet at the
/// ends of open curves.
pub fn assemble_hollow_surface(
    frame: &FrameField,
    fiber: &FiberSpec,
    potential: &VectorPotential,
    sigma: u8,
    epsilon: f64,
    n_x: usize,
    opts: &FullOptions,
) -> Result<FullOperatorAssembly> {
    if !fiber.is_hollow() {
        return Err(Error::UnsupportedFiber("hollow surface needs the circle fiber".into()));
    }
    let n_y = opts.n_y;
    if n_y < 32 {
        return Err(Error::InvalidInput(format!("hollow tubes need n_y >= 32, got {n_y}")));
    }
    check_admissible(frame, fiber, epsilon)?;
    let grid = base_grid(frame, n_x)?;
    let n = grid.len() * n_y;
    check_budget(n, opts.unknown_cap)?;

    let dy = 2.0 * PI / n_y as f64;
    let seam_shift = if grid.closed {
        let alpha = frame.holonomy_angle.unwrap_or(0.0);
        let s = alpha / dy;
        if (s - s.round()).abs() > 1e-6 {
            return Err(Error::SeamIncompatible { holonomy: alpha });
        }
        (s.round() as i64).rem_euclid(n_y as i64) as usize
    } else {
        0
    };

    let map = TubeMap {
        frame,
        potential,
        epsilon,
        coupling: epsilon.powi(-(sigma as i32)),
    };
    let e = epsilon;
    let dx = grid.dx;
    let nx = grid.len();
    let ys: Vec<f64> = (0..n_y).map(|j| j as f64 * dy).collect();
    let l = |x: f64| fiber.scale.value(x);
    let dl = |x: f64| fiber.scale.d1(x);
    let hmetric = |x: f64, y: f64| {
        let k = map.kappa(x);
        let kk = k[0] * y.cos() + k[1] * y.sin();
        (1.0 - e * l(x) * kk).powi(2) + e * e * dl(x).powi(2)
    };
    let mass: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|p| {
            let (x, y) = (grid.x[p / n_y], ys[p % n_y]);
            l(x) * hmetric(x, y).sqrt()
        })
        .collect();
    let xweight = |xm: f64, y: f64| e * e * l(xm) / hmetric(xm, y).sqrt() / (dx * dx);

    let slabs: Vec<Vec<Triplet>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let x = grid.x[i];
            let mut t = Vec::with_capacity(6 * n_y);
            let lx = l(x);
            for j in 0..n_y {
                let p = i * n_y + j;
                let y = ys[j];
                // fiber link (i, j) -> (i, j + 1)
                let q = i * n_y + (j + 1) % n_y;
                let w = hmetric(x, y + 0.5 * dy).sqrt() / lx / (dy * dy);
                let th = map.arc_phase(x, lx, y, y + dy);
                push_link(&mut t, p, q, w, th);
                // horizontal link (i, j) -> (i + 1, j)
                let next = if i + 1 < nx {
                    Some((i + 1) * n_y + j)
                } else if grid.closed {
                    Some((j + seam_shift) % n_y)
                } else {
                    None
                };
                let (co, si) = (y.cos(), y.sin());
                let path = |t: f64| ([l(t) * co, l(t) * si], [dl(t) * co, dl(t) * si]);
                match next {
                    Some(q) => {
                        let w = xweight(x + 0.5 * dx, y);
                        let th = map.horizontal_phase(x, x + dx, &path);
                        push_link(&mut t, p, q, w, th);
                    }
                    None => t.push((p, p, Complex64::new(xweight(x + 0.5 * dx, y), 0.0))),
                }
                if i == 0 && !grid.closed {
                    t.push((p, p, Complex64::new(xweight(x - 0.5 * dx, y), 0.0)));
                }
            }
            t
        })
        .collect();
    let triplets = slabs
        .into_iter()
        .flatten()
        .map(|(p, q, v)| (p, q, v / (mass[p] * mass[q]).sqrt()))
        .collect();
    let coords = (0..n)
        .map(|p| [grid.x[p / n_y], ys[p % n_y], 0.0])
        .collect();
    Ok(FullOperatorAssembly {
        kind: TubeKind::Hollow,
        matrix: SparseHermitian::from_triplets(n, triplets),
        sigma,
        epsilon,
        lambda_ref: 0.0,
        coords,
        closed: grid.closed,
        precond: None,
    })
}

/// Link `p -> q` with weight `w` and phase `theta`: entry `-w exp(-i theta)`
/// plus its adjoint, and `w` on both diagonals.
pub(super) fn push_link(t: &mut Vec<Triplet>, p: usize, q: usize, w: f64, theta: f64) {
    let v = Complex64::from_polar(-w, -theta);
    t.push((p, q, v));
    t.push((q, p, v.conj()));
    t.push((p, p, Complex64::new(w, 0.0)));
    t.push((q, q, Complex64::new(w, 0.0)));
}
