use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::hollow::push_link;
use super::{base_grid, check_admissible, check_budget, FullOperatorAssembly, FullOptions, TubeKind, TubeMap};
use crate::curve::FrameField;
use crate::eigen::{dense_hermitian, lowest_eigenpairs_with, EigenOptions, Preconditioner, SparseHermitian};
use crate::error::{Error, Result};
use crate::fiber::{FiberGrid, FiberKind, FiberSpec, Neighbor, MIN_FIBER_NODES, MIN_THETA};
use crate::magnetics::{rotate2, VectorPotential};

/// Largest fiber for which the mode preconditioner is built.
const MAX_PRECOND_FIBER: usize = 1600;

/// Massive tube in normal-bundle coordinates `(x, n)`, `n` at unit scale of
/// the tube: quadratic form `int eps^2 rho^{-1} |D_x u|^2 + rho |D_n u|^2`
/// with mass `rho = 1 - eps <n, kappa>`. The slice at `x` is
/// `{n : r(-phi) n / l in F}` on the lattice `h Z^2`.
pub fn assemble_massive_tube(
    frame: &FrameField,
    fiber: &FiberSpec,
    potential: &VectorPotential,
    sigma: u8,
    epsilon: f64,
    n_x: usize,
    opts: &FullOptions,
) -> Result<FullOperatorAssembly> {
    let shape = fiber
        .shape()
        .ok_or_else(|| Error::UnsupportedFiber("massive tube needs a planar fiber".into()))?;
    let h = match &fiber.kind {
        FiberKind::Grid { h, .. } => *h,
        _ => opts.h_fiber,
    };
    check_admissible(frame, fiber, epsilon)?;
    let grid = base_grid(frame, n_x)?;
    let nx = grid.len();
    let dx = grid.dx;

    let level = |x: f64, n: [f64; 2]| {
        let l = fiber.scale.value(x);
        let u = rotate2(-fiber.twist.value(x), [n[0] / l, n[1] / l]);
        l * shape.level(u)
    };
    let sharp = shape.is_sharp();
    let uniform = fiber.scale.is_constant() && fiber.twist.is_constant();
    let build = |x: f64| {
        let reach = fiber.scale.value(x) * shape.reach();
        Arc::new(FiberGrid::build(h, reach, &|n| level(x, n), sharp))
    };
    let slices: Vec<Arc<FiberGrid>> = if uniform {
        let g = build(grid.x[0]);
        vec![g; nx]
    } else {
        grid.x.par_iter().map(|&x| build(x)).collect()
    };
    let smallest = slices.iter().map(|g| g.len()).min().unwrap_or(0);
    if smallest < MIN_FIBER_NODES {
        return Err(Error::MeshTooCoarse { nodes: smallest });
    }
    let mut offsets = Vec::with_capacity(nx + 1);
    offsets.push(0usize);
    for g in &slices {
        offsets.push(offsets.last().unwrap() + g.len());
    }
    let n = offsets[nx];
    check_budget(n, opts.unknown_cap)?;

    // quarter turns applied when crossing the seam of a closed curve
    let turns = if grid.closed {
        let alpha = frame.holonomy_angle.unwrap_or(0.0);
        let k = (alpha / FRAC_PI_2).round();
        if (alpha - k * FRAC_PI_2).abs() > 1e-6 {
            return Err(Error::SeamIncompatible { holonomy: alpha });
        }
        let k = (k as i64).rem_euclid(4) as u8;
        if k != 0 && !shape.is_quarter_turn_invariant() {
            return Err(Error::SeamIncompatible { holonomy: alpha });
        }
        k
    } else {
        0
    };
    let rot = |node: [i64; 2], k: u8| (0..k).fold(node, |[a, b], _| [-b, a]);

    let map = TubeMap {
        frame,
        potential,
        epsilon,
        coupling: epsilon.powi(-(sigma as i32)),
    };
    let e = epsilon;
    let kappas: Vec<[f64; 2]> = grid.x.iter().map(|&x| map.kappa(x)).collect();
    let kappa_mid: Vec<[f64; 2]> = grid.x.iter().map(|&x| map.kappa(x + 0.5 * dx)).collect();
    let kappa_left = map.kappa(grid.x[0] - 0.5 * dx);
    let rho = |k: [f64; 2], n: [f64; 2]| 1.0 - e * (n[0] * k[0] + n[1] * k[1]);
    let xw = |r: f64| e * e / (r * dx * dx);
    let h2 = h * h;

    // fraction of the x-link from `x0` towards `x1` inside the tube at `n`
    let x_theta = |x0: f64, x1: f64, n: [f64; 2]| -> f64 {
        if sharp || uniform {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if level(x0 + mid * (x1 - x0), n) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).max(MIN_THETA)
    };

    let slabs: Vec<(Vec<(usize, usize, Complex64)>, Vec<f64>)> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let g = &slices[i];
            let x = grid.x[i];
            let k = kappas[i];
            let mut t = Vec::with_capacity(10 * g.len());
            let mut mass = Vec::with_capacity(g.len());
            let (next, nk) = if i + 1 < nx {
                (Some(&slices[i + 1]), 0)
            } else if grid.closed {
                (Some(&slices[0]), turns)
            } else {
                (None, 0)
            };
            for p in 0..g.len() {
                let gp = offsets[i] + p;
                let np = g.position(p);
                let rp = rho(k, np);
                mass.push(rp);
                for (d, nb) in g.neighbors[p].iter().enumerate() {
                    match *nb {
                        Neighbor::Node(q) if d == 0 || d == 2 => {
                            let nq = g.position(q);
                            let mid = [0.5 * (np[0] + nq[0]), 0.5 * (np[1] + nq[1])];
                            let w = rho(k, mid) / h2;
                            let th = map.vertical_phase(x, np, nq);
                            push_link(&mut t, gp, offsets[i] + q, w, th);
                        }
                        Neighbor::Node(_) => {}
                        Neighbor::Wall(theta) => t.push((gp, gp, Complex64::new(rp / (theta * h2), 0.0))),
                    }
                }
                // forward x-link
                let target = next.and_then(|ng| ng.index_of(rot(g.nodes[p], nk)));
                match target {
                    Some(q) => {
                        let base = if i + 1 < nx { offsets[i + 1] } else { 0 };
                        let w = xw(rho(kappa_mid[i], np));
                        let th = map.horizontal_phase(x, x + dx, &|_| (np, [0.0, 0.0]));
                        push_link(&mut t, gp, base + q, w, th);
                    }
                    None => {
                        let th = if next.is_some() { x_theta(x, x + dx, np) } else { 1.0 };
                        t.push((gp, gp, Complex64::new(xw(rp) / th, 0.0)));
                    }
                }
                // wall behind the node when the previous slice lacks it
                let prev = if i > 0 {
                    Some((&slices[i - 1], 0u8))
                } else if grid.closed {
                    Some((&slices[nx - 1], (4 - turns) % 4))
                } else {
                    None
                };
                match prev {
                    Some((pg, pk)) => {
                        if pg.index_of(rot(g.nodes[p], pk)).is_none() {
                            let th = x_theta(x, x - dx, np);
                            t.push((gp, gp, Complex64::new(xw(rp) / th, 0.0)));
                        }
                    }
                    None => {
                        let w = xw(rho(kappa_left, np));
                        t.push((gp, gp, Complex64::new(w, 0.0)));
                    }
                }
            }
            (t, mass)
        })
        .collect();

    let mass: Vec<f64> = slabs.iter().flat_map(|(_, m)| m.iter().copied()).collect();
    let triplets = slabs
        .into_iter()
        .flat_map(|(t, _)| t)
        .map(|(p, q, v)| (p, q, v / (mass[p] * mass[q]).sqrt()))
        .collect();
    let matrix = SparseHermitian::from_triplets(n, triplets);

    let coords = (0..nx)
        .flat_map(|i| {
            let g = slices[i].clone();
            let x = grid.x[i];
            (0..g.len()).map(move |p| {
                let y = g.position(p);
                [x, y[0], y[1]]
            })
        })
        .collect();

    // reference fiber energy: the slice with the largest scale
    let widest = (0..nx)
        .max_by(|&a, &b| fiber.scale.value(grid.x[a]).total_cmp(&fiber.scale.value(grid.x[b])))
        .unwrap_or(0);
    let fiber_lap = slices[widest].laplacian();
    let (lambda_ref, precond) = if uniform && fiber_lap.dim() <= MAX_PRECOND_FIBER {
        let p = FiberModePreconditioner::new(&fiber_lap, nx, e * e / (dx * dx), grid.closed, e * e);
        (p.fiber_values[0], Some(p))
    } else {
        let opts = EigenOptions {
            tol: 1e-12,
            ..EigenOptions::default()
        };
        (lowest_eigenpairs_with(&fiber_lap, 1, &opts)?.values[0], None)
    };

    Ok(FullOperatorAssembly {
        kind: TubeKind::Massive,
        matrix,
        sigma,
        epsilon,
        lambda_ref,
        coords,
        closed: grid.closed,
        precond,
    })
}

/// Approximate inverse of `(K_x (x) I + I (x) H_F) - s` for a tube with
/// identical slices, by fast diagonalization: dense eigenbasis of the fiber
/// operator and a tridiagonal (or cyclic) solve in `x` per fiber mode.
#[derive(Clone, Debug)]
pub struct FiberModePreconditioner {
    nx: usize,
    modes: DMatrix<f64>,
    pub fiber_values: Vec<f64>,
    /// Off-diagonal magnitude of the `x` operator (`eps^2 / dx^2`).
    kx: f64,
    periodic: bool,
    shift: f64,
}

impl FiberModePreconditioner {
    /// `margin` is how far below the bottom of the separable spectrum the
    /// shift is placed.
    pub fn new(fiber: &SparseHermitian<f64>, nx: usize, kx: f64, periodic: bool, margin: f64) -> Self {
        let (vals, modes) = dense_hermitian(fiber.to_dense());
        let nu0 = if periodic {
            0.0
        } else {
            2.0 * kx * (1.0 - (std::f64::consts::PI / (nx + 1) as f64).cos())
        };
        let shift = vals[0] + nu0 - margin;
        FiberModePreconditioner {
            nx,
            modes,
            fiber_values: vals,
            kx,
            periodic,
            shift,
        }
    }

    /// Solve `(kx T + d) u = r` in place, `T = tridiag(-1, 2, -1)`, optionally
    /// cyclic, for several right-hand sides stored with stride `cols`.
    fn solve_x(&self, d: f64, rhs: &mut [f64], scratch: &mut Vec<f64>) {
        let n = self.nx;
        let a = 2.0 * self.kx + d;
        let c = -self.kx;
        if !self.periodic || n < 3 {
            thomas(a, c, rhs, scratch);
            return;
        }
        // Sherman-Morrison for the corners
        let gamma = -a;
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = c;
        let a0 = a - gamma;
        let an = a - c * c / gamma;
        let mut y = rhs.to_vec();
        thomas_mod(a, c, a0, an, &mut y, scratch);
        let mut z = u.clone();
        thomas_mod(a, c, a0, an, &mut z, scratch);
        let fact = (y[0] + c * y[n - 1] / gamma) / (1.0 + z[0] + c * z[n - 1] / gamma);
        for i in 0..n {
            rhs[i] = y[i] - fact * z[i];
        }
    }
}

fn thomas(a: f64, c: f64, r: &mut [f64], cp: &mut Vec<f64>) {
    let n = r.len();
    thomas_mod(a, c, a, a, r, cp);
    debug_assert_eq!(r.len(), n);
}

/// Constant tridiagonal solve with modified first/last diagonal entries.
fn thomas_mod(a: f64, c: f64, a0: f64, an: f64, r: &mut [f64], cp: &mut Vec<f64>) {
    let n = r.len();
    cp.clear();
    cp.resize(n, 0.0);
    let diag = |i: usize| {
        if i == 0 {
            a0
        } else if i == n - 1 {
            an
        } else {
            a
        }
    };
    let mut m = diag(0);
    cp[0] = c / m;
    r[0] /= m;
    for i in 1..n {
        m = diag(i) - c * cp[i - 1];
        cp[i] = c / m;
        r[i] = (r[i] - c * r[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        r[i] -= cp[i] * r[i + 1];
    }
}

impl Preconditioner<Complex64> for FiberModePreconditioner {
    fn apply(&self, r: &[Complex64], out: &mut [Complex64]) {
        let nf = self.fiber_values.len();
        let nx = self.nx;
        // columns: real parts of each slice, then imaginary parts
        let rm = DMatrix::from_fn(nf, 2 * nx, |p, c| {
            let v = r[(c % nx) * nf + p];
            if c < nx {
                v.re
            } else {
                v.im
            }
        });
        let coef = self.modes.transpose() * rm;
        let mut solved = DMatrix::<f64>::zeros(nf, 2 * nx);
        let rows: Vec<Vec<f64>> = (0..nf)
            .into_par_iter()
            .map(|k| {
                let d = (self.fiber_values[k] - self.shift).max(1e-12);
                let mut scratch = Vec::new();
                let mut row = Vec::with_capacity(2 * nx);
                for part in 0..2 {
                    let mut v: Vec<f64> = (0..nx).map(|i| coef[(k, part * nx + i)]).collect();
                    self.solve_x(d, &mut v, &mut scratch);
                    row.extend(v);
                }
                row
            })
            .collect();
        for (k, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                solved[(k, c)] = *v;
            }
        }
        let back = &self.modes * solved;
        for i in 0..nx {
            for p in 0..nf {
                out[i * nf + p] = Complex64::new(back[(p, i)], back[(p, nx + i)]);
            }
        }
    }
}
