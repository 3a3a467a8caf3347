//! Finite-volume discretizations of the full magnetic Laplacian on the tube:
//! a 2D `(x, y)` grid on hollow surfaces and a 3D `(x, n1, n2)` grid in
//! massive tubes, with Peierls phases from exact line integrals of the
//! ambient potential.

mod distance;
mod hollow;
mod massive;

pub use distance::{convergence_fit, matched_distance, spectral_distance, two_point_slope, Distance, Fit};
pub use hollow::assemble_hollow_surface;
pub use massive::{assemble_massive_tube, FiberModePreconditioner};

use num_complex::Complex64;

use crate::curve::FrameField;
use crate::effective::{BaseGrid, Spectrum};
use crate::eigen::{lobpcg, lowest_eigenpairs_with, EigenOptions, Method, SparseHermitian};
use crate::error::{Error, Result};
use crate::fiber::FiberSpec;
use crate::magnetics::VectorPotential;
use crate::quad::{gauss_legendre_scalar, GL4};
use crate::vec3::{add, dot, scale, Vec3};

/// Default cap on the number of unknowns.
pub const DEFAULT_UNKNOWN_CAP: usize = 500_000;

/// Budget above which banded shift-invert is replaced by LOBPCG.
const BANDED_WORK: f64 = 6e9;

#[derive(Clone, Debug)]
pub struct FullOptions {
    pub unknown_cap: usize,
    /// Fiber mesh step for massive tubes.
    pub h_fiber: f64,
    /// Fiber nodes for hollow tubes.
    pub n_y: usize,
}

impl Default for FullOptions {
    fn default() -> Self {
        FullOptions {
            unknown_cap: DEFAULT_UNKNOWN_CAP,
            h_fiber: 1.0 / 16.0,
            n_y: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TubeKind {
    Hollow,
    Massive,
}

/// Assembled full operator. The stored matrix is `M^{-1/2} K M^{-1/2}`,
/// so its eigenvalues are `eps^2` times those of the tube Laplacian.
#[derive(Clone, Debug)]
pub struct FullOperatorAssembly {
    pub kind: TubeKind,
    pub matrix: SparseHermitian<Complex64>,
    pub sigma: u8,
    pub epsilon: f64,
    /// Reference fiber energy subtracted when rescaling.
    pub lambda_ref: f64,
    /// `(x, y1, y2)` per unknown; hollow tubes use `(x, y, 0)`.
    pub coords: Vec<[f64; 3]>,
    pub closed: bool,
    pub(crate) precond: Option<FiberModePreconditioner>,
}

impl FullOperatorAssembly {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Lowest `k` eigenvalues, raw and rescaled.
    pub fn spectrum(&self, k: usize, opts: &EigenOptions) -> Result<Spectrum> {
        let values = self.lowest(k, opts)?;
        Ok(Spectrum::from_raw(values, self.lambda_ref, self.epsilon))
    }

    fn lowest(&self, k: usize, opts: &EigenOptions) -> Result<Vec<f64>> {
        let n = self.dim();
        let b = self.matrix.bandwidth() as f64;
        let banded_ok = (n as f64) * b * b <= BANDED_WORK;
        match (&self.precond, opts.method) {
            (Some(p), Method::Auto) if !banded_ok => {
                let a = &self.matrix;
                let tol = opts.tol.max(1e-10);
                let (vals, _, _) = lobpcg(
                    n,
                    k,
                    k.min(4).max(2),
                    |x: &[Complex64], y: &mut [Complex64]| a.matvec(x, y),
                    p,
                    tol,
                    2000,
                    opts.seed,
                )?;
                Ok(vals)
            }
            _ => Ok(lowest_eigenpairs_with(&self.matrix, k, opts)?.values),
        }
    }
}

/// `eps * l_max * R * max|kappa|`, which must stay below 1.
pub fn admissibility(frame: &FrameField, fiber: &FiberSpec, epsilon: f64) -> f64 {
    let lmax = frame
        .grid
        .iter()
        .map(|&x| fiber.scale.value(x))
        .fold(0.0f64, f64::max);
    epsilon * lmax * fiber.reach() * frame.max_curvature()
}

pub fn check_admissible(frame: &FrameField, fiber: &FiberSpec, epsilon: f64) -> Result<()> {
    let v = admissibility(frame, fiber, epsilon);
    if v < 1.0 {
        Ok(())
    } else {
        Err(Error::AdmissibilityViolated { value: v })
    }
}

pub(crate) fn check_budget(unknowns: usize, cap: usize) -> Result<()> {
    if unknowns > cap {
        Err(Error::MemoryBudget { unknowns, cap })
    } else {
        Ok(())
    }
}

/// The tube embedding `Psi(x, n) = c(x) + eps (n1 e1(x) + n2 e2(x))`.
pub(crate) struct TubeMap<'a> {
    pub frame: &'a FrameField,
    pub potential: &'a VectorPotential,
    pub epsilon: f64,
    /// `eps^-sigma`.
    pub coupling: f64,
}

impl<'a> TubeMap<'a> {
    /// Point, `d Psi/dx` for a normal offset `n(x)` with derivative `dn`,
    /// and the normal frame at `x`.
    fn point(&self, x: f64, n: [f64; 2], dn: [f64; 2]) -> (Vec3, Vec3, [Vec3; 2]) {
        let f = self.frame.at(x);
        let pt = self.frame.curve.eval(x);
        let e = self.epsilon;
        let k = [dot(pt.d2, f.e1), dot(pt.d2, f.e2)];
        let rho = 1.0 - e * (n[0] * k[0] + n[1] * k[1]);
        let p = add(pt.c, scale(f.normal_offset(n), e));
        let dp = add(scale(f.tau, rho), scale(f.normal_offset(dn), e));
        (p, dp, [f.e1, f.e2])
    }

    /// Phase `eps^-sigma int A` along the horizontal path `t -> (t, n(t))`.
    pub fn horizontal_phase(&self, x0: f64, x1: f64, n: &dyn Fn(f64) -> ([f64; 2], [f64; 2])) -> f64 {
        self.coupling
            * gauss_legendre_scalar(&GL4, x0, x1, |t| {
                let (nn, dn) = n(t);
                let (p, dp, _) = self.point(t, nn, dn);
                dot(self.potential.eval(p), dp)
            })
    }

    /// Phase along the straight fiber segment `n0 -> n1` at fixed `x`.
    pub fn vertical_phase(&self, x: f64, n0: [f64; 2], n1: [f64; 2]) -> f64 {
        let d = [n1[0] - n0[0], n1[1] - n0[1]];
        let f = self.frame.at(x);
        let c = self.frame.curve.eval(x).c;
        let e = self.epsilon;
        let dp = scale(f.normal_offset(d), e);
        self.coupling
            * gauss_legendre_scalar(&GL4, 0.0, 1.0, |t| {
                let n = [n0[0] + t * d[0], n0[1] + t * d[1]];
                let p = add(c, scale(f.normal_offset(n), e));
                dot(self.potential.eval(p), dp)
            })
    }

    /// Phase along the fiber circle arc `y0 -> y1` of radius `l` at `x`.
    pub fn arc_phase(&self, x: f64, l: f64, y0: f64, y1: f64) -> f64 {
        let f = self.frame.at(x);
        let c = self.frame.curve.eval(x).c;
        let e = self.epsilon;
        self.coupling
            * gauss_legendre_scalar(&GL4, y0, y1, |y| {
                let (s, co) = y.sin_cos();
                let p = add(c, scale(f.normal_offset([l * co, l * s]), e));
                let dp = scale(f.normal_offset([-l * s, l * co]), e);
                dot(self.potential.eval(p), dp)
            })
    }

    /// Curvature pair at `x`.
    pub fn kappa(&self, x: f64) -> [f64; 2] {
        self.frame.kappa_at(x)
    }
}

/// Shared base grid construction for full operators.
pub(crate) fn base_grid(frame: &FrameField, n_x: usize) -> Result<BaseGrid> {
    BaseGrid::new(&frame.curve.domain, n_x)
}
