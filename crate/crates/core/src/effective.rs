//! One-dimensional effective operators on the base curve.
//!
//! Every variant is stored as `-(d - i a) m (d - i a) + V` on a uniform base
//! grid, with the magnetic potential carried by Peierls link phases.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::curve::{Domain, FrameField};
use crate::eigen::{lowest_eigenpairs_with, EigenOptions, SparseHermitian};
use crate::error::{Error, Result};
use crate::fiber::{lambda02, FiberSpec, VerticalSpectrum};
use crate::magnetics::{cross2, field_at, rotate2, VectorPotential};
use crate::quad::{gauss_legendre_scalar, GL4};

/// Uniform base grid. Open curves use the interior nodes of
/// `[x_min, x_max]`; closed curves use `n` periodic nodes on `[-L, L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseGrid {
    pub x: Vec<f64>,
    pub dx: f64,
    pub closed: bool,
    pub bounds: (f64, f64),
}

impl BaseGrid {
    pub fn new(domain: &Domain, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidInput(format!("base grid needs at least 4 nodes, got {n}")));
        }
        let (a, b) = domain.bounds();
        let closed = domain.is_closed();
        let (dx, x) = if closed {
            let dx = (b - a) / n as f64;
            (dx, (0..n).map(|i| a + i as f64 * dx).collect())
        } else {
            let dx = (b - a) / (n + 1) as f64;
            (dx, (0..n).map(|i| a + (i + 1) as f64 * dx).collect())
        };
        Ok(BaseGrid {
            x,
            dx,
            closed,
            bounds: (a, b),
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Edge midpoints. Open grids include the two half-edges to the walls
    /// (`n + 1` edges); closed grids have `n` edges, the last one crossing
    /// the seam.
    pub fn edge_midpoints(&self) -> Vec<f64> {
        if self.closed {
            self.x.iter().map(|x| x + 0.5 * self.dx).collect()
        } else {
            (0..=self.len())
                .map(|j| self.bounds.0 + (j as f64 + 0.5) * self.dx)
                .collect()
        }
    }

    /// Number of links carrying a phase.
    pub fn link_count(&self) -> usize {
        if self.closed {
            self.len()
        } else {
            self.len() - 1
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    Dirichlet,
    /// Periodic with total flux `Theta` (sum of link phases).
    PeriodicWithFlux(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Nonmagnetic,
    Moderate,
    RigidModerate,
    StrongAlpha0,
    RigidStrong,
    HollowStrong,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Nonmagnetic,
        Variant::Moderate,
        Variant::RigidModerate,
        Variant::StrongAlpha0,
        Variant::RigidStrong,
        Variant::HollowStrong,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Nonmagnetic => "nonmagnetic",
            Variant::Moderate => "moderate",
            Variant::RigidModerate => "rigid_moderate",
            Variant::StrongAlpha0 => "strong_alpha0",
            Variant::RigidStrong => "rigid_strong",
            Variant::HollowStrong => "hollow_strong",
        }
    }

    /// Field scaling exponent the variant models.
    pub fn sigma(self) -> u8 {
        match self {
            Variant::Nonmagnetic | Variant::Moderate | Variant::RigidModerate => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s || (s == "moderate_general" && *v == Variant::Moderate))
            .ok_or_else(|| Error::Parse(format!("unknown variant `{s}`")))
    }
}

/// Discretized effective operator.
#[derive(Clone, Debug)]
pub struct EffectiveOperator1D {
    pub variant: Variant,
    pub epsilon: f64,
    pub grid: BaseGrid,
    /// `m` at the nodes.
    pub metric: Vec<f64>,
    /// `m` at the edge midpoints (see [`BaseGrid::edge_midpoints`]).
    pub edge_metric: Vec<f64>,
    pub potential: Vec<f64>,
    /// `theta_i`, the integral of `a` from node `i` to node `i + 1`.
    pub link_phase: Vec<f64>,
    pub boundary: Boundary,
    /// Scale of the kinetic term: 1 for rescaled operators, `eps^2` otherwise.
    pub kinetic_scale: f64,
    /// The subtracted `lambda_0`.
    pub energy_offset: f64,
    /// Whether eigenvalues of the matrix are already `eps^-2 (lambda - lambda_0)`.
    pub rescaled: bool,
}

/// Eigenvalues on both scales.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Spectrum {
    pub raw: Vec<f64>,
    pub rescaled: Vec<f64>,
}

impl Spectrum {
    /// Build from raw eigenvalues of a full operator with `raw = eps^2 lambda`.
    pub fn from_raw(raw: Vec<f64>, offset: f64, epsilon: f64) -> Self {
        let e2 = epsilon * epsilon;
        let rescaled = raw.iter().map(|l| (l - offset) / e2).collect();
        Spectrum { raw, rescaled }
    }

    pub fn from_rescaled(rescaled: Vec<f64>, offset: f64, epsilon: f64) -> Self {
        let e2 = epsilon * epsilon;
        let raw = rescaled.iter().map(|m| offset + e2 * m).collect();
        Spectrum { raw, rescaled }
    }
}

impl EffectiveOperator1D {
    pub fn total_flux(&self) -> f64 {
        self.link_phase.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Hermitian matrix; link `i -> i+1` has entry `-w m exp(-i theta_i)`.
    pub fn matrix(&self) -> SparseHermitian<Complex64> {
        let n = self.dim();
        let w = self.kinetic_scale / (self.grid.dx * self.grid.dx);
        let mut t = Vec::with_capacity(3 * n);
        for i in 0..n {
            let (left, right) = if self.grid.closed {
                (self.edge_metric[(i + n - 1) % n], self.edge_metric[i])
            } else {
                (self.edge_metric[i], self.edge_metric[i + 1])
            };
            t.push((i, i, Complex64::new(w * (left + right) + self.potential[i], 0.0)));
        }
        for (i, &theta) in self.link_phase.iter().enumerate() {
            let j = (i + 1) % n;
            let m = if self.grid.closed {
                self.edge_metric[i]
            } else {
                self.edge_metric[i + 1]
            };
            let v = Complex64::from_polar(-w * m, -theta);
            t.push((i, j, v));
            t.push((j, i, v.conj()));
        }
        SparseHermitian::from_triplets(n, t)
    }

    /// Lowest `k` eigenvalues on both scales.
    pub fn spectrum(&self, k: usize, opts: &EigenOptions) -> Result<Spectrum> {
        let k = k.min(self.dim());
        let res = lowest_eigenpairs_with(&self.matrix(), k, opts)?;
        Ok(if self.rescaled {
            Spectrum::from_rescaled(res.values, self.energy_offset, self.epsilon)
        } else {
            Spectrum::from_raw(res.values, self.energy_offset, self.epsilon)
        })
    }

    /// Rows `(x, m, V, theta)`; `theta` is the phase of the link leaving
    /// the node (0 for the last node of an open grid).
    pub fn table(&self) -> Vec<[f64; 4]> {
        (0..self.dim())
            .map(|i| {
                [
                    self.grid.x[i],
                    self.metric[i],
                    self.potential[i],
                    self.link_phase.get(i).copied().unwrap_or(0.0),
                ]
            })
            .collect()
    }

    /// Apply the discrete gauge `psi_i -> exp(i g_i) psi_i` to the links.
    pub fn regauged(&self, g: &[f64]) -> Self {
        let n = self.dim();
        let mut out = self.clone();
        for (i, th) in out.link_phase.iter_mut().enumerate() {
            *th += g[(i + 1) % n] - g[i];
        }
        out
    }
}

/// Everything an assembly needs.
#[derive(Clone, Copy)]
pub struct EffectiveInput<'a> {
    pub frame: &'a FrameField,
    pub fiber: &'a FiberSpec,
    pub vs: &'a VerticalSpectrum,
    pub potential: &'a VectorPotential,
    pub grid: &'a BaseGrid,
    pub epsilon: f64,
}

/// Pointwise geometric and magnetic data at a base point.
struct Local {
    kappa: [f64; 2],
    l: f64,
    dl: f64,
    ddl: f64,
    phi: f64,
    dphi: f64,
    bpar: f64,
    bperp: [f64; 2],
    ab: f64,
}

impl<'a> EffectiveInput<'a> {
    fn local(&self, x: f64) -> Local {
        let (bpar, bperp, ab) = field_at(self.potential, self.frame, x);
        Local {
            kappa: self.frame.kappa_at(x),
            l: self.fiber.scale.value(x),
            dl: self.fiber.scale.d1(x),
            ddl: self.fiber.scale.d2(x),
            phi: self.fiber.twist.value(x),
            dphi: self.fiber.twist.d1(x),
            bpar,
            bperp,
            ab,
        }
    }

    /// `l r(phi) <y>_0`.
    fn centre(&self, loc: &Local) -> [f64; 2] {
        let c = rotate2(loc.phi, self.vs.mean_y);
        [loc.l * c[0], loc.l * c[1]]
    }

    /// `1 + 2 eps <theta_0>_0` with `<theta_0>_0 = l <r <y>, kappa>`.
    fn metric_at(&self, x: f64) -> f64 {
        if self.fiber.is_hollow() {
            return 1.0;
        }
        let loc = self.local(x);
        let c = self.centre(&loc);
        1.0 + 2.0 * self.epsilon * (c[0] * loc.kappa[0] + c[1] * loc.kappa[1])
    }

    /// `A_1(d_x) = B_perp x l r <y>`; zero for the hollow circle.
    fn a1(&self, loc: &Local) -> f64 {
        if self.fiber.is_hollow() {
            0.0
        } else {
            cross2(loc.bperp, self.centre(loc))
        }
    }

    fn check_rigid(&self) -> Result<()> {
        if self.fiber.is_hollow() || self.fiber.scale.is_constant() {
            Ok(())
        } else {
            Err(Error::NotRigid)
        }
    }

    fn massive_only(&self, what: &str) -> Result<()> {
        if self.fiber.is_hollow() {
            Err(Error::UnsupportedFiber(format!("{what} needs a massive fiber")))
        } else {
            Ok(())
        }
    }

    fn open_only(&self, what: &str) -> Result<()> {
        if self.grid.closed {
            Err(Error::ClosedCurveUnsupported(what.to_string()))
        } else {
            Ok(())
        }
    }

    /// `lambda_0` of the fiber at scale `l`.
    fn lambda0_scaled(&self, l: f64) -> f64 {
        self.vs.lambda0() / (l * l)
    }

    fn reference_offset(&self) -> f64 {
        if self.fiber.is_hollow() {
            0.0
        } else {
            self.lambda0_scaled(self.fiber.scale.value(self.grid.x[0]))
        }
    }

    /// Leading non-magnetic potential: `phi'^2 ||L Phi0||^2 - |kappa|^2/4`
    /// (massive) or `l''/(2l) - (l'/l)^2/4` (hollow).
    fn base_potential(&self, loc: &Local) -> f64 {
        if self.fiber.is_hollow() {
            0.5 * loc.ddl / loc.l - 0.25 * (loc.dl / loc.l).powi(2)
        } else {
            let k2 = loc.kappa[0].powi(2) + loc.kappa[1].powi(2);
            loc.dphi * loc.dphi * self.vs.lnorm_sq - 0.25 * k2
        }
    }

    fn edge_metric(&self) -> Vec<f64> {
        self.grid
            .edge_midpoints()
            .iter()
            .map(|&x| self.metric_at(x))
            .collect()
    }

    /// Phases `scale * int a` over each link by 4-point Gauss-Legendre.
    fn link_phases(&self, scale: f64, a: &dyn Fn(f64) -> f64) -> Vec<f64> {
        let dx = self.grid.dx;
        (0..self.grid.link_count())
            .map(|i| {
                let x0 = self.grid.x[i];
                scale * gauss_legendre_scalar(&GL4, x0, x0 + dx, a)
            })
            .collect()
    }

    fn boundary(&self, phases: &[f64]) -> Boundary {
        if self.grid.closed {
            Boundary::PeriodicWithFlux(phases.iter().sum())
        } else {
            Boundary::Dirichlet
        }
    }

    fn finish(
        &self,
        variant: Variant,
        potential: Vec<f64>,
        metric: bool,
        phases: Vec<f64>,
        rescaled: bool,
    ) -> EffectiveOperator1D {
        let (node_metric, edge_metric) = if metric {
            (
                self.grid.x.iter().map(|&x| self.metric_at(x)).collect(),
                self.edge_metric(),
            )
        } else {
            let ne = self.grid.edge_midpoints().len();
            (vec![1.0; self.grid.len()], vec![1.0; ne])
        };
        let e2 = self.epsilon * self.epsilon;
        EffectiveOperator1D {
            variant,
            epsilon: self.epsilon,
            boundary: self.boundary(&phases),
            grid: self.grid.clone(),
            metric: node_metric,
            edge_metric,
            potential,
            link_phase: phases,
            kinetic_scale: if rescaled { 1.0 } else { e2 },
            energy_offset: if rescaled { self.reference_offset() } else { self.vs.lambda0() },
            rescaled,
        }
    }
}

/// Non-magnetic adiabatic operator `eps^-2 (H_a - lambda_0)`.
pub fn assemble_nonmagnetic(inp: &EffectiveInput) -> Result<EffectiveOperator1D> {
    inp.check_rigid()?;
    let v = inp.grid.x.iter().map(|&x| inp.base_potential(&inp.local(x))).collect();
    let phases = vec![0.0; inp.grid.link_count()];
    Ok(inp.finish(Variant::Nonmagnetic, v, true, phases, true))
}

/// Moderate fields: the non-magnetic operator minimally coupled to
/// `A_B + eps A_1`.
pub fn assemble_moderate(inp: &EffectiveInput) -> Result<EffectiveOperator1D> {
    inp.check_rigid()?;
    let v = inp.grid.x.iter().map(|&x| inp.base_potential(&inp.local(x))).collect();
    let phases = inp.link_phases(1.0, &|x| {
        let loc = inp.local(x);
        loc.ab + inp.epsilon * inp.a1(&loc)
    });
    Ok(inp.finish(Variant::Moderate, v, true, phases, true))
}

/// Rigid massive tube, moderate field, including the displayed `O(eps)`
/// corrections of the Born-Huang and bending potentials.
pub fn assemble_rigid_moderate(inp: &EffectiveInput) -> Result<EffectiveOperator1D> {
    inp.massive_only("rigid_moderate")?;
    if !inp.fiber.scale.is_constant() {
        return Err(Error::NotRigid);
    }
    let eps = inp.epsilon;
    let vs = inp.vs;
    let hk = inp.frame.spacing().max(1e-3);
    // g(x) = phi' r(phi)^T kappa, whose derivative enters the cross term
    let g = |x: f64| {
        let loc = inp.local(x);
        let rk = rotate2(-loc.phi, loc.kappa);
        [loc.dphi * rk[0], loc.dphi * rk[1]]
    };
    let v = inp
        .grid
        .x
        .iter()
        .map(|&x| {
            let loc = inp.local(x);
            let l = loc.l;
            let k2 = loc.kappa[0].powi(2) + loc.kappa[1].powi(2);
            let rk = rotate2(-loc.phi, loc.kappa);
            let (gp, gm) = (g(x + hk), g(x - hk));
            let dg = [(gp[0] - gm[0]) / (2.0 * hk), (gp[1] - gm[1]) / (2.0 * hk)];
            let cross = l * (vs.y_l[0] * dg[0] + vs.y_l[1] * dg[1])
                + loc.dphi * loc.dphi * l * (vs.l_y_l[0] * rk[0] + vs.l_y_l[1] * rk[1]);
            let c = inp.centre(&loc);
            let kdd = inp.frame.kappa_dd_at(x, 2.0 * inp.frame.spacing());
            let bend1 = k2 * (c[0] * loc.kappa[0] + c[1] * loc.kappa[1])
                + (c[0] * kdd[0] + c[1] * kdd[1]);
            loc.dphi * loc.dphi * vs.lnorm_sq + 2.0 * eps * cross - 0.25 * k2 - 0.5 * eps * bend1
        })
        .collect();
    let phases = inp.link_phases(1.0, &|x| {
        let loc = inp.local(x);
        loc.ab + eps * inp.a1(&loc)
    });
    Ok(inp.finish(Variant::RigidModerate, v, true, phases, true))
}

/// Strong field, energies near the band bottom: the unscaled operator
/// `-eps^2 m Delta^{eps^-1 A_eff} + lambda_0`.
pub fn assemble_strong_alpha0(inp: &EffectiveInput) -> Result<EffectiveOperator1D> {
    inp.massive_only("strong_alpha0")?;
    let eps = inp.epsilon;
    let v = inp
        .grid
        .x
        .iter()
        .map(|&x| inp.lambda0_scaled(inp.fiber.scale.value(x)))
        .collect();
    let phases = inp.link_phases(1.0 / eps, &|x| {
        let loc = inp.local(x);
        loc.ab + eps * inp.a1(&loc)
    });
    let mut op = inp.finish(Variant::StrongAlpha0, v, true, phases, false);
    op.energy_offset = inp.reference_offset();
    Ok(op)
}

/// Rigid massive tube in a strong field at energies `O(eps^2)` above the
/// bottom: `-Delta^{a} + lambda_{0,2} - |kappa|^2/4 + phi'^2 ||L Phi0||^2
/// + ||(B_perp x l r y) Phi0||^2 - (B_perp x l r <y>)^2` with
/// `a = B_perp x l r <y>`.
pub fn assemble_rigid_strong(inp: &EffectiveInput) -> Result<EffectiveOperator1D> {
    inp.massive_only("rigid_strong")?;
    inp.open_only("rigid_strong")?;
    if !inp.fiber.scale.is_constant() {
        return Err(Error::NotRigid);
    }
    let vs = inp.vs;
    let m2 = vs.second_moment;
    let mut v = Vec::with_capacity(inp.grid.len());
    for &x in &inp.grid.x {
        let loc = inp.local(x);
        let l = loc.l;
        // B_perp x (r y) = <r^T u, y> with u = (-B2, B1)
        let w = rotate2(-loc.phi, [-loc.bperp[1], loc.bperp[0]]);
        let quad = w[0] * w[0] * m2[0][0] + 2.0 * w[0] * w[1] * m2[0][1] + w[1] * w[1] * m2[1][1];
        let a1 = inp.a1(&loc);
        let lam02 = lambda02(vs, loc.bpar, l)?;
        v.push(lam02 + inp.base_potential(&loc) + l * l * quad - a1 * a1);
    }
    let phases = inp.link_phases(1.0, &|x| inp.a1(&inp.local(x)));
    Ok(inp.finish(Variant::RigidStrong, v, false, phases, true))
}

/// Hollow tube in a strong field:
/// `-d^2 + l''/(2l) - (l'/l)^2/4 + l^2 (B_par^2 + 2 |B_perp|^2)/4`.
pub fn assemble_hollow_strong(inp: &EffectiveInput) -> Result<EffectiveOperator1D> {
    if !inp.fiber.is_hollow() {
        return Err(Error::UnsupportedFiber("hollow_strong needs the circle fiber".into()));
    }
    inp.open_only("hollow_strong")?;
    let v = inp
        .grid
        .x
        .iter()
        .map(|&x| {
            let loc = inp.local(x);
            let b2 = loc.bpar * loc.bpar + 2.0 * (loc.bperp[0].powi(2) + loc.bperp[1].powi(2));
            inp.base_potential(&loc) + 0.25 * loc.l * loc.l * b2
        })
        .collect();
    let phases = vec![0.0; inp.grid.link_count()];
    Ok(inp.finish(Variant::HollowStrong, v, false, phases, true))
}

pub fn assemble(variant: Variant, inp: &EffectiveInput) -> Result<EffectiveOperator1D> {
    match variant {
        Variant::Nonmagnetic => assemble_nonmagnetic(inp),
        Variant::Moderate => assemble_moderate(inp),
        Variant::RigidModerate => assemble_rigid_moderate(inp),
        Variant::StrongAlpha0 => assemble_strong_alpha0(inp),
        Variant::RigidStrong => assemble_rigid_strong(inp),
        Variant::HollowStrong => assemble_hollow_strong(inp),
    }
}
