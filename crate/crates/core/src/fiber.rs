//! Cross-sections: Dirichlet fiber grids, Bessel data for the disk, the
//! circle of hollow tubes, ground-state moments and the second-order
//! magnetic correction `lambda_{0,2}`.

use std::collections::{HashMap, VecDeque};
use std::path::Path;

use num_complex::Complex64;

use crate::eigen::{
    lowest_eigenpairs_with, solve_shifted, EigenOptions, Method, SparseHermitian,
};
use crate::error::{Error, Result};
use crate::expr::Profile;

/// Planar region used as a cross-section at unit scale.
#[derive(Clone, Debug)]
pub enum FiberShape {
    Disk { radius: f64 },
    /// Axis-aligned square; the default is the unit square centred at 0.
    Square { side: f64, center: [f64; 2] },
    Annulus { r_in: f64, r_out: f64 },
    /// Occupancy mask on a regular grid; `rows[0]` is the top row and the
    /// mask is centred at the origin with cell size `cell`.
    Mask { rows: Vec<Vec<bool>>, cell: f64 },
}

impl FiberShape {
    /// Signed level function, negative inside. Masks return `-1` / `+1`.
    pub fn level(&self, y: [f64; 2]) -> f64 {
        match self {
            FiberShape::Disk { radius } => y[0].hypot(y[1]) - radius,
            FiberShape::Square { side, center } => {
                (y[0] - center[0]).abs().max((y[1] - center[1]).abs()) - 0.5 * side
            }
            FiberShape::Annulus { r_in, r_out } => {
                let r = y[0].hypot(y[1]);
                (r_in - r).max(r - r_out)
            }
            FiberShape::Mask { rows, cell } => {
                let nr = rows.len() as f64;
                let nc = rows.first().map_or(0, Vec::len) as f64;
                let c = (y[0] / cell + 0.5 * (nc - 1.0)).round();
                let r = (0.5 * (nr - 1.0) - y[1] / cell).round();
                if c < 0.0 || r < 0.0 || c >= nc || r >= nr {
                    return 1.0;
                }
                if rows[r as usize][c as usize] {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Whether the boundary is only known to cell resolution.
    pub fn is_sharp(&self) -> bool {
        matches!(self, FiberShape::Mask { .. })
    }

    /// Radius of a disc around the origin containing the shape.
    pub fn reach(&self) -> f64 {
        match self {
            FiberShape::Disk { radius } => *radius,
            FiberShape::Square { side, center } => {
                center[0].abs().max(center[1].abs()) * 2f64.sqrt() + side / 2f64.sqrt()
            }
            FiberShape::Annulus { r_out, .. } => *r_out,
            FiberShape::Mask { rows, cell } => {
                let nr = rows.len() as f64;
                let nc = rows.first().map_or(0, Vec::len) as f64;
                0.5 * cell * nr.hypot(nc) + cell
            }
        }
    }

    /// Rotationally invariant about the origin.
    pub fn is_rotation_invariant(&self) -> bool {
        matches!(self, FiberShape::Disk { .. } | FiberShape::Annulus { .. })
    }

    /// Invariant under rotation by a quarter turn about the origin.
    pub fn is_quarter_turn_invariant(&self) -> bool {
        match self {
            FiberShape::Square { center, .. } => center[0] == 0.0 && center[1] == 0.0,
            FiberShape::Mask { .. } => false,
            _ => true,
        }
    }

    /// Read a mask from a CSV/whitespace file of `0`/`1` entries.
    pub fn mask_file(path: &Path, cell: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Vec<bool> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| match t {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    _ => Err(Error::Parse(format!("mask entries must be 0 or 1, got `{t}`"))),
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Parse("mask rows must be non-empty and equally long".into()));
        }
        Ok(FiberShape::Mask { rows, cell })
    }
}

#[derive(Clone, Debug)]
pub enum FiberKind {
    /// Disk of radius `rho` with analytic Bessel data.
    Disk { radius: f64 },
    /// Finite-difference fiber on a grid of step `h`.
    Grid { shape: FiberShape, h: f64 },
    /// Circle of hollow tubes.
    Circle,
}

/// Cross-section description: kind, scale `l(x)` and twist `phi(x)`.
#[derive(Clone, Debug)]
pub struct FiberSpec {
    pub kind: FiberKind,
    pub scale: Profile,
    pub twist: Profile,
}

impl FiberSpec {
    pub fn new(kind: FiberKind) -> Self {
        FiberSpec {
            kind,
            scale: Profile::constant(1.0),
            twist: Profile::constant(0.0),
        }
    }

    pub fn with_scale(mut self, scale: Profile) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_twist(mut self, twist: Profile) -> Self {
        self.twist = twist;
        self
    }

    pub fn is_hollow(&self) -> bool {
        matches!(self.kind, FiberKind::Circle)
    }

    /// Shape of a massive fiber at unit scale.
    pub fn shape(&self) -> Option<FiberShape> {
        match &self.kind {
            FiberKind::Disk { radius } => Some(FiberShape::Disk { radius: *radius }),
            FiberKind::Grid { shape, .. } => Some(shape.clone()),
            FiberKind::Circle => None,
        }
    }

    /// Radius of the unit-scale cross-section about the curve (`R`).
    pub fn reach(&self) -> f64 {
        match &self.kind {
            FiberKind::Circle => 1.0,
            _ => self.shape().map_or(1.0, |s| s.reach()),
        }
    }
}

/// Where a grid node's neighbour in one lattice direction lies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Neighbor {
    Node(usize),
    /// Outside; the boundary is crossed at fraction `theta` of the link.
    Wall(f64),
}

/// Smallest boundary fraction used by the ghost-fluid closure.
pub const MIN_THETA: f64 = 0.02;

/// Interior nodes `h * (a, b)` of a planar region, with Dirichlet closure
/// by the symmetric ghost-fluid rule (diagonal `+ 1/(theta h^2)` for each
/// cut link).
#[derive(Clone, Debug)]
pub struct FiberGrid {
    pub h: f64,
    pub nodes: Vec<[i64; 2]>,
    /// Neighbours in directions `+e1, -e1, +e2, -e2`.
    pub neighbors: Vec<[Neighbor; 4]>,
    lookup: HashMap<[i64; 2], usize>,
}

const DIRS: [[i64; 2]; 4] = [[1, 0], [-1, 0], [0, 1], [0, -1]];

impl FiberGrid {
    /// Grid for the region `{y : level(y) < 0}` inside the disc of radius
    /// `reach`. With `sharp`, cut links use `theta = 1`.
    pub fn build(h: f64, reach: f64, level: &dyn Fn([f64; 2]) -> f64, sharp: bool) -> Self {
        let m = (reach / h).ceil() as i64 + 1;
        let mut nodes = Vec::new();
        let mut lookup = HashMap::new();
        for b in (-m..=m).rev() {
            for a in -m..=m {
                let y = [a as f64 * h, b as f64 * h];
                if level(y) < 0.0 {
                    lookup.insert([a, b], nodes.len());
                    nodes.push([a, b]);
                }
            }
        }
        let neighbors = nodes
            .iter()
            .map(|&[a, b]| {
                let mut out = [Neighbor::Wall(1.0); 4];
                for (k, d) in DIRS.iter().enumerate() {
                    let q = [a + d[0], b + d[1]];
                    out[k] = match lookup.get(&q) {
                        Some(&j) => Neighbor::Node(j),
                        None if sharp => Neighbor::Wall(1.0),
                        None => {
                            let p = [a as f64 * h, b as f64 * h];
                            let qq = [q[0] as f64 * h, q[1] as f64 * h];
                            Neighbor::Wall(crossing(level, p, qq).max(MIN_THETA))
                        }
                    };
                }
                out
            })
            .collect();
        FiberGrid {
            h,
            nodes,
            neighbors,
            lookup,
        }
    }

    pub fn from_shape(shape: &FiberShape, h: f64) -> Self {
        Self::build(h, shape.reach(), &|y| shape.level(y), shape.is_sharp())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn position(&self, i: usize) -> [f64; 2] {
        let [a, b] = self.nodes[i];
        [a as f64 * self.h, b as f64 * self.h]
    }

    pub fn index_of(&self, node: [i64; 2]) -> Option<usize> {
        self.lookup.get(&node).copied()
    }

    /// Sum of `1/theta` over cut links at node `i`.
    pub fn wall_weight(&self, i: usize) -> f64 {
        self.neighbors[i]
            .iter()
            .map(|n| match n {
                Neighbor::Wall(t) => 1.0 / t,
                Neighbor::Node(_) => 0.0,
            })
            .sum()
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.len()];
        let mut q = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = q.pop_front() {
            for n in &self.neighbors[i] {
                if let Neighbor::Node(j) = *n {
                    if !seen[j] {
                        seen[j] = true;
                        count += 1;
                        q.push_back(j);
                    }
                }
            }
        }
        count == self.len()
    }

    /// Real Dirichlet Laplacian `-Delta_y` (5-point, ghost-fluid walls).
    pub fn laplacian(&self) -> SparseHermitian<f64> {
        let w = 1.0 / (self.h * self.h);
        let mut t = Vec::with_capacity(5 * self.len());
        for i in 0..self.len() {
            let mut diag = w * self.wall_weight(i);
            for n in &self.neighbors[i] {
                if let Neighbor::Node(j) = *n {
                    diag += w;
                    t.push((i, j, -w));
                }
            }
            t.push((i, i, diag));
        }
        SparseHermitian::from_triplets(self.len(), t)
    }

    /// Magnetic Dirichlet Laplacian for the vertical potential
    /// `b/2 (-y2, y1)`: Peierls phase `b (p x q)/2` on the link `p -> q`,
    /// entry `-w exp(-i theta_pq)`.
    pub fn peierls_laplacian(&self, b: f64) -> SparseHermitian<Complex64> {
        let w = 1.0 / (self.h * self.h);
        let mut t = Vec::with_capacity(5 * self.len());
        for i in 0..self.len() {
            let p = self.position(i);
            let mut diag = w * self.wall_weight(i);
            for n in &self.neighbors[i] {
                if let Neighbor::Node(j) = *n {
                    let q = self.position(j);
                    let theta = 0.5 * b * (p[0] * q[1] - p[1] * q[0]);
                    diag += w;
                    t.push((i, j, -w * Complex64::from_polar(1.0, -theta)));
                }
            }
            t.push((i, i, Complex64::new(diag, 0.0)));
        }
        SparseHermitian::from_triplets(self.len(), t)
    }

    /// Discrete angular momentum `L = y1 D2 - y2 D1` with central
    /// differences and zero Dirichlet data; exactly skew-symmetric.
    pub fn angular_momentum(&self, u: &[f64]) -> Vec<f64> {
        let inv = 0.5 / self.h;
        (0..self.len())
            .map(|i| {
                let [y1, y2] = self.position(i);
                let val = |k: usize| match self.neighbors[i][k] {
                    Neighbor::Node(j) => u[j],
                    Neighbor::Wall(_) => 0.0,
                };
                let d1 = (val(0) - val(1)) * inv;
                let d2 = (val(2) - val(3)) * inv;
                y1 * d2 - y2 * d1
            })
            .collect()
    }
}

/// Fraction along `p -> q` where `level` changes sign (bisection).
fn crossing(level: &dyn Fn([f64; 2]) -> f64, p: [f64; 2], q: [f64; 2]) -> f64 {
    let at = |t: f64| level([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
    let (mut lo, mut hi) = (0.0, 1.0);
    if at(hi) < 0.0 {
        return 1.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if at(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ground state on a fiber grid; `values` are nodal samples normalized
/// with `h^2 sum |phi|^2 = 1`.
#[derive(Clone, Debug)]
pub struct GridGroundState {
    pub grid: FiberGrid,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub enum GroundState {
    /// `phi(y) = J0(j01 |y| / rho)` normalized.
    Bessel { radius: f64 },
    Grid(GridGroundState),
    /// `1/sqrt(2 pi)` on the circle.
    Constant,
}

/// Vertical eigendata at unit scale.
#[derive(Clone, Debug)]
pub struct VerticalSpectrum {
    pub eigenvalues: Vec<f64>,
    pub ground_state: GroundState,
    pub hollow: bool,
    pub mean_y: [f64; 2],
    pub mean_ysq: f64,
    /// `<y_i y_j>`.
    pub second_moment: [[f64; 2]; 2],
    /// `||L Phi0||^2`.
    pub lnorm_sq: f64,
    /// `<Phi0, L Phi0>`; zero up to rounding.
    pub mean_l: f64,
    /// `<Phi0, y_i L Phi0>`.
    pub y_l: [f64; 2],
    /// `<L Phi0, y_i L Phi0>`.
    pub l_y_l: [f64; 2],
    /// `(c_par, c_perp)` with `lambda_{0,2} = c_par B_par^2 + c_perp |B_perp|^2`.
    pub lambda02_coeffs: (f64, f64),
}

impl VerticalSpectrum {
    pub fn lambda0(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn gap(&self) -> f64 {
        self.eigenvalues.get(1).map_or(f64::INFINITY, |l| l - self.eigenvalues[0])
    }

    pub fn is_centred(&self, tol: f64) -> bool {
        self.mean_y[0].abs() <= tol && self.mean_y[1].abs() <= tol
    }
}

/// Power series for `J_n(x)`; adequate for `|x| <= 30`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let q = -half * half;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn bessel_j_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    }
}

/// First `count` positive zeros of `J_n`: bracketing scan, bisection, then
/// Newton polishing.
pub fn bessel_zeros(n: u32, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let step = 0.05;
    let mut a = if n == 0 { step } else { n as f64 * 0.9 + step };
    let mut fa = bessel_j(n, a);
    while out.len() < count && a < 30.0 {
        let b = a + step;
        let fb = bessel_j(n, b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..30 {
                let mid = 0.5 * (lo + hi);
                if bessel_j(n, lo).signum() == bessel_j(n, mid).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let mut z = 0.5 * (lo + hi);
            for _ in 0..8 {
                let d = bessel_j(n, z) / bessel_j_prime(n, z);
                z -= d;
                if d.abs() < 1e-16 * z {
                    break;
                }
            }
            out.push(z);
        }
        a = b;
        fa = fb;
    }
    out
}

/// Analytic data for the disk of radius `rho`.
pub fn solve_vertical_disk(radius: f64) -> VerticalSpectrum {
    solve_vertical_disk_modes(radius, 20)
}

pub fn solve_vertical_disk_modes(radius: f64, n_modes: usize) -> VerticalSpectrum {
    let j01 = bessel_zeros(0, 1)[0];
    let mut eig = Vec::new();
    for n in 0..=(n_modes as u32 + 2) {
        for z in bessel_zeros(n, n_modes) {
            let l = (z / radius).powi(2);
            eig.push(l);
            if n > 0 {
                eig.push(l);
            }
        }
    }
    eig.sort_by(f64::total_cmp);
    eig.truncate(n_modes.max(2));
    let msq = (j01 * j01 - 2.0) / (3.0 * j01 * j01) * radius * radius;
    VerticalSpectrum {
        eigenvalues: eig,
        ground_state: GroundState::Bessel { radius },
        hollow: false,
        mean_y: [0.0, 0.0],
        mean_ysq: msq,
        second_moment: [[0.5 * msq, 0.0], [0.0, 0.5 * msq]],
        lnorm_sq: 0.0,
        mean_l: 0.0,
        y_l: [0.0, 0.0],
        l_y_l: [0.0, 0.0],
        lambda02_coeffs: (0.25 * msq, 0.0),
    }
}

/// Fourier data of the unit circle: `lambda_k = k^2`, constant ground state.
pub fn solve_vertical_circle() -> VerticalSpectrum {
    solve_vertical_circle_modes(21)
}

pub fn solve_vertical_circle_modes(n_modes: usize) -> VerticalSpectrum {
    let mut eig = vec![0.0];
    let mut k = 1.0f64;
    while eig.len() < n_modes.max(2) {
        eig.push(k * k);
        eig.push(k * k);
        k += 1.0;
    }
    eig.truncate(n_modes.max(2));
    VerticalSpectrum {
        eigenvalues: eig,
        ground_state: GroundState::Constant,
        hollow: true,
        mean_y: [0.0, 0.0],
        mean_ysq: 1.0,
        second_moment: [[0.5, 0.0], [0.0, 0.5]],
        lnorm_sq: 0.0,
        mean_l: 0.0,
        y_l: [0.0, 0.0],
        l_y_l: [0.0, 0.0],
        lambda02_coeffs: (0.25, 0.0),
    }
}

/// Minimum interior node count for a grid fiber.
pub const MIN_FIBER_NODES: usize = 100;

/// Options for grid fiber solves.
#[derive(Clone, Debug)]
pub struct VerticalOptions {
    pub n_modes: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for VerticalOptions {
    fn default() -> Self {
        VerticalOptions {
            n_modes: 20,
            tol: 1e-11,
            seed: 7,
        }
    }
}

/// Finite-difference Dirichlet eigendata of `shape` at mesh step `h`.
pub fn solve_vertical_grid(shape: &FiberShape, h: f64, n_modes: usize) -> Result<VerticalSpectrum> {
    let opts = VerticalOptions {
        n_modes,
        ..VerticalOptions::default()
    };
    solve_vertical_on(FiberGrid::from_shape(shape, h), &opts)
}

/// Eigendata and moments for an already built grid.
pub fn solve_vertical_on(grid: FiberGrid, opts: &VerticalOptions) -> Result<VerticalSpectrum> {
    if grid.len() < MIN_FIBER_NODES {
        return Err(Error::MeshTooCoarse { nodes: grid.len() });
    }
    if !grid.is_connected() {
        return Err(Error::InvalidInput("fiber mask is not connected".into()));
    }
    let h = grid.h;
    let lap = grid.laplacian();
    let k = opts.n_modes.clamp(2, grid.len());
    let eo = EigenOptions {
        tol: opts.tol,
        seed: opts.seed,
        method: Method::Auto,
        ..EigenOptions::default()
    };
    let res = lowest_eigenpairs_with(&lap, k, &eo)?;
    let mut u = res.vectors[0].clone();
    // unit Euclidean norm; nodal values are u / h
    let s: f64 = u.iter().sum();
    let nrm = u.iter().map(|v| v * v).sum::<f64>().sqrt() * s.signum();
    u.iter_mut().for_each(|v| *v /= nrm);

    let mut mean_y = [0.0; 2];
    let mut m2 = [[0.0; 2]; 2];
    for (i, &ui) in u.iter().enumerate() {
        let y = grid.position(i);
        let p = ui * ui;
        for a in 0..2 {
            mean_y[a] += y[a] * p;
            for b in 0..2 {
                m2[a][b] += y[a] * y[b] * p;
            }
        }
    }
    let lu = grid.angular_momentum(&u);
    let lnorm_sq: f64 = lu.iter().map(|v| v * v).sum();
    let mean_l: f64 = u.iter().zip(&lu).map(|(a, b)| a * b).sum();
    let mut y_l = [0.0; 2];
    let mut l_y_l = [0.0; 2];
    for i in 0..grid.len() {
        let y = grid.position(i);
        for a in 0..2 {
            y_l[a] += y[a] * u[i] * lu[i];
            l_y_l[a] += y[a] * lu[i] * lu[i];
        }
    }

    let lambda0 = res.values[0];
    let gap = res.values[1] - lambda0;
    let c_par = lambda02_coefficient(&grid, &lap, &u, lambda0, gap)?;
    let values = u.iter().map(|v| v / h).collect();
    Ok(VerticalSpectrum {
        eigenvalues: res.values,
        ground_state: GroundState::Grid(GridGroundState { grid, values }),
        hollow: false,
        mean_y,
        mean_ysq: m2[0][0] + m2[1][1],
        second_moment: m2,
        lnorm_sq,
        mean_l,
        y_l,
        l_y_l,
        lambda02_coeffs: (c_par, 0.0),
    })
}

/// Smallest vertical gap for which the resolvent is used.
pub const MIN_GAP: f64 = 1e-8;

/// Second-order coefficient of the ground eigenvalue of the Peierls
/// operator `H(b) = H0 + b H1 + b^2 H2 + ...`:
/// `<u, H2 u> - <H1 u, (H0 - lambda0)^{-1} P_perp H1 u>` for unit `u`.
fn lambda02_coefficient(
    grid: &FiberGrid,
    lap: &SparseHermitian<f64>,
    u: &[f64],
    lambda0: f64,
    gap: f64,
) -> Result<f64> {
    if gap < MIN_GAP {
        return Err(Error::GapTooSmall { gap });
    }
    let w = 1.0 / (grid.h * grid.h);
    // H1 = -i * (real skew matrix S) with S_pq = -w t_pq, t_pq = (p x q)/2;
    // H2 has entries w t_pq^2 / 2 off the diagonal.
    let mut s_u = vec![0.0; grid.len()];
    let mut h2 = 0.0;
    for i in 0..grid.len() {
        let p = grid.position(i);
        for n in &grid.neighbors[i] {
            if let Neighbor::Node(j) = *n {
                let q = grid.position(j);
                let t = 0.5 * (p[0] * q[1] - p[1] * q[0]);
                s_u[i] -= w * t * u[j];
                h2 += 0.5 * w * t * t * u[i] * u[j];
            }
        }
    }
    let tol = 1e-12;
    let r = solve_shifted(lap, lambda0, &s_u, &[u.to_vec()], tol, 20 * grid.len() + 1000)?;
    let second: f64 = s_u.iter().zip(&r).map(|(a, b)| a * b).sum();
    Ok(h2 - second)
}

/// `lambda_{0,2}` for field component `b_par` and scale `l`.
pub fn lambda02(spec: &VerticalSpectrum, b_par: f64, scale: f64) -> Result<f64> {
    if !spec.hollow && spec.gap() < MIN_GAP {
        return Err(Error::GapTooSmall { gap: spec.gap() });
    }
    let (c_par, c_perp) = spec.lambda02_coeffs;
    Ok(scale * scale * (c_par * b_par * b_par + c_perp * 0.0))
}

/// Brute-force check of `lambda_{0,2}`: ground eigenvalues of the Peierls
/// vertical operator at field `eps * b_par`, fitted by
/// `a + c eps^2 + d eps^4`; returns `c` and the raw eigenvalues.
pub fn lambda02_bruteforce(grid: &FiberGrid, b_par: f64, eps: &[f64]) -> Result<(f64, Vec<f64>)> {
    if eps.len() != 3 {
        return Err(Error::InvalidInput("brute-force fit uses exactly three eps".into()));
    }
    let eo = EigenOptions {
        tol: 1e-13,
        method: Method::ShiftInvert,
        ..EigenOptions::default()
    };
    let mut lam = Vec::with_capacity(3);
    for &e in eps {
        let hm = grid.peierls_laplacian(e * b_par);
        lam.push(lowest_eigenpairs_with(&hm, 1, &eo)?.values[0]);
    }
    let m = nalgebra::Matrix3::from_fn(|i, j| eps[i].powi(2 * j as i32));
    let rhs = nalgebra::Vector3::from_iterator(lam.iter().copied());
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidInput("degenerate eps set".into()))?;
    Ok((sol[1], lam))
}
