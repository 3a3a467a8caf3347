//! Arc-length parametrized base curves and parallel (Bishop) frames.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, GL8};
use crate::vec3::{add, cross, dot, norm, normalize, scale, sub, Vec3};

/// Domain of the arc-length parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Open { x_min: f64, x_max: f64 },
    /// `x` ranges over `[-L, L)` with the ends identified.
    Closed { half_length: f64 },
}

impl Domain {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Domain::Open { x_min, x_max } => (x_min, x_max),
            Domain::Closed { half_length } => (-half_length, half_length),
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Domain::Closed { .. })
    }
}

#[derive(Clone, Debug)]
pub enum CurveKind {
    /// `c(x) = x d` for a unit direction `d`.
    Line { direction: Vec3 },
    /// Planar circle of radius `R` in the (1,2)-plane; closed with `L = pi R`.
    Circle { radius: f64 },
    /// `(a cos wx, a sin wx, b w x)` with `w = 1/sqrt(a^2 + b^2)`.
    Helix { a: f64, b: f64 },
    /// Planar curve in the (1,3)-plane whose tangent angle is
    /// `k0 w tanh(x/w)`, so the curvature is `k0 sech^2(x/w)`.
    Bump { k0: f64, width: f64 },
    Sampled(SampledCurve),
}

/// Curve given by uniformly spaced samples `(x, c(x))`.
#[derive(Clone, Debug)]
pub struct SampledCurve {
    x0: f64,
    dx: f64,
    pos: Vec<Vec3>,
    d1: Vec<Vec3>,
    d2: Vec<Vec3>,
    periodic: bool,
}

/// Value and first two derivatives of the curve at one parameter.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub c: Vec3,
    pub d1: Vec3,
    pub d2: Vec3,
}

#[derive(Clone, Debug)]
pub struct CurveModel {
    pub kind: CurveKind,
    pub domain: Domain,
}

pub const ANALYTIC_SPEED_TOL: f64 = 1e-10;
pub const SAMPLED_SPEED_TOL: f64 = 1e-6;

impl CurveModel {
    pub fn line(x_min: f64, x_max: f64) -> Self {
        Self::line_along([0.0, 0.0, 1.0], x_min, x_max)
    }

    pub fn line_along(direction: Vec3, x_min: f64, x_max: f64) -> Self {
        CurveModel {
            kind: CurveKind::Line {
                direction: normalize(direction),
            },
            domain: Domain::Open { x_min, x_max },
        }
    }

    pub fn circle(radius: f64) -> Self {
        CurveModel {
            kind: CurveKind::Circle { radius },
            domain: Domain::Closed {
                half_length: PI * radius,
            },
        }
    }

    pub fn helix(a: f64, b: f64, x_min: f64, x_max: f64) -> Self {
        CurveModel {
            kind: CurveKind::Helix { a, b },
            domain: Domain::Open { x_min, x_max },
        }
    }

    pub fn bump(k0: f64, width: f64, x_min: f64, x_max: f64) -> Self {
        CurveModel {
            kind: CurveKind::Bump { k0, width },
            domain: Domain::Open { x_min, x_max },
        }
    }

    /// Sampled curve from rows `(x, c1, c2, c3)` with uniform spacing in `x`.
    /// For a closed curve the rows cover one period without repeating the
    /// first point.
    pub fn sampled(rows: &[[f64; 4]], closed: bool) -> Result<Self> {
        let s = SampledCurve::new(rows, closed)?;
        let n = rows.len();
        let domain = if closed {
            Domain::Closed {
                half_length: 0.5 * s.dx * n as f64,
            }
        } else {
            Domain::Open {
                x_min: rows[0][0],
                x_max: rows[n - 1][0],
            }
        };
        let curve = CurveModel {
            kind: CurveKind::Sampled(s),
            domain,
        };
        curve.check_unit_speed(n.max(16))?;
        Ok(curve)
    }

    pub fn sampled_csv(path: &Path, closed: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<f64> = match line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
            {
                Ok(f) => f,
                // header row
                Err(_) if rows.is_empty() => continue,
                Err(_) => return Err(Error::Parse(format!("bad curve row `{line}`"))),
            };
            if f.len() != 4 {
                return Err(Error::Parse(format!("curve row needs 4 columns: `{line}`")));
            }
            rows.push([f[0], f[1], f[2], f[3]]);
        }
        Self::sampled(&rows, closed)
    }

    pub fn is_closed(&self) -> bool {
        self.domain.is_closed()
    }

    pub fn speed_tolerance(&self) -> f64 {
        match self.kind {
            CurveKind::Sampled(_) => SAMPLED_SPEED_TOL,
            _ => ANALYTIC_SPEED_TOL,
        }
    }

    pub fn eval(&self, x: f64) -> CurvePoint {
        match &self.kind {
            CurveKind::Line { direction } => CurvePoint {
                c: scale(*direction, x),
                d1: *direction,
                d2: [0.0; 3],
            },
            CurveKind::Circle { radius } => {
                let r = *radius;
                let (s, c) = (x / r).sin_cos();
                CurvePoint {
                    c: [r * c, r * s, 0.0],
                    d1: [-s, c, 0.0],
                    d2: [-c / r, -s / r, 0.0],
                }
            }
            CurveKind::Helix { a, b } => {
                let w = 1.0 / (a * a + b * b).sqrt();
                let (s, c) = (w * x).sin_cos();
                CurvePoint {
                    c: [a * c, a * s, b * w * x],
                    d1: [-a * w * s, a * w * c, b * w],
                    d2: [-a * w * w * c, -a * w * w * s, 0.0],
                }
            }
            CurveKind::Bump { k0, width } => {
                let angle = |t: f64| k0 * width * (t / width).tanh();
                let th = angle(x);
                let sech = 1.0 / (x / width).cosh();
                let dth = k0 * sech * sech;
                let c = bump_position(x, &angle, *width);
                CurvePoint {
                    c,
                    d1: [th.sin(), 0.0, th.cos()],
                    d2: [dth * th.cos(), 0.0, -dth * th.sin()],
                }
            }
            CurveKind::Sampled(s) => s.eval(x),
        }
    }

    /// Check `|c'| = 1` and `c'' . c' = 0` on `n` uniformly spaced points.
    pub fn check_unit_speed(&self, n: usize) -> Result<()> {
        let (a, b) = self.domain.bounds();
        let tol = self.speed_tolerance();
        for i in 0..n {
            let x = a + (b - a) * i as f64 / (n - 1).max(1) as f64;
            let p = self.eval(x);
            let speed = norm(p.d1);
            if (speed - 1.0).abs() > tol || dot(p.d1, p.d2).abs() > tol * (1.0 + norm(p.d2)) {
                return Err(Error::NonUnitSpeed { x, speed });
            }
        }
        Ok(())
    }
}

fn bump_position(x: f64, angle: &dyn Fn(f64) -> f64, width: f64) -> Vec3 {
    // integrate the unit tangent from 0 on panels no longer than width / 4
    let panels = ((x.abs() / (0.25 * width)).ceil() as usize).max(1);
    let h = x / panels as f64;
    let mut p = [0.0; 3];
    for k in 0..panels {
        let a = k as f64 * h;
        let seg = gauss_legendre(&GL8, a, a + h, |t| {
            let th = angle(t);
            [th.sin(), 0.0, th.cos()]
        });
        p = add(p, seg);
    }
    p
}

impl SampledCurve {
    fn new(rows: &[[f64; 4]], periodic: bool) -> Result<Self> {
        let n = rows.len();
        if n < 8 {
            return Err(Error::InvalidInput(format!(
                "sampled curve needs at least 8 rows, got {n}"
            )));
        }
        let x0 = rows[0][0];
        let dx = (rows[n - 1][0] - x0) / (n - 1) as f64;
        if !(dx > 0.0) {
            return Err(Error::InvalidInput("sample abscissae must increase".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if (r[0] - (x0 + i as f64 * dx)).abs() > 1e-9 * (1.0 + dx * n as f64) {
                return Err(Error::InvalidInput(
                    "sampled curve abscissae must be uniformly spaced".into(),
                ));
            }
        }
        let pos: Vec<Vec3> = rows.iter().map(|r| [r[1], r[2], r[3]]).collect();
        let at = |i: isize| -> Vec3 {
            if periodic {
                pos[i.rem_euclid(n as isize) as usize]
            } else {
                pos[i as usize]
            }
        };
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for i in 0..n as isize {
            // 4th-order stencils, shifted one-sided near open ends
            let c = if periodic {
                i
            } else {
                i.clamp(2, n as isize - 3)
            };
            let s = i - c; // offset of i relative to the stencil centre
            let w1 = fd_weights_first(s);
            let w2 = fd_weights_second(s);
            let mut a = [0.0; 3];
            let mut b = [0.0; 3];
            for (k, off) in (-2..=2).enumerate() {
                let p = at(c + off);
                a = add(a, scale(p, w1[k] / dx));
                b = add(b, scale(p, w2[k] / (dx * dx)));
            }
            d1.push(a);
            d2.push(b);
        }
        Ok(SampledCurve {
            x0,
            dx,
            pos,
            d1,
            d2,
            periodic,
        })
    }

    fn eval(&self, x: f64) -> CurvePoint {
        // cubic Lagrange interpolation through four neighbouring samples
        let n = self.pos.len() as isize;
        let t = (x - self.x0) / self.dx;
        let base = t.floor() as isize;
        let start = if self.periodic {
            base - 1
        } else {
            (base - 1).clamp(0, n - 4)
        };
        let u = t - start as f64;
        let idx = |k: isize| -> usize {
            if self.periodic {
                (start + k).rem_euclid(n) as usize
            } else {
                (start + k) as usize
            }
        };
        let mut out = CurvePoint {
            c: [0.0; 3],
            d1: [0.0; 3],
            d2: [0.0; 3],
        };
        for k in 0..4 {
            let mut w = 1.0;
            for m in 0..4 {
                if m != k {
                    w *= (u - m as f64) / (k as f64 - m as f64);
                }
            }
            let i = idx(k as isize);
            out.c = add(out.c, scale(self.pos[i], w));
            out.d1 = add(out.d1, scale(self.d1[i], w));
            out.d2 = add(out.d2, scale(self.d2[i], w));
        }
        out
    }
}

/// Weights on offsets -2..=2 for the first derivative at offset `s`.
fn fd_weights_first(s: isize) -> [f64; 5] {
    match s {
        0 => [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
        -1 => [-3.0 / 12.0, -10.0 / 12.0, 18.0 / 12.0, -6.0 / 12.0, 1.0 / 12.0],
        1 => [-1.0 / 12.0, 6.0 / 12.0, -18.0 / 12.0, 10.0 / 12.0, 3.0 / 12.0],
        -2 => [-25.0 / 12.0, 48.0 / 12.0, -36.0 / 12.0, 16.0 / 12.0, -3.0 / 12.0],
        2 => [3.0 / 12.0, -16.0 / 12.0, 36.0 / 12.0, -48.0 / 12.0, 25.0 / 12.0],
        _ => unreachable!(),
    }
}

/// Weights on offsets -2..=2 for the second derivative at offset `s`.
fn fd_weights_second(s: isize) -> [f64; 5] {
    match s {
        0 => [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
        -1 => [11.0 / 12.0, -20.0 / 12.0, 6.0 / 12.0, 4.0 / 12.0, -1.0 / 12.0],
        1 => [-1.0 / 12.0, 4.0 / 12.0, 6.0 / 12.0, -20.0 / 12.0, 11.0 / 12.0],
        -2 => [35.0 / 12.0, -104.0 / 12.0, 114.0 / 12.0, -56.0 / 12.0, 11.0 / 12.0],
        2 => [11.0 / 12.0, -56.0 / 12.0, 114.0 / 12.0, -104.0 / 12.0, 35.0 / 12.0],
        _ => unreachable!(),
    }
}

pub const FRAME_TOL: f64 = 1e-8;

/// Orthonormal frame `(tau, e1, e2)` at one point, `e2 = tau x e1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub tau: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
}

impl Frame {
    /// Normal pair rotated by `beta`: `e1' = cos b e1 + sin b e2`.
    pub fn rotated(&self, beta: f64) -> Frame {
        let (s, c) = beta.sin_cos();
        Frame {
            tau: self.tau,
            e1: add(scale(self.e1, c), scale(self.e2, s)),
            e2: add(scale(self.e1, -s), scale(self.e2, c)),
        }
    }

    /// Ambient point `c + n1 e1 + n2 e2`.
    pub fn normal_offset(&self, n: [f64; 2]) -> Vec3 {
        add(scale(self.e1, n[0]), scale(self.e2, n[1]))
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let f = [self.tau, self.e1, self.e2];
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(f[i], f[j]) - target).abs());
            }
        }
        worst
    }
}

/// Bishop frame sampled on a uniform grid, with curvatures.
#[derive(Clone, Debug)]
pub struct FrameField {
    pub curve: CurveModel,
    pub grid: Vec<f64>,
    pub tau: Vec<Vec3>,
    pub e1: Vec<Vec3>,
    pub e2: Vec<Vec3>,
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
    /// Closed curves: `e1(L) = cos a e1(-L) + sin a e2(-L)`.
    pub holonomy_angle: Option<f64>,
}

fn orthonormalize(tau: Vec3, e1: Vec3, e2: Vec3) -> (Vec3, Vec3) {
    let e1 = normalize(sub(e1, scale(tau, dot(e1, tau))));
    let e2 = sub(e2, scale(tau, dot(e2, tau)));
    let e2 = normalize(sub(e2, scale(e1, dot(e2, e1))));
    (e1, e2)
}

/// Integrate the parallel-transport equations `e_j' = -(c'' . e_j) c'` with
/// classical RK4 on `n_points` uniformly spaced samples.
pub fn build_parallel_frame(
    curve: &CurveModel,
    n_points: usize,
    initial_normal: Option<Vec3>,
) -> Result<FrameField> {
    if n_points < 16 {
        return Err(Error::InvalidInput(format!(
            "frame needs at least 16 points, got {n_points}"
        )));
    }
    curve.check_unit_speed(n_points)?;
    let (a, b) = curve.domain.bounds();
    let dx = (b - a) / (n_points - 1) as f64;
    let grid: Vec<f64> = (0..n_points).map(|i| a + i as f64 * dx).collect();

    let p0 = curve.eval(a);
    let tau0 = normalize(p0.d1);
    let n0 = match initial_normal {
        Some(v) => v,
        None => {
            // coordinate axis least aligned with the tangent
            let mut k = 0;
            for j in 1..3 {
                if tau0[j].abs() < tau0[k].abs() {
                    k = j;
                }
            }
            let mut v = [0.0; 3];
            v[k] = 1.0;
            v
        }
    };
    let nn = norm(n0);
    let perp = sub(n0, scale(tau0, dot(n0, tau0)));
    if nn == 0.0 || norm(perp) <= 1e-8 * nn {
        return Err(Error::DegenerateNormal);
    }
    let mut e1 = normalize(perp);
    let mut e2 = cross(tau0, e1);

    let rhs = |x: f64, e: Vec3| -> Vec3 {
        let p = curve.eval(x);
        scale(p.d1, -dot(p.d2, e))
    };

    let mut taus = Vec::with_capacity(n_points);
    let mut e1s = Vec::with_capacity(n_points);
    let mut e2s = Vec::with_capacity(n_points);
    let mut k1 = Vec::with_capacity(n_points);
    let mut k2 = Vec::with_capacity(n_points);
    for (i, &x) in grid.iter().enumerate() {
        let p = curve.eval(x);
        let tau = normalize(p.d1);
        let (o1, o2) = orthonormalize(tau, e1, e2);
        e1 = o1;
        e2 = o2;
        taus.push(tau);
        e1s.push(e1);
        e2s.push(e2);
        k1.push(dot(p.d2, e1));
        k2.push(dot(p.d2, e2));
        if i + 1 < n_points {
            e1 = rk4_step(&rhs, x, dx, e1);
            e2 = rk4_step(&rhs, x, dx, e2);
        }
    }
    let holonomy_angle = if curve.is_closed() {
        let last = n_points - 1;
        Some(dot(e1s[last], e2s[0]).atan2(dot(e1s[last], e1s[0])))
    } else {
        None
    };
    Ok(FrameField {
        curve: curve.clone(),
        grid,
        tau: taus,
        e1: e1s,
        e2: e2s,
        kappa1: k1,
        kappa2: k2,
        holonomy_angle,
    })
}

fn rk4_step(f: &dyn Fn(f64, Vec3) -> Vec3, x: f64, h: f64, y: Vec3) -> Vec3 {
    let a = f(x, y);
    let b = f(x + 0.5 * h, add(y, scale(a, 0.5 * h)));
    let c = f(x + 0.5 * h, add(y, scale(b, 0.5 * h)));
    let d = f(x + h, add(y, scale(c, h)));
    add(
        y,
        scale(add(add(a, scale(b, 2.0)), add(scale(c, 2.0), d)), h / 6.0),
    )
}

impl FrameField {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    pub fn frame(&self, i: usize) -> Frame {
        Frame {
            tau: self.tau[i],
            e1: self.e1[i],
            e2: self.e2[i],
        }
    }

    /// `kappa1^2 + kappa2^2` on the grid.
    pub fn curvature_norm_sq(&self) -> Vec<f64> {
        self.kappa1
            .iter()
            .zip(&self.kappa2)
            .map(|(a, b)| a * a + b * b)
            .collect()
    }

    pub fn max_curvature(&self) -> f64 {
        self.curvature_norm_sq()
            .into_iter()
            .fold(0.0, f64::max)
            .sqrt()
    }

    pub fn orthonormality_defect(&self) -> f64 {
        (0..self.len())
            .map(|i| self.frame(i).orthonormality_defect())
            .fold(0.0, f64::max)
    }

    /// Same curve with every normal pair rotated by `beta`; equivalent to
    /// rotating the initial normal.
    pub fn rotated(&self, beta: f64) -> FrameField {
        let mut out = self.clone();
        let (s, c) = beta.sin_cos();
        for i in 0..self.len() {
            let f = self.frame(i).rotated(beta);
            out.e1[i] = f.e1;
            out.e2[i] = f.e2;
            let (k1, k2) = (self.kappa1[i], self.kappa2[i]);
            out.kappa1[i] = c * k1 + s * k2;
            out.kappa2[i] = -s * k1 + c * k2;
        }
        out
    }

    /// Frame at an arbitrary parameter: cubic Hermite interpolation of the
    /// normals (their derivatives are `-kappa_j tau`), then
    /// re-orthonormalization against the exact tangent. On closed curves `x`
    /// is reduced to `[-L, L)` and the holonomy rotation applied per lap.
    pub fn at(&self, x: f64) -> Frame {
        let (a, b) = self.curve.domain.bounds();
        let mut x = x;
        let mut turn = 0.0;
        if let (true, Some(alpha)) = (self.curve.is_closed(), self.holonomy_angle) {
            let period = b - a;
            let laps = ((x - a) / period).floor();
            x -= laps * period;
            turn = laps * alpha;
        }
        let dx = self.spacing();
        let n = self.len();
        let i = (((x - a) / dx).floor() as isize).clamp(0, n as isize - 2) as usize;
        let t = (x - self.grid[i]) / dx;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        let interp = |e: &[Vec3], k: &[f64]| -> Vec3 {
            let d0 = scale(self.tau[i], -k[i] * dx);
            let d1 = scale(self.tau[i + 1], -k[i + 1] * dx);
            add(
                add(scale(e[i], h00), scale(d0, h10)),
                add(scale(e[i + 1], h01), scale(d1, h11)),
            )
        };
        let e1 = interp(&self.e1, &self.kappa1);
        let e2 = interp(&self.e2, &self.kappa2);
        let tau = normalize(self.curve.eval(x).d1);
        let (e1, e2) = orthonormalize(tau, e1, e2);
        let f = Frame { tau, e1, e2 };
        if turn != 0.0 {
            f.rotated(turn)
        } else {
            f
        }
    }

    /// Curvatures `(kappa1, kappa2)` at an arbitrary parameter.
    pub fn kappa_at(&self, x: f64) -> [f64; 2] {
        let f = self.at(x);
        let d2 = self.curve.eval(x).d2;
        [dot(d2, f.e1), dot(d2, f.e2)]
    }

    /// Second derivative of the curvature pair by 4th-order central
    /// differences of [`kappa_at`](Self::kappa_at) with step `h`.
    pub fn kappa_dd_at(&self, x: f64, h: f64) -> [f64; 2] {
        let k = |s: f64| self.kappa_at(x + s * h);
        let (m2, m1, z, p1, p2) = (k(-2.0), k(-1.0), k(0.0), k(1.0), k(2.0));
        let mut out = [0.0; 2];
        for j in 0..2 {
            out[j] = (-m2[j] + 16.0 * m1[j] - 30.0 * z[j] + 16.0 * p1[j] - p2[j]) / (12.0 * h * h);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_has_constant_frame() {
        let c = CurveModel::line(-3.0, 3.0);
        let f = build_parallel_frame(&c, 64, None).unwrap();
        for i in 0..f.len() {
            assert_eq!(f.kappa1[i], 0.0);
            assert_eq!(f.kappa2[i], 0.0);
            assert_eq!(f.e1[i], [1.0, 0.0, 0.0]);
            assert_eq!(f.e2[i], [0.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn helix_curvature_is_frenet_value() {
        let (a, b) = (1.0, 1.0);
        let w = 1.0 / 2f64.sqrt();
        let c = CurveModel::helix(a, b, -10.0, 10.0);
        let f = build_parallel_frame(&c, 512, None).unwrap();
        let expect = (a * w * w).powi(2);
        for k in f.curvature_norm_sq() {
            assert!((k - expect).abs() < 1e-12);
        }
        assert!(f.orthonormality_defect() < FRAME_TOL);
    }

    #[test]
    fn circle_has_trivial_holonomy() {
        let c = CurveModel::circle(1.0);
        let f = build_parallel_frame(&c, 400, Some([0.0, 0.0, 1.0])).unwrap();
        let alpha = f.holonomy_angle.unwrap();
        assert!(alpha.rem_euclid(2.0 * PI).min(2.0 * PI - alpha.rem_euclid(2.0 * PI)) < 1e-8);
        for k in f.curvature_norm_sq() {
            assert!((k - 1.0).abs() < 1e-10);
        }
        // analytic frame: e1 = (0,0,1), e2 = tau x e1
        for i in 0..f.len() {
            assert!(norm(sub(f.e1[i], [0.0, 0.0, 1.0])) < 1e-9);
        }
    }

    #[test]
    fn degenerate_normal_rejected() {
        let c = CurveModel::line(0.0, 1.0);
        assert!(matches!(
            build_parallel_frame(&c, 32, Some([0.0, 0.0, 2.0])),
            Err(Error::DegenerateNormal)
        ));
    }

    #[test]
    fn interpolated_frame_matches_nodes_and_refinement() {
        let c = CurveModel::bump(0.8, 1.0, -4.0, 4.0);
        let f = build_parallel_frame(&c, 801, None).unwrap();
        let fine = build_parallel_frame(&c, 1601, None).unwrap();
        for &x in &[-3.3, -0.71, 0.0, 0.2345, 2.9] {
            let a = f.at(x);
            let b = fine.at(x);
            assert!(norm(sub(a.e1, b.e1)) < 1e-8);
            assert!(a.orthonormality_defect() < 1e-12);
            let k = f.kappa_at(x);
            let sech = 1.0 / x.cosh();
            assert!(((k[0] * k[0] + k[1] * k[1]).sqrt() - 0.8 * sech * sech).abs() < 1e-10);
        }
    }

    #[test]
    fn sampled_circle_agrees_with_analytic() {
        let r = 2.0;
        let n = 400;
        let period = 2.0 * PI * r;
        let rows: Vec<[f64; 4]> = (0..n)
            .map(|i| {
                let x = -PI * r + period * i as f64 / n as f64;
                [x, r * (x / r).cos(), r * (x / r).sin(), 0.0]
            })
            .collect();
        let c = CurveModel::sampled(&rows, true).unwrap();
        let f = build_parallel_frame(&c, 256, None).unwrap();
        for k in f.curvature_norm_sq() {
            assert!((k - 0.25).abs() < 1e-6);
        }
    }
}
