//! Ambient vector potentials, the field decomposed along the curve, and the
//! leading-order pullback components used by the effective operators.

use crate::curve::FrameField;
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::fiber::{FiberKind, FiberSpec};
use crate::vec3::{add, cross, dot, norm, scale, Vec3};

/// A magnetic potential on R^3 as the Cartesian components of a one-form.
#[derive(Clone, Debug)]
pub enum VectorPotential {
    Zero,
    /// Uniform field `b` in the symmetric gauge `A = 1/2 b x p`.
    Uniform { b: Vec3 },
    /// `A = 1/2 (b0 + slope p3) (-p2, p1, 0)`, with field
    /// `B = (-slope p1 / 2, -slope p2 / 2, b0 + slope p3)`.
    AxialGradient { b0: f64, slope: f64 },
    /// `A = grad chi`.
    PureGauge(Gauge),
    /// `A = base + grad chi`.
    Gauged {
        base: Box<VectorPotential>,
        gauge: Gauge,
    },
}

/// A scalar gauge function with its symbolic gradient.
#[derive(Clone, Debug)]
pub struct Gauge {
    pub chi: Expr,
    grad: [Expr; 3],
}

impl Gauge {
    pub fn new(chi: Expr) -> Self {
        let grad = [
            chi.derivative(Var::P1),
            chi.derivative(Var::P2),
            chi.derivative(Var::P3),
        ];
        Gauge { chi, grad }
    }

    pub fn value(&self, p: Vec3) -> f64 {
        self.chi.eval_p(p)
    }

    pub fn gradient(&self, p: Vec3) -> Vec3 {
        [
            self.grad[0].eval_p(p),
            self.grad[1].eval_p(p),
            self.grad[2].eval_p(p),
        ]
    }
}

impl VectorPotential {
    pub fn uniform(b: Vec3) -> Self {
        VectorPotential::Uniform { b }
    }

    pub fn pure_gauge(chi: Expr) -> Self {
        VectorPotential::PureGauge(Gauge::new(chi))
    }

    /// Parse `zero`, `uniform(Bx,By,Bz)`, `axial_gradient(B0,slope)` or
    /// `pure_gauge(chi=...)`.
    pub fn parse(src: &str) -> Result<Self> {
        let s = src.trim();
        let (name, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], &s[i + 1..s.len() - 1]),
            None => (s, ""),
            _ => return Err(Error::Parse(format!("bad potential `{src}`"))),
        };
        let nums = |n: usize| -> Result<Vec<f64>> {
            let v: Vec<f64> = args
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("bad numbers in `{src}`")))?;
            if v.len() != n {
                return Err(Error::Parse(format!("`{name}` takes {n} arguments")));
            }
            Ok(v)
        };
        match name.trim() {
            "zero" | "none" => Ok(VectorPotential::Zero),
            "uniform" => {
                let v = nums(3)?;
                Ok(VectorPotential::uniform([v[0], v[1], v[2]]))
            }
            "axial_gradient" => {
                let v = nums(2)?;
                Ok(VectorPotential::AxialGradient {
                    b0: v[0],
                    slope: v[1],
                })
            }
            "pure_gauge" => {
                let body = args.trim();
                let body = body.strip_prefix("chi").map(str::trim_start).unwrap_or(body);
                let body = body.strip_prefix('=').unwrap_or(body);
                Ok(VectorPotential::pure_gauge(Expr::parse(body)?))
            }
            other => Err(Error::Parse(format!("unknown potential `{other}`"))),
        }
    }

    /// `A + d chi`.
    pub fn gauge_transform(&self, chi: Expr) -> VectorPotential {
        VectorPotential::Gauged {
            base: Box::new(self.clone()),
            gauge: Gauge::new(chi),
        }
    }

    pub fn eval(&self, p: Vec3) -> Vec3 {
        match self {
            VectorPotential::Zero => [0.0; 3],
            VectorPotential::Uniform { b } => scale(cross(*b, p), 0.5),
            VectorPotential::AxialGradient { b0, slope } => {
                let f = 0.5 * (b0 + slope * p[2]);
                [-f * p[1], f * p[0], 0.0]
            }
            VectorPotential::PureGauge(g) => g.gradient(p),
            VectorPotential::Gauged { base, gauge } => add(base.eval(p), gauge.gradient(p)),
        }
    }

    /// Like [`eval`](Self::eval) but rejects non-finite values.
    pub fn try_eval(&self, p: Vec3) -> Result<Vec3> {
        let a = self.eval(p);
        if a.iter().all(|v| v.is_finite()) {
            Ok(a)
        } else {
            Err(Error::EvaluationDomain { point: p })
        }
    }

    /// Closed-form curl where available.
    pub fn analytic_curl(&self, p: Vec3) -> Option<Vec3> {
        match self {
            VectorPotential::Zero | VectorPotential::PureGauge(_) => Some([0.0; 3]),
            VectorPotential::Uniform { b } => Some(*b),
            VectorPotential::AxialGradient { b0, slope } => Some([
                -0.5 * slope * p[0],
                -0.5 * slope * p[1],
                b0 + slope * p[2],
            ]),
            VectorPotential::Gauged { base, .. } => base.analytic_curl(p),
        }
    }

    /// Central-difference curl with step `h` per coordinate.
    pub fn numerical_curl(&self, p: Vec3, h: f64) -> Vec3 {
        let d = |i: usize, j: usize| {
            // d A_i / d p_j
            let mut a = p;
            let mut b = p;
            a[j] += h;
            b[j] -= h;
            (self.eval(a)[i] - self.eval(b)[i]) / (2.0 * h)
        };
        [d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)]
    }

    /// Default finite-difference step `1e-5 (1 + |p|)`.
    pub fn curl_step(p: Vec3) -> f64 {
        1e-5 * (1.0 + norm(p))
    }

    pub fn curl(&self, p: Vec3) -> Vec3 {
        self.analytic_curl(p)
            .unwrap_or_else(|| self.numerical_curl(p, Self::curl_step(p)))
    }
}

/// The field along the curve in the Bishop frame.
#[derive(Clone, Debug)]
pub struct FieldOnCurve {
    pub grid: Vec<f64>,
    pub bpar: Vec<f64>,
    pub bperp1: Vec<f64>,
    pub bperp2: Vec<f64>,
    /// `A(c(x)) . c'(x)`.
    pub ab: Vec<f64>,
}

impl FieldOnCurve {
    pub fn bperp(&self, i: usize) -> [f64; 2] {
        [self.bperp1[i], self.bperp2[i]]
    }
}

/// Project the field `B = curl A` onto the frame: `B_par = B . tau`,
/// `B_perp_j = B . e_j`; `A_B = A(c) . c'`.
pub fn field_on_curve(a: &VectorPotential, frame: &FrameField) -> Result<FieldOnCurve> {
    let n = frame.len();
    let mut out = FieldOnCurve {
        grid: frame.grid.clone(),
        bpar: Vec::with_capacity(n),
        bperp1: Vec::with_capacity(n),
        bperp2: Vec::with_capacity(n),
        ab: Vec::with_capacity(n),
    };
    for i in 0..n {
        let pt = frame.curve.eval(frame.grid[i]);
        let av = a.try_eval(pt.c)?;
        let b = a.curl(pt.c);
        if !b.iter().all(|v| v.is_finite()) {
            return Err(Error::EvaluationDomain { point: pt.c });
        }
        out.bpar.push(dot(b, frame.tau[i]));
        out.bperp1.push(dot(b, frame.e1[i]));
        out.bperp2.push(dot(b, frame.e2[i]));
        out.ab.push(dot(av, pt.d1));
    }
    Ok(out)
}

/// Field components and tangential potential at an arbitrary parameter.
pub fn field_at(a: &VectorPotential, frame: &FrameField, x: f64) -> (f64, [f64; 2], f64) {
    let f = frame.at(x);
    let pt = frame.curve.eval(x);
    let b = a.curl(pt.c);
    (
        dot(b, f.tau),
        [dot(b, f.e1), dot(b, f.e2)],
        dot(a.eval(pt.c), pt.d1),
    )
}

/// Two-dimensional cross product `u1 v2 - u2 v1`.
#[inline]
pub fn cross2(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

/// Rotation of the fiber plane by `phi`.
#[inline]
pub fn rotate2(phi: f64, y: [f64; 2]) -> [f64; 2] {
    let (s, c) = phi.sin_cos();
    [c * y[0] - s * y[1], s * y[0] + c * y[1]]
}

/// Leading-order pullback components on the base grid.
#[derive(Clone, Debug)]
pub struct PullbackPotential {
    pub field: FieldOnCurve,
    pub hollow: bool,
    pub scale: Vec<f64>,
    pub twist: Vec<f64>,
}

impl PullbackPotential {
    /// `A_B(d_x)` at grid node `i`.
    pub fn a_b(&self, i: usize) -> f64 {
        self.field.ab[i]
    }

    /// Massive fiber: `A_H(d_x^H)(x_i, y) = B_perp x l r(phi) y`.
    pub fn a_h_massive(&self, i: usize, y: [f64; 2]) -> f64 {
        let ry = rotate2(self.twist[i], y);
        cross2(self.field.bperp(i), [self.scale[i] * ry[0], self.scale[i] * ry[1]])
    }

    /// Hollow fiber: `A_H(d_x^H)(x_i, y) = B_perp x l (cos y, sin y)`.
    pub fn a_h_hollow(&self, i: usize, y: f64) -> f64 {
        let l = self.scale[i];
        cross2(self.field.bperp(i), [l * y.cos(), l * y.sin()])
    }

    /// Massive fiber: `(A_V(d_y1), A_V(d_y2)) = 1/2 B_par l^2 (-y2, y1)`.
    pub fn a_v_massive(&self, i: usize, y: [f64; 2]) -> [f64; 2] {
        let f = 0.5 * self.field.bpar[i] * self.scale[i] * self.scale[i];
        [-f * y[1], f * y[0]]
    }

    /// Hollow fiber: `A_V(d_y) = 1/2 B_par l^2`.
    pub fn a_v_hollow(&self, i: usize) -> f64 {
        0.5 * self.field.bpar[i] * self.scale[i] * self.scale[i]
    }
}

pub fn pullback_components(
    a: &VectorPotential,
    frame: &FrameField,
    fiber: &FiberSpec,
) -> Result<PullbackPotential> {
    let field = field_on_curve(a, frame)?;
    let hollow = match fiber.kind {
        FiberKind::Circle => true,
        FiberKind::Disk { .. } | FiberKind::Grid { .. } => false,
    };
    let scale = frame.grid.iter().map(|&x| fiber.scale.value(x)).collect();
    let twist = frame.grid.iter().map(|&x| fiber.twist.value(x)).collect();
    Ok(PullbackPotential {
        field,
        hollow,
        scale,
        twist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_parallel_frame, CurveModel};

    fn straight() -> FrameField {
        build_parallel_frame(&CurveModel::line(-2.0, 2.0), 32, None).unwrap()
    }

    #[test]
    fn axial_uniform_field_on_line() {
        let b0 = 1.7;
        let foc = field_on_curve(&VectorPotential::uniform([0.0, 0.0, b0]), &straight()).unwrap();
        for i in 0..foc.grid.len() {
            assert!((foc.bpar[i] - b0).abs() < 1e-15);
            assert_eq!(foc.bperp(i), [0.0, 0.0]);
            assert_eq!(foc.ab[i], 0.0);
        }
    }

    #[test]
    fn transverse_uniform_field_on_line() {
        let b0 = 0.6;
        let foc = field_on_curve(&VectorPotential::uniform([b0, 0.0, 0.0]), &straight()).unwrap();
        for i in 0..foc.grid.len() {
            assert_eq!(foc.bpar[i], 0.0);
            assert!((foc.bperp1[i].hypot(foc.bperp2[i]) - b0).abs() < 1e-15);
        }
    }

    #[test]
    fn pure_gauge_has_no_field() {
        let a = VectorPotential::parse("pure_gauge(chi = p1*p2 + 0.3*p3^2 - p1)").unwrap();
        let frame = build_parallel_frame(&CurveModel::helix(1.0, 0.5, -3.0, 3.0), 64, None).unwrap();
        let foc = field_on_curve(&a, &frame).unwrap();
        for i in 0..foc.grid.len() {
            assert_eq!(foc.bpar[i], 0.0);
            assert_eq!(foc.bperp(i), [0.0, 0.0]);
        }
        // numerical curl of the gradient also vanishes
        let p = [0.3, -0.7, 1.1];
        let c = a.numerical_curl(p, VectorPotential::curl_step(p));
        assert!(norm(c) < 1e-8);
    }

    #[test]
    fn gauge_by_p3_shifts_ab_by_one() {
        let base = VectorPotential::uniform([0.2, -0.1, 0.9]);
        let gauged = base.gauge_transform(Expr::parse("p3").unwrap());
        let f0 = field_on_curve(&base, &straight()).unwrap();
        let f1 = field_on_curve(&gauged, &straight()).unwrap();
        for i in 0..f0.grid.len() {
            assert!((f1.ab[i] - f0.ab[i] - 1.0).abs() < 1e-14);
            assert_eq!(f1.bpar[i], f0.bpar[i]);
        }
    }

    #[test]
    fn numerical_curl_converges_quadratically() {
        let a = VectorPotential::AxialGradient { b0: 0.8, slope: 0.35 };
        let p = [0.4, -1.3, 2.2];
        let exact = a.analytic_curl(p).unwrap();
        // the potential is quadratic, so central differences are exact up to rounding
        let e = norm(crate::vec3::sub(a.numerical_curl(p, 1e-3), exact));
        assert!(e < 1e-10, "{e}");
        let u = VectorPotential::uniform([0.1, 0.2, 0.3]);
        let e = norm(crate::vec3::sub(u.numerical_curl(p, 1e-4), [0.1, 0.2, 0.3]));
        assert!(e < 1e-10);
    }

    #[test]
    fn frame_rotation_rotates_perpendicular_components() {
        let c = CurveModel::bump(0.5, 1.0, -3.0, 3.0);
        let f = build_parallel_frame(&c, 128, None).unwrap();
        let a = VectorPotential::uniform([0.3, 0.7, -0.4]);
        let beta = 0.9;
        let f0 = field_on_curve(&a, &f).unwrap();
        let f1 = field_on_curve(&a, &f.rotated(beta)).unwrap();
        let (s, co) = beta.sin_cos();
        for i in 0..f0.grid.len() {
            let (b1, b2) = (f0.bperp1[i], f0.bperp2[i]);
            assert!((f1.bperp1[i] - (co * b1 + s * b2)).abs() < 1e-12);
            assert!((f1.bperp2[i] - (-s * b1 + co * b2)).abs() < 1e-12);
            assert!((f1.bpar[i] - f0.bpar[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn massive_horizontal_component_sign() {
        // B_perp = (B0, 0): B_perp x y = B0 y2
        let pb = PullbackPotential {
            field: FieldOnCurve {
                grid: vec![0.0],
                bpar: vec![0.0],
                bperp1: vec![2.0],
                bperp2: vec![0.0],
                ab: vec![0.0],
            },
            hollow: false,
            scale: vec![1.0],
            twist: vec![0.0],
        };
        assert_eq!(pb.a_h_massive(0, [0.3, 0.5]), 2.0 * 0.5);
        assert_eq!(pb.a_v_massive(0, [0.3, 0.5]), [0.0, 0.0]);
    }
}
