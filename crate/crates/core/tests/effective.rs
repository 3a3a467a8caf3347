use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use wgspec::curve::{build_parallel_frame, CurveModel, FrameField};
use wgspec::effective::{assemble, BaseGrid, Boundary, EffectiveInput, EffectiveOperator1D, Variant};
use wgspec::eigen::EigenOptions;
use wgspec::expr::Profile;
use wgspec::fiber::{
    solve_vertical_circle, solve_vertical_disk, solve_vertical_grid, FiberKind, FiberShape, FiberSpec,
    VerticalSpectrum,
};
use wgspec::magnetics::VectorPotential;
use wgspec::Error;

struct Setup {
    frame: FrameField,
    fiber: FiberSpec,
    vs: VerticalSpectrum,
    grid: BaseGrid,
}

impl Setup {
    fn new(curve: CurveModel, fiber: FiberSpec, vs: VerticalSpectrum, n: usize) -> Self {
        let frame = build_parallel_frame(&curve, 2048, None).unwrap();
        let grid = BaseGrid::new(&curve.domain, n).unwrap();
        Setup { frame, fiber, vs, grid }
    }

    fn op(&self, v: Variant, a: &VectorPotential, eps: f64) -> wgspec::Result<EffectiveOperator1D> {
        let inp = EffectiveInput {
            frame: &self.frame,
            fiber: &self.fiber,
            vs: &self.vs,
            potential: a,
            grid: &self.grid,
            epsilon: eps,
        };
        assemble(v, &inp)
    }
}

fn eigs(op: &EffectiveOperator1D, k: usize) -> Vec<f64> {
    op.spectrum(k, &EigenOptions { tol: 1e-12, ..EigenOptions::default() })
        .unwrap()
        .rescaled
}

fn disk_setup(curve: CurveModel, n: usize) -> Setup {
    Setup::new(curve, FiberSpec::new(FiberKind::Disk { radius: 1.0 }), solve_vertical_disk(1.0), n)
}

#[test]
fn rigid_strong_axial_field_shift() {
    let s = disk_setup(CurveModel::line(0.0, PI), 200);
    let b0 = 1.3;
    let op = s.op(Variant::RigidStrong, &VectorPotential::uniform([0.0, 0.0, b0]), 0.1).unwrap();
    let expect = 0.25 * s.vs.mean_ysq * b0 * b0;
    for v in &op.potential {
        assert!((v - expect).abs() < 1e-12, "{v} vs {expect}");
    }
    // the disk moment is about 0.218
    assert!((s.vs.mean_ysq - 0.218).abs() < 0.003 * 0.218);
    assert!(op.link_phase.iter().all(|t| t.abs() < 1e-14));
    let base = eigs(&s.op(Variant::Nonmagnetic, &VectorPotential::Zero, 0.1).unwrap(), 3);
    for (a, b) in eigs(&op, 3).iter().zip(&base) {
        assert!((a - b - expect).abs() < 1e-9);
    }
}

#[test]
fn helix_shifts_the_box_spectrum() {
    let (a, b) = (1.0, 0.5);
    let k = a / (a * a + b * b);
    let n = 150;
    let s = disk_setup(CurveModel::helix(a, b, 0.0, 4.0), n);
    let e = eigs(&s.op(Variant::Nonmagnetic, &VectorPotential::Zero, 0.1).unwrap(), 4);
    let dx = 4.0 / (n + 1) as f64;
    for (j, v) in e.iter().enumerate() {
        let bx = 4.0 / (dx * dx) * (0.5 * (j + 1) as f64 * PI * dx / 4.0).sin().powi(2);
        assert!((v - (bx - 0.25 * k * k)).abs() < 1e-8, "{v}");
    }
}

/// On an open interval every link phase can be gauged away, so the
/// magnetic operator must match a real tridiagonal matrix with the same
/// metric and potential.
#[test]
fn open_curve_phases_gauge_away() {
    let vs = solve_vertical_grid(&FiberShape::Square { side: 1.0, center: [0.3, -0.1] }, 0.05, 4).unwrap();
    assert!(!vs.is_centred(1e-3));
    let fiber = FiberSpec::new(FiberKind::Grid {
        shape: FiberShape::Square { side: 1.0, center: [0.3, -0.1] },
        h: 0.05,
    });
    let s = Setup::new(CurveModel::bump(0.8, 1.0, -4.0, 4.0), fiber, vs, 120);
    let a = VectorPotential::uniform([0.4, 0.9, -0.3]);
    let op = s.op(Variant::Moderate, &a, 0.1).unwrap();
    assert!(op.link_phase.iter().any(|t| t.abs() > 1e-3));
    assert!(op.metric.iter().any(|m| (m - 1.0).abs() > 1e-3));

    let n = op.dim();
    let w = 1.0 / (op.grid.dx * op.grid.dx);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = w * (op.edge_metric[i] + op.edge_metric[i + 1]) + op.potential[i];
        if i + 1 < n {
            m[(i, i + 1)] = -w * op.edge_metric[i + 1];
            m[(i + 1, i)] = -w * op.edge_metric[i + 1];
        }
    }
    let mut oracle: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    oracle.sort_by(f64::total_cmp);
    for (x, y) in eigs(&op, 4).iter().zip(&oracle) {
        assert!((x - y).abs() < 1e-8 * y.abs().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn ring_spectrum_is_periodic_in_flux() {
    let r = 1.5;
    let s = disk_setup(CurveModel::circle(r), 200);
    let spec = |b: f64| {
        let op = s.op(Variant::Moderate, &VectorPotential::uniform([0.0, 0.0, b]), 0.1).unwrap();
        assert!(matches!(op.boundary, Boundary::PeriodicWithFlux(_)));
        (op.total_flux(), eigs(&op, 5))
    };
    let b = 0.37;
    let (f0, e0) = spec(b);
    assert!((f0.abs() - PI * r * r * b).abs() < 1e-8, "{f0}");
    let (f1, e1) = spec(b + 2.0 / (r * r));
    assert!(((f1 - f0).abs() - 2.0 * PI).abs() < 1e-8);
    let (_, e2) = spec(-b);
    for ((x, y), z) in e0.iter().zip(&e1).zip(&e2) {
        assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        assert!((x - z).abs() < 1e-8, "{x} vs {z}");
    }
}

#[test]
fn discrete_gauge_is_exact() {
    let s = disk_setup(CurveModel::circle(1.0), 64);
    let op = s.op(Variant::Moderate, &VectorPotential::uniform([0.2, 0.1, 0.6]), 0.1).unwrap();
    let g: Vec<f64> = (0..op.dim()).map(|i| (0.37 * i as f64).sin() * 3.0).collect();
    let gauged = op.regauged(&g);
    assert!((gauged.total_flux() - op.total_flux()).abs() < 1e-12);
    for (x, y) in eigs(&op, 6).iter().zip(&eigs(&gauged, 6)) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn variants_agree_without_field() {
    let s = disk_setup(CurveModel::helix(1.0, 1.0, 0.0, 5.0), 150);
    let zero = VectorPotential::Zero;
    let base = eigs(&s.op(Variant::Nonmagnetic, &zero, 0.1).unwrap(), 4);
    for v in [Variant::Moderate, Variant::RigidModerate, Variant::RigidStrong] {
        let e = eigs(&s.op(v, &zero, 0.1).unwrap(), 4);
        for (x, y) in e.iter().zip(&base) {
            assert!((x - y).abs() < 1e-9, "{v}: {x} vs {y}");
        }
    }
}

#[test]
fn centred_disk_sees_no_moderate_field() {
    let s = disk_setup(CurveModel::helix(1.0, 0.5, -3.0, 3.0), 300);
    let base = eigs(&s.op(Variant::Nonmagnetic, &VectorPotential::Zero, 0.15).unwrap(), 5);
    for b in [[0.0, 0.0, 1.0], [0.7, -1.1, 0.4]] {
        let a = VectorPotential::uniform(b);
        for v in [Variant::Moderate, Variant::RigidModerate] {
            let e = eigs(&s.op(v, &a, 0.15).unwrap(), 5);
            for (x, y) in e.iter().zip(&base) {
                assert!((x - y).abs() < 1e-8, "{v}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn hollow_strong_potential() {
    let fiber = FiberSpec::new(FiberKind::Circle).with_scale(Profile::parse("1.2").unwrap());
    let s = Setup::new(CurveModel::line(-2.0, 2.0), fiber, solve_vertical_circle(), 50);
    let op = s.op(Variant::HollowStrong, &VectorPotential::uniform([0.5, -0.2, 0.3]), 0.1).unwrap();
    // the line runs along p3, so B_par = 0.3 and |B_perp|^2 = 0.29
    let expect = 0.25 * 1.44 * (0.09 + 2.0 * 0.29);
    assert!(op.potential.iter().all(|v| (v - expect).abs() < 1e-12));
}

#[test]
fn incompatible_inputs_are_rejected() {
    let hollow = Setup::new(
        CurveModel::line(0.0, 1.0),
        FiberSpec::new(FiberKind::Circle),
        solve_vertical_circle(),
        20,
    );
    let a = VectorPotential::Zero;
    assert!(matches!(hollow.op(Variant::RigidStrong, &a, 0.1), Err(Error::UnsupportedFiber(_))));
    let tapered = Setup::new(
        CurveModel::line(0.0, 1.0),
        FiberSpec::new(FiberKind::Disk { radius: 1.0 }).with_scale(Profile::parse("1 + 0.1*x").unwrap()),
        solve_vertical_disk(1.0),
        20,
    );
    assert!(matches!(tapered.op(Variant::Nonmagnetic, &a, 0.1), Err(Error::NotRigid)));
    assert!(tapered.op(Variant::StrongAlpha0, &a, 0.1).is_ok());
    let ring = disk_setup(CurveModel::circle(1.0), 20);
    assert!(matches!(
        ring.op(Variant::RigidStrong, &a, 0.1),
        Err(Error::ClosedCurveUnsupported(_))
    ));
}

#[test]
fn strong_alpha0_is_unrescaled() {
    let s = disk_setup(CurveModel::line(0.0, PI), 100);
    let eps = 0.1;
    let op = s.op(Variant::StrongAlpha0, &VectorPotential::Zero, eps).unwrap();
    assert!(!op.rescaled);
    let sp = op.spectrum(2, &EigenOptions::default()).unwrap();
    let lam0 = s.vs.lambda0();
    assert!((sp.raw[0] - lam0 - eps * eps * sp.rescaled[0]).abs() < 1e-12);
    assert!((sp.rescaled[0] - 1.0).abs() < 1e-3);
}
