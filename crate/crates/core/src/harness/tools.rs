use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{Prepared, FULL};
use crate::effective::{assemble, Variant};
use crate::error::{Error, Result};
use crate::fiber::{
    lambda02_bruteforce, solve_vertical_circle, solve_vertical_on, FiberGrid, FiberKind, FiberShape, FiberSpec,
    VerticalOptions,
};
use crate::reference::admissibility;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub level: Level,
    /// Error kind, e.g. `AdmissibilityViolated`.
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    fn error(code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            level: Level::Error,
            code: code.into(),
            message: message.into(),
        }
    }

    fn warning(code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            level: Level::Warning,
            code: code.into(),
            message: message.into(),
        }
    }
}

/// Why `variant` cannot be assembled for this fiber and curve, if it cannot.
fn variant_blocker(variant: Variant, fiber: &FiberSpec, closed: bool) -> Option<(&'static str, String)> {
    let hollow = fiber.is_hollow();
    let rigid = fiber.scale.is_constant();
    match variant {
        Variant::HollowStrong if !hollow => Some(("UnsupportedFiber", "hollow_strong needs the circle fiber".into())),
        Variant::HollowStrong | Variant::RigidStrong if closed => {
            Some(("ClosedCurveUnsupported", format!("{variant} is only defined on open curves")))
        }
        Variant::RigidModerate | Variant::StrongAlpha0 | Variant::RigidStrong if hollow => {
            Some(("UnsupportedFiber", format!("{variant} needs a massive fiber")))
        }
        Variant::Nonmagnetic | Variant::Moderate | Variant::RigidModerate | Variant::RigidStrong if !hollow && !rigid => {
            Some(("NotRigid", format!("{variant} needs a constant scale function")))
        }
        _ => None,
    }
}

/// Estimated unknown count of the full operator.
fn unknown_estimate(cfg: &ExperimentConfig, prep_fiber: &FiberSpec, n_x: usize, lmax: f64) -> usize {
    if prep_fiber.is_hollow() {
        return n_x * cfg.grid.n_y;
    }
    let (shape, h) = match &prep_fiber.kind {
        FiberKind::Grid { shape, h } => (shape.clone(), *h),
        FiberKind::Disk { radius } => (FiberShape::Disk { radius: *radius }, cfg.grid.h_fiber),
        FiberKind::Circle => unreachable!(),
    };
    let r = shape.reach() * lmax;
    let scaled = move |y: [f64; 2]| lmax * shape.level([y[0] / lmax, y[1] / lmax]);
    FiberGrid::build(h, r, &scaled, false).len() * n_x
}

/// Admissibility, seam, memory and compatibility checks; empty when the
/// config is runnable.
pub fn validate_config(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if cfg.epsilons.is_empty() || cfg.epsilons.iter().any(|e| !(*e > 0.0)) {
        out.push(Diagnostic::error("InvalidInput", "eps list must be non-empty and positive"));
    } else if cfg.epsilons.windows(2).any(|w| w[1] >= w[0]) {
        out.push(Diagnostic::error("InvalidInput", "eps list must be strictly descending"));
    }
    if !(0.0..=2.0).contains(&cfg.alpha) {
        out.push(Diagnostic::error("InvalidInput", format!("alpha = {} outside [0, 2]", cfg.alpha)));
    }
    if !(cfg.window_c > 0.0) {
        out.push(Diagnostic::error("InvalidInput", "window constant C must be positive"));
    }
    if cfg.sigma > 1 {
        out.push(Diagnostic::error("InvalidInput", format!("sigma must be 0 or 1, got {}", cfg.sigma)));
    }
    let parsed = (|| -> Result<_> {
        Ok((
            cfg.frame()?,
            cfg.fiber_spec()?,
            cfg.vector_potential()?,
            cfg.variant_list()?,
            cfg.reference_variant()?,
        ))
    })();
    let (frame, fiber, _potential, variants, reference) = match parsed {
        Ok(p) => p,
        Err(e) => {
            out.push(Diagnostic::error(error_code(&e), e.to_string()));
            return out;
        }
    };
    let closed = frame.curve.is_closed();
    for v in variants.iter().chain(reference.iter()) {
        if let Some((code, msg)) = variant_blocker(*v, &fiber, closed) {
            out.push(Diagnostic::error(code, msg));
        }
        if *v != Variant::Nonmagnetic && v.sigma() != cfg.sigma {
            out.push(Diagnostic::warning(
                "SigmaMismatch",
                format!("{v} models sigma = {} but the config uses {}", v.sigma(), cfg.sigma),
            ));
        }
    }
    if let Some(&e_max) = cfg.epsilons.first() {
        let a = admissibility(&frame, &fiber, e_max);
        if !(a < 1.0) {
            out.push(Diagnostic::error(
                "AdmissibilityViolated",
                format!("eps l_max R max|kappa| = {a:.4} >= 1 at eps = {e_max}"),
            ));
        }
    }
    if reference.is_none() {
        if let Some(alpha) = frame.holonomy_angle {
            seam_diagnostic(cfg, &fiber, alpha, &mut out);
        }
        let lmax = frame
            .grid
            .iter()
            .map(|&x| fiber.scale.value(x))
            .fold(0.0f64, f64::max);
        let n = unknown_estimate(cfg, &fiber, cfg.grid.n_x, lmax);
        if n > cfg.grid.unknown_cap {
            out.push(Diagnostic::error(
                "MemoryBudget",
                format!("about {n} unknowns exceed the cap {}", cfg.grid.unknown_cap),
            ));
        }
    }
    out
}

fn seam_diagnostic(cfg: &ExperimentConfig, fiber: &FiberSpec, alpha: f64, out: &mut Vec<Diagnostic>) {
    let ok = if fiber.is_hollow() {
        let s = alpha / (2.0 * PI / cfg.grid.n_y as f64);
        (s - s.round()).abs() <= 1e-6
    } else {
        let k = (alpha / FRAC_PI_2).round();
        let aligned = (alpha - k * FRAC_PI_2).abs() <= 1e-6;
        let turns = (k as i64).rem_euclid(4);
        aligned && (turns == 0 || fiber.shape().is_some_and(|s| s.is_quarter_turn_invariant()))
    };
    if !ok {
        out.push(Diagnostic::error(
            "SeamIncompatible",
            format!("holonomy {alpha:.6} rad does not map the fiber mesh onto itself"),
        ));
    }
}

fn error_code(e: &Error) -> &'static str {
    match e.root() {
        Error::NonUnitSpeed { .. } => "NonUnitSpeed",
        Error::DegenerateNormal => "DegenerateNormal",
        Error::Parse(_) => "Parse",
        Error::Io(_) => "Io",
        Error::UnsupportedFiber(_) => "UnsupportedFiber",
        _ => "InvalidInput",
    }
}

/// Result of `oracle lambda02`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub fiber: String,
    pub b_par: f64,
    /// `lambda_{0,2}` from the resolvent (or closed form for the circle).
    pub resolvent: f64,
    /// Closed form `l^2 b^2 / 4` on the circle; brute-force fit otherwise.
    pub oracle: f64,
    pub relative_difference: f64,
    pub fit_epsilons: Vec<f64>,
    pub fit_eigenvalues: Vec<f64>,
    pub pass: bool,
}

/// Relative tolerance of the resolvent/brute-force agreement.
pub const ORACLE_TOL: f64 = 0.02;

/// Compare the resolvent `lambda_{0,2}` with an independent oracle at the
/// field strength `cfg.oracle.b_par` and unit scale.
pub fn oracle_lambda02(cfg: &ExperimentConfig) -> Result<OracleReport> {
    let fiber = cfg.fiber_spec()?;
    let b = cfg.oracle.b_par;
    if fiber.is_hollow() {
        let vs = solve_vertical_circle();
        let res = crate::fiber::lambda02(&vs, b, 1.0)?;
        let exact = 0.25 * b * b;
        let rel = rel_diff(res, exact);
        return Ok(OracleReport {
            fiber: "circle".into(),
            b_par: b,
            resolvent: res,
            oracle: exact,
            relative_difference: rel,
            fit_epsilons: Vec::new(),
            fit_eigenvalues: Vec::new(),
            pass: rel <= 1e-12,
        });
    }
    let (shape, h) = match &fiber.kind {
        FiberKind::Grid { shape, h } => (shape.clone(), cfg.oracle.h.unwrap_or(*h)),
        FiberKind::Disk { radius } => (
            FiberShape::Disk { radius: *radius },
            cfg.oracle.h.unwrap_or(cfg.grid.h_fiber),
        ),
        FiberKind::Circle => unreachable!(),
    };
    let grid = FiberGrid::from_shape(&shape, h);
    let opts = VerticalOptions {
        n_modes: cfg.grid.vertical_modes,
        seed: cfg.seed,
        ..VerticalOptions::default()
    };
    let vs = solve_vertical_on(grid.clone(), &opts)?;
    let res = crate::fiber::lambda02(&vs, b, 1.0)?;
    let (fit, lams) = lambda02_bruteforce(&grid, b, &cfg.oracle.epsilons)?;
    let rel = rel_diff(res, fit);
    Ok(OracleReport {
        fiber: format!("{shape:?} h = {h}"),
        b_par: b,
        resolvent: res,
        oracle: fit,
        relative_difference: rel,
        fit_epsilons: cfg.oracle.epsilons.clone(),
        fit_eigenvalues: lams,
        pass: rel <= ORACLE_TOL,
    })
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// Files written by [`dump_operator`].
#[derive(Clone, Debug)]
pub struct DumpFiles {
    pub matrix: PathBuf,
    pub table: PathBuf,
}

/// Write the assembled matrix of `variant` (or `full`) at `eps` as Matrix
/// Market, with a CSV of `(x, m, V, theta)` for effective operators or of
/// grid coordinates for the full operator.
pub fn dump_operator(cfg: &ExperimentConfig, variant: &str, epsilon: f64, dir: &Path) -> Result<DumpFiles> {
    let prep = Prepared::new(cfg)?;
    std::fs::create_dir_all(dir)?;
    let stem = format!("{}_eps{epsilon}", variant.trim());
    let matrix = dir.join(format!("{stem}.mtx"));
    let table = dir.join(format!("{stem}.csv"));
    if variant.trim() == FULL {
        let op = prep.full_operator(cfg, epsilon)?;
        std::fs::write(&matrix, op.matrix.to_matrix_market())?;
        let mut s = String::from("x,y1,y2\n");
        for c in &op.coords {
            let _ = writeln!(s, "{:e},{:e},{:e}", c[0], c[1], c[2]);
        }
        std::fs::write(&table, s)?;
    } else {
        let v: Variant = variant.parse()?;
        let op = assemble(v, &prep.input(epsilon))?;
        std::fs::write(&matrix, op.matrix().to_matrix_market())?;
        let mut s = String::from("x,m,V,theta\n");
        for r in op.table() {
            let _ = writeln!(s, "{:e},{:e},{:e},{:e}", r[0], r[1], r[2], r[3]);
        }
        std::fs::write(&table, s)?;
    }
    Ok(DumpFiles { matrix, table })
}
