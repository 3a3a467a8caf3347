use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, FiberMoments};
use crate::curve::FrameField;
use crate::effective::{assemble, BaseGrid, EffectiveInput, Spectrum, Variant};
use crate::eigen::EigenOptions;
use crate::error::{Error, Result};
use crate::fiber::{
    solve_vertical_circle_modes, solve_vertical_disk_modes, solve_vertical_grid, FiberKind, FiberShape, FiberSpec,
    VerticalSpectrum,
};
use crate::magnetics::VectorPotential;
use crate::reference::{
    assemble_hollow_surface, assemble_massive_tube, convergence_fit, matched_distance, two_point_slope,
    FullOperatorAssembly,
};

/// Name used for the full operator in tables.
pub const FULL: &str = "full";

/// Everything a sweep cell needs, built once per run.
pub struct Prepared {
    pub frame: FrameField,
    pub fiber: FiberSpec,
    pub potential: VectorPotential,
    pub variants: Vec<Variant>,
    pub reference: Option<Variant>,
    /// Fiber data fed to effective operators.
    pub vertical: VerticalSpectrum,
    pub base: BaseGrid,
}

impl Prepared {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let frame = cfg.frame()?;
        let fiber = cfg.fiber_spec()?;
        let potential = cfg.vector_potential()?;
        let modes = cfg.grid.vertical_modes;
        let vertical = match &fiber.kind {
            FiberKind::Circle => solve_vertical_circle_modes(modes),
            FiberKind::Disk { radius } => match cfg.fiber_moments {
                FiberMoments::Exact => solve_vertical_disk_modes(*radius, modes),
                FiberMoments::Matched => {
                    solve_vertical_grid(&FiberShape::Disk { radius: *radius }, cfg.grid.h_fiber, modes)?
                }
            },
            FiberKind::Grid { shape, h } => solve_vertical_grid(shape, *h, modes)?,
        };
        let base = BaseGrid::new(&frame.curve.domain, cfg.grid.n_x)?;
        Ok(Prepared {
            frame,
            fiber,
            potential,
            variants: cfg.variant_list()?,
            reference: cfg.reference_variant()?,
            vertical,
            base,
        })
    }

    pub fn input(&self, epsilon: f64) -> EffectiveInput<'_> {
        EffectiveInput {
            frame: &self.frame,
            fiber: &self.fiber,
            vs: &self.vertical,
            potential: &self.potential,
            grid: &self.base,
            epsilon,
        }
    }

    pub fn full_operator(&self, cfg: &ExperimentConfig, epsilon: f64) -> Result<FullOperatorAssembly> {
        let opts = cfg.full_options();
        let f = if self.fiber.is_hollow() {
            assemble_hollow_surface
        } else {
            assemble_massive_tube
        };
        f(&self.frame, &self.fiber, &self.potential, cfg.sigma, epsilon, cfg.grid.n_x, &opts)
    }

    fn eigen_options(cfg: &ExperimentConfig) -> EigenOptions {
        EigenOptions {
            seed: cfg.seed,
            ..EigenOptions::default()
        }
    }

    pub fn effective_spectrum(&self, cfg: &ExperimentConfig, variant: Variant, epsilon: f64) -> Result<Spectrum> {
        assemble(variant, &self.input(epsilon))?.spectrum(cfg.grid.n_eigs, &Self::eigen_options(cfg))
    }

    pub fn reference_spectrum(&self, cfg: &ExperimentConfig, epsilon: f64) -> Result<Spectrum> {
        match self.reference {
            Some(v) => self.effective_spectrum(cfg, v, epsilon),
            None => self
                .full_operator(cfg, epsilon)?
                .spectrum(cfg.grid.n_eigs, &Self::eigen_options(cfg)),
        }
    }
}

/// Eigenvalues of one operator at one `eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenTable {
    pub name: String,
    pub epsilon: f64,
    pub raw: Vec<f64>,
    pub rescaled: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub epsilon: f64,
    pub variant: String,
    /// Raw-scale window actually used.
    pub window: (f64, f64),
    /// Set when the window was cut back to the computed eigenvalues.
    pub clipped: bool,
    pub hausdorff_raw: f64,
    /// `hausdorff_raw / eps^2`.
    pub hausdorff_rescaled: f64,
    pub max_pairwise_rescaled: f64,
    pub count_reference: usize,
    pub count_variant: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub variant: String,
    /// `least_squares` for three or more eps, `two_point` for two.
    pub method: String,
    pub slope: Option<f64>,
    pub residual: Option<f64>,
    pub note: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub reference: String,
    pub tables: Vec<EigenTable>,
    pub distances: Vec<DistanceRow>,
    pub slopes: Vec<SlopeRow>,
    /// Wall-clock seconds per `eps`; excluded from reproducibility checks.
    pub runtimes: Vec<(f64, f64)>,
    pub pass: bool,
}

struct Cell {
    epsilon: f64,
    reference: Spectrum,
    variants: Vec<(Variant, Spectrum)>,
    seconds: f64,
}

fn run_cell(cfg: &ExperimentConfig, prep: &Prepared, epsilon: f64) -> Result<Cell> {
    let t0 = Instant::now();
    let reference = prep
        .reference_spectrum(cfg, epsilon)
        .map_err(|e| e.context(format!("eps = {epsilon}, reference")))?;
    let variants = prep
        .variants
        .iter()
        .filter(|v| Some(**v) != prep.reference)
        .map(|&v| {
            prep.effective_spectrum(cfg, v, epsilon)
                .map(|s| (v, s))
                .map_err(|e| e.context(format!("eps = {epsilon}, variant {v}")))
        })
        .collect::<Result<_>>()?;
    Ok(Cell {
        epsilon,
        reference,
        variants,
        seconds: t0.elapsed().as_secs_f64(),
    })
}

/// Windowed distance between a reference and a variant spectrum at `eps`.
///
/// The window is `[Lambda_0, Lambda_0 + C eps^alpha]` on the raw scale with
/// `Lambda_0` the reference ground state. Eigenvalues below `Lambda_0` are
/// kept, so a variant undershooting the reference counts against it. The
/// upper end is cut back to the largest eigenvalue computed on either side,
/// and windowed eigenvalues are matched against the whole other spectrum.
pub fn window_distance(
    cfg: &ExperimentConfig,
    epsilon: f64,
    reference: &[f64],
    variant: &[f64],
) -> Result<(f64, f64, bool, crate::reference::Distance)> {
    let lambda0 = *reference.first().ok_or(Error::EmptyWindow)?;
    let (lo, hi) = cfg.window(lambda0, epsilon);
    let top = reference
        .last()
        .copied()
        .unwrap_or(f64::INFINITY)
        .min(variant.last().copied().unwrap_or(f64::INFINITY));
    let clipped = top < hi;
    let hi = hi.min(top);
    let d = matched_distance(reference, variant, (f64::NEG_INFINITY, hi))?;
    Ok((lo, hi, clipped, d))
}

fn slope_for(cfg: &ExperimentConfig, variant: &str, rows: &[DistanceRow]) -> SlopeRow {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.variant == variant)
        .map(|r| (r.epsilon, r.hausdorff_rescaled))
        .collect();
    let (method, fit) = match pts.len() {
        0 | 1 => ("none", Err(Error::InvalidInput("need at least two eps for a slope".into()))),
        2 => (
            "two_point",
            two_point_slope(pts[0].0, pts[0].1, pts[1].0, pts[1].1).map(|s| (s, None)),
        ),
        _ => ("least_squares", convergence_fit(&pts).map(|f| (f.slope, Some(f.residual)))),
    };
    let distances_ok = cfg
        .tolerances
        .max_distance
        .map_or(true, |m| pts.iter().all(|p| p.1 <= m));
    let (slope, residual, note) = match fit {
        Ok((s, r)) => (Some(s), r, None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    let slope_ok = match cfg.tolerances.min_slope {
        None => true,
        Some(m) => slope.is_some_and(|s| s >= m),
    };
    SlopeRow {
        variant: variant.to_string(),
        method: method.to_string(),
        slope,
        residual,
        note,
        pass: slope_ok && distances_ok,
    }
}

/// Run the `eps` sweep on a pool of `threads` workers (all cores if `None`).
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<RunRecord> {
    check_sweep(cfg)?;
    let prep = Prepared::new(cfg)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let cells: Vec<Cell> = pool.install(|| {
        cfg.epsilons
            .par_iter()
            .map(|&e| run_cell(cfg, &prep, e))
            .collect::<Result<_>>()
    })?;

    let ref_name = prep.reference.map_or(FULL.to_string(), |v| v.name().to_string());
    let mut tables = Vec::new();
    let mut distances = Vec::new();
    for c in &cells {
        tables.push(EigenTable {
            name: ref_name.clone(),
            epsilon: c.epsilon,
            raw: c.reference.raw.clone(),
            rescaled: c.reference.rescaled.clone(),
        });
        let e2 = c.epsilon * c.epsilon;
        for (v, s) in &c.variants {
            tables.push(EigenTable {
                name: v.name().to_string(),
                epsilon: c.epsilon,
                raw: s.raw.clone(),
                rescaled: s.rescaled.clone(),
            });
            let (lo, hi, clipped, d) = window_distance(cfg, c.epsilon, &c.reference.raw, &s.raw)
                .map_err(|e| e.context(format!("eps = {}, variant {v}", c.epsilon)))?;
            distances.push(DistanceRow {
                epsilon: c.epsilon,
                variant: v.name().to_string(),
                window: (lo, hi),
                clipped,
                hausdorff_raw: d.hausdorff,
                hausdorff_rescaled: d.hausdorff / e2,
                max_pairwise_rescaled: d.max_pairwise / e2,
                count_reference: d.count_a,
                count_variant: d.count_b,
            });
        }
    }
    let slopes: Vec<SlopeRow> = prep
        .variants
        .iter()
        .filter(|v| Some(**v) != prep.reference)
        .map(|v| slope_for(cfg, v.name(), &distances))
        .collect();
    let pass = slopes.iter().all(|s| s.pass);
    Ok(RunRecord {
        config_hash: cfg.hash(),
        reference: ref_name,
        tables,
        distances,
        slopes,
        runtimes: cells.iter().map(|c| (c.epsilon, c.seconds)).collect(),
        pass,
    })
}

/// The sweep-level checks that make a config unrunnable.
fn check_sweep(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.epsilons.is_empty() || cfg.epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("eps list must be non-empty and positive".into()));
    }
    if cfg.epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("eps list must be strictly descending".into()));
    }
    if !(0.0..=2.0).contains(&cfg.alpha) {
        return Err(Error::InvalidInput(format!("alpha must lie in [0, 2], got {}", cfg.alpha)));
    }
    if !(cfg.window_c > 0.0) {
        return Err(Error::InvalidInput("window constant C must be positive".into()));
    }
    Ok(())
}

/// CSV of `(epsilon, index, lambda_raw, lambda_rescaled)` for one operator.
pub fn eigen_csv(tables: &[EigenTable], name: &str) -> String {
    let mut s = String::from("epsilon,index,lambda_raw,lambda_rescaled\n");
    for t in tables.iter().filter(|t| t.name == name) {
        for (i, (r, q)) in t.raw.iter().zip(&t.rescaled).enumerate() {
            let _ = writeln!(s, "{},{i},{r:e},{q:e}", t.epsilon);
        }
    }
    s
}

pub fn distances_csv(rows: &[DistanceRow]) -> String {
    let mut s = String::from(
        "epsilon,variant,window_lo,window_hi,clipped,hausdorff_raw,hausdorff_rescaled,max_pairwise_rescaled,count_reference,count_variant\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:e},{:e},{},{:e},{:e},{:e},{},{}",
            r.epsilon,
            r.variant,
            r.window.0,
            r.window.1,
            r.clipped,
            r.hausdorff_raw,
            r.hausdorff_rescaled,
            r.max_pairwise_rescaled,
            r.count_reference,
            r.count_variant
        );
    }
    s
}

/// Parse `distances.csv` back into `(variant, eps, hausdorff_rescaled)`.
pub fn read_distances_csv(text: &str) -> Result<Vec<(String, f64, f64)>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let num = |i: usize| -> Result<f64> {
                f.get(i)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad distances row `{l}`")))
            };
            Ok((f[1].to_string(), num(0)?, num(6)?))
        })
        .collect()
}

#[derive(Serialize)]
struct Summary<'a> {
    config_hash: &'a str,
    reference: &'a str,
    sigma: u8,
    epsilons: &'a [f64],
    alpha: f64,
    window_c: f64,
    seed: u64,
    tolerances: &'a super::config::Tolerances,
    slopes: &'a [SlopeRow],
    runtimes: &'a [(f64, f64)],
    pass: bool,
}

/// Write the per-operator CSVs, `distances.csv` and `summary.json`.
pub fn write_outputs(cfg: &ExperimentConfig, rec: &RunRecord, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut names: Vec<&str> = rec.tables.iter().map(|t| t.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    for name in names {
        std::fs::write(dir.join(format!("{name}.csv")), eigen_csv(&rec.tables, name))?;
    }
    std::fs::write(dir.join("distances.csv"), distances_csv(&rec.distances))?;
    let summary = Summary {
        config_hash: &rec.config_hash,
        reference: &rec.reference,
        sigma: cfg.sigma,
        epsilons: &cfg.epsilons,
        alpha: cfg.alpha,
        window_c: cfg.window_c,
        seed: cfg.seed,
        tolerances: &cfg.tolerances,
        slopes: &rec.slopes,
        runtimes: &rec.runtimes,
        pass: rec.pass,
    };
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}
