use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curve::{build_parallel_frame, CurveModel, FrameField};
use crate::effective::Variant;
use crate::error::{Error, Result};
use crate::expr::Profile;
use crate::fiber::{FiberKind, FiberShape, FiberSpec};
use crate::magnetics::VectorPotential;
use crate::reference::{FullOptions, DEFAULT_UNKNOWN_CAP};

/// Base curve section of a config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    /// `line`, `circle(R)`, `helix(a,b)`, `bump_curve`, `bump_curve(k0,w)`
    /// or `sampled`.
    pub name: String,
    #[serde(default)]
    pub x_min: Option<f64>,
    #[serde(default)]
    pub x_max: Option<f64>,
    /// CSV of `(x, c1, c2, c3)` rows for `sampled`.
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub closed: bool,
    #[serde(default = "default_frame_points")]
    pub frame_points: usize,
    #[serde(default)]
    pub initial_normal: Option<[f64; 3]>,
}

fn default_frame_points() -> usize {
    4096
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FiberKindConfig {
    Disk {
        #[serde(default = "one")]
        radius: f64,
    },
    Grid {
        /// `disk`, `square`, `annulus` or a path to a 0/1 mask file.
        mask: String,
        h: f64,
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default)]
        side: Option<f64>,
        #[serde(default)]
        center: Option<[f64; 2]>,
        #[serde(default)]
        r_in: Option<f64>,
        #[serde(default)]
        r_out: Option<f64>,
        /// Cell size of a mask file.
        #[serde(default)]
        cell: Option<f64>,
    },
    Circle,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberConfig {
    #[serde(flatten)]
    pub kind: FiberKindConfig,
    #[serde(default = "default_scale")]
    pub scale: String,
    #[serde(default = "default_twist")]
    pub twist: String,
}

fn default_scale() -> String {
    "1".into()
}

fn default_twist() -> String {
    "0".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_x: usize,
    #[serde(default = "default_n_y")]
    pub n_y: usize,
    /// Fiber mesh step of the massive reference.
    #[serde(default = "default_h_fiber")]
    pub h_fiber: f64,
    #[serde(default = "default_n_eigs")]
    pub n_eigs: usize,
    #[serde(default = "default_cap")]
    pub unknown_cap: usize,
    #[serde(default = "default_modes")]
    pub vertical_modes: usize,
}

fn default_n_y() -> usize {
    64
}
fn default_h_fiber() -> f64 {
    1.0 / 16.0
}
fn default_n_eigs() -> usize {
    8
}
fn default_cap() -> usize {
    DEFAULT_UNKNOWN_CAP
}
fn default_modes() -> usize {
    20
}

/// What the effective spectra are compared against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceChoice {
    /// Full tube operator.
    Full,
    /// Another effective variant.
    Variant(String),
}

impl Default for ReferenceChoice {
    fn default() -> Self {
        ReferenceChoice::Full
    }
}

/// Source of the fiber data fed to effective operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiberMoments {
    /// Discrete fiber at the reference mesh step, so effective and full
    /// operators share the same fiber energy.
    #[default]
    Matched,
    /// The fiber as configured (analytic Bessel data for `disk`).
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Minimum fitted slope; `null` disables the slope check.
    #[serde(default = "default_min_slope")]
    pub min_slope: Option<f64>,
    /// Optional bound on every windowed distance.
    #[serde(default)]
    pub max_distance: Option<f64>,
}

fn default_min_slope() -> Option<f64> {
    Some(0.8)
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            min_slope: default_min_slope(),
            max_distance: None,
        }
    }
}

/// Brute-force fit settings for `oracle lambda02`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "one")]
    pub b_par: f64,
    #[serde(default = "default_oracle_eps")]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub h: Option<f64>,
}

fn default_oracle_eps() -> Vec<f64> {
    vec![0.02, 0.01, 0.005]
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            b_par: 1.0,
            epsilons: default_oracle_eps(),
            h: None,
        }
    }
}

/// One JSON experiment document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub curve: CurveConfig,
    pub fiber: FiberConfig,
    #[serde(default = "default_potential")]
    pub potential: String,
    #[serde(default)]
    pub sigma: u8,
    pub variants: Vec<String>,
    #[serde(alias = "eps")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(alias = "C")]
    pub window_c: f64,
    pub grid: GridConfig,
    #[serde(default)]
    pub reference: ReferenceChoice,
    #[serde(default)]
    pub fiber_moments: FiberMoments,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub oracle: OracleConfig,
}

fn default_potential() -> String {
    "zero".into()
}

fn default_alpha() -> f64 {
    2.0
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Read a config; relative file references resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let mut cfg = Self::from_json(&text).map_err(|e| e.context(path.display().to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.curve.csv.as_mut() {
            rebase(p);
        }
        if let FiberKindConfig::Grid { mask, .. } = &mut cfg.fiber.kind {
            if !matches!(mask.as_str(), "disk" | "square" | "annulus") && Path::new(mask.as_str()).is_relative() {
                *mask = base.join(&*mask).display().to_string();
            }
        }
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn curve_model(&self) -> Result<CurveModel> {
        let c = &self.curve;
        let (name, args) = split_call(&c.name)?;
        let open = || -> Result<(f64, f64)> {
            match (c.x_min, c.x_max) {
                (Some(a), Some(b)) if a < b => Ok((a, b)),
                _ => Err(Error::InvalidInput(format!("curve `{name}` needs x_min < x_max"))),
            }
        };
        let argn = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("curve `{name}` takes {n} arguments")))
            }
        };
        match name {
            "line" => {
                argn(0)?;
                let (a, b) = open()?;
                Ok(CurveModel::line(a, b))
            }
            "circle" => {
                argn(1)?;
                Ok(CurveModel::circle(args[0]))
            }
            "helix" => {
                argn(2)?;
                let (a, b) = open()?;
                Ok(CurveModel::helix(args[0], args[1], a, b))
            }
            "bump_curve" => {
                let (k0, w) = match args.len() {
                    0 => (1.0, 1.0),
                    2 => (args[0], args[1]),
                    _ => return Err(Error::Parse("bump_curve takes 0 or 2 arguments".into())),
                };
                let (a, b) = open()?;
                Ok(CurveModel::bump(k0, w, a, b))
            }
            "sampled" => {
                let path = c
                    .csv
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("sampled curve needs `csv`".into()))?;
                CurveModel::sampled_csv(path, c.closed)
            }
            other => Err(Error::Parse(format!("unknown curve `{other}`"))),
        }
    }

    pub fn frame(&self) -> Result<FrameField> {
        build_parallel_frame(&self.curve_model()?, self.curve.frame_points, self.curve.initial_normal)
    }

    pub fn fiber_spec(&self) -> Result<FiberSpec> {
        let kind = match &self.fiber.kind {
            FiberKindConfig::Disk { radius } => FiberKind::Disk { radius: *radius },
            FiberKindConfig::Circle => FiberKind::Circle,
            FiberKindConfig::Grid {
                mask,
                h,
                radius,
                side,
                center,
                r_in,
                r_out,
                cell,
            } => {
                let shape = match mask.as_str() {
                    "disk" => FiberShape::Disk {
                        radius: radius.unwrap_or(1.0),
                    },
                    "square" => FiberShape::Square {
                        side: side.unwrap_or(1.0),
                        center: center.unwrap_or([0.0, 0.0]),
                    },
                    "annulus" => FiberShape::Annulus {
                        r_in: r_in.unwrap_or(0.5),
                        r_out: r_out.unwrap_or(1.0),
                    },
                    path => FiberShape::mask_file(Path::new(path), cell.unwrap_or(*h))?,
                };
                FiberKind::Grid { shape, h: *h }
            }
        };
        Ok(FiberSpec::new(kind)
            .with_scale(Profile::parse(&self.fiber.scale)?)
            .with_twist(Profile::parse(&self.fiber.twist)?))
    }

    pub fn vector_potential(&self) -> Result<VectorPotential> {
        VectorPotential::parse(&self.potential)
    }

    pub fn variant_list(&self) -> Result<Vec<Variant>> {
        self.variants.iter().map(|s| s.parse()).collect()
    }

    pub fn reference_variant(&self) -> Result<Option<Variant>> {
        match &self.reference {
            ReferenceChoice::Full => Ok(None),
            ReferenceChoice::Variant(v) => v.parse().map(Some),
        }
    }

    pub fn full_options(&self) -> FullOptions {
        FullOptions {
            unknown_cap: self.grid.unknown_cap,
            h_fiber: self.grid.h_fiber,
            n_y: self.grid.n_y,
        }
    }

    /// Raw-scale window `[Lambda_0, Lambda_0 + C eps^alpha]`.
    pub fn window(&self, lambda0: f64, eps: f64) -> (f64, f64) {
        (lambda0, lambda0 + self.window_c * eps.powf(self.alpha))
    }
}

/// Split `name(a, b)` into the name and numeric arguments.
fn split_call(src: &str) -> Result<(&str, Vec<f64>)> {
    let s = src.trim();
    match s.find('(') {
        None => Ok((s, Vec::new())),
        Some(i) if s.ends_with(')') => {
            let inner = s[i + 1..s.len() - 1].trim();
            let args = if inner.is_empty() {
                Vec::new()
            } else {
                inner
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Parse(format!("bad arguments in `{src}`")))?
            };
            Ok((s[..i].trim(), args))
        }
        _ => Err(Error::Parse(format!("bad call syntax `{src}`"))),
    }
}
