//! Run configuration, its canonical text form and per-stage cache keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vdw_spectra::adiabatic::CoreModel;
use vdw_spectra::stats::{ReferenceCurve, SyntheticKind};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Relative paths are taken from the directory holding the config file.
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub clusters: Vec<ClusterConfig>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub synthetic: Vec<SyntheticConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default = "defaults::species")]
    pub species: String,
    /// Overrides the tabulated mass, in atomic mass units.
    pub mass_amu: Option<f64>,
    /// eV·Å⁶
    #[serde(default = "defaults::c6")]
    pub c6_ev: f64,
    /// Bohr radii.
    #[serde(default = "defaults::target_as")]
    pub target_as_bohr: f64,
    /// Node count of the zero-energy solution on the chosen branch.
    #[serde(default = "defaults::nodes")]
    pub nodes: usize,
    /// Skips tuning when set, Å.
    pub r_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    #[serde(default = "defaults::k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub core: CoreModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Inner edge as a multiple of `r_c`.
    #[serde(default = "defaults::r_min_factor")]
    pub r_min_factor: f64,
    #[serde(default = "defaults::r_max")]
    pub r_max: f64,
    #[serde(default = "defaults::r_points")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "defaults::count_limit")]
    pub count_limit: usize,
    #[serde(default = "defaults::convergence_fraction")]
    pub convergence_fraction: f64,
    #[serde(default = "defaults::wall_margin")]
    pub wall_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    pub n: usize,
    #[serde(default)]
    pub l_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "defaults::degree")]
    pub degree: usize,
    #[serde(default = "defaults::bin_width")]
    pub bin_width: f64,
    #[serde(default = "defaults::fine_bin_width")]
    pub fine_bin_width: f64,
    #[serde(default = "defaults::lengths")]
    pub lengths: Vec<f64>,
    #[serde(default = "defaults::measures")]
    pub measures: Vec<String>,
    #[serde(default)]
    pub references: Vec<String>,
    #[serde(default)]
    pub windows: Vec<WindowConfig>,
}

/// Ranks `first..=last` of one cluster's spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub n: usize,
    pub first: usize,
    pub last: usize,
    #[serde(default = "defaults::channels")]
    pub channels: Vec<usize>,
    /// Merge the channels into one sorted spectrum before windowing;
    /// otherwise each channel is windowed and unfolded on its own and the
    /// spacings pooled.
    #[serde(default)]
    pub merge: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub kind: SyntheticKind,
    /// Level count, or matrix dimension for GOE.
    pub size: usize,
    pub seed: u64,
    /// Independent members; member `i` is seeded with `seed + i`.
    #[serde(default = "defaults::one")]
    pub count: usize,
    /// Rank window applied to every member.
    pub window: Option<(usize, usize)>,
}

mod defaults {
    use std::path::PathBuf;

    pub fn output_dir() -> PathBuf {
        PathBuf::from("out")
    }
    pub fn species() -> String {
        "Rb87".into()
    }
    pub fn c6() -> f64 {
        2803.0
    }
    pub fn target_as() -> f64 {
        100.0
    }
    pub fn nodes() -> usize {
        5
    }
    pub fn k_max() -> usize {
        20
    }
    pub fn r_min_factor() -> f64 {
        0.3
    }
    pub fn r_max() -> f64 {
        1e4
    }
    pub fn r_points() -> usize {
        400
    }
    pub fn count_limit() -> usize {
        1200
    }
    pub fn convergence_fraction() -> f64 {
        0.05
    }
    pub fn wall_margin() -> f64 {
        3.0
    }
    pub fn degree() -> usize {
        6
    }
    pub fn bin_width() -> f64 {
        0.2
    }
    pub fn fine_bin_width() -> f64 {
        0.01
    }
    pub fn lengths() -> Vec<f64> {
        vec![0.5, 1.0, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0, 20.0]
    }
    pub fn measures() -> Vec<String> {
        super::MEASURES.iter().map(|s| s.to_string()).collect()
    }
    pub fn channels() -> Vec<usize> {
        vec![0]
    }
    pub fn one() -> usize {
        1
    }
}

macro_rules! default_via_serde {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                toml::from_str("").expect("all fields defaulted")
            }
        }
    )*};
}
default_via_serde!(PhysicsConfig, BasisConfig, GridConfig, SolverConfig, AnalysisConfig);

/// Measure names accepted in `measures`.
pub const MEASURES: [&str; 6] = ["ps", "brody", "is", "sigma2", "delta3", "ratio"];

pub fn parse_reference(name: &str) -> Result<ReferenceCurve<f64>, CliError> {
    let bad = || CliError::Config(format!("unknown reference curve `{name}`"));
    Ok(match name {
        "poisson-ps" => ReferenceCurve::PoissonPs,
        "wigner-ps" => ReferenceCurve::WignerPs,
        "semipoisson-ps" => ReferenceCurve::SemiPoissonPs,
        "poisson-pr" => ReferenceCurve::PoissonPr,
        "goe-pr" => ReferenceCurve::GoePr,
        _ => {
            let nu = name.strip_prefix("brody-ps(").and_then(|s| s.strip_suffix(')')).ok_or_else(bad)?;
            ReferenceCurve::BrodyPs { nu: nu.parse().map_err(|_| bad())? }
        }
    })
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields defaulted")
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative `output_dir` is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if cfg.output_dir.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    /// Byte-stable text form: every field present, fixed order.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        digest(self.canonical().as_bytes())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let p = &self.physics;
        if !(p.c6_ev >= 0.0 && p.c6_ev.is_finite()) {
            return bad(format!("physics.c6_ev = {}", p.c6_ev));
        }
        if !(p.target_as_bohr > 0.0) {
            return bad(format!("physics.target_as_bohr = {}", p.target_as_bohr));
        }
        if let Some(rc) = p.r_c {
            if !(rc > 0.0 && rc.is_finite()) {
                return bad(format!("physics.r_c = {rc}"));
            }
        }
        vdw_spectra::units::Species::resolve(&p.species, p.mass_amu).map_err(|e| CliError::Config(e.to_string()))?;
        let g = &self.grid;
        if !(g.r_min_factor > 0.0 && g.r_max > 0.0 && g.points >= 10) {
            return bad(format!("grid {g:?}"));
        }
        if self.solver.count_limit == 0 || !(self.solver.convergence_fraction > 0.0) {
            return bad(format!("solver {:?}", self.solver));
        }
        let mut seen = Vec::new();
        for c in &self.clusters {
            if c.n < 3 {
                return bad(format!("cluster size N = {} (need N >= 3)", c.n));
            }
            if seen.contains(&c.n) {
                return bad(format!("cluster N = {} listed twice", c.n));
            }
            seen.push(c.n);
        }
        let a = &self.analysis;
        if !(a.bin_width > 0.0 && a.fine_bin_width > 0.0) {
            return bad("analysis bin widths must be positive".into());
        }
        if let Some(m) = a.measures.iter().find(|m| !MEASURES.contains(&m.as_str())) {
            return bad(format!("unknown measure `{m}` (known: {})", MEASURES.join(", ")));
        }
        for r in &a.references {
            parse_reference(r)?;
        }
        for w in &a.windows {
            let Some(c) = self.clusters.iter().find(|c| c.n == w.n) else {
                return bad(format!("window on N = {} which is not in `clusters`", w.n));
            };
            if w.first == 0 || w.last < w.first {
                return bad(format!("window {}-{} for N = {}", w.first, w.last, w.n));
            }
            if w.channels.is_empty() || w.channels.iter().any(|&l| l > c.l_max) {
                return bad(format!("window channels {:?} outside l_max = {} for N = {}", w.channels, c.l_max, w.n));
            }
        }
        for s in &self.synthetic {
            if s.size < 10 || s.count == 0 {
                return bad(format!("synthetic {} size {} count {}", s.kind.name(), s.size, s.count));
            }
            if let Some((a, b)) = s.window {
                if a == 0 || b < a || b > s.size {
                    return bad(format!("synthetic window {a}-{b}"));
                }
            }
        }
        Ok(())
    }

    /// Key of the calibration stage.
    pub fn tune_key(&self) -> String {
        stage_key("tune", "", &self.physics)
    }

    /// Key of the effective-potential stage.
    pub fn potential_key(&self) -> String {
        stage_key("potential", &self.tune_key(), &(&self.basis, &self.grid, &self.clusters))
    }

    pub fn spectrum_key(&self) -> String {
        stage_key("spectrum", &self.potential_key(), &self.solver)
    }

    /// Analysis settings only enter here, so editing a window never
    /// invalidates the spectra.
    pub fn analysis_key(&self) -> String {
        stage_key("analysis", &self.spectrum_key(), &self.analysis)
    }

    pub fn synthetic_key(&self) -> String {
        stage_key("synthetic", "", &(&self.synthetic, &self.analysis))
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn stage_key(stage: &str, upstream: &str, part: &impl Serialize) -> String {
    #[derive(Serialize)]
    struct Keyed<'a, P> {
        stage: &'a str,
        upstream: &'a str,
        version: &'a str,
        part: &'a P,
    }
    let text = serde_json::to_string(&Keyed { stage, upstream, version: env!("CARGO_PKG_VERSION"), part })
        .expect("stage inputs serialize");
    digest(text.as_bytes())
}
