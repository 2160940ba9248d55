//! The computations behind each subcommand and pipeline stage, plus the
//! file formats they read and write.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vdw_spectra::adiabatic::{
    effective_potential_with, log_grid, AdiabaticDiagnostics, AdiabaticOptions, ConstructionMode, CoreModel,
    EffectivePotential, MatrixOptions,
};
use vdw_spectra::basis::{overlap_factors, BasisSpec};
use vdw_spectra::hyperradial::{channel_levels, SolverOptions};
use vdw_spectra::levels::{LevelSequence, SolverMeta};
use vdw_spectra::stats::{analyze, goe_ensemble, synthetic_ensemble, AnalysisOptions, FluctuationReport, Histogram, SyntheticKind};
use vdw_spectra::twobody::{scattering_length, tune_hardcore, IntegrationGrid, TwoBodyPotential};
use vdw_spectra::units::{make_units, Species, UnitSystem};

use crate::artifacts::{num, Writer};
use crate::config::{parse_reference, AnalysisConfig, BasisConfig, GridConfig, PhysicsConfig, SolverConfig, SyntheticConfig};
use crate::error::{CliError, StageContext};

// ---------------------------------------------------------------- tune-rc

/// Calibrated pair potential, as written to `tune.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub species: String,
    pub mass_amu: f64,
    /// K Å²
    pub hbar2_over_m: f64,
    pub c6_ev: f64,
    /// K Å⁶
    pub c6: f64,
    pub vdw_length: f64,
    pub target_as_bohr: f64,
    /// `None` when `r_c` was given rather than tuned.
    pub nodes_requested: Option<usize>,
    pub r_c: f64,
    pub a_s: f64,
    pub a_s_bohr: f64,
    pub node_count: usize,
    pub branch: Option<(f64, f64)>,
    pub core_height: f64,
}

pub fn units_for(p: &PhysicsConfig) -> Result<UnitSystem<f64>, CliError> {
    let species = Species::resolve(&p.species, p.mass_amu).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(make_units(&species))
}

pub fn calibrate(p: &PhysicsConfig) -> Result<Calibration, CliError> {
    let units = units_for(p)?;
    let c6 = units.c6_from_ev(p.c6_ev);
    let params = || format!("C6 = {} eV Å⁶, a_s = {} a0, nodes = {}", p.c6_ev, p.target_as_bohr, p.nodes);
    let (pot, scattering, branch) = match p.r_c {
        Some(r_c) => {
            let pot = TwoBodyPotential::with_default_core(r_c, c6, units).stage("tune-rc", params)?;
            let s = scattering_length(&pot, &IntegrationGrid::for_potential(&pot)).stage("tune-rc", params)?;
            (pot, s, None)
        }
        None => {
            let t = tune_hardcore(c6, units.bohr_to_length(p.target_as_bohr), p.nodes, &units).stage("tune-rc", params)?;
            (t.potential, t.scattering, t.branch)
        }
    };
    Ok(Calibration {
        species: p.species.clone(),
        mass_amu: units.mass_amu,
        hbar2_over_m: units.hbar2_over_m,
        c6_ev: p.c6_ev,
        c6,
        vdw_length: pot.vdw_length(),
        target_as_bohr: p.target_as_bohr,
        nodes_requested: p.r_c.is_none().then_some(p.nodes),
        r_c: pot.r_c,
        a_s: scattering.a_s,
        a_s_bohr: units.length_to_bohr(scattering.a_s),
        node_count: scattering.node_count,
        branch,
        core_height: pot.core_height,
    })
}

pub fn pair_potential(cal: &Calibration, p: &PhysicsConfig) -> Result<TwoBodyPotential<f64>, CliError> {
    let units = units_for(p)?;
    TwoBodyPotential::new(cal.r_c, cal.c6, cal.core_height, units).stage("potential", || format!("r_c = {}", cal.r_c))
}

// -------------------------------------------------------------- potential

/// Metadata written next to each `omega_*.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSidecar {
    pub n: usize,
    pub l: usize,
    pub k_max: usize,
    pub core: CoreModel,
    pub construction_mode: ConstructionMode,
    pub r_c: f64,
    pub hbar2_over_m: f64,
    pub asymptotic_coefficient: f64,
    /// `(r, ω)` at the lowest grid point.
    pub minimum: (f64, f64),
    pub local_minima: usize,
    pub points: usize,
    pub diagnostics: AdiabaticDiagnostics,
}

pub fn effective(
    n: usize,
    l: usize,
    basis: &BasisConfig,
    grid: &GridConfig,
    pot: &TwoBodyPotential<f64>,
) -> Result<EffectivePotential<f64>, CliError> {
    let params = || format!("N = {n}, l = {l}, K_max = {}", basis.k_max);
    let spec = BasisSpec::new(n, l, basis.k_max).stage("potential", params)?;
    let f = overlap_factors(&spec).stage("potential", params)?;
    let r = log_grid(grid.r_min_factor * pot.r_c, grid.r_max, grid.points);
    let opts = AdiabaticOptions { matrix: MatrixOptions { core: basis.core, ..MatrixOptions::default() }, mode: None };
    effective_potential_with(&spec, pot, &f, &r, &opts).stage("potential", params)
}

pub fn omega_file(n: usize, l: usize) -> String {
    format!("omega_N{n}_l{l}")
}

/// Writes `{stem}.csv` and the `{stem}.json` sidecar.
pub fn write_potential(
    w: &mut Writer,
    stem: &str,
    omega: &EffectivePotential<f64>,
    core: CoreModel,
    r_c: f64,
) -> Result<(), CliError> {
    let rows = omega.r_grid.iter().zip(&omega.omega).map(|(r, v)| [num(*r), num(*v)]);
    w.write_csv(&format!("{stem}.csv"), &["r", "omega"], rows)?;
    let side = PotentialSidecar {
        n: omega.n_particles,
        l: omega.l,
        k_max: omega.k_max,
        core,
        construction_mode: omega.construction_mode,
        r_c,
        hbar2_over_m: omega.hbar2_over_m,
        asymptotic_coefficient: omega.asymptotic_coefficient,
        minimum: omega.minimum(),
        local_minima: omega.local_minima(),
        points: omega.r_grid.len(),
        diagnostics: omega.diagnostics.clone(),
    };
    w.write_json(&format!("{stem}.json"), &side)
}

fn read_csv_columns(path: &Path, want: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let idx: Vec<usize> = want
        .iter()
        .map(|c| header.iter().position(|h| h.trim() == *c).ok_or_else(|| bad(format!("missing column `{c}`"))))
        .collect::<Result<_, _>>()?;
    let mut cols = vec![Vec::new(); want.len()];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        for (col, &i) in cols.iter_mut().zip(&idx) {
            let field = rec.get(i).unwrap_or("");
            col.push(field.trim().parse().map_err(|_| bad(format!("row {}: bad number `{field}`", line + 1)))?);
        }
    }
    Ok(cols)
}

pub fn read_potential(dir: &Path, n: usize, l: usize) -> Result<EffectivePotential<f64>, CliError> {
    let stem = dir.join(omega_file(n, l));
    let side_path = stem.with_extension("json");
    let text = fs::read(&side_path).map_err(CliError::io(&side_path))?;
    let side: PotentialSidecar =
        serde_json::from_slice(&text).map_err(|e| CliError::Config(format!("{}: {e}", side_path.display())))?;
    let mut cols = read_csv_columns(&stem.with_extension("csv"), &["r", "omega"])?;
    let omega = cols.pop().expect("two columns");
    let r_grid = cols.pop().expect("two columns");
    Ok(EffectivePotential {
        l: side.l,
        n_particles: side.n,
        k_max: side.k_max,
        r_grid,
        omega,
        channel: None,
        construction_mode: side.construction_mode,
        hbar2_over_m: side.hbar2_over_m,
        asymptotic_coefficient: side.asymptotic_coefficient,
        diagnostics: side.diagnostics,
    })
}

// --------------------------------------------------------------- spectrum

pub fn solver_options(s: &SolverConfig) -> SolverOptions<f64> {
    SolverOptions { wall_margin: s.wall_margin, convergence_fraction: s.convergence_fraction, ..SolverOptions::default() }
}

pub fn levels(omega: &EffectivePotential<f64>, s: &SolverConfig, units: &UnitSystem<f64>) -> Result<LevelSequence<f64>, CliError> {
    channel_levels(omega, s.count_limit, units, &solver_options(s))
        .stage("spectrum", || format!("N = {}, l = {}, count_limit = {}", omega.n_particles, omega.l, s.count_limit))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub n: usize,
    pub l: usize,
    /// Relative to the manifest's directory.
    pub file: String,
    pub levels: usize,
    /// Solver settings and warnings; per-level estimates live in the CSV.
    pub solver: Option<SolverMeta<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumManifest {
    pub key: String,
    pub sequences: Vec<SpectrumEntry>,
}

pub fn levels_file(n: usize, l: usize) -> String {
    format!("levels_N{n}_l{l}.csv")
}

pub fn write_levels(w: &mut Writer, dir: &str, seq: &LevelSequence<f64>) -> Result<SpectrumEntry, CliError> {
    let file = levels_file(seq.n_particles, seq.l);
    let conv = seq.solver.as_ref().map(|m| m.convergence.clone()).unwrap_or_default();
    let rows = seq.energies.iter().enumerate().map(|(i, e)| {
        [(i + 1).to_string(), num(*e), conv.get(i).map(|c| num(*c)).unwrap_or_default()]
    });
    w.write_csv(&format!("{dir}/{file}"), &["n", "E", "convergence_estimate"], rows)?;
    let solver = seq.solver.clone().map(|mut m| {
        m.convergence.clear();
        m
    });
    Ok(SpectrumEntry { n: seq.n_particles, l: seq.l, file, levels: seq.len(), solver })
}

/// Level sequence from a CSV with columns `n, E, convergence_estimate`
/// (only `E` is required).
pub fn read_levels(path: &Path, source: &str) -> Result<LevelSequence<f64>, CliError> {
    let e = read_csv_columns(path, &["E"])?.pop().expect("one column");
    LevelSequence::from_energies(e, source).map_err(|err| CliError::Config(format!("{}: {err}", path.display())))
}

pub fn read_spectrum(manifest: &Path) -> Result<Vec<LevelSequence<f64>>, CliError> {
    let text = fs::read(manifest).map_err(CliError::io(manifest))?;
    let m: SpectrumManifest =
        serde_json::from_slice(&text).map_err(|e| CliError::Config(format!("{}: {e}", manifest.display())))?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    m.sequences
        .iter()
        .map(|s| {
            let path = dir.join(&s.file);
            let mut seq = if s.levels == 0 {
                LevelSequence::from_energies(Vec::new(), "").expect("empty is valid")
            } else {
                read_levels(&path, "")?
            };
            if seq.len() != s.levels {
                return Err(CliError::Config(format!("{}: {} levels, manifest says {}", path.display(), seq.len(), s.levels)));
            }
            if let Some(mut meta) = s.solver.clone() {
                if s.levels > 0 {
                    meta.convergence = read_csv_columns(&path, &["convergence_estimate"])?.pop().expect("one column");
                }
                seq.solver = Some(meta);
            }
            seq.n_particles = s.n;
            seq.l = s.l;
            seq.source = format!("N={} l={}", s.n, s.l);
            Ok(seq)
        })
        .collect()
}

// ---------------------------------------------------------------- analyze

pub fn analysis_options(a: &AnalysisConfig, window: Option<(usize, usize)>) -> Result<AnalysisOptions<f64>, CliError> {
    Ok(AnalysisOptions {
        degree: a.degree,
        window,
        bin_width: a.bin_width,
        fine_bin_width: a.fine_bin_width,
        sigma2_lengths: a.lengths.clone(),
        delta3_lengths: a.lengths.clone(),
        references: a.references.iter().map(|r| parse_reference(r)).collect::<Result<_, _>>()?,
        ..AnalysisOptions::default()
    })
}

/// Merges channels into a single ascending spectrum.
pub fn merge(seqs: &[LevelSequence<f64>], label: &str) -> Result<LevelSequence<f64>, CliError> {
    let mut e: Vec<f64> = seqs.iter().flat_map(|s| s.energies.iter().copied()).collect();
    e.sort_by(f64::total_cmp);
    let mut out = LevelSequence::from_energies(e, label).map_err(|err| CliError::Config(err.to_string()))?;
    out.n_particles = seqs.first().map(|s| s.n_particles).unwrap_or(0);
    Ok(out)
}

pub fn run_analysis(
    seqs: &[LevelSequence<f64>],
    opts: &AnalysisOptions<f64>,
    what: &str,
) -> Result<FluctuationReport<f64>, CliError> {
    analyze(seqs, opts).stage("analyze", || what.to_string())
}

fn histogram_rows(h: &Histogram<f64>) -> Vec<[String; 4]> {
    (0..h.counts.len()).map(|i| [num(h.edges[i]), num(h.edges[i + 1]), num(h.density[i]), h.counts[i].to_string()]).collect()
}

/// One CSV per requested measure plus the consolidated `report.json`.
pub fn write_report(w: &mut Writer, dir: &str, report: &FluctuationReport<f64>, measures: &[String]) -> Result<(), CliError> {
    let has = |m: &str| measures.iter().any(|x| x == m);
    let hist_header = ["lo", "hi", "density", "count"];
    if has("ps") {
        w.write_csv(&format!("{dir}/ps.csv"), &hist_header, histogram_rows(&report.ps_histogram))?;
        w.write_csv(&format!("{dir}/ps_fine.csv"), &hist_header, histogram_rows(&report.ps_fine))?;
    }
    if has("brody") {
        if let Some(b) = &report.brody {
            let row = [
                num(b.nu),
                num(b.a),
                num(b.nu_histogram),
                num(b.log_likelihood),
                num(b.ks_distance),
                b.at_bound.to_string(),
                b.sample_size.to_string(),
            ];
            let header = ["nu", "a", "nu_histogram", "log_likelihood", "ks_distance", "at_bound", "sample_size"];
            w.write_csv(&format!("{dir}/brody.csv"), &header, [row])?;
        }
    }
    if has("is") {
        let rows = report.is_curve.ln_s.iter().zip(&report.is_curve.i).map(|(a, b)| [num(*a), num(*b)]);
        w.write_csv(&format!("{dir}/is.csv"), &["ln_s", "I"], rows)?;
    }
    if has("sigma2") {
        let rows = report.sigma2.iter().map(|(l, v)| [num(*l), num(*v)]);
        w.write_csv(&format!("{dir}/sigma2.csv"), &["L", "sigma2"], rows)?;
    }
    if has("delta3") {
        let rows = report.delta3.iter().zip(&report.delta3_transform).map(|((l, d), (_, t))| [num(*l), num(*d), num(*t)]);
        w.write_csv(&format!("{dir}/delta3.csv"), &["L", "delta3", "delta3_from_sigma2"], rows)?;
    }
    if has("ratio") {
        w.write_csv(&format!("{dir}/pr.csv"), &hist_header, histogram_rows(&report.ratio.histogram))?;
        let r = &report.ratio;
        let row = [num(r.mean_r), num(r.mean_rtilde), r.count.to_string(), r.excluded.to_string()];
        w.write_csv(&format!("{dir}/ratio.csv"), &["mean_r", "mean_rtilde", "count", "excluded"], [row])?;
    }
    if !report.overlays.is_empty() {
        let rows = report.overlays.iter().flat_map(|o| o.points.iter().map(|(x, y)| [o.name.clone(), num(*x), num(*y)]));
        w.write_csv(&format!("{dir}/overlays.csv"), &["curve", "x", "y"], rows)?;
    }
    w.write_json(&format!("{dir}/report.json"), report)
}

/// Row of the summary table emitted by the analysis stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub dir: String,
    pub levels: usize,
    pub spacings: usize,
    pub mean_rtilde: Option<f64>,
    pub mean_r: Option<f64>,
    pub brody_nu: Option<f64>,
    pub status: String,
}

impl SummaryRow {
    pub fn from_report(label: String, dir: String, r: &FluctuationReport<f64>) -> Self {
        Self {
            label,
            dir,
            levels: r.levels_used,
            spacings: r.spacing_count,
            mean_rtilde: Some(r.ratio.mean_rtilde),
            mean_r: Some(r.ratio.mean_r),
            brody_nu: r.brody.as_ref().map(|b| b.nu),
            status: "ok".into(),
        }
    }

    pub fn skipped(label: String, why: String) -> Self {
        Self { label, dir: String::new(), levels: 0, spacings: 0, mean_rtilde: None, mean_r: None, brody_nu: None, status: why }
    }
}

pub fn write_summary(w: &mut Writer, dir: &str, rows: &[SummaryRow]) -> Result<(), CliError> {
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let csv_rows = rows.iter().map(|r| {
        [
            r.label.clone(),
            r.levels.to_string(),
            r.spacings.to_string(),
            opt(r.mean_rtilde),
            opt(r.mean_r),
            opt(r.brody_nu),
            r.status.clone(),
        ]
    });
    let header = ["window", "levels", "spacings", "mean_rtilde", "mean_r", "brody_nu", "status"];
    w.write_csv(&format!("{dir}/table.csv"), &header, csv_rows)?;
    w.write_json(&format!("{dir}/table.json"), &rows)
}

// -------------------------------------------------------------- synthetic

pub fn synthetic_members(s: &SyntheticConfig) -> Result<Vec<LevelSequence<f64>>, CliError> {
    let params = || format!("{} size = {} seed = {} count = {}", s.kind.name(), s.size, s.seed, s.count);
    match s.kind {
        SyntheticKind::Goe => goe_ensemble(s.size, s.count, s.seed).stage("synthetic", params),
        kind => (0..s.count as u64)
            .map(|i| synthetic_ensemble(kind, s.size, s.seed.wrapping_add(i)).stage("synthetic", params))
            .collect(),
    }
}

pub fn synthetic_label(s: &SyntheticConfig) -> String {
    format!("{}_n{}_x{}_seed{}", s.kind.name(), s.size, s.count, s.seed)
}

pub fn write_synthetic_levels(w: &mut Writer, rel: &str, members: &[LevelSequence<f64>]) -> Result<(), CliError> {
    let rows = members
        .iter()
        .enumerate()
        .flat_map(|(m, s)| s.energies.iter().enumerate().map(move |(i, e)| [m.to_string(), (i + 1).to_string(), num(*e)]));
    w.write_csv(rel, &["member", "n", "E"], rows)
}
