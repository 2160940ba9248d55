use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vdw_cli::artifacts::Writer;
use vdw_cli::config::{digest, AnalysisConfig, BasisConfig, GridConfig, PhysicsConfig, SolverConfig, SyntheticConfig};
use vdw_cli::error::CliError;
use vdw_cli::stages::{self, SpectrumManifest};
use vdw_cli::{render, run_pipeline, RunConfig};
use vdw_spectra::adiabatic::CoreModel;
use vdw_spectra::stats::SyntheticKind;

#[derive(Parser)]
#[command(name = "vdwcluster", version, about = "Spectra and spectral statistics of van der Waals boson clusters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tune the hard-core radius to a scattering length.
    TuneRc {
        #[command(flatten)]
        physics: PhysicsArgs,
        /// JSON output (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Effective hyperradial potential of one (N, l) channel as CSV.
    Potential {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        l: usize,
        #[command(flatten)]
        physics: PhysicsArgs,
        #[command(flatten)]
        basis: BasisArgs,
        /// CSV path; a JSON sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Bound-state spectra for l = 0..=l_max, one CSV per channel.
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        l_max: usize,
        #[arg(long, default_value_t = 1200)]
        count: usize,
        #[command(flatten)]
        physics: PhysicsArgs,
        #[command(flatten)]
        basis: BasisArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fluctuation measures of spectra read from CSV files or a spectrum manifest.
    Analyze {
        /// Level CSVs (column `E`) or `spectrum.json` manifests.
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
        /// Keep only sequences of this cluster size (manifest input).
        #[arg(long)]
        n: Option<usize>,
        /// Keep only these channels (manifest input).
        #[arg(long, value_delimiter = ',')]
        l: Vec<usize>,
        /// 1-based inclusive rank window, e.g. `40-80`.
        #[arg(long, value_parser = parse_window)]
        window: Option<(usize, usize)>,
        /// Merge all inputs into one spectrum before windowing.
        #[arg(long)]
        merge: bool,
        #[arg(long, value_delimiter = ',', default_value = "ps,brody,is,sigma2,delta3,ratio")]
        measures: Vec<String>,
        #[arg(long, default_value_t = 0.2)]
        bin_width: f64,
        #[arg(long, default_value_t = 6)]
        unfold_degree: usize,
        /// Reference overlays: poisson-ps, wigner-ps, semipoisson-ps, brody-ps(NU), poisson-pr, goe-pr.
        #[arg(long = "reference", value_delimiter = ',')]
        references: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded reference spectrum as CSV (member, n, E).
    Synthetic {
        #[arg(long, value_parser = parse_kind)]
        kind: SyntheticKind,
        /// Level count, or matrix dimension for GOE.
        #[arg(long)]
        size: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full cached pipeline from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Render a table.json, report.json or manifest.json as text.
    Report { path: PathBuf },
}

#[derive(Args)]
struct PhysicsArgs {
    #[arg(long, default_value = "Rb87")]
    species: String,
    /// Mass override in atomic mass units.
    #[arg(long)]
    mass: Option<f64>,
    /// eV Å⁶
    #[arg(long, default_value_t = 2803.0)]
    c6: f64,
    /// Bohr radii.
    #[arg(long, default_value_t = 100.0)]
    target_as: f64,
    #[arg(long, default_value_t = 5)]
    nodes: usize,
    /// Use this core radius (Å) instead of tuning.
    #[arg(long)]
    rc: Option<f64>,
}

impl PhysicsArgs {
    fn config(&self) -> PhysicsConfig {
        PhysicsConfig {
            species: self.species.clone(),
            mass_amu: self.mass,
            c6_ev: self.c6,
            target_as_bohr: self.target_as,
            nodes: self.nodes,
            r_c: self.rc,
        }
    }
}

#[derive(Args)]
struct BasisArgs {
    #[arg(long, default_value_t = 20)]
    k_max: usize,
    /// `excluded` or `barrier`.
    #[arg(long, default_value = "excluded", value_parser = parse_core)]
    core: CoreModel,
    #[arg(long, default_value_t = 0.3)]
    r_min_factor: f64,
    #[arg(long, default_value_t = 1e4)]
    r_max: f64,
    #[arg(long, default_value_t = 400)]
    points: usize,
}

impl BasisArgs {
    fn split(&self) -> (BasisConfig, GridConfig) {
        (
            BasisConfig { k_max: self.k_max, core: self.core },
            GridConfig { r_min_factor: self.r_min_factor, r_max: self.r_max, points: self.points },
        )
    }
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('-').ok_or("expected FIRST-LAST")?;
    let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| "bad FIRST")?, b.trim().parse().map_err(|_| "bad LAST")?);
    if a == 0 || b < a {
        return Err(format!("empty window {a}-{b}"));
    }
    Ok((a, b))
}

fn parse_kind(s: &str) -> Result<SyntheticKind, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown kind `{s}` (poisson, picket, goe, semipoisson)"))
}

fn parse_core(s: &str) -> Result<CoreModel, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown core model `{s}`"))
}

/// Writer rooted at the parent of `path`, plus the file name within it.
fn writer_for(path: &Path) -> (Writer, String) {
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    (Writer::new(root), name)
}

fn validate_physics(p: &PhysicsConfig) -> Result<(), CliError> {
    RunConfig { physics: p.clone(), ..RunConfig::default() }.validate()
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::TuneRc { physics, out } => {
            let p = physics.config();
            validate_physics(&p)?;
            let cal = stages::calibrate(&p)?;
            match out {
                Some(path) => {
                    let (mut w, name) = writer_for(&path);
                    w.write_json(&name, &cal)?;
                }
                None => println!("{}", serde_json::to_string_pretty(&cal).expect("serializable")),
            }
        }
        Command::Potential { n, l, physics, basis, out } => {
            let p = physics.config();
            validate_physics(&p)?;
            let (b, g) = basis.split();
            let cal = stages::calibrate(&p)?;
            let omega = stages::effective(n, l, &b, &g, &stages::pair_potential(&cal, &p)?)?;
            let (mut w, name) = writer_for(&out);
            let stem = Path::new(&name).with_extension("");
            stages::write_potential(&mut w, &stem.to_string_lossy(), &omega, b.core, cal.r_c)?;
        }
        Command::Spectrum { n, l_max, count, physics, basis, out } => {
            let p = physics.config();
            validate_physics(&p)?;
            if n < 3 {
                return Err(CliError::Config(format!("cluster size N = {n} (need N >= 3)")));
            }
            let (b, g) = basis.split();
            let s = SolverConfig { count_limit: count, ..SolverConfig::default() };
            let key = digest(serde_json::to_string(&(&p, &b, &g, &s, n, l_max)).expect("serializable").as_bytes());
            let cal = stages::calibrate(&p)?;
            let pot = stages::pair_potential(&cal, &p)?;
            let units = stages::units_for(&p)?;
            let mut w = Writer::new(out);
            let mut entries = Vec::new();
            for l in 0..=l_max {
                let omega = stages::effective(n, l, &b, &g, &pot)?;
                let seq = stages::levels(&omega, &s, &units)?;
                eprintln!("N={n} l={l}: {} levels", seq.len());
                entries.push(stages::write_levels(&mut w, ".", &seq)?);
            }
            w.write_json("spectrum.json", &SpectrumManifest { key, sequences: entries })?;
        }
        Command::Analyze { inputs, n, l, window, merge, measures, bin_width, unfold_degree, references, out } => {
            let a = AnalysisConfig { degree: unfold_degree, bin_width, measures, references, ..AnalysisConfig::default() };
            let cfg = RunConfig { analysis: a.clone(), ..RunConfig::default() };
            cfg.validate()?;
            let mut seqs = Vec::new();
            for path in &inputs {
                if path.extension().is_some_and(|e| e == "json") {
                    let all = stages::read_spectrum(path)?;
                    seqs.extend(all.into_iter().filter(|s| n.is_none_or(|n| s.n_particles == n) && (l.is_empty() || l.contains(&s.l))));
                } else {
                    seqs.push(stages::read_levels(path, &path.display().to_string())?);
                }
            }
            seqs.retain(|s| !s.is_empty());
            if seqs.is_empty() {
                return Err(CliError::Config("no levels in the selected inputs".into()));
            }
            if merge {
                seqs = vec![stages::merge(&seqs, "merged")?];
            }
            let opts = stages::analysis_options(&a, window)?;
            let report = stages::run_analysis(&seqs, &opts, "analyze")?;
            let mut w = Writer::new(out);
            stages::write_report(&mut w, ".", &report, &a.measures)?;
            print!("{}", render::report_table(&report));
        }
        Command::Synthetic { kind, size, seed, count, out } => {
            let s = SyntheticConfig { kind, size, seed, count, window: None };
            let cfg = RunConfig { synthetic: vec![s.clone()], ..RunConfig::default() };
            cfg.validate()?;
            let members = stages::synthetic_members(&s)?;
            let (mut w, name) = writer_for(&out);
            stages::write_synthetic_levels(&mut w, &name, &members)?;
        }
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let manifest = run_pipeline(&cfg)?;
            print!("{}", render::manifest_table(&manifest));
            let table = cfg.output_dir.join("analysis/table.json");
            if table.exists() {
                print!("\n{}", render::render_file(&table)?);
            }
        }
        Command::Report { path } => print!("{}", render::render_file(&path)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
