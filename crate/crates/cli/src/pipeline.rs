//! The cached `run` pipeline: tune → potential → spectrum → analysis, plus
//! the synthetic references.

use std::fs;

use vdw_spectra::adiabatic::EffectivePotential;
use vdw_spectra::levels::LevelSequence;

use crate::artifacts::{clear_stage, FileEntry, Manifest, StageEntry, StageRecord, StageStatus, Writer, MANIFEST};
use crate::config::{digest, RunConfig, WindowConfig};
use crate::error::CliError;
use crate::stages::{self, Calibration, SpectrumManifest, SummaryRow};

pub const CONFIG_COPY: &str = "config.toml";

struct Run<'a> {
    cfg: &'a RunConfig,
    w: Writer,
    stages: Vec<StageEntry>,
}

impl Run<'_> {
    /// Looks up a valid cache record and, on a hit, adopts its files.
    fn cached(&mut self, stage: &str, key: &str) -> bool {
        let Some(rec) = StageRecord::find(&self.w.root, stage, key) else {
            return false;
        };
        let rec_path = StageRecord::path(stage);
        let bytes = fs::read(self.w.root.join(&rec_path)).unwrap_or_default();
        self.w.files.extend(rec.files);
        self.w.files.push(FileEntry { path: rec_path, sha256: digest(&bytes), bytes: bytes.len() as u64 });
        self.stages.push(StageEntry { stage: stage.into(), key: key.into(), status: StageStatus::CacheHit });
        true
    }

    fn begin(&mut self, stage: &str, key: &str) -> Result<(), CliError> {
        clear_stage(&self.w.root, stage)?;
        self.w.files.retain(|f| !f.path.starts_with(&format!("{stage}/")));
        self.stages.push(StageEntry { stage: stage.into(), key: key.into(), status: StageStatus::Failed });
        Ok(())
    }

    fn finish(&mut self, stage: &str, key: &str) -> Result<(), CliError> {
        let rec = StageRecord { stage: stage.into(), key: key.into(), files: self.w.files_under(stage) };
        self.w.write_json(&StageRecord::path(stage), &rec)?;
        if let Some(e) = self.stages.iter_mut().rev().find(|e| e.stage == stage) {
            e.status = StageStatus::Computed;
        }
        Ok(())
    }

    fn empty(&mut self, stage: &str, key: &str) {
        self.stages.push(StageEntry { stage: stage.into(), key: key.into(), status: StageStatus::Empty });
    }

    fn channels(&self) -> Vec<(usize, usize)> {
        self.cfg.clusters.iter().flat_map(|c| (0..=c.l_max).map(move |l| (c.n, l))).collect()
    }

    fn tune(&mut self) -> Result<Calibration, CliError> {
        let key = self.cfg.tune_key();
        let path = "tune/tune.json";
        if self.cached("tune", &key) {
            let text = fs::read(self.w.root.join(path)).map_err(CliError::io(self.w.root.join(path)))?;
            return serde_json::from_slice(&text).map_err(|e| CliError::Config(format!("{path}: {e}")));
        }
        self.begin("tune", &key)?;
        let cal = stages::calibrate(&self.cfg.physics)?;
        self.w.write_json(path, &cal)?;
        self.finish("tune", &key)?;
        Ok(cal)
    }

    /// Effective potentials; read back from a cache hit only when `need`.
    fn potentials(&mut self, cal: &Calibration, need: bool) -> Result<Option<Vec<EffectivePotential<f64>>>, CliError> {
        let key = self.cfg.potential_key();
        if self.cached("potential", &key) {
            if !need {
                return Ok(None);
            }
            let dir = self.w.root.join("potential");
            return self.channels().into_iter().map(|(n, l)| stages::read_potential(&dir, n, l)).collect::<Result<_, _>>().map(Some);
        }
        self.begin("potential", &key)?;
        let pot = stages::pair_potential(cal, &self.cfg.physics)?;
        let mut out = Vec::new();
        for (n, l) in self.channels() {
            let omega = stages::effective(n, l, &self.cfg.basis, &self.cfg.grid, &pot)?;
            stages::write_potential(&mut self.w, &format!("potential/{}", stages::omega_file(n, l)), &omega, self.cfg.basis.core, cal.r_c)?;
            out.push(omega);
        }
        self.finish("potential", &key)?;
        Ok(Some(out))
    }

    fn spectra(&mut self, omegas: Option<Vec<EffectivePotential<f64>>>, need: bool) -> Result<Option<Vec<LevelSequence<f64>>>, CliError> {
        let key = self.cfg.spectrum_key();
        if self.cached("spectrum", &key) {
            if !need {
                return Ok(None);
            }
            return stages::read_spectrum(&self.w.root.join("spectrum/spectrum.json")).map(Some);
        }
        let omegas = omegas.expect("potentials are loaded whenever the spectrum misses");
        self.begin("spectrum", &key)?;
        let units = stages::units_for(&self.cfg.physics)?;
        let mut seqs = Vec::new();
        let mut entries = Vec::new();
        for omega in &omegas {
            let seq = stages::levels(omega, &self.cfg.solver, &units)?;
            entries.push(stages::write_levels(&mut self.w, "spectrum", &seq)?);
            seqs.push(seq);
        }
        self.w.write_json("spectrum/spectrum.json", &SpectrumManifest { key: key.clone(), sequences: entries })?;
        self.finish("spectrum", &key)?;
        Ok(Some(seqs))
    }

    fn analysis(&mut self, spectra: Option<Vec<LevelSequence<f64>>>) -> Result<(), CliError> {
        let key = self.cfg.analysis_key();
        if self.cfg.analysis.windows.is_empty() {
            self.empty("analysis", &key);
            return Ok(());
        }
        if self.cached("analysis", &key) {
            return Ok(());
        }
        let spectra = spectra.expect("spectra are loaded whenever the analysis misses");
        self.begin("analysis", &key)?;
        let mut rows = Vec::new();
        for win in &self.cfg.analysis.windows {
            rows.push(self.window(win, &spectra)?);
        }
        stages::write_summary(&mut self.w, "analysis", &rows)?;
        self.finish("analysis", &key)
    }

    fn window(&mut self, win: &WindowConfig, spectra: &[LevelSequence<f64>]) -> Result<SummaryRow, CliError> {
        let ls: Vec<String> = win.channels.iter().map(|l| l.to_string()).collect();
        let tag = if win.merge { "_merged" } else { "" };
        let label = format!("N={} levels {}-{} l={}{}", win.n, win.first, win.last, ls.join("+"), if win.merge { " merged" } else { "" });
        let dir = format!("analysis/N{}_{}-{}_l{}{tag}", win.n, win.first, win.last, ls.join("+"));
        let chosen: Vec<LevelSequence<f64>> =
            spectra.iter().filter(|s| s.n_particles == win.n && win.channels.contains(&s.l)).cloned().collect();
        let inputs = if win.merge {
            vec![stages::merge(&chosen, &format!("N={} l={} merged", win.n, ls.join("+")))?]
        } else {
            chosen
        };
        let available = inputs.iter().map(|s| s.len()).max().unwrap_or(0);
        if available < win.last {
            return Ok(SummaryRow::skipped(label, format!("skipped: {available} levels, window needs {}", win.last)));
        }
        let inputs: Vec<_> = inputs.into_iter().filter(|s| s.len() >= win.last).collect();
        let opts = stages::analysis_options(&self.cfg.analysis, Some((win.first, win.last)))?;
        match stages::run_analysis(&inputs, &opts, &label) {
            Ok(report) => {
                stages::write_report(&mut self.w, &dir, &report, &self.cfg.analysis.measures)?;
                Ok(SummaryRow::from_report(label, dir, &report))
            }
            // a window the data cannot support is a reported outcome, not a
            // pipeline failure
            Err(CliError::Numerical { source, .. }) => Ok(SummaryRow::skipped(label, format!("failed: {source}"))),
            Err(e) => Err(e),
        }
    }

    fn synthetic(&mut self) -> Result<(), CliError> {
        let key = self.cfg.synthetic_key();
        if self.cfg.synthetic.is_empty() {
            self.empty("synthetic", &key);
            return Ok(());
        }
        if self.cached("synthetic", &key) {
            return Ok(());
        }
        self.begin("synthetic", &key)?;
        let mut rows = Vec::new();
        for s in &self.cfg.synthetic {
            let label = stages::synthetic_label(s);
            let dir = format!("synthetic/{label}");
            let members = stages::synthetic_members(s)?;
            stages::write_synthetic_levels(&mut self.w, &format!("{dir}/levels.csv"), &members)?;
            let opts = stages::analysis_options(&self.cfg.analysis, s.window)?;
            let report = stages::run_analysis(&members, &opts, &label)?;
            stages::write_report(&mut self.w, &dir, &report, &self.cfg.analysis.measures)?;
            rows.push(SummaryRow::from_report(label, dir, &report));
        }
        stages::write_summary(&mut self.w, "synthetic", &rows)?;
        self.finish("synthetic", &key)
    }

    fn all(&mut self) -> Result<(), CliError> {
        let cfg = self.cfg;
        if cfg.clusters.is_empty() {
            for (stage, key) in [
                ("tune", cfg.tune_key()),
                ("potential", cfg.potential_key()),
                ("spectrum", cfg.spectrum_key()),
                ("analysis", cfg.analysis_key()),
            ] {
                self.empty(stage, &key);
            }
        } else {
            // each stage is checked on its own; upstream data is read back
            // only when a downstream stage has to be rebuilt
            let root = &cfg.output_dir;
            let analysis_miss =
                !cfg.analysis.windows.is_empty() && StageRecord::find(root, "analysis", &cfg.analysis_key()).is_none();
            let spectrum_miss = StageRecord::find(root, "spectrum", &cfg.spectrum_key()).is_none();
            let cal = self.tune()?;
            let omegas = self.potentials(&cal, spectrum_miss)?;
            let spectra = self.spectra(omegas, analysis_miss)?;
            self.analysis(spectra)?;
        }
        self.synthetic()
    }
}

/// Runs every configured stage, reusing intact cached stages, and writes
/// `manifest.json`. The manifest is written even when a stage fails; it
/// then lists the partial results and the error.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Manifest, CliError> {
    cfg.validate()?;
    let mut run = Run { cfg, w: Writer::new(&cfg.output_dir), stages: Vec::new() };
    let canonical = cfg.canonical();
    let result = run.w.write(CONFIG_COPY, canonical.as_bytes()).and_then(|_| run.all());
    let mut files = run.w.files.clone();
    files.sort_by(|a, b| a.path.cmp(&b.path));
    files.dedup_by(|a, b| a.path == b.path);
    let manifest = Manifest {
        software: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.hash(),
        stages: run.stages,
        files,
        error: result.as_ref().err().map(|e| e.to_string()),
    };
    let mut text = serde_json::to_vec_pretty(&manifest).expect("serializable");
    text.push(b'\n');
    crate::artifacts::write_atomic(&cfg.output_dir.join(MANIFEST), &text)?;
    result.map(|_| manifest)
}
