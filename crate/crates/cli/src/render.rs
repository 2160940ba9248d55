//! Plain-text tables for the `report` subcommand.

use std::fmt::Write;
use std::path::Path;

use serde_json::Value;
use vdw_spectra::stats::FluctuationReport;

use crate::artifacts::Manifest;
use crate::error::CliError;
use crate::stages::SummaryRow;

fn opt(x: Option<f64>, prec: usize) -> String {
    x.map(|v| format!("{v:.prec$}")).unwrap_or_else(|| "-".into())
}

pub fn summary_table(rows: &[SummaryRow]) -> String {
    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(6).max(6);
    let mut out = format!("{:<width$}  {:>7}  {:>8}  {:>8}  {:>12}  {:>8}  status\n", "window", "levels", "spacings", "<r~>", "<r>", "nu");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>7}  {:>8}  {:>8}  {:>12}  {:>8}  {}",
            r.label,
            r.levels,
            r.spacings,
            opt(r.mean_rtilde, 4),
            opt(r.mean_r, 3),
            opt(r.brody_nu, 3),
            r.status
        );
    }
    out
}

pub fn report_table(r: &FluctuationReport<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sources: {}", r.sources.join(", "));
    let _ = writeln!(out, "levels {}  spacings {}  quasi-degenerate fraction {:.4}", r.levels_used, r.spacing_count, r.quasi_degenerate_fraction);
    match &r.brody {
        Some(b) => {
            let _ = writeln!(out, "Brody nu {:.4} (histogram {:.4})  a {:.4}  KS {:.4}", b.nu, b.nu_histogram, b.a, b.ks_distance);
        }
        None => out.push_str("Brody fit: not enough spacings\n"),
    }
    let _ = writeln!(out, "<r~> {:.4}  <r> {:.4}  ratios {}  excluded {}", r.ratio.mean_rtilde, r.ratio.mean_r, r.ratio.count, r.ratio.excluded);
    out.push_str("\n     L     Sigma2     Delta3  Delta3(Sigma2)\n");
    for (((l, s2), (_, d3)), (_, t)) in r.sigma2.iter().zip(&r.delta3).zip(&r.delta3_transform) {
        let _ = writeln!(out, "{l:>6.2}  {s2:>9.4}  {d3:>9.4}  {t:>14.4}");
    }
    out.push_str("\n  s range        P(s)\n");
    let h = &r.ps_histogram;
    for i in 0..h.counts.len() {
        let _ = writeln!(out, "{:>4.2}-{:<4.2}  {:>10.4}", h.edges[i], h.edges[i + 1], h.density[i]);
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

pub fn manifest_table(m: &Manifest) -> String {
    let mut out = format!("{} {}  config {}\n", m.software, m.version, &m.config_hash[..16.min(m.config_hash.len())]);
    for s in &m.stages {
        let _ = writeln!(out, "  {:<10} {:?}", s.stage, s.status);
    }
    let _ = writeln!(out, "{} files", m.files.len());
    if let Some(e) = &m.error {
        let _ = writeln!(out, "error: {e}");
    }
    out
}

/// Renders a summary table, a fluctuation report or a run manifest,
/// whichever the JSON file holds.
pub fn render_file(path: &Path) -> Result<String, CliError> {
    let text = std::fs::read(path).map_err(CliError::io(path))?;
    let value: Value = serde_json::from_slice(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Ok(rows) = serde_json::from_value::<Vec<SummaryRow>>(value.clone()) {
        return Ok(summary_table(&rows));
    }
    if let Ok(r) = serde_json::from_value::<FluctuationReport<f64>>(value.clone()) {
        return Ok(report_table(&r));
    }
    if let Ok(m) = serde_json::from_value::<Manifest>(value) {
        return Ok(manifest_table(&m));
    }
    Err(CliError::Config(format!("{}: not a table, report or manifest", path.display())))
}
