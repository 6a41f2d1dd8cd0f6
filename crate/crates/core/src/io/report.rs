//! Human-readable and JSON reports.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{LineClass, LineSet, PeakTable, ReconstructedLevels};
use crate::crosscheck::Comparison;
use crate::error::{Error, Result};
use crate::tuning::TuningPoint;
use crate::units::{AngularFrequency, Temperature};

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_bytes(path, text.as_bytes())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Signal and idler wavelengths against temperature.
pub fn write_tuning_curve(path: &Path, points: &[TuningPoint]) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let err = |e: csv::Error| Error::format(path, e.to_string());
        w.write_record(["temperature_C", "signal_nm", "idler_nm"])
            .map_err(err)?;
        for p in points {
            w.write_record([p.temperature.0, p.signal.0, p.idler.0].map(|x| format!("{x:e}")))
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    write_bytes(path, &buf)
}

pub fn peaks_text(table: &PeakTable) -> String {
    let mut s = String::new();
    let total: usize = table.rows.iter().map(|r| r.peaks.len()).sum();
    let _ = writeln!(
        s,
        "# {} peaks in {} rows (threshold {}, bin width {:.4} rad/ps)",
        total,
        table.rows.len(),
        table.threshold,
        table.bin_width
    );
    let _ = writeln!(s, "{:>10}  {:>12}  {:>10}", "T (°C)", "ω (rad/ps)", "|F|");
    for row in &table.rows {
        for p in &row.peaks {
            let _ = writeln!(
                s,
                "{:>10.3}  {:>12.3}  {:>10.4}",
                row.temperature.0, p.frequency.0, p.magnitude
            );
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineSummary {
    pub class: LineClass,
    /// Fitted frequency at the reference temperature.
    pub intercept: AngularFrequency,
    pub slope: f64,
    pub slope_std_error: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub config_digest: Option<String>,
    pub reference_temperature: Temperature,
    pub bin_width: f64,
    pub lines: Vec<LineSummary>,
    pub reconstruction: Option<ReconstructedLevels>,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    pub fn new(digest: Option<&str>, lines: &LineSet, reconstruction: Option<ReconstructedLevels>) -> Self {
        let mut warnings: Vec<String> = Vec::new();
        if let Some(r) = &reconstruction {
            for c in r.combined_lines.iter().filter(|c| c.unpaired) {
                warnings.push(format!("unpaired {:?} branch at {:.3} rad/ps", c.class, c.frequency.0));
            }
        }
        Self {
            config_digest: digest.map(str::to_owned),
            reference_temperature: lines.reference_temperature,
            bin_width: lines.bin_width,
            lines: lines
                .trajectories
                .iter()
                .map(|t| LineSummary {
                    class: t.class,
                    intercept: t.intercept,
                    slope: t.slope,
                    slope_std_error: t.slope_std_error,
                    samples: t.samples.len(),
                })
                .collect(),
            reconstruction,
            warnings,
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        if let Some(d) = &self.config_digest {
            let _ = writeln!(s, "config digest: {d}");
        }
        let _ = writeln!(
            s,
            "bin width {:.4} rad/ps, reference temperature {} °C",
            self.bin_width, self.reference_temperature.0
        );
        let _ = writeln!(s, "\nlines ({}):", self.lines.len());
        let _ = writeln!(s, "  {:<16} {:>12} {:>14} {:>8}", "class", "ω(T₀)", "slope", "rows");
        for l in &self.lines {
            let _ = writeln!(
                s,
                "  {:<16} {:>12.3} {:>8.4}±{:<6.4} {:>4}",
                class_name(l.class),
                l.intercept.0,
                l.slope,
                l.slope_std_error,
                l.samples
            );
        }
        if let Some(r) = &self.reconstruction {
            let _ = writeln!(s, "\nlevels ({}), ω₀ = {:.4} rad/ps:", r.levels.len(), r.omega0.0);
            let _ = writeln!(
                s,
                "  {:>12} {:>12} {:>10} {:>10}",
                "ε̃ (rad/ps)", "ε (rad/ps)", "λ (nm)", "± (rad/ps)"
            );
            for l in &r.levels {
                let _ = writeln!(
                    s,
                    "  {:>12.3} {:>12.3} {:>10.3} {:>10.3}",
                    l.epsilon_tilde.0, l.epsilon.0, l.lambda.0, l.uncertainty.0
                );
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

fn class_name(c: LineClass) -> &'static str {
    match c {
        LineClass::XBranchPlus => "x-branch (+Δ)",
        LineClass::XBranchMinus => "x-branch (−Δ)",
        LineClass::Straight => "straight",
    }
}

pub fn verification_text(checks: &[Comparison]) -> String {
    let mut s = String::new();
    for c in checks {
        let _ = writeln!(
            s,
            "{} {}: max relative deviation {:.3e} (tolerance {:.0e}, scale {:.6e}, {} probes)",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.max_relative_deviation,
            c.tolerance,
            c.scale,
            c.probes.len()
        );
    }
    s
}
