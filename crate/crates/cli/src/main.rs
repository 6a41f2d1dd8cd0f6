//! `etpa`: simulate, analyse and verify entangled two-photon absorption
//! signals from a JSON run configuration.
//!
//! Every subcommand reads `--config` and writes into `--out` (default: the
//! configuration's `output.directory`). Downstream stages reuse upstream
//! files in the output directory when they match the configuration and
//! recompute them otherwise.
//!
//! Exit status: 0 on success, 1 on invalid input, 2 when a numerical
//! consistency check fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use etpa::analysis::{delay_spectrum, detect_peaks, reconstruct_levels, track_lines, PeakTable, SpectrumMap, Window};
use etpa::crosscheck::{expanded_comparison, oracle_comparison, probe_set};
use etpa::io::report::{peaks_text, verification_text, write_json, write_text, write_tuning_curve, AnalysisReport};
use etpa::io::{
    load_config, load_grid, load_spectrum, parse_formats, save_grid, save_joint_spectrum, save_spectrum, RunConfig,
};
use etpa::parallel::with_workers;
use etpa::{
    joint_spectrum, tpa_grid, Error, OracleConfig, Provenance, PumpProfile, Result, SignalGrid, SpectralAxes,
    Temperature, TimeQuantity,
};

#[derive(Parser)]
#[command(name = "etpa", version, about = "Entangled two-photon absorption spectroscopy")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated grid formats: csv, bin, pgm, png. CSV is always written.
    #[arg(long, global = true)]
    formats: Option<String>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, env = "ETPA_THREADS", default_value_t = 0)]
    threads: usize,
    /// Delay window applied before the Fourier transform.
    #[arg(long, global = true)]
    window: Option<Window>,
    /// Peak threshold as a fraction of the spectrum maximum.
    #[arg(long, global = true)]
    threshold: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the signal grid P(τ, T).
    Simulate,
    /// Fourier transform each temperature row along the delay.
    Fft,
    /// Detect spectral peaks in every row.
    Peaks,
    /// Track lines across temperature and recover the intermediate levels.
    Reconstruct,
    /// Sample the joint spectral intensity of a pulsed source.
    Jsa {
        /// Pump pulse duration in ps; defaults to the configured pulsed pump.
        #[arg(long)]
        pulse_duration: Option<f64>,
        /// Crystal temperature in °C; defaults to the degeneracy temperature.
        #[arg(long)]
        temperature: Option<f64>,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Signal and idler central wavelengths across the tuning domain.
    TuningCurve {
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Cross-check the closed form against the brute-force oracle and the
    /// expanded form.
    Verify,
}

/// A stage outcome that is not a hard error but must set the exit status.
enum Outcome {
    Done,
    Failed(String),
}

struct Run {
    cfg: RunConfig,
    out: PathBuf,
}

impl Run {
    fn new(common: &Common) -> Result<Self> {
        let path = common.config.as_deref().ok_or_else(|| Error::Config {
            key: "--config".into(),
            message: "a configuration file is required".into(),
        })?;
        let mut cfg = load_config(path)?;
        if let Some(list) = &common.formats {
            cfg.output.formats = parse_formats(list)?;
        }
        if let Some(w) = common.window {
            cfg.analysis.window = w;
        }
        if let Some(t) = common.threshold {
            cfg.analysis.threshold = t;
        }
        cfg.analysis.validate()?;
        let out = common.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
        Ok(Self { cfg, out })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn provenance(&self) -> Provenance {
        Provenance::new(&self.cfg.source, &self.cfg.levels)
    }

    fn write_run_record(&self) -> Result<()> {
        let record = serde_json::json!({
            "config_digest": self.cfg.digest,
            "config": self.cfg.resolved,
        });
        write_json(&self.path("run.json"), &record)
    }

    fn compute_signal(&self) -> Result<SignalGrid> {
        let start = Instant::now();
        let grid = tpa_grid(
            &self.cfg.levels,
            &self.cfg.source,
            &self.cfg.grid,
            &self.cfg.normalization,
        )?;
        log::info!("signal grid {}×{} in {:.2?}", grid.rows(), grid.cols(), start.elapsed());
        Ok(grid)
    }

    /// The signal grid on disk if it was produced from this configuration.
    fn signal(&self) -> Result<SignalGrid> {
        let base = self.path("signal");
        if base.with_extension("csv").exists() {
            match load_grid(&base) {
                Ok(g) if self.signal_matches(&g) => {
                    log::info!("reusing {}", base.display());
                    return Ok(g);
                }
                Ok(_) => log::info!("{} is stale; recomputing", base.display()),
                Err(e) => log::warn!("ignoring unreadable {}: {e}", base.display()),
            }
        }
        self.compute_signal()
    }

    fn signal_matches(&self, g: &SignalGrid) -> bool {
        g.provenance.as_ref().map(|p| &p.digest) == Some(&self.provenance().digest)
            && g.tau_axis == self.cfg.grid.tau
            && g.temp_axis == self.cfg.grid.temperature
            && g.normalization.mode == self.cfg.normalization.mode
    }

    fn spectrum(&self) -> Result<SpectrumMap> {
        let base = self.path("spectrum");
        if base.with_extension("csv").exists() {
            if let Ok(map) = load_spectrum(&base) {
                let meta_digest = etpa::io::gridfile::meta_digest(&base);
                if map.window == self.cfg.analysis.window && meta_digest.as_deref() == Some(self.cfg.digest.as_str()) {
                    log::info!("reusing {}", base.display());
                    return Ok(map);
                }
            }
        }
        delay_spectrum(&self.signal()?, self.cfg.analysis.window)
    }

    fn peaks(&self) -> Result<PeakTable> {
        detect_peaks(&self.spectrum()?, self.cfg.analysis.threshold)
    }
}

fn simulate(run: &Run) -> Result<Outcome> {
    let grid = run.compute_signal()?;
    for p in save_grid(&grid, &run.path("signal"), &run.cfg.output.formats)? {
        log::info!("wrote {}", p.display());
    }
    run.write_run_record()?;
    Ok(Outcome::Done)
}

fn fft(run: &Run) -> Result<Outcome> {
    let map = delay_spectrum(&run.signal()?, run.cfg.analysis.window)?;
    for p in save_spectrum(
        &map,
        &run.path("spectrum"),
        &run.cfg.output.formats,
        Some(&run.cfg.digest),
    )? {
        log::info!("wrote {}", p.display());
    }
    run.write_run_record()?;
    Ok(Outcome::Done)
}

fn peaks(run: &Run) -> Result<Outcome> {
    let table = run.peaks()?;
    let text = peaks_text(&table);
    write_text(&run.path("peaks.txt"), &text)?;
    write_json(&run.path("peaks.json"), &table)?;
    print!("{text}");
    Ok(Outcome::Done)
}

fn reconstruct(run: &Run) -> Result<Outcome> {
    let table = run.peaks()?;
    let lines = track_lines(&table, run.cfg.source.tuning(), &run.cfg.analysis)?;
    let levels = reconstruct_levels(&lines, run.cfg.source.omega0(), &run.cfg.analysis)?;
    let report = AnalysisReport::new(Some(&run.cfg.digest), &lines, Some(levels));
    let text = report.text();
    write_text(&run.path("report.txt"), &text)?;
    write_json(&run.path("report.json"), &report)?;
    print!("{text}");
    Ok(Outcome::Done)
}

fn jsa(run: &Run, pulse: Option<f64>, temperature: Option<f64>, samples: usize) -> Result<Outcome> {
    let duration = match (pulse, run.cfg.source.pump().duration()) {
        (Some(tp), _) => TimeQuantity(tp),
        (None, Some(tp)) => tp,
        (None, None) => {
            return Err(Error::Config {
                key: "--pulse-duration".into(),
                message: "the configured pump is continuous-wave; give a pulse duration".into(),
            })
        }
    };
    let source = run.cfg.source.with_pump(PumpProfile::Pulsed { duration })?;
    let t = temperature
        .map(Temperature)
        .unwrap_or(source.tuning().reference_temperature());
    let axes = SpectralAxes::display(
        source.central_frequencies(t)?,
        source.entanglement_time(),
        duration,
        samples,
    )?;
    let js = joint_spectrum(&source, t, axes)?;
    let name = format!("jsa_tp{}_T{}", duration.0, t.0);
    for p in save_joint_spectrum(&js, &run.path(&name), &run.cfg.output.formats, Some(&run.cfg.digest))? {
        log::info!("wrote {}", p.display());
    }
    Ok(Outcome::Done)
}

fn tuning_curve(run: &Run, points: usize) -> Result<Outcome> {
    let tuning = run.cfg.source.tuning();
    let curve = tuning.tuning_curve(run.cfg.source.omega0(), tuning.domain(), points)?;
    let path = run.path("tuning_curve.csv");
    write_tuning_curve(&path, &curve)?;
    log::info!("wrote {}", path.display());
    Ok(Outcome::Done)
}

fn verify(run: &Run) -> Result<Outcome> {
    let (temps, taus) = probe_set(&run.cfg.grid)?;
    let start = Instant::now();
    let oracle = oracle_comparison(
        &run.cfg.levels,
        &run.cfg.source,
        &temps,
        &taus,
        &OracleConfig::default_for(&run.cfg.source),
    )?;
    log::info!("oracle probes in {:.2?}", start.elapsed());
    let expanded = expanded_comparison(&run.cfg.levels, &run.cfg.source, &temps, &taus)?;
    let checks = [oracle, expanded];
    let text = verification_text(&checks);
    write_text(&run.path("verify.txt"), &text)?;
    write_json(&run.path("verify.json"), &checks)?;
    print!("{text}");
    Ok(match checks.iter().find(|c| !c.passed) {
        Some(c) => Outcome::Failed(format!("{} exceeded tolerance", c.name)),
        None => Outcome::Done,
    })
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let run = Run::new(&cli.common)?;
    with_workers(cli.common.threads, || match &cli.command {
        Command::Simulate => simulate(&run),
        Command::Fft => fft(&run),
        Command::Peaks => peaks(&run),
        Command::Reconstruct => reconstruct(&run),
        Command::Jsa {
            pulse_duration,
            temperature,
            samples,
        } => jsa(&run, *pulse_duration, *temperature, *samples),
        Command::TuningCurve { points } => tuning_curve(&run, *points),
        Command::Verify => verify(&run),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
