//! JSON run configuration.
//!
//! ```json
//! {
//!   "version": 1,
//!   "levels": { "intermediate_wavelengths_nm": [563, 612] },
//!   "source": { "pump_wavelength_nm": 405, "entanglement_time_ps": 0.87 },
//!   "tuning": { "kind": "linear", "slope": 2.0, "reference": 25.0 }
//! }
//! ```
//!
//! Every section other than `levels` and `source` may be omitted; defaults
//! are filled in and echoed through [`RunConfig::resolved`].

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::AnalysisParams;
use crate::error::{Error, Result};
use crate::source::{PumpProfile, SourceConfig};
use crate::tpa::{GridSpec, RESONANCE_TOLERANCE};
use crate::tuning::{TuningModel, DEFAULT_REFERENCE_TEMPERATURE, DEFAULT_SLOPE};
use crate::units::{
    wavelength_to_omega, AngularFrequency, IntermediateLevel, LevelSystem, NormalizationMode, SignalNormalization,
    Temperature, TimeQuantity, UniformAxis, Wavelength,
};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Bin,
    Pgm,
    Png,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "bin" => Ok(Self::Bin),
            "pgm" => Ok(Self::Pgm),
            "png" => Ok(Self::Png),
            other => Err(Error::config(
                "formats",
                format!("unknown format `{other}` (csv, bin, pgm, png)"),
            )),
        }
    }
}

/// Parses a comma-separated format list; CSV is always included.
pub fn parse_formats(list: &str) -> Result<Vec<OutputFormat>> {
    let mut formats = vec![OutputFormat::Csv];
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let f: OutputFormat = part.parse()?;
        if !formats.contains(&f) {
            formats.push(f);
        }
    }
    Ok(formats)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: u32,
    levels: RawLevels,
    source: RawSource,
    #[serde(default)]
    tuning: Option<RawTuning>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    analysis: AnalysisParams,
    #[serde(default)]
    normalization: NormalizationMode,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevels {
    #[serde(default)]
    intermediate_wavelengths_nm: Option<Vec<f64>>,
    /// Absolute energies in rad/ps.
    #[serde(default)]
    intermediate_energies: Option<Vec<f64>>,
    /// (re, im) per level; all 1 when omitted.
    #[serde(default)]
    dipoles: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    final_wavelength_nm: Option<f64>,
    #[serde(default)]
    final_energy: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    pump_wavelength_nm: f64,
    #[serde(default)]
    entanglement_time_ps: Option<f64>,
    #[serde(default)]
    group_delays: Option<RawGroupDelays>,
    #[serde(default)]
    pump: Option<RawPump>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroupDelays {
    signal_ps_per_mm: f64,
    idler_ps_per_mm: f64,
    length_mm: f64,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawPump {
    ContinuousWave,
    Pulsed { duration_ps: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawTuning {
    Linear {
        #[serde(default = "default_slope")]
        slope: f64,
        #[serde(default = "default_reference")]
        reference: f64,
        #[serde(default)]
        domain: Option<[f64; 2]>,
    },
    Polynomial {
        coefficients: Vec<f64>,
        #[serde(default = "default_reference")]
        reference: f64,
        #[serde(default)]
        domain: Option<[f64; 2]>,
    },
    Tabulated {
        #[serde(default)]
        points: Option<Vec<[f64; 2]>>,
        /// Two-column CSV, relative to the configuration file.
        #[serde(default)]
        csv: Option<PathBuf>,
    },
}

fn default_slope() -> f64 {
    DEFAULT_SLOPE
}

fn default_reference() -> f64 {
    DEFAULT_REFERENCE_TEMPERATURE
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(default)]
    tau: Option<RawAxis>,
    #[serde(default)]
    temperature: Option<RawAxis>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    min: f64,
    max: f64,
    samples: usize,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    directory: Option<PathBuf>,
    #[serde(default)]
    formats: Option<Vec<OutputFormat>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

/// A validated, resonant configuration with every default resolved.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub levels: LevelSystem,
    pub source: SourceConfig,
    pub grid: GridSpec,
    pub analysis: AnalysisParams,
    pub normalization: SignalNormalization,
    pub output: OutputConfig,
    /// The configuration as used, defaults included, without `output`.
    pub resolved: serde_json::Value,
    /// SHA-256 of `resolved`.
    pub digest: String,
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Parses and validates a configuration document; relative paths resolve
/// against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
    if raw.version != CONFIG_VERSION {
        return Err(Error::config(
            "version",
            format!("unsupported version {} (expected {CONFIG_VERSION})", raw.version),
        ));
    }

    let tuning = build_tuning(raw.tuning, base)?;
    let source = build_source(&raw.source, tuning)?;
    let levels = build_levels(&raw.levels, source.omega_p())?;
    let grid = build_grid(&raw.grid, &source)?;
    raw.analysis.validate()?;

    let output = OutputConfig {
        directory: raw.output.directory.unwrap_or_else(|| PathBuf::from("out")),
        formats: {
            let mut f = raw.output.formats.unwrap_or_default();
            if !f.contains(&OutputFormat::Csv) {
                f.insert(0, OutputFormat::Csv);
            }
            f
        },
    };
    let normalization = SignalNormalization::new(raw.normalization);

    let resolved = serde_json::json!({
        "version": CONFIG_VERSION,
        "levels": levels,
        "source": source,
        "grid": grid,
        "analysis": raw.analysis,
        "normalization": normalization,
    });
    let digest = hex_digest(resolved.to_string().as_bytes());
    Ok(RunConfig {
        levels,
        source,
        grid,
        analysis: raw.analysis,
        normalization,
        output,
        resolved,
        digest,
    })
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn build_tuning(raw: Option<RawTuning>, base: &Path) -> Result<TuningModel> {
    let key = |e: Error| match e {
        Error::Tuning(m) => Error::config("tuning", m),
        other => other,
    };
    let with_domain = |model: TuningModel, domain: Option<[f64; 2]>| match domain {
        Some([lo, hi]) => model.with_domain(Temperature(lo), Temperature(hi)),
        None => Ok(model),
    };
    match raw {
        None => Ok(TuningModel::default()),
        Some(RawTuning::Linear {
            slope,
            reference,
            domain,
        }) => with_domain(TuningModel::linear(slope, Temperature(reference))?, domain).map_err(key),
        Some(RawTuning::Polynomial {
            coefficients,
            reference,
            domain,
        }) => with_domain(TuningModel::polynomial(coefficients, Temperature(reference))?, domain).map_err(key),
        Some(RawTuning::Tabulated { points, csv }) => match (points, csv) {
            (Some(points), None) => {
                TuningModel::tabulated(points.into_iter().map(|[t, d]| (t, d)).collect()).map_err(|e| match e {
                    Error::Tuning(m) => Error::config("tuning.points", m),
                    other => other,
                })
            }
            (None, Some(csv)) => {
                let path = if csv.is_absolute() { csv } else { base.join(csv) };
                TuningModel::from_csv(&path).map_err(|e| match e {
                    Error::Tuning(m) => Error::config("tuning.csv", m),
                    other => other,
                })
            }
            _ => Err(Error::config(
                "tuning",
                "a tabulated model needs exactly one of `points` or `csv`",
            )),
        },
    }
}

fn build_source(raw: &RawSource, tuning: TuningModel) -> Result<SourceConfig> {
    let pump = match raw.pump {
        None | Some(RawPump::ContinuousWave) => PumpProfile::ContinuousWave,
        Some(RawPump::Pulsed { duration_ps }) => {
            if !(duration_ps > 0.0) || !duration_ps.is_finite() {
                return Err(Error::config(
                    "source.pump.duration_ps",
                    format!("must be positive, got {duration_ps}"),
                ));
            }
            PumpProfile::Pulsed {
                duration: TimeQuantity(duration_ps),
            }
        }
    };
    if !(raw.pump_wavelength_nm > 0.0) || !raw.pump_wavelength_nm.is_finite() {
        return Err(Error::config(
            "source.pump_wavelength_nm",
            format!("must be positive, got {}", raw.pump_wavelength_nm),
        ));
    }
    let lambda = Wavelength(raw.pump_wavelength_nm);
    match (raw.entanglement_time_ps, &raw.group_delays) {
        (Some(te), None) => {
            if !(te > 0.0) || !te.is_finite() {
                return Err(Error::config(
                    "source.entanglement_time_ps",
                    format!("must be positive, got {te}"),
                ));
            }
            SourceConfig::new(lambda, TimeQuantity(te), pump, tuning)
        }
        (None, Some(g)) => {
            SourceConfig::from_group_indices(lambda, g.signal_ps_per_mm, g.idler_ps_per_mm, g.length_mm, pump, tuning)
                .map_err(|e| match e {
                    Error::Source(m) => Error::config("source.group_delays", m),
                    other => other,
                })
        }
        _ => Err(Error::config(
            "source",
            "exactly one of `entanglement_time_ps` or `group_delays` is required",
        )),
    }
}

fn build_levels(raw: &RawLevels, omega_p: AngularFrequency) -> Result<LevelSystem> {
    let energies: Vec<AngularFrequency> = match (&raw.intermediate_wavelengths_nm, &raw.intermediate_energies) {
        (Some(w), None) => w
            .iter()
            .map(|&l| wavelength_to_omega(Wavelength(l)))
            .collect::<Result<_>>()
            .map_err(|e| Error::config("levels.intermediate_wavelengths_nm", e.to_string()))?,
        (None, Some(e)) => e.iter().map(|&x| AngularFrequency(x)).collect(),
        _ => {
            return Err(Error::config(
                "levels",
                "exactly one of `intermediate_wavelengths_nm` or `intermediate_energies` is required",
            ))
        }
    };
    let dipoles: Vec<Complex64> = match &raw.dipoles {
        None => vec![Complex64::new(1.0, 0.0); energies.len()],
        Some(d) if d.len() == energies.len() => d.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
        Some(d) => {
            return Err(Error::config(
                "levels.dipoles",
                format!("{} dipoles given for {} levels", d.len(), energies.len()),
            ))
        }
    };
    let final_energy = match (raw.final_wavelength_nm, raw.final_energy) {
        (None, None) => omega_p,
        (Some(l), None) => wavelength_to_omega(Wavelength(l))
            .map_err(|e| Error::config("levels.final_wavelength_nm", e.to_string()))?,
        (None, Some(e)) => AngularFrequency(e),
        _ => {
            return Err(Error::config(
                "levels",
                "give at most one of `final_wavelength_nm` or `final_energy`",
            ))
        }
    };
    if (final_energy.0 - omega_p.0).abs() > RESONANCE_TOLERANCE {
        return Err(Error::Resonance {
            final_energy: final_energy.0,
            pair_energy: omega_p.0,
        });
    }
    let intermediates = energies
        .into_iter()
        .zip(dipoles)
        .map(|(e, d)| IntermediateLevel::new(e).with_dipole(d))
        .collect();
    LevelSystem::new(intermediates, final_energy).map_err(|e| match e {
        Error::LevelSystem(m) => Error::config("levels", m),
        other => other,
    })
}

fn build_grid(raw: &RawGrid, source: &SourceConfig) -> Result<GridSpec> {
    let defaults = GridSpec::default_for(source)?;
    let axis = |key: &str, a: &Option<RawAxis>, default: UniformAxis| match a {
        None => Ok(default),
        Some(a) => UniformAxis::new(a.min, a.max, a.samples).map_err(|e| Error::config(key, e.to_string())),
    };
    let tau = axis("grid.tau", &raw.tau, defaults.tau)?;
    let temperature = axis("grid.temperature", &raw.temperature, defaults.temperature)?;
    if tau.len % 2 != 0 || tau.len < crate::analysis::MIN_DELAY_SAMPLES {
        return Err(Error::config(
            "grid.tau.samples",
            format!(
                "must be even and at least {}, got {}",
                crate::analysis::MIN_DELAY_SAMPLES,
                tau.len
            ),
        ));
    }
    let (lo, hi) = source.tuning().domain();
    if temperature.start < lo.0 || temperature.end > hi.0 {
        return Err(Error::config(
            "grid.temperature",
            format!(
                "[{}, {}] °C lies outside the tuning domain [{lo}, {hi}] °C",
                temperature.start, temperature.end
            ),
        ));
    }
    Ok(GridSpec { tau, temperature })
}
