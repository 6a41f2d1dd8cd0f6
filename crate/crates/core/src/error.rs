use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of a physical conversion.
    #[error("domain error: {0}")]
    Domain(String),

    /// A temperature falls outside a tabulated tuning curve.
    #[error("temperature {temperature} °C outside tabulated range [{min}, {max}] °C")]
    OutOfRange { temperature: f64, min: f64, max: f64 },

    #[error(
        "two-photon resonance violated: final level {final_energy} rad/ps differs from \
         photon-pair energy {pair_energy} rad/ps"
    )]
    Resonance { final_energy: f64, pair_energy: f64 },

    #[error("signal and idler group indices are equal ({0} ps/mm); entanglement time undefined")]
    DegenerateGroupVelocity(f64),

    #[error("invalid level system: {0}")]
    LevelSystem(String),

    #[error("invalid tuning model: {0}")]
    Tuning(String),

    #[error("invalid source configuration: {0}")]
    Source(String),

    #[error("invalid configuration `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("axis error: {0}")]
    Axis(String),

    /// Oracle sampling window too small for the requested tolerance.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A computed quantity came out non-finite or violated an internal identity.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("file format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures of numerical consistency rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Consistency(_) | Error::Resolution(_))
    }
}
