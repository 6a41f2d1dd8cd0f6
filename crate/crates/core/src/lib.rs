//! Entangled two-photon absorption spectroscopy with a temperature-tuned
//! photon-pair source.
//!
//! The signal P(τ, T) is simulated over delay τ and crystal temperature T,
//! Fourier transformed along τ, and the resulting lines are tracked and
//! fitted to recover the intermediate level energies.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod crosscheck;
pub mod error;
pub mod io;
pub mod oracle;
pub mod parallel;
pub mod source;
pub mod tpa;
pub mod tuning;
pub mod units;

pub use error::{Error, Result};
pub use oracle::{brute_force_tpa, integrate_joint_spectrum, temporal_wavefunction, OracleConfig, TemporalAmplitude};
pub use source::{
    correlation_regime, entanglement_time, joint_spectrum, CorrelationRegime, JointSpectrum, PumpProfile, SourceConfig,
    SpectralAxes,
};
pub use tpa::{
    kernel, pulsed_probability, tpa_amplitude, tpa_grid, tpa_probability, tpa_probability_expanded,
    tpa_probability_pulsed, GridSpec, NormalizationRecord, Provenance, SignalGrid,
};
pub use tuning::{CentralFrequencies, TuningKind, TuningModel, TuningPoint};
pub use units::{
    omega_to_wavelength, wavelength_to_omega, AngularFrequency, IntermediateLevel, LevelSystem, NormalizationMode,
    PhysicalConstants, SignalNormalization, Temperature, TimeQuantity, UniformAxis, Wavelength,
};
