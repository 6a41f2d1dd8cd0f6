//! Unit conventions, physical constants and the domain types shared by every
//! other module.
//!
//! Energies are expressed as angular frequencies (ħ = 1) in rad/ps, times in
//! ps, wavelengths in nm and temperatures in °C.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in nm/ps.
pub const SPEED_OF_LIGHT_NM_PER_PS: f64 = 299_792.458;

macro_rules! scalar_newtype {
    ($(#[$meta:meta])* $name:ident, $unit:literal) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub f64);

        impl $name {
            #[inline]
            pub const fn value(self) -> f64 {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{} {}", self.0, $unit)
            }
        }
    };
}

scalar_newtype!(
    /// Angular frequency in rad/ps. Also used for energies.
    AngularFrequency,
    "rad/ps"
);
scalar_newtype!(
    /// Vacuum wavelength in nm.
    Wavelength,
    "nm"
);
scalar_newtype!(
    /// Time or delay in ps.
    TimeQuantity,
    "ps"
);
scalar_newtype!(
    /// Crystal temperature in °C.
    Temperature,
    "°C"
);

/// Converts a vacuum wavelength to an angular frequency, 2πc/λ.
pub fn wavelength_to_omega(lambda: Wavelength) -> Result<AngularFrequency> {
    if !(lambda.0 > 0.0) || !lambda.0.is_finite() {
        return Err(Error::Domain(format!(
            "wavelength must be positive and finite, got {} nm",
            lambda.0
        )));
    }
    Ok(AngularFrequency(2.0 * PI * SPEED_OF_LIGHT_NM_PER_PS / lambda.0))
}

/// Inverse of [`wavelength_to_omega`].
pub fn omega_to_wavelength(omega: AngularFrequency) -> Result<Wavelength> {
    if !(omega.0 > 0.0) || !omega.0.is_finite() {
        return Err(Error::Domain(format!(
            "angular frequency must be positive and finite, got {} rad/ps",
            omega.0
        )));
    }
    Ok(Wavelength(2.0 * PI * SPEED_OF_LIGHT_NM_PER_PS / omega.0))
}

/// One intermediate state |j⟩ with its energy ε_j and dipole product
/// D_j = ⟨f|d|j⟩⟨j|d|g⟩.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntermediateLevel {
    pub energy: AngularFrequency,
    pub dipole: Complex64,
}

impl IntermediateLevel {
    pub fn new(energy: AngularFrequency) -> Self {
        Self {
            energy,
            dipole: Complex64::new(1.0, 0.0),
        }
    }

    pub fn with_dipole(mut self, dipole: Complex64) -> Self {
        self.dipole = dipole;
        self
    }
}

/// Ground, intermediate and final levels of the model absorber. The ground
/// energy is fixed at zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSystem {
    intermediates: Vec<IntermediateLevel>,
    final_energy: AngularFrequency,
}

impl LevelSystem {
    pub fn new(intermediates: Vec<IntermediateLevel>, final_energy: AngularFrequency) -> Result<Self> {
        if intermediates.is_empty() {
            return Err(Error::LevelSystem("at least one intermediate level is required".into()));
        }
        if !final_energy.0.is_finite() {
            return Err(Error::LevelSystem(format!(
                "final energy {} is not finite",
                final_energy
            )));
        }
        for (i, level) in intermediates.iter().enumerate() {
            if !level.energy.0.is_finite() || !level.dipole.re.is_finite() || !level.dipole.im.is_finite() {
                return Err(Error::LevelSystem(format!("intermediate level {i} is not finite")));
            }
            if intermediates[..i].iter().any(|other| other.energy.0 == level.energy.0) {
                return Err(Error::LevelSystem(format!(
                    "duplicate intermediate energy {}",
                    level.energy
                )));
            }
            if !(level.energy.0 > 0.0 && level.energy.0 < final_energy.0) {
                log::warn!(
                    "intermediate level {} lies outside (0, ε_f = {}); outside the intended regime",
                    level.energy,
                    final_energy
                );
            }
        }
        Ok(Self {
            intermediates,
            final_energy,
        })
    }

    /// Builds a level system from intermediate and final wavelengths, with
    /// unit dipole products.
    pub fn from_wavelengths(intermediates: &[Wavelength], final_level: Wavelength) -> Result<Self> {
        let levels = intermediates
            .iter()
            .map(|&l| wavelength_to_omega(l).map(IntermediateLevel::new))
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels, wavelength_to_omega(final_level)?)
    }

    pub fn ground_energy(&self) -> AngularFrequency {
        AngularFrequency(0.0)
    }

    pub fn intermediates(&self) -> &[IntermediateLevel] {
        &self.intermediates
    }

    pub fn final_energy(&self) -> AngularFrequency {
        self.final_energy
    }

    /// Returns a copy with every dipole product multiplied by `factor`.
    pub fn scaled_dipoles(&self, factor: Complex64) -> Self {
        Self {
            intermediates: self
                .intermediates
                .iter()
                .map(|l| l.with_dipole(l.dipole * factor))
                .collect(),
            final_energy: self.final_energy,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    /// Rescale so the grid maximum is 1.
    #[default]
    GridMax,
    /// Keep the ω_i⁰ω_s⁰/T_e prefactor only.
    PrefactorOnly,
    /// Prefactor divided by 4πħ²ε₀²c²A².
    RawWithConstants,
}

/// Physical constants used only by [`NormalizationMode::RawWithConstants`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub epsilon0: f64,
    pub c: f64,
    pub area: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        // SI values, 1 µm² effective area.
        Self {
            hbar: 1.054_571_817e-34,
            epsilon0: 8.854_187_812_8e-12,
            c: 299_792_458.0,
            area: 1.0e-12,
        }
    }
}

impl PhysicalConstants {
    pub fn field_factor(&self) -> f64 {
        1.0 / (4.0 * PI * (self.hbar * self.epsilon0 * self.c * self.area).powi(2))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalNormalization {
    pub mode: NormalizationMode,
    #[serde(default)]
    pub constants: PhysicalConstants,
}

impl SignalNormalization {
    pub fn new(mode: NormalizationMode) -> Self {
        Self {
            mode,
            constants: PhysicalConstants::default(),
        }
    }
}

/// Uniformly sampled axis with inclusive end points.
///
/// Samples are computed as `(start·(n−1−k) + end·k)/(n−1)` so that an axis
/// with `end == -start` is exactly antisymmetric about its midpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformAxis {
    pub start: f64,
    pub end: f64,
    pub len: usize,
}

impl UniformAxis {
    pub fn new(start: f64, end: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::Axis(format!("axis needs at least 2 samples, got {len}")));
        }
        if !start.is_finite() || !end.is_finite() || !(end > start) {
            return Err(Error::Axis(format!("axis bounds [{start}, {end}] are not increasing")));
        }
        Ok(Self { start, end, len })
    }

    /// Axis of `len` samples centred on zero with spacing `step`.
    pub fn centered(step: f64, len: usize) -> Result<Self> {
        let half = step * (len as f64 - 1.0) / 2.0;
        Self::new(-half, half, len)
    }

    #[inline]
    pub fn value(&self, k: usize) -> f64 {
        let n1 = (self.len - 1) as f64;
        (self.start * (n1 - k as f64) + self.end * k as f64) / n1
    }

    #[inline]
    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.len - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.value(k)).collect()
    }

    /// Index of the sample nearest to `x`, clamped to the axis.
    pub fn nearest_index(&self, x: f64) -> usize {
        let k = ((x - self.start) / self.step()).round();
        k.clamp(0.0, (self.len - 1) as f64) as usize
    }

    /// Rebuilds an axis from explicit samples, checking uniform spacing to a
    /// relative tolerance of the step.
    pub fn from_samples(samples: &[f64], rel_tol: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Axis("need at least two samples".into()));
        }
        let axis = Self::new(samples[0], samples[samples.len() - 1], samples.len())?;
        let step = axis.step();
        for (k, &x) in samples.iter().enumerate() {
            if (x - axis.value(k)).abs() > rel_tol * step {
                return Err(Error::Axis(format!(
                    "sample {k} = {x} deviates from uniform spacing {step}"
                )));
            }
        }
        Ok(axis)
    }
}
