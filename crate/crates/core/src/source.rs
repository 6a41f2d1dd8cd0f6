//! The entangled photon-pair source: entanglement time, pump profile, joint
//! spectrum and frequency-correlation regime.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tuning::{CentralFrequencies, TuningModel};
use crate::units::{wavelength_to_omega, AngularFrequency, Temperature, TimeQuantity, UniformAxis, Wavelength};

/// sin(z)/z with sinc(0) = 1.
#[inline]
pub(crate) fn sinc(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.sin() / z
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PumpProfile {
    ContinuousWave,
    /// Gaussian pump pulse of duration T_p.
    Pulsed {
        duration: TimeQuantity,
    },
}

impl PumpProfile {
    pub fn duration(&self) -> Option<TimeQuantity> {
        match self {
            PumpProfile::ContinuousWave => None,
            PumpProfile::Pulsed { duration } => Some(*duration),
        }
    }
}

/// Entanglement time T_e = (N_s − N_i)·L/4 from inverse group velocities
/// (ps/mm) and crystal length (mm).
///
/// A negative difference is interpreted as swapped labels and the magnitude
/// is returned with a warning.
pub fn entanglement_time(n_s: f64, n_i: f64, length_mm: f64) -> Result<TimeQuantity> {
    if !(length_mm > 0.0) || !length_mm.is_finite() {
        return Err(Error::Source(format!(
            "crystal length must be positive, got {length_mm} mm"
        )));
    }
    if !n_s.is_finite() || !n_i.is_finite() {
        return Err(Error::Source("inverse group velocities must be finite".into()));
    }
    if n_s == n_i {
        return Err(Error::DegenerateGroupVelocity(n_s));
    }
    let te = (n_s - n_i) * length_mm / 4.0;
    if te < 0.0 {
        log::warn!("N_s < N_i; swapping signal and idler labels so that T_e > 0");
    }
    Ok(TimeQuantity(te.abs()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SourceConfig {
    pump_wavelength: Wavelength,
    entanglement_time: TimeQuantity,
    pump: PumpProfile,
    tuning: TuningModel,
}

impl SourceConfig {
    pub fn new(
        pump_wavelength: Wavelength,
        entanglement_time: TimeQuantity,
        pump: PumpProfile,
        tuning: TuningModel,
    ) -> Result<Self> {
        wavelength_to_omega(pump_wavelength)?;
        if !(entanglement_time.0 > 0.0) || !entanglement_time.0.is_finite() {
            return Err(Error::Source(format!(
                "entanglement time must be positive, got {}",
                entanglement_time
            )));
        }
        if let PumpProfile::Pulsed { duration } = pump {
            if !(duration.0 > 0.0) || !duration.0.is_finite() {
                return Err(Error::Source(format!("pump duration must be positive, got {duration}")));
            }
        }
        Ok(Self {
            pump_wavelength,
            entanglement_time,
            pump,
            tuning,
        })
    }

    pub fn from_group_indices(
        pump_wavelength: Wavelength,
        n_s: f64,
        n_i: f64,
        length_mm: f64,
        pump: PumpProfile,
        tuning: TuningModel,
    ) -> Result<Self> {
        Self::new(pump_wavelength, entanglement_time(n_s, n_i, length_mm)?, pump, tuning)
    }

    pub fn with_pump(&self, pump: PumpProfile) -> Result<Self> {
        Self::new(self.pump_wavelength, self.entanglement_time, pump, self.tuning.clone())
    }

    pub fn pump_wavelength(&self) -> Wavelength {
        self.pump_wavelength
    }

    pub fn omega_p(&self) -> AngularFrequency {
        wavelength_to_omega(self.pump_wavelength).expect("validated on construction")
    }

    /// Degenerate frequency ω₀ = ω_p/2.
    pub fn omega0(&self) -> AngularFrequency {
        AngularFrequency(self.omega_p().0 / 2.0)
    }

    pub fn entanglement_time(&self) -> TimeQuantity {
        self.entanglement_time
    }

    pub fn pump(&self) -> PumpProfile {
        self.pump
    }

    pub fn tuning(&self) -> &TuningModel {
        &self.tuning
    }

    pub fn central_frequencies(&self, t: Temperature) -> Result<CentralFrequencies> {
        self.tuning.central_frequencies(self.omega0(), t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationRegime {
    AntiCorrelated,
    QuasiUncorrelated,
    Correlated,
}

/// Classifies the frequency correlation of the pair: anti-correlated for
/// T_p > 2T_e, correlated for T_p < T_e/4, quasi-uncorrelated in between.
/// A continuous-wave pump is anti-correlated.
pub fn correlation_regime(pump: PumpProfile, te: TimeQuantity) -> CorrelationRegime {
    match pump.duration() {
        None => CorrelationRegime::AntiCorrelated,
        Some(tp) if tp.0 > 2.0 * te.0 => CorrelationRegime::AntiCorrelated,
        Some(tp) if tp.0 < te.0 / 4.0 => CorrelationRegime::Correlated,
        Some(_) => CorrelationRegime::QuasiUncorrelated,
    }
}

/// Sampling axes of a joint spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectralAxes {
    /// Rows sample ω_s, columns sample ω_i (absolute, rad/ps).
    SignalIdler { signal: UniformAxis, idler: UniformAxis },
    /// Rows sample the pump mismatch Ω = ω_s + ω_i − ω_p, columns sample
    /// ν = ω_i − ω_s. The area element is dω_s dω_i = dΩ dν / 2.
    SumDifference { sum: UniformAxis, difference: UniformAxis },
}

impl SpectralAxes {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            SpectralAxes::SignalIdler { signal, idler } => (signal.len, idler.len),
            SpectralAxes::SumDifference { sum, difference } => (sum.len, difference.len),
        }
    }

    /// |∂(ω_s, ω_i)/∂(row, col variables)|.
    pub fn jacobian(&self) -> f64 {
        match self {
            SpectralAxes::SignalIdler { .. } => 1.0,
            SpectralAxes::SumDifference { .. } => 0.5,
        }
    }

    /// Signal/idler grid centred on the central frequencies, wide enough to
    /// show the ridge: half-width 3/T_e + 3/T_p on each axis.
    pub fn display(cf: CentralFrequencies, te: TimeQuantity, tp: TimeQuantity, n: usize) -> Result<Self> {
        let half = 3.0 / te.0 + 3.0 / tp.0;
        Ok(SpectralAxes::SignalIdler {
            signal: UniformAxis::new(cf.signal.0 - half, cf.signal.0 + half, n)?,
            idler: UniformAxis::new(cf.idler.0 - half, cf.idler.0 + half, n)?,
        })
    }

    /// Sum/difference grid for quadrature: the Gaussian is sampled over ±5/T_p
    /// at spacing 1/(2T_p); the sinc² over μ ± `tail`/T_e at spacing 1/T_e,
    /// below the π/T_e limit where the trapezoid rule is exact for sinc².
    /// The truncated sinc² tail carries a fraction ≈ 1/(π·tail) of the mass.
    pub fn quadrature(mu: AngularFrequency, te: TimeQuantity, tp: TimeQuantity, tail: f64) -> Result<Self> {
        let n_sum = 21;
        let n_diff = 2 * tail.ceil() as usize + 1;
        let half_diff = (n_diff - 1) as f64 / 2.0 / te.0;
        Ok(SpectralAxes::SumDifference {
            sum: UniformAxis::new(-5.0 / tp.0, 5.0 / tp.0, n_sum)?,
            difference: UniformAxis::new(mu.0 - half_diff, mu.0 + half_diff, n_diff)?,
        })
    }
}

/// Sampled joint spectral intensity S(ω_s, ω_i) of a pulsed source.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointSpectrum {
    pub axes: SpectralAxes,
    pub temperature: Temperature,
    /// Row-major, `rows × cols` as given by [`SpectralAxes::shape`].
    pub values: Vec<f64>,
}

impl JointSpectrum {
    pub fn rows(&self) -> usize {
        self.axes.shape().0
    }

    pub fn cols(&self) -> usize {
        self.axes.shape().1
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols() + col]
    }
}

/// S(Ω, ν) = T_pT_e/(2π√π) · exp(−2T_p²Ω²) · sinc²(T_e(ν − μ)).
#[inline]
fn density(tp: f64, te: f64, mu: f64, pump_mismatch: f64, nu: f64) -> f64 {
    let norm = tp * te / (2.0 * PI * PI.sqrt());
    let s = sinc(te * (nu - mu));
    norm * (-2.0 * tp * tp * pump_mismatch * pump_mismatch).exp() * s * s
}

/// Evaluates the joint spectrum of a pulsed source at temperature `t` on
/// `axes`.
pub fn joint_spectrum(config: &SourceConfig, t: Temperature, axes: SpectralAxes) -> Result<JointSpectrum> {
    let tp = match config.pump() {
        PumpProfile::Pulsed { duration } => duration.0,
        PumpProfile::ContinuousWave => {
            return Err(Error::Source(
                "a continuous-wave joint spectrum is the singular anti-diagonal δ(ω_p − ω_s − ω_i); \
                 use the analytic closed forms instead of sampling it"
                    .into(),
            ))
        }
    };
    let te = config.entanglement_time().0;
    let cf = config.central_frequencies(t)?;
    let mu = cf.nondegeneracy().0;
    let wp = config.omega_p().0;

    let values = match axes {
        SpectralAxes::SignalIdler { signal, idler } => {
            let need = 2.5 / te + 2.5 / tp;
            for (axis, centre, name) in [(signal, cf.signal.0, "signal"), (idler, cf.idler.0, "idler")] {
                if axis.start > centre - need || axis.end < centre + need {
                    return Err(Error::Axis(format!(
                        "{name} axis [{}, {}] does not cover {centre} ± {need} rad/ps",
                        axis.start, axis.end
                    )));
                }
            }
            let mut v = Vec::with_capacity(signal.len * idler.len);
            for r in 0..signal.len {
                let ws = signal.value(r);
                for c in 0..idler.len {
                    let wi = idler.value(c);
                    v.push(density(tp, te, mu, wp - ws - wi, wi - ws));
                }
            }
            v
        }
        SpectralAxes::SumDifference { sum, difference } => {
            if sum.start > -5.0 / tp || sum.end < 5.0 / tp {
                return Err(Error::Axis(format!("sum axis does not cover ±5/T_p = ±{}", 5.0 / tp)));
            }
            if difference.start > mu - 5.0 / te || difference.end < mu + 5.0 / te {
                return Err(Error::Axis(format!(
                    "difference axis does not cover μ ± 5/T_e = {mu} ± {}",
                    5.0 / te
                )));
            }
            let sinc2: Vec<f64> = (0..difference.len)
                .map(|c| density(tp, te, mu, 0.0, difference.value(c)) / density(tp, te, mu, 0.0, mu))
                .collect();
            let mut v = Vec::with_capacity(sum.len * difference.len);
            for r in 0..sum.len {
                let row_peak = density(tp, te, mu, sum.value(r), mu);
                v.extend(sinc2.iter().map(|s| row_peak * s));
            }
            v
        }
    };
    Ok(JointSpectrum {
        axes,
        temperature: t,
        values,
    })
}
