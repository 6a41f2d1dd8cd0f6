//! Brute-force reference evaluators.
//!
//! The TPA probability is computed directly from the time-domain double
//! integral over absorption times t₁ < t₂, using a two-photon temporal
//! amplitude obtained by discrete Fourier transform of the sampled joint
//! spectral amplitude. Nothing here calls into [`crate::tpa`].
//!
//! Times are expressed through the mean time t̄ = (t_s + t_i)/2 and the
//! relative time s = t_i − t_s of the signal and idler photons. Conjugate
//! frequencies are the pump mismatch Ω = ω_s + ω_i − ω_p and the difference
//! ν = ω_i − ω_s, so that ω_s t_s + ω_i t_i = (ω_p + Ω) t̄ + ν s/2 and
//! dω_s dω_i = dΩ dν / 2. The pump carrier e^{−iω_p t̄} is factored out of
//! every temporal amplitude.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::source::{JointSpectrum, PumpProfile, SourceConfig, SpectralAxes};
use crate::units::{AngularFrequency, LevelSystem, Temperature, TimeQuantity, UniformAxis};

/// Pulse duration standing in for a continuous-wave pump, in units of T_e.
pub const CW_PULSE_FACTOR: f64 = 50.0;
/// Largest tolerated fraction of |ψ|² in the outer eighth of either time axis.
pub const EDGE_ENERGY_TOLERANCE: f64 = 1e-6;
/// Largest dense 2-D grid `temporal_wavefunction` will allocate.
pub const MAX_DENSE_POINTS: usize = 1 << 25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Extent of the mean-time axis t̄.
    pub time_window: TimeQuantity,
    pub n_time: usize,
    /// Extent of the sampled ν axis. The relative-time window is
    /// 4π·n_freq/freq_window.
    pub freq_window: AngularFrequency,
    pub n_freq: usize,
}

impl OracleConfig {
    /// 256 mean-time samples over 16 pulse durations; 2²¹ difference
    /// frequencies at 0.5 rad/ps spacing, which leaves under 1e-6 of the
    /// sinc² mass outside the window for T_e ≳ 0.6 ps.
    pub fn default_for(config: &SourceConfig) -> Self {
        let tp = effective_pulse(config);
        let n_freq = 1 << 21;
        Self {
            time_window: TimeQuantity(16.0 * tp),
            n_time: 256,
            freq_window: AngularFrequency(0.5 * n_freq as f64),
            n_freq,
        }
    }

    pub fn validate(&self, te: TimeQuantity) -> Result<()> {
        for (name, n) in [("n_time", self.n_time), ("n_freq", self.n_freq)] {
            if !n.is_power_of_two() || n < 256 {
                return Err(Error::config(name, format!("must be a power of two ≥ 256, got {n}")));
            }
        }
        if !(self.time_window.0 >= 4.0 * te.0) || !self.time_window.0.is_finite() {
            return Err(Error::config(
                "time_window",
                format!("{} ps does not cover 4·T_e = {} ps", self.time_window, 4.0 * te.0),
            ));
        }
        if !(self.freq_window.0 >= 8.0 / te.0) || !self.freq_window.0.is_finite() {
            return Err(Error::config(
                "freq_window",
                format!(
                    "{} rad/ps does not cover 8/T_e = {} rad/ps",
                    self.freq_window,
                    8.0 / te.0
                ),
            ));
        }
        Ok(())
    }

    fn mean_step(&self) -> f64 {
        self.time_window.0 / self.n_time as f64
    }

    fn mismatch_step(&self) -> f64 {
        2.0 * PI / self.time_window.0
    }

    fn difference_step(&self) -> f64 {
        self.freq_window.0 / self.n_freq as f64
    }

    fn relative_step(&self) -> f64 {
        4.0 * PI / self.freq_window.0
    }

    fn mean_axis(&self) -> Result<UniformAxis> {
        centred_axis(self.mean_step(), self.n_time)
    }

    fn relative_axis(&self) -> Result<UniformAxis> {
        centred_axis(self.relative_step(), self.n_freq)
    }

    /// Ω and ν sample axes of the joint amplitude.
    pub fn spectral_axes(&self, mu: AngularFrequency) -> Result<SpectralAxes> {
        let sum = centred_axis(self.mismatch_step(), self.n_time)?;
        let d = centred_axis(self.difference_step(), self.n_freq)?;
        Ok(SpectralAxes::SumDifference {
            sum,
            difference: UniformAxis::new(d.start + mu.0, d.end + mu.0, d.len)?,
        })
    }
}

/// Samples k·step for k = −n/2 … n/2 − 1.
fn centred_axis(step: f64, n: usize) -> Result<UniformAxis> {
    let half = (n / 2) as f64;
    UniformAxis::new(-half * step, (half - 1.0) * step, n)
}

fn effective_pulse(config: &SourceConfig) -> f64 {
    match config.pump() {
        PumpProfile::Pulsed { duration } => duration.0,
        PumpProfile::ContinuousWave => CW_PULSE_FACTOR * config.entanglement_time().0,
    }
}

fn sinc(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.sin() / z
    }
}

/// In-place DFT Σ_k x_k e^{−2πi(k−n/2)(m−n/2)/n} with both indices centred.
fn centred_dft(planner: &mut FftPlanner<f64>, buf: &mut [Complex64]) {
    let fft = planner.plan_fft_forward(buf.len());
    alternate_signs(buf);
    fft.process(buf);
    alternate_signs(buf);
}

fn alternate_signs(buf: &mut [Complex64]) {
    buf.iter_mut().skip(1).step_by(2).for_each(|v| *v = -*v);
}

/// Fraction of Σ|x|² in the outer eighth at each end.
fn edge_fraction(x: &[Complex64]) -> f64 {
    let n = x.len();
    let edge = n / 8;
    let total: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    let outer: f64 = x[..edge].iter().chain(&x[n - edge..]).map(|v| v.norm_sqr()).sum();
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

fn check_edges(what: &str, fraction: f64) -> Result<()> {
    if fraction > EDGE_ENERGY_TOLERANCE {
        return Err(Error::Resolution(format!(
            "{:.3e} of the {what} energy lies at the window edges (limit {EDGE_ENERGY_TOLERANCE:e}); enlarge the window",
            fraction
        )));
    }
    Ok(())
}

struct Setup {
    tp: f64,
    te: f64,
    mu: f64,
    omega_p: f64,
    /// (T_pT_e/(2π√π))^{1/2}, so that |φ|² is the joint spectrum.
    norm: f64,
}

impl Setup {
    fn new(config: &SourceConfig, t: Temperature, tau: TimeQuantity, oc: &OracleConfig) -> Result<Self> {
        let te = config.entanglement_time().0;
        oc.validate(config.entanglement_time())?;
        let reach = 2.0 * (2.0 * te + tau.0.abs());
        let relative_window = oc.relative_step() * oc.n_freq as f64;
        if relative_window < 1.25 * reach {
            return Err(Error::Resolution(format!(
                "relative-time window {relative_window} ps cannot hold the pair support of width {reach} ps"
            )));
        }
        let tp = effective_pulse(config);
        let cf = config.central_frequencies(t)?;
        Ok(Self {
            tp,
            te,
            mu: cf.idler.0 - cf.signal.0,
            omega_p: config.omega_p().0,
            norm: (tp * te / (2.0 * PI * PI.sqrt())).sqrt(),
        })
    }

    /// Joint amplitude φ(Ω, ν) including the delay phase e^{iω_iτ} with the
    /// constant e^{iω_pτ/2} removed.
    fn pump_part(&self, omega: f64, tau: f64) -> Complex64 {
        Complex64::from_polar((-self.tp * self.tp * omega * omega).exp(), 0.5 * omega * tau)
    }

    fn difference_part(&self, nu: f64, tau: f64) -> Complex64 {
        Complex64::from_polar(sinc(self.te * (nu - self.mu)), 0.5 * nu * tau)
    }
}

/// Mean-time factor g(t̄) = (1/2π)·Σ_Ω G(Ω) e^{iΩτ/2} e^{−iΩt̄} dΩ.
fn mean_factor(planner: &mut FftPlanner<f64>, setup: &Setup, tau: f64, oc: &OracleConfig) -> Vec<Complex64> {
    let n = oc.n_time;
    let dw = oc.mismatch_step();
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| setup.pump_part((k as f64 - (n / 2) as f64) * dw, tau))
        .collect();
    centred_dft(planner, &mut buf);
    let scale = dw / (2.0 * PI);
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Relative-time factor χ(s) = Σ_ν sinc(T_e(ν − μ)) e^{iντ/2} e^{−iνs/2} dν/2,
/// with ν sampled symmetrically about μ.
fn relative_factor(planner: &mut FftPlanner<f64>, setup: &Setup, tau: f64, oc: &OracleConfig) -> Vec<Complex64> {
    let n = oc.n_freq;
    let dnu = oc.difference_step();
    let ds = oc.relative_step();
    let half = (n / 2) as f64;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|l| setup.difference_part(setup.mu + (l as f64 - half) * dnu, tau))
        .collect();
    centred_dft(planner, &mut buf);
    for (m, v) in buf.iter_mut().enumerate() {
        let s = (m as f64 - half) * ds;
        *v *= Complex64::from_polar(0.5 * dnu, -0.5 * setup.mu * s);
    }
    buf
}

/// Two-photon temporal amplitude ψ(t̄, s) in the frame rotating at ω_p.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalAmplitude {
    pub mean_axis: UniformAxis,
    pub relative_axis: UniformAxis,
    /// Row-major: rows index t̄, columns index s.
    pub values: Vec<Complex64>,
    /// Ω/ν sampling the amplitude was transformed from.
    pub spectral_axes: SpectralAxes,
}

impl TemporalAmplitude {
    pub fn get(&self, mean: usize, relative: usize) -> Complex64 {
        self.values[mean * self.relative_axis.len + relative]
    }

    /// Σ|ψ|² dt̄ ds, equal to ∬|ψ|² dt₁ dt₂.
    pub fn norm_sqr_integral(&self) -> f64 {
        let cell = self.mean_axis.step() * self.relative_axis.step();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell
    }
}

/// Samples the joint spectral amplitude on the Ω × ν grid of `oc` and
/// transforms it with a dense 2-D DFT.
pub fn temporal_wavefunction(
    config: &SourceConfig,
    t: Temperature,
    tau: TimeQuantity,
    oc: &OracleConfig,
) -> Result<TemporalAmplitude> {
    let setup = Setup::new(config, t, tau, oc)?;
    let (rows, cols) = (oc.n_time, oc.n_freq);
    if rows * cols > MAX_DENSE_POINTS {
        return Err(Error::Resolution(format!(
            "dense {rows}×{cols} transform exceeds {MAX_DENSE_POINTS} points"
        )));
    }
    let (dw, dnu, ds) = (oc.mismatch_step(), oc.difference_step(), oc.relative_step());
    let (hr, hc) = ((rows / 2) as f64, (cols / 2) as f64);

    let mut values = Vec::with_capacity(rows * cols);
    for k in 0..rows {
        let omega = (k as f64 - hr) * dw;
        for l in 0..cols {
            let nu = setup.mu + (l as f64 - hc) * dnu;
            values.push(setup.norm * setup.pump_part(omega, tau.0) * setup.difference_part(nu, tau.0));
        }
    }

    let mut planner = FftPlanner::new();
    for row in values.chunks_mut(cols) {
        centred_dft(&mut planner, row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = values[r * cols + c];
        }
        centred_dft(&mut planner, &mut column);
        for r in 0..rows {
            values[r * cols + c] = column[r];
        }
    }

    let scale = dw * dnu / 2.0 / (2.0 * PI);
    for r in 0..rows {
        for c in 0..cols {
            let s = (c as f64 - hc) * ds;
            values[r * cols + c] *= Complex64::from_polar(scale, -0.5 * setup.mu * s);
        }
    }

    let mean_marginal: Vec<Complex64> = (0..rows)
        .map(|r| {
            Complex64::new(
                values[r * cols..(r + 1) * cols]
                    .iter()
                    .map(|v| v.norm_sqr())
                    .sum::<f64>()
                    .sqrt(),
                0.0,
            )
        })
        .collect();
    let relative_marginal: Vec<Complex64> = (0..cols)
        .map(|c| {
            Complex64::new(
                (0..rows).map(|r| values[r * cols + c].norm_sqr()).sum::<f64>().sqrt(),
                0.0,
            )
        })
        .collect();
    check_edges("mean-time", edge_fraction(&mean_marginal))?;
    check_edges("relative-time", edge_fraction(&relative_marginal))?;

    Ok(TemporalAmplitude {
        mean_axis: oc.mean_axis()?,
        relative_axis: oc.relative_axis()?,
        values,
        spectral_axes: oc.spectral_axes(AngularFrequency(setup.mu))?,
    })
}

/// |∫dt₂ ∫_{t₁<t₂} dt₁ Σ_j D_j e^{−i(ε_j−ε_f)t₂} e^{iε_j t₁} ψ(t₁, t₂)|² with
/// both photon orderings, multiplied by ω_s⁰ω_i⁰ for the field-strength
/// factors at the central frequencies. Unnormalized.
///
/// ψ factorizes into a mean-time and a relative-time part, so the double sum
/// over the (t̄, s) grid is the product of two one-dimensional sums; see
/// [`temporal_wavefunction`] for the dense transform of the same samples.
pub fn brute_force_tpa(
    levels: &LevelSystem,
    config: &SourceConfig,
    t: Temperature,
    tau: TimeQuantity,
    oc: &OracleConfig,
) -> Result<f64> {
    let setup = Setup::new(config, t, tau, oc)?;
    let mut planner = FftPlanner::new();
    let g = mean_factor(&mut planner, &setup, tau.0, oc);
    let chi = relative_factor(&mut planner, &setup, tau.0, oc);
    check_edges("mean-time", edge_fraction(&g))?;
    check_edges("relative-time", edge_fraction(&chi))?;

    let ef = levels.final_energy().0;
    let dt = oc.mean_step();
    let half_t = (oc.n_time / 2) as f64;
    let mean_sum: Complex64 = g
        .iter()
        .enumerate()
        .map(|(m, &v)| v * Complex64::from_polar(dt, (ef - setup.omega_p) * (m as f64 - half_t) * dt))
        .sum();

    // s ≥ 0 with trapezoid half weight at s = 0; the two orderings enter as
    // ψ(t̄, s) and ψ(t̄, −s) at absorption-time separation |s|.
    let ds = oc.relative_step();
    let centre = oc.n_freq / 2;
    let ordered: Vec<Complex64> = (0..centre)
        .map(|p| {
            if p == 0 {
                chi[centre]
            } else {
                chi[centre + p] + chi[centre - p]
            }
        })
        .collect();
    let mut dipole_sum = Complex64::new(0.0, 0.0);
    for level in levels.intermediates() {
        if level.dipole == Complex64::new(0.0, 0.0) {
            continue;
        }
        let rate = level.energy.0 - 0.5 * ef;
        let relative_sum: Complex64 = ordered
            .iter()
            .enumerate()
            .map(|(p, &v)| v * Complex64::from_polar(1.0, -rate * p as f64 * ds))
            .sum();
        dipole_sum += level.dipole * relative_sum * ds;
    }

    let amplitude = setup.norm * Complex64::from_polar(1.0, 0.5 * setup.omega_p * tau.0) * mean_sum * dipole_sum;
    let cf = config.central_frequencies(t)?;
    let p = cf.signal.0 * cf.idler.0 * amplitude.norm_sqr();
    if !p.is_finite() {
        return Err(Error::Consistency("oracle produced a non-finite probability".into()));
    }
    Ok(p)
}

/// Two-dimensional trapezoid integral of a sampled joint spectrum over
/// dω_s dω_i.
pub fn integrate_joint_spectrum(js: &JointSpectrum) -> f64 {
    let (rows, cols) = js.axes.shape();
    let (dr, dc) = match js.axes {
        SpectralAxes::SignalIdler { signal, idler } => (signal.step(), idler.step()),
        SpectralAxes::SumDifference { sum, difference } => (sum.step(), difference.step()),
    };
    let weight = |k: usize, n: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
    let mut total = 0.0;
    for r in 0..rows {
        let row = &js.values[r * cols..(r + 1) * cols];
        let inner: f64 = row.iter().enumerate().map(|(c, v)| weight(c, cols) * v).sum();
        total += weight(r, rows) * inner;
    }
    total * dr * dc * js.axes.jacobian()
}
