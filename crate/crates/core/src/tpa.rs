//! Two-photon absorption signal P(τ, T).
//!
//! The closed form sums, for each intermediate level, two window kernels
//! K(x, a) = (1 − e^{−ixa})/x, one per time ordering of the photons:
//!
//! ```text
//! A(τ, T) = Σ_j D_j [ K(ε_j − ω_i⁰, 2T_e − τ) + K(ε_j − ω_s⁰, 2T_e + τ) ]
//! P(τ, T) = ω_i⁰ ω_s⁰ / T_e · |A|²
//! ```
//!
//! The singular |δ(Δ₊/2π)|² factor is replaced by a resonance gate: the
//! photon-pair energy ω_s⁰ + ω_i⁰ must match ε_f.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::source::{sinc, PumpProfile, SourceConfig};
use crate::tuning::CentralFrequencies;
use crate::units::{
    AngularFrequency, LevelSystem, NormalizationMode, PhysicalConstants, SignalNormalization, Temperature,
    TimeQuantity, UniformAxis,
};

/// Absolute tolerance of the resonance gate, rad/ps.
pub const RESONANCE_TOLERANCE: f64 = 1e-9;
/// Default number of delay samples.
pub const DEFAULT_TAU_SAMPLES: usize = 4096;
/// Default number of temperature samples.
pub const DEFAULT_TEMPERATURE_SAMPLES: usize = 101;

/// K(x, a) = (1 − e^{−ixa})/x evaluated as i·a·e^{−ixa/2}·sinc(xa/2), which is
/// finite for every x and equals i·a at x = 0.
#[inline]
pub fn kernel(x: f64, a: f64) -> Complex64 {
    let half = 0.5 * x * a;
    Complex64::new(0.0, a) * Complex64::from_polar(sinc(half), -half)
}

fn check_resonance(levels: &LevelSystem, cf: CentralFrequencies) -> Result<()> {
    let pair = cf.signal.0 + cf.idler.0;
    let ef = levels.final_energy().0;
    if (pair - ef).abs() > RESONANCE_TOLERANCE {
        return Err(Error::Resonance {
            final_energy: ef,
            pair_energy: pair,
        });
    }
    Ok(())
}

/// Bracketed sum A(τ) of the closed form.
pub fn tpa_amplitude(
    levels: &LevelSystem,
    cf: CentralFrequencies,
    te: TimeQuantity,
    tau: TimeQuantity,
) -> Result<Complex64> {
    check_resonance(levels, cf)?;
    Ok(amplitude_unchecked(levels, cf, te.0, tau.0))
}

#[inline]
fn amplitude_unchecked(levels: &LevelSystem, cf: CentralFrequencies, te: f64, tau: f64) -> Complex64 {
    let (ws, wi) = (cf.signal.0, cf.idler.0);
    levels
        .intermediates()
        .iter()
        .map(|l| l.dipole * (kernel(l.energy.0 - wi, 2.0 * te - tau) + kernel(l.energy.0 - ws, 2.0 * te + tau)))
        .sum()
}

#[inline]
fn cw_prefactor(cf: CentralFrequencies, te: f64) -> f64 {
    cf.idler.0 * cf.signal.0 / te
}

/// P(τ, T) for a continuous-wave pump.
///
/// [`NormalizationMode::GridMax`] has no meaning for a single sample and is
/// treated as prefactor-only.
pub fn tpa_probability(
    levels: &LevelSystem,
    config: &SourceConfig,
    t: Temperature,
    tau: TimeQuantity,
    normalization: &SignalNormalization,
) -> Result<f64> {
    let cf = config.central_frequencies(t)?;
    let amp = tpa_amplitude(levels, cf, config.entanglement_time(), tau)?;
    let p = cw_prefactor(cf, config.entanglement_time().0) * amp.norm_sqr();
    Ok(match normalization.mode {
        NormalizationMode::RawWithConstants => p * normalization.constants.field_factor(),
        _ => p,
    })
}

/// |A|² written out as the double sum over level pairs (j, k), grouped by
/// delay dependence: the constant term, the two terms linear in the delay
/// exponentials (frequencies ±(ε̃ ± Δ)), the ε_j − ε_k term and the
/// ε̃_j + ε̃_k term. No prefactor is applied.
pub fn tpa_probability_expanded(
    levels: &LevelSystem,
    omega0: AngularFrequency,
    delta: AngularFrequency,
    te: TimeQuantity,
    tau: TimeQuantity,
) -> Result<f64> {
    let sum = expanded_sum(levels, omega0.0, delta.0, te.0, tau.0)?;
    if !sum.re.is_finite() {
        return Err(Error::Consistency(format!(
            "expanded form is singular at Δ = {} (a photon is resonant with an intermediate level)",
            delta
        )));
    }
    Ok(sum.re)
}

/// Complex accumulation of the expanded form; the imaginary part cancels
/// between the (j, k) and (k, j) terms.
pub(crate) fn expanded_sum(levels: &LevelSystem, w0: f64, delta: f64, te: f64, tau: f64) -> Result<Complex64> {
    let cf = CentralFrequencies::split(AngularFrequency(w0), AngularFrequency(delta));
    check_resonance(levels, cf)?;
    let i = Complex64::i();
    let late = 2.0 * te - tau; // window of the idler-first ordering
    let early = 2.0 * te + tau; // window of the signal-first ordering
    let mut acc = Complex64::new(0.0, 0.0);
    for lj in levels.intermediates() {
        let ej = lj.energy.0 - w0;
        let (aj, bj) = (ej + delta, ej - delta);
        let cj = 1.0 / aj + 1.0 / bj;
        for lk in levels.intermediates() {
            let ek = lk.energy.0 - w0;
            let (ak, bk) = (ek + delta, ek - delta);
            let ck = 1.0 / ak + 1.0 / bk;
            let eps_diff = lj.energy.0 - lk.energy.0;

            let constant = Complex64::new(cj * ck, 0.0);
            let cross_k = -cj * ((i * ak * late).exp() / ak + (i * bk * early).exp() / bk);
            let cross_j = -ck * ((-i * aj * late).exp() / aj + (-i * bj * early).exp() / bj);
            let difference = (-i * eps_diff * late).exp() / (aj * ak) + (-i * eps_diff * early).exp() / (bj * bk);
            let combined = (-i * (eps_diff + 2.0 * delta) * 2.0 * te).exp() * (i * (ej + ek) * tau).exp() / (aj * bk)
                + (-i * (eps_diff - 2.0 * delta) * 2.0 * te).exp() * (-i * (ej + ek) * tau).exp() / (bj * ak);

            acc += lj.dipole * lk.dipole.conj() * (constant + cross_k + cross_j + difference + combined);
        }
    }
    Ok(acc)
}

/// exp[−2T_p²(ω_p − ω_s⁰ − ω_i⁰)²].
#[inline]
pub fn pulsed_pump_overlap(tp: TimeQuantity, omega_p: AngularFrequency, cf: CentralFrequencies) -> f64 {
    let mismatch = omega_p.0 - cf.signal.0 - cf.idler.0;
    (-2.0 * tp.0 * tp.0 * mismatch * mismatch).exp()
}

/// Pulsed-pump signal from explicit frequencies:
/// (T_p/T_e)·√(2π)·ω_i⁰ω_s⁰·exp[−2T_p²(ω_p − ω_s⁰ − ω_i⁰)²]·|A|².
///
/// The level resonance ε_f = ω_s⁰ + ω_i⁰ is still enforced; `omega_p` may
/// differ from the pair energy, which the Gaussian factor suppresses.
pub fn pulsed_probability(
    levels: &LevelSystem,
    omega_p: AngularFrequency,
    cf: CentralFrequencies,
    te: TimeQuantity,
    tp: TimeQuantity,
    tau: TimeQuantity,
) -> Result<f64> {
    let amp = tpa_amplitude(levels, cf, te, tau)?;
    let prefactor = tp.0 / te.0 * (2.0 * PI).sqrt() * cf.idler.0 * cf.signal.0;
    Ok(prefactor * pulsed_pump_overlap(tp, omega_p, cf) * amp.norm_sqr())
}

pub fn tpa_probability_pulsed(
    levels: &LevelSystem,
    config: &SourceConfig,
    t: Temperature,
    tau: TimeQuantity,
) -> Result<f64> {
    let tp = match config.pump() {
        PumpProfile::Pulsed { duration } => duration,
        PumpProfile::ContinuousWave => {
            return Err(Error::Source(
                "pulsed signal requested for a continuous-wave source".into(),
            ))
        }
    };
    let cf = config.central_frequencies(t)?;
    pulsed_probability(levels, config.omega_p(), cf, config.entanglement_time(), tp, tau)
}

/// Delay and temperature sampling of a signal grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub tau: UniformAxis,
    pub temperature: UniformAxis,
}

impl GridSpec {
    /// τ ∈ [−2T_e, 2T_e] with 4096 samples; T over the tuning model's domain
    /// with 101 samples.
    pub fn default_for(config: &SourceConfig) -> Result<Self> {
        let te = config.entanglement_time().0;
        let (tmin, tmax) = config.tuning().domain();
        Ok(Self {
            tau: UniformAxis::new(-2.0 * te, 2.0 * te, DEFAULT_TAU_SAMPLES)?,
            temperature: UniformAxis::new(tmin.0, tmax.0, DEFAULT_TEMPERATURE_SAMPLES)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub mode: NormalizationMode,
    pub constants: PhysicalConstants,
    /// Grid maximum before rescaling, present in grid-max mode.
    pub pre_normalization_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 over the source configuration and level system.
    pub digest: String,
    pub source: serde_json::Value,
    pub levels: serde_json::Value,
}

impl Provenance {
    pub fn new(config: &SourceConfig, levels: &LevelSystem) -> Self {
        let source = serde_json::to_value(config).expect("source config serializes");
        let levels = serde_json::to_value(levels).expect("level system serializes");
        let mut hasher = Sha256::new();
        hasher.update(source.to_string().as_bytes());
        hasher.update(levels.to_string().as_bytes());
        let digest = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Self { digest, source, levels }
    }
}

/// Signal sampled on a (T, τ) grid. Rows are temperatures, columns delays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalGrid {
    pub tau_axis: UniformAxis,
    pub temp_axis: UniformAxis,
    pub values: Vec<f64>,
    pub normalization: NormalizationRecord,
    pub provenance: Option<Provenance>,
}

impl SignalGrid {
    pub fn rows(&self) -> usize {
        self.temp_axis.len
    }

    pub fn cols(&self) -> usize {
        self.tau_axis.len
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let n = self.cols();
        &self.values[r * n..(r + 1) * n]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols() + c]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Dense P(τ, T) grid. Rows are evaluated in parallel on the current rayon
/// pool; every sample is computed independently, so the result does not
/// depend on how rows are distributed across workers.
pub fn tpa_grid(
    levels: &LevelSystem,
    config: &SourceConfig,
    spec: &GridSpec,
    normalization: &SignalNormalization,
) -> Result<SignalGrid> {
    let ef = levels.final_energy().0;
    let wp = config.omega_p().0;
    if (ef - wp).abs() > RESONANCE_TOLERANCE {
        return Err(Error::Resonance {
            final_energy: ef,
            pair_energy: wp,
        });
    }
    let te = config.entanglement_time().0;
    let n_tau = spec.tau.len;
    let taus = spec.tau.values();
    let central = (0..spec.temperature.len)
        .map(|r| config.central_frequencies(Temperature(spec.temperature.value(r))))
        .collect::<Result<Vec<_>>>()?;
    for &cf in &central {
        check_resonance(levels, cf)?;
    }

    let mut values = vec![0.0; n_tau * central.len()];
    values
        .par_chunks_mut(n_tau)
        .zip(central.par_iter())
        .for_each(|(row, &cf)| {
            let prefactor = cw_prefactor(cf, te);
            for (v, &tau) in row.iter_mut().zip(&taus) {
                *v = prefactor * amplitude_unchecked(levels, cf, te, tau).norm_sqr();
            }
        });

    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Consistency(format!(
            "non-finite signal at row {}, column {}",
            k / n_tau,
            k % n_tau
        )));
    }

    let mut record = NormalizationRecord {
        mode: normalization.mode,
        constants: normalization.constants,
        pre_normalization_max: None,
    };
    match normalization.mode {
        NormalizationMode::GridMax => {
            let max = values.iter().copied().fold(0.0, f64::max);
            if !(max > 0.0) {
                return Err(Error::Consistency("signal grid is identically zero".into()));
            }
            values.iter_mut().for_each(|v| *v /= max);
            record.pre_normalization_max = Some(max);
        }
        NormalizationMode::PrefactorOnly => {}
        NormalizationMode::RawWithConstants => {
            let f = normalization.constants.field_factor();
            values.iter_mut().for_each(|v| *v *= f);
        }
    }

    Ok(SignalGrid {
        tau_axis: spec.tau,
        temp_axis: spec.temperature,
        values,
        normalization: record,
        provenance: Some(Provenance::new(config, levels)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuning::TuningModel;
    use crate::units::{wavelength_to_omega, IntermediateLevel, Wavelength};
    use proptest::prelude::*;

    fn example_a() -> (LevelSystem, SourceConfig) {
        let levels = LevelSystem::from_wavelengths(&[Wavelength(563.0), Wavelength(612.0)], Wavelength(405.0)).unwrap();
        let cfg = SourceConfig::new(
            Wavelength(405.0),
            TimeQuantity(0.87),
            PumpProfile::ContinuousWave,
            TuningModel::default(),
        )
        .unwrap();
        (levels, cfg)
    }

    fn single_level(eps_tilde: f64) -> (LevelSystem, SourceConfig) {
        let cfg = SourceConfig::new(
            Wavelength(405.0),
            TimeQuantity(0.87),
            PumpProfile::ContinuousWave,
            TuningModel::default(),
        )
        .unwrap();
        let w0 = cfg.omega0().0;
        let levels = LevelSystem::new(
            vec![IntermediateLevel::new(AngularFrequency(w0 + eps_tilde))],
            cfg.omega_p(),
        )
        .unwrap();
        (levels, cfg)
    }

    #[test]
    fn kernel_limits() {
        assert_eq!(kernel(0.0, 1.3), Complex64::new(0.0, 1.3));
        assert_eq!(kernel(523.0, 0.0), Complex64::new(0.0, 0.0));
        for a in [0.37, 1.74, 3.48] {
            let k = kernel(2.0 * PI / a, a);
            assert!(k.norm() < 1e-14 * a, "{k}");
        }
    }

    #[test]
    fn kernel_matches_direct_form() {
        let i = Complex64::i();
        for &(x, a) in &[(1000.0, 1.74), (-752.4, 2.2), (3.0e-3, 0.5), (17.0, -1.1)] {
            let direct = (1.0 - (-i * x * a).exp()) / x;
            let k = kernel(x, a);
            assert!((k - direct).norm() <= 1e-12 * direct.norm(), "{x} {a}");
        }
    }

    #[test]
    fn amplitude_special_cases() {
        let (levels, cfg) = single_level(1000.0);
        let te = TimeQuantity(0.87);
        let cf = cfg.central_frequencies(Temperature(25.0)).unwrap();
        let a0 = tpa_amplitude(&levels, cf, te, TimeQuantity(0.0)).unwrap();
        assert!((a0 - 2.0 * kernel(1000.0, 1.74)).norm() < 1e-15);
        let a2 = tpa_amplitude(&levels, cf, te, TimeQuantity(1.74)).unwrap();
        assert!((a2 - kernel(1000.0, 4.0 * 0.87)).norm() < 1e-15);
    }

    #[test]
    fn resonance_gate() {
        let (_, cfg) = example_a();
        let off = LevelSystem::new(
            vec![IntermediateLevel::new(AngularFrequency(3000.0))],
            AngularFrequency(cfg.omega_p().0 + 1.0),
        )
        .unwrap();
        let err = tpa_probability(
            &off,
            &cfg,
            Temperature(25.0),
            TimeQuantity(0.0),
            &SignalNormalization::default(),
        );
        assert!(matches!(err, Err(Error::Resonance { .. })));
        let spec = GridSpec::default_for(&cfg).unwrap();
        assert!(matches!(
            tpa_grid(&off, &cfg, &spec, &SignalNormalization::default()),
            Err(Error::Resonance { .. })
        ));
    }

    #[test]
    fn degenerate_delay_symmetry_and_scaling() {
        let (levels, cfg) = example_a();
        let norm = SignalNormalization::new(NormalizationMode::PrefactorOnly);
        let doubled = levels.scaled_dipoles(Complex64::new(2.0, 0.0));
        for tau in [0.1, 0.5, 1.2, 1.7] {
            let p = tpa_probability(&levels, &cfg, Temperature(25.0), TimeQuantity(tau), &norm).unwrap();
            let m = tpa_probability(&levels, &cfg, Temperature(25.0), TimeQuantity(-tau), &norm).unwrap();
            assert!((p - m).abs() <= 1e-12 * p);
            let q = tpa_probability(&doubled, &cfg, Temperature(25.0), TimeQuantity(tau), &norm).unwrap();
            assert!((q - 4.0 * p).abs() <= 1e-12 * q);
        }
    }

    #[test]
    fn zero_delay_is_local_maximum_for_single_level() {
        let (levels, cfg) = single_level(400.0);
        let norm = SignalNormalization::new(NormalizationMode::PrefactorOnly);
        let p = |tau: f64| tpa_probability(&levels, &cfg, Temperature(25.0), TimeQuantity(tau), &norm).unwrap();
        // Fine sweep around τ = 0, inside the first half period of cos(ε̃τ).
        let step = 1e-4;
        let sweep: Vec<f64> = (-30..=30).map(|k| p(k as f64 * step)).collect();
        let centre = sweep[30];
        assert!(sweep[29] < centre && sweep[31] < centre);
        assert!(sweep[..30].windows(2).all(|w| w[0] < w[1]));
        assert!(sweep[30..].windows(2).all(|w| w[0] > w[1]));
        let argmax = sweep
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 30);
    }

    #[test]
    fn expanded_single_level_and_hermitian() {
        let (levels, cfg) = single_level(900.0);
        let w0 = cfg.omega0();
        for &(delta, tau) in &[(0.0, 0.0), (37.0, 0.4), (-120.0, -1.1), (180.0, 1.6)] {
            let cf = CentralFrequencies::split(w0, AngularFrequency(delta));
            let closed = tpa_amplitude(&levels, cf, TimeQuantity(0.87), TimeQuantity(tau))
                .unwrap()
                .norm_sqr();
            let sum = expanded_sum(&levels, w0.0, delta, 0.87, tau).unwrap();
            assert!((sum.re - closed).abs() <= 1e-9 * closed);
            assert!(sum.im.abs() <= 1e-10 * sum.norm());
        }
    }

    #[test]
    fn expanded_two_level_example() {
        let (levels, cfg) = example_a();
        let w0 = cfg.omega0();
        let cf = CentralFrequencies::split(w0, AngularFrequency(50.0));
        let closed = tpa_amplitude(&levels, cf, TimeQuantity(0.87), TimeQuantity(0.5))
            .unwrap()
            .norm_sqr();
        let expanded = tpa_probability_expanded(
            &levels,
            w0,
            AngularFrequency(50.0),
            TimeQuantity(0.87),
            TimeQuantity(0.5),
        )
        .unwrap();
        assert!((expanded - closed).abs() <= 1e-9 * closed);
        let sum = expanded_sum(&levels, w0.0, 50.0, 0.87, 0.5).unwrap();
        assert!(sum.im.abs() <= 1e-10 * sum.norm());
    }

    #[test]
    fn grid_is_normalized() {
        let (levels, cfg) = example_a();
        let spec = GridSpec {
            tau: UniformAxis::new(-1.74, 1.74, 256).unwrap(),
            temperature: UniformAxis::new(-75.0, 125.0, 11).unwrap(),
        };
        let grid = tpa_grid(&levels, &cfg, &spec, &SignalNormalization::default()).unwrap();
        assert_eq!(grid.max(), 1.0);
        assert!(grid.values.iter().all(|&v| v >= 0.0));
        assert!(grid.normalization.pre_normalization_max.unwrap() > 0.0);
        let raw = tpa_grid(
            &levels,
            &cfg,
            &spec,
            &SignalNormalization::new(NormalizationMode::PrefactorOnly),
        )
        .unwrap();
        let max = grid.normalization.pre_normalization_max.unwrap();
        assert_eq!(raw.max(), max);
    }

    #[test]
    fn finite_through_photon_resonance() {
        // Level crosses the signal central frequency as T varies.
        let (_, cfg) = example_a();
        let w0 = cfg.omega0().0;
        let levels =
            LevelSystem::new(vec![IntermediateLevel::new(AngularFrequency(w0 + 50.0))], cfg.omega_p()).unwrap();
        let spec = GridSpec {
            tau: UniformAxis::new(-1.74, 1.74, 64).unwrap(),
            temperature: UniformAxis::new(0.0, 100.0, 101).unwrap(),
        };
        let grid = tpa_grid(&levels, &cfg, &spec, &SignalNormalization::default()).unwrap();
        assert!(grid.values.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn pulsed_scaling_and_off_resonance() {
        let (levels, cfg) = example_a();
        let te = TimeQuantity(0.87);
        let tp = TimeQuantity(4.0);
        let cf = cfg.central_frequencies(Temperature(60.0)).unwrap();
        let wp = cfg.omega_p();
        let on = pulsed_probability(&levels, wp, cf, te, tp, TimeQuantity(0.3)).unwrap();
        let twice = pulsed_probability(&levels, wp, cf, te, TimeQuantity(8.0), TimeQuantity(0.3)).unwrap();
        assert!((twice / on - 2.0).abs() < 1e-12);
        let dw = 0.2;
        let off = pulsed_probability(&levels, AngularFrequency(wp.0 + dw), cf, te, tp, TimeQuantity(0.3)).unwrap();
        let expect = (-2.0 * 16.0 * dw * dw).exp();
        assert!((off / on - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn provenance_digest_is_stable() {
        let (levels, cfg) = example_a();
        let a = Provenance::new(&cfg, &levels);
        let b = Provenance::new(&cfg, &levels);
        assert_eq!(a.digest, b.digest);
        assert_eq!(a.digest.len(), 64);
        let other = levels.scaled_dipoles(Complex64::new(0.5, 0.0));
        assert_ne!(Provenance::new(&cfg, &other).digest, a.digest);
        let w = wavelength_to_omega(Wavelength(810.0)).unwrap();
        assert_eq!(cfg.omega0(), w);
    }

    proptest! {
        #[test]
        fn kernel_bounded_by_window(x in -5000.0f64..5000.0, a in -5.0f64..5.0) {
            prop_assert!(kernel(x, a).norm() <= a.abs() * (1.0 + 1e-15));
        }

        #[test]
        fn dipole_homogeneity(re in -3.0f64..3.0, im in -3.0f64..3.0, t in -75.0f64..125.0, tau in -1.7f64..1.7) {
            let (levels, cfg) = example_a();
            let lambda = Complex64::new(re, im);
            let scaled = levels.scaled_dipoles(lambda);
            let norm = SignalNormalization::new(NormalizationMode::PrefactorOnly);
            let p = tpa_probability(&levels, &cfg, Temperature(t), TimeQuantity(tau), &norm).unwrap();
            let q = tpa_probability(&scaled, &cfg, Temperature(t), TimeQuantity(tau), &norm).unwrap();
            prop_assert!((q - lambda.norm_sqr() * p).abs() <= 1e-12 * q.max(1e-300));
        }
    }
}
