//! Agreement checks between the independent evaluations of the signal.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{brute_force_tpa, OracleConfig};
use crate::source::{PumpProfile, SourceConfig};
use crate::tpa::{tpa_amplitude, tpa_probability, tpa_probability_expanded, tpa_probability_pulsed, GridSpec};
use crate::units::{LevelSystem, NormalizationMode, SignalNormalization, Temperature, TimeQuantity, UniformAxis};

pub const ORACLE_TOLERANCE: f64 = 1e-3;
pub const EXPANDED_TOLERANCE: f64 = 1e-9;
pub const PROBES_PER_AXIS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbePoint {
    pub temperature: Temperature,
    pub tau: TimeQuantity,
    pub closed_form: f64,
    pub reference: f64,
    pub relative_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub name: String,
    /// Global factor applied to the closed form before comparing.
    pub scale: f64,
    pub max_relative_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub probes: Vec<ProbePoint>,
}

fn compare(name: &str, points: Vec<(f64, f64, f64, f64)>, fit_scale: bool, tolerance: f64) -> Result<Comparison> {
    let scale = if fit_scale {
        let num: f64 = points.iter().map(|p| p.2 * p.3).sum();
        let den: f64 = points.iter().map(|p| p.2 * p.2).sum();
        if !(den > 0.0) {
            return Err(Error::Consistency(format!(
                "{name}: closed form vanishes on every probe"
            )));
        }
        num / den
    } else {
        1.0
    };
    let probes: Vec<ProbePoint> = points
        .into_iter()
        .map(|(t, tau, c, r)| ProbePoint {
            temperature: Temperature(t),
            tau: TimeQuantity(tau),
            closed_form: c,
            reference: r,
            relative_deviation: if c == 0.0 && r == 0.0 {
                0.0
            } else {
                (r - scale * c).abs() / (scale * c).abs()
            },
        })
        .collect();
    let max = probes.iter().map(|p| p.relative_deviation).fold(0.0, f64::max);
    if !max.is_finite() || !scale.is_finite() {
        return Err(Error::Consistency(format!("{name}: non-finite deviation")));
    }
    Ok(Comparison {
        name: name.into(),
        scale,
        max_relative_deviation: max,
        tolerance,
        passed: max < tolerance,
        probes,
    })
}

/// Five temperatures over the inner 80 % of the grid's range and five delays
/// within ±0.8 of the grid's delay span.
pub fn probe_set(spec: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let inner = |a: &UniformAxis| -> Result<Vec<f64>> {
        let mid = 0.5 * (a.start + a.end);
        let half = 0.4 * (a.end - a.start);
        Ok(UniformAxis::new(mid - half, mid + half, PROBES_PER_AXIS)?.values())
    };
    Ok((inner(&spec.temperature)?, inner(&spec.tau)?))
}

fn closed_form(levels: &LevelSystem, config: &SourceConfig, t: f64, tau: f64) -> Result<f64> {
    match config.pump() {
        PumpProfile::ContinuousWave => tpa_probability(
            levels,
            config,
            Temperature(t),
            TimeQuantity(tau),
            &SignalNormalization::new(NormalizationMode::PrefactorOnly),
        ),
        PumpProfile::Pulsed { .. } => tpa_probability_pulsed(levels, config, Temperature(t), TimeQuantity(tau)),
    }
}

/// Brute-force time-domain evaluation against the closed form on every
/// (T, τ) pair, after one least-squares scale factor. Probes run in
/// parallel on the current rayon pool.
pub fn oracle_comparison(
    levels: &LevelSystem,
    config: &SourceConfig,
    temperatures: &[f64],
    taus: &[f64],
    oracle: &OracleConfig,
) -> Result<Comparison> {
    let pairs: Vec<(f64, f64)> = temperatures
        .iter()
        .flat_map(|&t| taus.iter().map(move |&tau| (t, tau)))
        .collect();
    let points = pairs
        .par_iter()
        .map(|&(t, tau)| {
            let c = closed_form(levels, config, t, tau)?;
            let r = brute_force_tpa(levels, config, Temperature(t), TimeQuantity(tau), oracle)?;
            Ok((t, tau, c, r))
        })
        .collect::<Result<Vec<_>>>()?;
    compare("oracle vs closed form", points, true, ORACLE_TOLERANCE)
}

/// |A|² against its algebraic expansion, unscaled, on every (T, τ)
/// pair.
pub fn expanded_comparison(
    levels: &LevelSystem,
    config: &SourceConfig,
    temperatures: &[f64],
    taus: &[f64],
) -> Result<Comparison> {
    let te = config.entanglement_time();
    let mut points = Vec::with_capacity(temperatures.len() * taus.len());
    for &t in temperatures {
        let delta = config.tuning().delta_at(Temperature(t))?;
        let cf = config.central_frequencies(Temperature(t))?;
        for &tau in taus {
            let c = tpa_amplitude(levels, cf, te, TimeQuantity(tau))?.norm_sqr();
            let e = tpa_probability_expanded(levels, config.omega0(), delta, te, TimeQuantity(tau))?;
            points.push((t, tau, c, e));
        }
    }
    compare("closed vs expanded form", points, false, EXPANDED_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuning::TuningModel;
    use crate::units::{AngularFrequency, IntermediateLevel, Wavelength};

    fn source() -> SourceConfig {
        SourceConfig::new(
            Wavelength(405.0),
            TimeQuantity(0.87),
            PumpProfile::ContinuousWave,
            TuningModel::default(),
        )
        .unwrap()
    }

    fn levels(c: &SourceConfig, eps: &[f64]) -> LevelSystem {
        LevelSystem::new(
            eps.iter()
                .map(|&e| IntermediateLevel::new(AngularFrequency(e)))
                .collect(),
            c.omega_p(),
        )
        .unwrap()
    }

    #[test]
    fn probe_set_is_inside_grid() {
        let spec = GridSpec::default_for(&source()).unwrap();
        let (t, tau) = probe_set(&spec).unwrap();
        assert_eq!((t.len(), tau.len()), (5, 5));
        assert_eq!(t[2], 25.0);
        assert_eq!(tau[2], 0.0);
        assert!((tau[4] - 0.8 * 1.74).abs() < 1e-12);
    }

    #[test]
    fn scale_is_recovered_exactly() {
        let pts = vec![(0.0, 0.0, 1.0, 3.0), (1.0, 0.0, 2.0, 6.0)];
        let c = compare("x", pts, true, 1e-9).unwrap();
        assert!((c.scale - 3.0).abs() < 1e-15);
        assert!(c.passed);
        let c = compare("x", vec![(0.0, 0.0, 1.0, 1.1)], false, 1e-3).unwrap();
        assert!(!c.passed);
    }

    #[test]
    fn expanded_agrees_for_two_levels() {
        let c = source();
        let l = levels(&c, &[1500.0, 2500.0]);
        let r = expanded_comparison(&l, &c, &[-20.0, 25.0, 80.0], &[-1.0, 0.0, 0.3]).unwrap();
        assert!(r.passed, "{}", r.max_relative_deviation);
    }
}
