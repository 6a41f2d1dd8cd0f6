//! Temperature dependence of the down-converted central frequencies.
//!
//! The detuning Δ(T) shifts signal and idler symmetrically about the
//! degenerate frequency ω₀: ω_s⁰ = ω₀ + Δ, ω_i⁰ = ω₀ − Δ. The non-degeneracy
//! μ(T) = ω_i⁰ − ω_s⁰ is therefore −2Δ(T).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{omega_to_wavelength, AngularFrequency, Temperature, UniformAxis, Wavelength};

/// Default linear slope dΔ/dT in rad/ps per °C.
pub const DEFAULT_SLOPE: f64 = 2.0;
/// Default degenerate temperature in °C.
pub const DEFAULT_REFERENCE_TEMPERATURE: f64 = 25.0;
/// Half-width of the default temperature domain of analytic models, °C.
pub const DEFAULT_DOMAIN_HALF_WIDTH: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TuningKind {
    /// Δ = c₁ (T − T₀).
    Linear { slope: f64 },
    /// Δ = Σ_k c_k (T − T₀)^k, k ≥ 1.
    Polynomial { coefficients: Vec<f64> },
    /// Piecewise-linear interpolation of (T, Δ) samples.
    Tabulated { points: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TuningModel {
    kind: TuningKind,
    reference: Temperature,
    domain: (Temperature, Temperature),
}

/// Signal and idler central frequencies at one temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CentralFrequencies {
    pub signal: AngularFrequency,
    pub idler: AngularFrequency,
}

impl CentralFrequencies {
    /// Splits 2ω₀ symmetrically so that `signal + idler == 2ω₀` holds exactly
    /// in floating point.
    pub fn split(omega0: AngularFrequency, delta: AngularFrequency) -> Self {
        let w0 = omega0.0;
        let d = delta.0;
        // hi ∈ [ω₀, 2ω₀] makes 2ω₀ − hi exact (Sterbenz), and the sum then
        // rounds to the representable 2ω₀.
        let hi = w0 + d.abs();
        let lo = 2.0 * w0 - hi;
        if d >= 0.0 {
            Self {
                signal: AngularFrequency(hi),
                idler: AngularFrequency(lo),
            }
        } else {
            Self {
                signal: AngularFrequency(lo),
                idler: AngularFrequency(hi),
            }
        }
    }

    /// μ = ω_i⁰ − ω_s⁰.
    pub fn nondegeneracy(&self) -> AngularFrequency {
        AngularFrequency(self.idler.0 - self.signal.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TuningPoint {
    pub temperature: Temperature,
    pub signal: Wavelength,
    pub idler: Wavelength,
}

impl Default for TuningModel {
    fn default() -> Self {
        Self::linear(DEFAULT_SLOPE, Temperature(DEFAULT_REFERENCE_TEMPERATURE)).expect("default tuning model is valid")
    }
}

fn default_domain(reference: Temperature) -> (Temperature, Temperature) {
    (
        Temperature(reference.0 - DEFAULT_DOMAIN_HALF_WIDTH),
        Temperature(reference.0 + DEFAULT_DOMAIN_HALF_WIDTH),
    )
}

impl TuningModel {
    pub fn linear(slope: f64, reference: Temperature) -> Result<Self> {
        if !slope.is_finite() || !reference.0.is_finite() {
            return Err(Error::Tuning("linear slope and reference must be finite".into()));
        }
        Ok(Self {
            kind: TuningKind::Linear { slope },
            reference,
            domain: default_domain(reference),
        })
    }

    /// `coefficients[k]` multiplies (T − T₀)^(k+1).
    pub fn polynomial(coefficients: Vec<f64>, reference: Temperature) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Tuning("polynomial needs at least one coefficient".into()));
        }
        if coefficients.iter().any(|c| !c.is_finite()) || !reference.0.is_finite() {
            return Err(Error::Tuning("polynomial coefficients must be finite".into()));
        }
        Ok(Self {
            kind: TuningKind::Polynomial { coefficients },
            reference,
            domain: default_domain(reference),
        })
    }

    /// Tabulated Δ(T). Temperatures must be strictly increasing and the table
    /// must contain exactly one zero crossing, which becomes T₀.
    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Tuning("tabulated model needs at least two rows".into()));
        }
        if points.iter().any(|(t, d)| !t.is_finite() || !d.is_finite()) {
            return Err(Error::Tuning("tabulated values must be finite".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Tuning("temperatures must be strictly increasing".into()));
        }
        let mut crossings = Vec::new();
        for (i, w) in points.windows(2).enumerate() {
            let ((t0, d0), (t1, d1)) = (w[0], w[1]);
            if d0 == 0.0 {
                if crossings.last() != Some(&t0) {
                    crossings.push(t0);
                }
            } else if d0 * d1 < 0.0 {
                crossings.push(t0 - d0 * (t1 - t0) / (d1 - d0));
            }
            if i == points.len() - 2 && d1 == 0.0 {
                crossings.push(t1);
            }
        }
        let reference = match crossings.as_slice() {
            [] => return Err(Error::Tuning("table does not bracket a zero crossing of Δ".into())),
            [t] => Temperature(*t),
            _ => {
                return Err(Error::Tuning(format!(
                    "table has {} zero crossings; degeneracy temperature is ambiguous",
                    crossings.len()
                )))
            }
        };
        let domain = (Temperature(points[0].0), Temperature(points[points.len() - 1].0));
        let model = Self {
            kind: TuningKind::Tabulated { points },
            reference,
            domain,
        };
        let residual = model.delta_at(reference)?.0;
        if residual.abs() > 1e-9 {
            return Err(Error::Tuning(format!(
                "interpolated Δ at the zero crossing is {residual} rad/ps"
            )));
        }
        Ok(model)
    }

    /// Loads a two-column CSV (`temperature_C,delta_rad_per_ps`) with header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::format(path, e.to_string()))?;
        let headers = reader
            .headers()
            .map_err(|e| Error::format(path, e.to_string()))?
            .clone();
        if headers.len() != 2 || headers.iter().any(|h| h.parse::<f64>().is_ok()) {
            return Err(Error::format(
                path,
                "expected header row `temperature_C,delta_rad_per_ps`",
            ));
        }
        let mut points = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::format(path, e.to_string()))?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::format(path, format!("row {}: bad number in column {}", line + 2, i + 1)))
            };
            points.push((parse(0)?, parse(1)?));
        }
        Self::tabulated(points).map_err(|e| Error::format(path, e.to_string()))
    }

    /// Samples this model at `temperatures` into a tabulated model.
    pub fn tabulate(&self, temperatures: &[f64]) -> Result<Self> {
        let points = temperatures
            .iter()
            .map(|&t| Ok((t, self.delta_at(Temperature(t))?.0)))
            .collect::<Result<Vec<_>>>()?;
        Self::tabulated(points)
    }

    /// Overrides the default temperature domain of an analytic model.
    pub fn with_domain(mut self, min: Temperature, max: Temperature) -> Result<Self> {
        if !(max.0 > min.0) {
            return Err(Error::Tuning(format!("empty domain [{}, {}]", min.0, max.0)));
        }
        if let TuningKind::Tabulated { points } = &self.kind {
            if min.0 < points[0].0 || max.0 > points[points.len() - 1].0 {
                return Err(Error::Tuning("domain exceeds the tabulated range".into()));
            }
        }
        self.domain = (min, max);
        Ok(self)
    }

    pub fn kind(&self) -> &TuningKind {
        &self.kind
    }

    /// Degenerate temperature T₀, where Δ(T₀) = 0.
    pub fn reference_temperature(&self) -> Temperature {
        self.reference
    }

    pub fn domain(&self) -> (Temperature, Temperature) {
        self.domain
    }

    pub fn delta_at(&self, t: Temperature) -> Result<AngularFrequency> {
        let x = t.0 - self.reference.0;
        let delta = match &self.kind {
            TuningKind::Linear { slope } => slope * x,
            TuningKind::Polynomial { coefficients } => {
                // Horner on Σ c_k x^(k+1).
                x * coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
            }
            TuningKind::Tabulated { points } => {
                let i = self.segment(points, t)?;
                let ((t0, d0), (t1, d1)) = (points[i], points[i + 1]);
                d0 + (d1 - d0) * (t.0 - t0) / (t1 - t0)
            }
        };
        Ok(AngularFrequency(delta))
    }

    /// dΔ/dT in rad/ps per °C.
    pub fn slope_at(&self, t: Temperature) -> Result<f64> {
        let x = t.0 - self.reference.0;
        Ok(match &self.kind {
            TuningKind::Linear { slope } => *slope,
            TuningKind::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (k, &c)| acc * x + (k as f64 + 1.0) * c),
            TuningKind::Tabulated { points } => {
                let i = self.segment(points, t)?;
                let ((t0, d0), (t1, d1)) = (points[i], points[i + 1]);
                (d1 - d0) / (t1 - t0)
            }
        })
    }

    fn segment(&self, points: &[(f64, f64)], t: Temperature) -> Result<usize> {
        let (min, max) = (points[0].0, points[points.len() - 1].0);
        if !(t.0 >= min && t.0 <= max) {
            return Err(Error::OutOfRange {
                temperature: t.0,
                min,
                max,
            });
        }
        Ok(points
            .partition_point(|p| p.0 <= t.0)
            .saturating_sub(1)
            .min(points.len() - 2))
    }

    pub fn central_frequencies(&self, omega0: AngularFrequency, t: Temperature) -> Result<CentralFrequencies> {
        Ok(CentralFrequencies::split(omega0, self.delta_at(t)?))
    }

    /// Signal and idler central wavelengths over `n_points` temperatures.
    pub fn tuning_curve(
        &self,
        omega0: AngularFrequency,
        range: (Temperature, Temperature),
        n_points: usize,
    ) -> Result<Vec<TuningPoint>> {
        let axis = UniformAxis::new(range.0 .0, range.1 .0, n_points)?;
        axis.values()
            .into_iter()
            .map(|t| {
                let cf = self.central_frequencies(omega0, Temperature(t))?;
                Ok(TuningPoint {
                    temperature: Temperature(t),
                    signal: omega_to_wavelength(cf.signal)?,
                    idler: omega_to_wavelength(cf.idler)?,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{wavelength_to_omega, Wavelength};
    use proptest::prelude::*;

    fn omega0() -> AngularFrequency {
        wavelength_to_omega(Wavelength(810.0)).unwrap()
    }

    #[test]
    fn linear_detuning_values() {
        let m = TuningModel::default();
        assert_eq!(m.delta_at(Temperature(25.0)).unwrap().0, 0.0);
        assert_eq!(m.delta_at(Temperature(75.0)).unwrap().0, 100.0);
        assert_eq!(m.delta_at(Temperature(-25.0)).unwrap().0, -100.0);
        assert_eq!(m.slope_at(Temperature(0.0)).unwrap(), 2.0);
    }

    #[test]
    fn central_frequency_examples() {
        let m = TuningModel::default();
        let cf = m.central_frequencies(omega0(), Temperature(25.0)).unwrap();
        assert_eq!(cf.signal, omega0());
        assert_eq!(cf.idler, omega0());
        assert!((omega_to_wavelength(cf.signal).unwrap().0 - 810.0).abs() < 1e-9);

        let cf = m.central_frequencies(omega0(), Temperature(75.0)).unwrap();
        assert!((cf.signal.0 - 2425.50).abs() < 0.01);
        assert!((cf.idler.0 - 2225.50).abs() < 0.01);
        assert!((omega_to_wavelength(cf.signal).unwrap().0 - 776.6).abs() < 0.05);
        assert!((omega_to_wavelength(cf.idler).unwrap().0 - 846.4).abs() < 0.05);
        assert_eq!(cf.nondegeneracy().0, -200.0);
    }

    #[test]
    fn tuning_curve_branches() {
        let m = TuningModel::default();
        let curve = m
            .tuning_curve(omega0(), (Temperature(25.0), Temperature(125.0)), 11)
            .unwrap();
        assert!((curve[0].signal.0 - 810.0).abs() < 1e-9);
        assert!((curve[0].idler.0 - 810.0).abs() < 1e-9);
        for w in curve.windows(2) {
            assert!(w[1].signal.0 < w[0].signal.0);
            assert!(w[1].idler.0 > w[0].idler.0);
        }
        assert!(m
            .tuning_curve(omega0(), (Temperature(0.0), Temperature(1.0)), 1)
            .is_err());
    }

    #[test]
    fn polynomial_horner_and_slope() {
        let m = TuningModel::polynomial(vec![1.5, -0.02, 1e-4], Temperature(30.0)).unwrap();
        let x: f64 = 12.0;
        let expect = 1.5 * x - 0.02 * x * x + 1e-4 * x.powi(3);
        assert!((m.delta_at(Temperature(42.0)).unwrap().0 - expect).abs() < 1e-12);
        let dexpect = 1.5 - 0.04 * x + 3e-4 * x * x;
        assert!((m.slope_at(Temperature(42.0)).unwrap() - dexpect).abs() < 1e-12);
        assert_eq!(m.delta_at(Temperature(30.0)).unwrap().0, 0.0);
    }

    #[test]
    fn tabulated_model() {
        let m = TuningModel::tabulated(vec![(0.0, -30.0), (20.0, -5.0), (40.0, 15.0), (60.0, 50.0)]).unwrap();
        assert!((m.reference_temperature().0 - 25.0).abs() < 1e-12);
        assert!(m.delta_at(m.reference_temperature()).unwrap().0.abs() < 1e-9);
        assert!((m.delta_at(Temperature(50.0)).unwrap().0 - 32.5).abs() < 1e-12);
        assert!(matches!(m.delta_at(Temperature(61.0)), Err(Error::OutOfRange { .. })));
        assert!(matches!(m.delta_at(Temperature(-0.1)), Err(Error::OutOfRange { .. })));
        assert!(TuningModel::tabulated(vec![(0.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(TuningModel::tabulated(vec![(0.0, -1.0), (1.0, 2.0), (2.0, -1.0)]).is_err());
        assert!(TuningModel::tabulated(vec![(1.0, -1.0), (0.0, 2.0)]).is_err());
        // Zero exactly on a sample point.
        let m = TuningModel::tabulated(vec![(0.0, -1.0), (10.0, 0.0), (20.0, 3.0)]).unwrap();
        assert_eq!(m.reference_temperature().0, 10.0);
    }

    #[test]
    fn tabulated_agrees_with_polynomial_at_samples() {
        let poly = TuningModel::polynomial(vec![2.0, 0.01], Temperature(25.0)).unwrap();
        let temps: Vec<f64> = (0..21).map(|k| -75.0 + 10.0 * k as f64).collect();
        let table = poly.tabulate(&temps).unwrap();
        for &t in &temps {
            let a = poly.delta_at(Temperature(t)).unwrap().0;
            let b = table.delta_at(Temperature(t)).unwrap().0;
            assert!((a - b).abs() < 1e-9, "{t}: {a} vs {b}");
        }
    }

    #[test]
    fn csv_loading() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tune.csv");
        std::fs::write(&path, "temperature_C,delta_rad_per_ps\n0,-50\n50,50\n").unwrap();
        let m = TuningModel::from_csv(&path).unwrap();
        assert_eq!(m.reference_temperature().0, 25.0);
        std::fs::write(&path, "0,-50\n50,50\n").unwrap();
        assert!(TuningModel::from_csv(&path).is_err());
        std::fs::write(&path, "temperature_C,delta_rad_per_ps\n0,abc\n").unwrap();
        assert!(TuningModel::from_csv(&path).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_split_is_exact(t in -200.0f64..300.0, slope in -5.0f64..5.0) {
            let m = TuningModel::linear(slope, Temperature(25.0)).unwrap();
            let cf = m.central_frequencies(omega0(), Temperature(t)).unwrap();
            prop_assert_eq!(cf.signal.0 + cf.idler.0, 2.0 * omega0().0);
        }

        #[test]
        fn negated_coefficients_swap_branches(
            t in -75.0f64..125.0,
            c1 in -4.0f64..4.0,
            c2 in -0.05f64..0.05,
        ) {
            let m = TuningModel::polynomial(vec![c1, c2], Temperature(25.0)).unwrap();
            let n = TuningModel::polynomial(vec![-c1, -c2], Temperature(25.0)).unwrap();
            let a = m.central_frequencies(omega0(), Temperature(t)).unwrap();
            let b = n.central_frequencies(omega0(), Temperature(t)).unwrap();
            prop_assert_eq!(a.signal, b.idler);
            prop_assert_eq!(a.idler, b.signal);
        }
    }
}
