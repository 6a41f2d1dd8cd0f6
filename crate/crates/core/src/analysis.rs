//! Fourier analysis of P(τ, T) along the delay, peak detection, line
//! tracking across temperature and level reconstruction.
//!
//! Frequencies are reported displaced by ω₀: an X vertex at ε̃_j marks the
//! level ε_j = ε̃_j + ω₀.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tpa::SignalGrid;
use crate::tuning::TuningModel;
use crate::units::{omega_to_wavelength, AngularFrequency, Temperature, UniformAxis, Wavelength};

pub const MIN_DELAY_SAMPLES: usize = 256;
/// Bins zeroed on each side of DC, in addition to DC itself.
pub const DC_GUARD_BINS: usize = 1;
pub const MIN_TRACK_ROWS: usize = 5;
/// Non-DC content below this fraction of the largest raw magnitude is zeroed.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    None,
    #[default]
    Hann,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::None => vec![1.0; n],
            // Periodic Hann.
            Window::Hann => (0..n)
                .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos())
                .collect(),
        }
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Window::None),
            "hann" => Ok(Window::Hann),
            other => Err(Error::config(
                "window",
                format!("expected `hann` or `none`, got `{other}`"),
            )),
        }
    }
}

/// Tunable constants of peak detection, tracking and reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisParams {
    pub window: Window,
    /// Peak threshold as a fraction of the row maximum.
    pub threshold: f64,
    /// Association gate in bins, added to |dΔ/dT|·δT.
    pub gate_bins: f64,
    /// Rows a track may skip before it is closed.
    pub max_gap_rows: usize,
    /// Samples used to extrapolate a track to the next row.
    pub prediction_samples: usize,
    /// Minimum fraction of temperature rows a track must span.
    pub min_coverage: f64,
    /// Straight if |slope| is below this fraction of |dΔ/dT(T₀)|.
    pub straight_slope_fraction: f64,
    /// Largest intercept difference, in bins, for an X-branch pair.
    pub pair_tolerance_bins: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            window: Window::Hann,
            threshold: 0.05,
            gate_bins: 3.0,
            max_gap_rows: 5,
            prediction_samples: 12,
            min_coverage: 0.6,
            straight_slope_fraction: 0.2,
            pair_tolerance_bins: 4.0,
        }
    }
}

impl AnalysisParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::config(
                "analysis.threshold",
                format!("must lie in (0, 1), got {}", self.threshold),
            ));
        }
        if !(self.gate_bins > 0.0) {
            return Err(Error::config("analysis.gate_bins", "must be positive"));
        }
        if self.prediction_samples < 2 {
            return Err(Error::config("analysis.prediction_samples", "must be at least 2"));
        }
        if !(self.min_coverage > 0.0 && self.min_coverage <= 1.0) {
            return Err(Error::config("analysis.min_coverage", "must lie in (0, 1]"));
        }
        if !(self.straight_slope_fraction > 0.0 && self.straight_slope_fraction < 1.0) {
            return Err(Error::config("analysis.straight_slope_fraction", "must lie in (0, 1)"));
        }
        if !(self.pair_tolerance_bins > 0.0) {
            return Err(Error::config("analysis.pair_tolerance_bins", "must be positive"));
        }
        Ok(())
    }
}

/// Normalized |FFT| of each temperature row over a frequency axis symmetric
/// about zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMap {
    /// Row-major: rows index temperature, columns index frequency.
    pub magnitudes: Vec<f64>,
    /// n_tau − 1 bins, k·δω for k = −(n/2 − 1) … n/2 − 1 (the Nyquist bin
    /// is dropped).
    pub freq_axis: UniformAxis,
    pub temp_axis: UniformAxis,
    pub window: Window,
    /// Maximum before normalization.
    pub scale: f64,
}

impl SpectrumMap {
    pub fn rows(&self) -> usize {
        self.temp_axis.len
    }

    pub fn cols(&self) -> usize {
        self.freq_axis.len
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let n = self.cols();
        &self.magnitudes[r * n..(r + 1) * n]
    }

    pub fn bin_width(&self) -> f64 {
        self.freq_axis.step()
    }

    fn zero_column(&self) -> usize {
        self.cols() / 2
    }
}

/// Complex transform Σ_n w_n x_n e^{iω_kτ_n} over the full symmetric axis,
/// before DC suppression and normalization. Index `n/2 − 1 + k` holds bin k.
pub fn row_transform(row: &[f64], tau_axis: &UniformAxis, window: Window) -> Result<Vec<Complex64>> {
    let mut planner = FftPlanner::new();
    row_transform_with(&mut planner, row, tau_axis, &window.coefficients(row.len()))
}

fn row_transform_with(
    planner: &mut FftPlanner<f64>,
    row: &[f64],
    tau_axis: &UniformAxis,
    window: &[f64],
) -> Result<Vec<Complex64>> {
    let n = row.len();
    if n != tau_axis.len {
        return Err(Error::Axis(format!("row has {n} samples, delay axis {}", tau_axis.len)));
    }
    if n < MIN_DELAY_SAMPLES {
        return Err(Error::Axis(format!(
            "at least {MIN_DELAY_SAMPLES} delay samples required, got {n}"
        )));
    }
    if !n.is_multiple_of(2) {
        return Err(Error::Axis(format!("delay sample count must be even, got {n}")));
    }
    let mut buf: Vec<Complex64> = row
        .iter()
        .zip(window)
        .map(|(&x, &w)| Complex64::new(x * w, 0.0))
        .collect();
    planner.plan_fft_inverse(n).process(&mut buf);
    // Inverse FFT gives Σ x_n e^{+2πikn/n}; reorder to k = −(n/2−1) … n/2−1
    // and restore the phase of the first delay sample.
    let half = n / 2;
    let dw = 2.0 * PI / (n as f64 * tau_axis.step());
    Ok((1..n)
        .map(|j| {
            let k = j as isize - half as isize;
            let idx = k.rem_euclid(n as isize) as usize;
            buf[idx] * Complex64::from_polar(1.0, k as f64 * dw * tau_axis.start)
        })
        .collect())
}

fn frequency_axis(n: usize, tau_axis: &UniformAxis) -> Result<UniformAxis> {
    let dw = 2.0 * PI / (n as f64 * tau_axis.step());
    let kmax = (n / 2 - 1) as f64;
    UniformAxis::new(-kmax * dw, kmax * dw, n - 1)
}

/// Fourier magnitude of every temperature row along τ, with DC and its two
/// neighbours zeroed and the map scaled to a global maximum of 1. Rows are
/// transformed in parallel.
pub fn delay_spectrum(grid: &SignalGrid, window: Window) -> Result<SpectrumMap> {
    let n = grid.cols();
    let axis = grid.tau_axis;
    if axis.len != n {
        return Err(Error::Axis("delay axis length disagrees with grid".into()));
    }
    let freq_axis = frequency_axis(n, &axis)?;
    let coeffs = window.coefficients(n);
    let mut rows: Vec<Vec<f64>> = (0..grid.rows())
        .into_par_iter()
        .map_init(FftPlanner::new, |planner, r| {
            row_transform_with(planner, grid.row(r), &axis, &coeffs).map(|t| t.iter().map(|c| c.norm()).collect())
        })
        .collect::<Result<_>>()?;

    let zero = (n - 1) / 2;
    let raw_max = rows.iter().flatten().copied().fold(0.0, f64::max);
    let mut magnitudes = Vec::with_capacity(rows.len() * (n - 1));
    for row in rows.iter_mut() {
        row[zero - DC_GUARD_BINS..=zero + DC_GUARD_BINS].fill(0.0);
        magnitudes.extend_from_slice(row);
    }
    let mut scale = magnitudes.iter().copied().fold(0.0, f64::max);
    // What survives DC suppression at rounding level is not spectrum.
    if scale <= NOISE_FLOOR * raw_max {
        magnitudes.iter_mut().for_each(|m| *m = 0.0);
        scale = 0.0;
    } else {
        magnitudes.iter_mut().for_each(|m| *m /= scale);
    }
    Ok(SpectrumMap {
        magnitudes,
        freq_axis,
        temp_axis: grid.temp_axis,
        window,
        scale,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Refined frequency, rad/ps (displaced axis).
    pub frequency: AngularFrequency,
    pub magnitude: f64,
    /// Column of the sampled maximum.
    pub bin: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowPeaks {
    pub temperature: Temperature,
    pub peaks: Vec<Peak>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakTable {
    pub rows: Vec<RowPeaks>,
    pub bin_width: f64,
    pub threshold: f64,
}

/// Local maxima on the positive-frequency half above `threshold` times the
/// row maximum, refined by a parabola through the log magnitudes of the
/// maximum and its two neighbours.
pub fn detect_peaks(map: &SpectrumMap, threshold: f64) -> Result<PeakTable> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::config(
            "threshold",
            format!("must lie in (0, 1), got {threshold}"),
        ));
    }
    let zero = map.zero_column();
    let dw = map.bin_width();
    let rows = (0..map.rows())
        .map(|r| {
            let half = &map.row(r)[zero..];
            let row_max = half.iter().copied().fold(0.0, f64::max);
            let floor = threshold * row_max;
            let mut peaks = Vec::new();
            if row_max > 0.0 {
                for k in 1..half.len() - 1 {
                    let (a, b, c) = (half[k - 1], half[k], half[k + 1]);
                    if b > a && b >= c && b >= floor {
                        let offset = parabolic_offset(a, b, c);
                        peaks.push(Peak {
                            frequency: AngularFrequency((k as f64 + offset) * dw),
                            magnitude: b,
                            bin: zero + k,
                        });
                    }
                }
            }
            RowPeaks {
                temperature: Temperature(map.temp_axis.value(r)),
                peaks,
            }
        })
        .collect();
    Ok(PeakTable {
        rows,
        bin_width: dw,
        threshold,
    })
}

/// Vertex offset in (−½, ½) of the parabola through (−1, a), (0, b), (1, c)
/// in log magnitude; falls back to linear magnitude when a neighbour is zero.
fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let (a, b, c) = if a > 0.0 && c > 0.0 {
        (a.ln(), b.ln(), c.ln())
    } else {
        (a, b, c)
    };
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return 0.0;
    }
    (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineClass {
    /// Rises with Δ(T): ε̃_j + Δ.
    XBranchPlus,
    /// Falls with Δ(T): ε̃_j − Δ.
    XBranchMinus,
    /// Temperature independent: |ε_j − ε_k| or ε̃_j + ε̃_k.
    Straight,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSample {
    pub row: usize,
    pub temperature: Temperature,
    pub frequency: AngularFrequency,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<LineSample>,
    /// Fitted dω/dT, rad/ps per °C.
    pub slope: f64,
    pub slope_std_error: f64,
    /// Fitted frequency at the degeneracy temperature T₀.
    pub intercept: AngularFrequency,
    pub class: LineClass,
}

impl Trajectory {
    pub fn sample_at_row(&self, row: usize) -> Option<&LineSample> {
        self.samples.iter().find(|s| s.row == row)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSet {
    pub trajectories: Vec<Trajectory>,
    pub bin_width: f64,
    pub reference_temperature: Temperature,
    /// |dΔ/dT| at T₀.
    pub tuning_slope: f64,
}

impl LineSet {
    pub fn of_class(&self, class: LineClass) -> impl Iterator<Item = &Trajectory> {
        self.trajectories.iter().filter(move |t| t.class == class)
    }
}

struct Hypothesis {
    /// Slope sign relative to Δ(T): +1, −1 or 0.
    sign: f64,
    /// (row, peak index) pairs.
    hits: Vec<(usize, usize)>,
    /// f − sign·Δ(T) of each hit, an estimate of the line's offset.
    offsets: Vec<f64>,
    misses: usize,
}

/// Associates peaks across temperature rows into line trajectories.
///
/// Every peak not already explained seeds three hypotheses, one per line
/// family: f(T) = c + Δ(T), c − Δ(T) and c. A hypothesis predicts its next
/// position from the mean offset c of its latest samples and claims the
/// nearest peak within the gate `gate_bins` bins + |dΔ/dT|·δT; one peak may
/// be claimed by several lines where they cross. Hypotheses that miss more
/// than `max_gap_rows` consecutive rows stop. Survivors must cover
/// `min_coverage` of the rows; duplicates sharing half their samples with a
/// longer trajectory are dropped. Each trajectory is then fitted with a
/// straight line and classified by its fitted slope.
pub fn track_lines(peaks: &PeakTable, tuning: &TuningModel, params: &AnalysisParams) -> Result<LineSet> {
    params.validate()?;
    let rows = peaks.rows.len();
    if rows < MIN_TRACK_ROWS {
        return Err(Error::InsufficientData(format!(
            "line tracking needs at least {MIN_TRACK_ROWS} temperature rows, got {rows}"
        )));
    }
    let dw = peaks.bin_width;
    let step = (peaks.rows[1].temperature.0 - peaks.rows[0].temperature.0).abs();
    let t0 = tuning.reference_temperature();
    let tuning_slope = tuning.slope_at(t0)?.abs();

    let mut active: Vec<Hypothesis> = Vec::new();
    let mut finished: Vec<Hypothesis> = Vec::new();
    for (r, row) in peaks.rows.iter().enumerate() {
        let delta = tuning.delta_at(row.temperature)?.0;
        let gate = params.gate_bins * dw + tuning.slope_at(row.temperature)?.abs() * step;
        let mut claimed = std::collections::HashSet::new();
        for h in active.iter_mut() {
            let recent = &h.offsets[h.offsets.len().saturating_sub(params.prediction_samples)..];
            let predicted = recent.iter().sum::<f64>() / recent.len() as f64 + h.sign * delta;
            let nearest = row
                .peaks
                .iter()
                .enumerate()
                .map(|(i, p)| (i, (p.frequency.0 - predicted).abs()))
                .filter(|&(_, d)| d <= gate)
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match nearest {
                Some((i, _)) => {
                    h.hits.push((r, i));
                    h.offsets.push(row.peaks[i].frequency.0 - h.sign * delta);
                    h.misses = 0;
                    claimed.insert((i, h.sign as i8));
                }
                None => h.misses += 1,
            }
        }
        let (keep, done): (Vec<_>, Vec<_>) = active.into_iter().partition(|h| h.misses <= params.max_gap_rows);
        active = keep;
        finished.extend(done);
        for (i, p) in row.peaks.iter().enumerate() {
            for sign in [1.0, -1.0, 0.0] {
                if !claimed.contains(&(i, sign as i8)) {
                    active.push(Hypothesis {
                        sign,
                        hits: vec![(r, i)],
                        offsets: vec![p.frequency.0 - sign * delta],
                        misses: 0,
                    });
                }
            }
        }
    }
    finished.extend(active);

    let min_rows = (params.min_coverage * rows as f64).ceil() as usize;
    let mut candidates: Vec<Hypothesis> = finished.into_iter().filter(|h| h.hits.len() >= min_rows).collect();
    candidates.sort_by(|a, b| b.hits.len().cmp(&a.hits.len()).then(a.hits.cmp(&b.hits)));
    let mut kept: Vec<Hypothesis> = Vec::new();
    for h in candidates {
        let duplicate = kept.iter().any(|k| {
            let shared = h.hits.iter().filter(|x| k.hits.binary_search(x).is_ok()).count();
            2 * shared >= h.hits.len()
        });
        if !duplicate {
            kept.push(h);
        }
    }

    let mut trajectories: Vec<Trajectory> = kept
        .iter()
        .map(|h| {
            let samples: Vec<LineSample> = h
                .hits
                .iter()
                .map(|&(r, i)| {
                    let p = &peaks.rows[r].peaks[i];
                    LineSample {
                        row: r,
                        temperature: peaks.rows[r].temperature,
                        frequency: p.frequency,
                        magnitude: p.magnitude,
                    }
                })
                .collect();
            let fit = fit_line(&samples, t0.0);
            let class = if fit.slope.abs() < params.straight_slope_fraction * tuning_slope {
                LineClass::Straight
            } else if fit.slope > 0.0 {
                LineClass::XBranchPlus
            } else {
                LineClass::XBranchMinus
            };
            Trajectory {
                samples,
                slope: fit.slope,
                slope_std_error: fit.slope_std_error,
                intercept: AngularFrequency(fit.intercept),
                class,
            }
        })
        .collect();
    trajectories.sort_by(|a, b| {
        a.intercept
            .0
            .total_cmp(&b.intercept.0)
            .then(a.slope.total_cmp(&b.slope))
    });
    Ok(LineSet {
        trajectories,
        bin_width: dw,
        reference_temperature: t0,
        tuning_slope,
    })
}

struct LineFit {
    slope: f64,
    slope_std_error: f64,
    intercept: f64,
}

/// Least squares f = intercept + slope·(T − T₀).
fn fit_line(samples: &[LineSample], t0: f64) -> LineFit {
    let n = samples.len() as f64;
    let xm = samples.iter().map(|s| s.temperature.0 - t0).sum::<f64>() / n;
    let ym = samples.iter().map(|s| s.frequency.0).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.temperature.0 - t0 - xm).powi(2)).sum();
    let sxy: f64 = samples
        .iter()
        .map(|s| (s.temperature.0 - t0 - xm) * (s.frequency.0 - ym))
        .sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = ym - slope * xm;
    let rss: f64 = samples
        .iter()
        .map(|s| (s.frequency.0 - intercept - slope * (s.temperature.0 - t0)).powi(2))
        .sum();
    let slope_std_error = if samples.len() > 2 && sxx > 0.0 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    LineFit {
        slope,
        slope_std_error,
        intercept,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub epsilon_tilde: AngularFrequency,
    pub epsilon: AngularFrequency,
    pub lambda: Wavelength,
    pub uncertainty: AngularFrequency,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedLine {
    pub frequency: AngularFrequency,
    pub class: LineClass,
    /// Set for an X-branch that found no partner.
    pub unpaired: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructedLevels {
    pub levels: Vec<Level>,
    pub combined_lines: Vec<CombinedLine>,
    pub bin_width: f64,
    pub omega0: AngularFrequency,
}

impl ReconstructedLevels {
    pub fn has_warnings(&self) -> bool {
        self.combined_lines.iter().any(|c| c.unpaired)
    }
}

/// Pairs rising and falling X-branches whose intercepts at T₀ lie within
/// `pair_tolerance_bins` and places a level at their mean intercept plus ω₀.
pub fn reconstruct_levels(
    lines: &LineSet,
    omega0: AngularFrequency,
    params: &AnalysisParams,
) -> Result<ReconstructedLevels> {
    let tol = params.pair_tolerance_bins * lines.bin_width;
    let plus: Vec<&Trajectory> = lines.of_class(LineClass::XBranchPlus).collect();
    let minus: Vec<&Trajectory> = lines.of_class(LineClass::XBranchMinus).collect();

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in plus.iter().enumerate() {
        for (j, m) in minus.iter().enumerate() {
            let d = (p.intercept.0 - m.intercept.0).abs();
            if d < tol {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut plus_used = vec![false; plus.len()];
    let mut minus_used = vec![false; minus.len()];
    let mut levels = Vec::new();
    for (d, i, j) in candidates {
        if plus_used[i] || minus_used[j] {
            continue;
        }
        plus_used[i] = true;
        minus_used[j] = true;
        let tilde = 0.5 * (plus[i].intercept.0 + minus[j].intercept.0);
        let epsilon = AngularFrequency(tilde + omega0.0);
        levels.push(Level {
            epsilon_tilde: AngularFrequency(tilde),
            epsilon,
            lambda: omega_to_wavelength(epsilon)?,
            uncertainty: AngularFrequency((0.5 * d).max(0.5 * lines.bin_width)),
        });
    }
    if levels.is_empty() {
        return Err(Error::InsufficientData("no rising/falling X-branch pair found".into()));
    }
    levels.sort_by(|a, b| a.epsilon_tilde.0.total_cmp(&b.epsilon_tilde.0));

    let mut combined_lines: Vec<CombinedLine> = lines
        .of_class(LineClass::Straight)
        .map(|t| CombinedLine {
            frequency: t.intercept,
            class: LineClass::Straight,
            unpaired: false,
        })
        .collect();
    for (branches, used) in [(&plus, &plus_used), (&minus, &minus_used)] {
        for (t, _) in branches.iter().zip(used.iter()).filter(|(_, &u)| !u) {
            log::warn!(
                "X-branch with intercept {:.1} rad/ps and slope {:.3} has no partner",
                t.intercept.0,
                t.slope
            );
            combined_lines.push(CombinedLine {
                frequency: t.intercept,
                class: t.class,
                unpaired: true,
            });
        }
    }
    combined_lines.sort_by(|a, b| a.frequency.0.total_cmp(&b.frequency.0));
    Ok(ReconstructedLevels {
        levels,
        combined_lines,
        bin_width: lines.bin_width,
        omega0,
    })
}
