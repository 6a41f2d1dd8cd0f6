//! Grid files: CSV (lossless text), a raw little-endian binary layout, and
//! 16-bit PGM / viridis PNG previews. Every grid gets a `.meta.json`
//! companion carrying its axes, normalization and provenance.
//!
//! Files share a base path: `out/signal` becomes `out/signal.csv`,
//! `out/signal.bin`, `out/signal.meta.json` and so on.
//!
//! Binary layout: `b"ETPA"`, then `rows`, `cols` and the format version as
//! little-endian `u32`, then `rows × cols` little-endian `f64` in row-major
//! order.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::colormap::VIRIDIS;
use super::config::OutputFormat;
use crate::analysis::{SpectrumMap, Window};
use crate::error::{Error, Result};
use crate::source::{JointSpectrum, SpectralAxes};
use crate::tpa::{NormalizationRecord, Provenance, SignalGrid};
use crate::units::{NormalizationMode, PhysicalConstants, Temperature, UniformAxis};

pub const FILE_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"ETPA";
const HEADER_LEN: usize = 16;
/// Spacing tolerance, relative to the step, when rebuilding axes from CSV.
const AXIS_TOLERANCE: f64 = 1e-9;

/// What a grid file holds, with the fields needed to rebuild it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridContent {
    Signal {
        normalization: NormalizationRecord,
        provenance: Option<Provenance>,
    },
    Spectrum {
        window: Window,
        scale: f64,
    },
    JointSpectrum {
        temperature: Temperature,
        axes: SpectralAxes,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub format_version: u32,
    pub rows: usize,
    pub cols: usize,
    pub row_axis: UniformAxis,
    pub col_axis: UniformAxis,
    pub row_label: String,
    pub col_label: String,
    /// Digest of the physical inputs, when known.
    pub config_digest: Option<String>,
    #[serde(flatten)]
    pub content: GridContent,
}

/// A row-major 2-D array with its axes, as read from or written to disk.
struct Table<'a> {
    row_axis: UniformAxis,
    col_axis: UniformAxis,
    row_label: &'a str,
    col_label: &'a str,
    values: &'a [f64],
}

pub fn meta_path(base: &Path) -> PathBuf {
    with_suffix(base, "meta.json")
}

fn with_suffix(base: &Path, ext: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Strips a known data extension so `out/signal.csv` and `out/signal` name
/// the same grid.
fn base_of(path: &Path) -> PathBuf {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv" | "bin" | "pgm" | "png") => path.with_extension(""),
        _ => path.to_path_buf(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn check_finite(path: &Path, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(Error::format(path, format!("non-finite value at flat index {k}"))),
        None => Ok(()),
    }
}

fn save_table(table: &Table, meta: &GridMetadata, base: &Path, formats: &[OutputFormat]) -> Result<Vec<PathBuf>> {
    check_finite(base, table.values)?;
    let mut written = Vec::new();
    for f in formats {
        let path = match f {
            OutputFormat::Csv => with_suffix(base, "csv"),
            OutputFormat::Bin => with_suffix(base, "bin"),
            OutputFormat::Pgm => with_suffix(base, "pgm"),
            OutputFormat::Png => with_suffix(base, "png"),
        };
        match f {
            OutputFormat::Csv => write_csv(&path, table)?,
            OutputFormat::Bin => write_bin(&path, table)?,
            OutputFormat::Pgm => write_pgm(&path, table)?,
            OutputFormat::Png => write_png(&path, table)?,
        }
        written.push(path);
    }
    let path = meta_path(base);
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, meta).map_err(|e| Error::format(&path, e.to_string()))?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// First row: corner label, then the column axis. Each following row: the
/// row-axis value, then the samples. Values are written in shortest
/// round-trip form, so reading back is bit-exact.
fn write_csv(path: &Path, t: &Table) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = |e: csv::Error| Error::format(path, e.to_string());
    let mut header = vec![format!("{}\\{}", t.row_label, t.col_label)];
    header.extend(t.col_axis.values().iter().map(|x| format!("{x:e}")));
    w.write_record(&header).map_err(err)?;
    let cols = t.col_axis.len;
    let mut record = Vec::with_capacity(cols + 1);
    for r in 0..t.row_axis.len {
        record.clear();
        record.push(format!("{:e}", t.row_axis.value(r)));
        record.extend(t.values[r * cols..(r + 1) * cols].iter().map(|x| format!("{x:e}")));
        w.write_record(&record).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct RawTable {
    row_samples: Vec<f64>,
    col_samples: Vec<f64>,
    values: Vec<f64>,
}

fn read_csv(path: &Path) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::format(path, format!("{other:?}")),
        })?;
    let parse = |s: &str, what: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::format(path, format!("{what}: `{s}` is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::format(path, format!("{what}: non-finite value")))
        }
    };
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::format(path, "empty file"))?
        .map_err(|e| Error::format(path, e.to_string()))?;
    let col_samples = header
        .iter()
        .skip(1)
        .map(|s| parse(s, "header"))
        .collect::<Result<Vec<_>>>()?;
    let mut row_samples = Vec::new();
    let mut values = Vec::new();
    for (k, rec) in records.enumerate() {
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        if rec.len() != col_samples.len() + 1 {
            return Err(Error::format(
                path,
                format!(
                    "row {} has {} cells, expected {}",
                    k + 1,
                    rec.len(),
                    col_samples.len() + 1
                ),
            ));
        }
        row_samples.push(parse(&rec[0], &format!("row {} axis", k + 1))?);
        for s in rec.iter().skip(1) {
            values.push(parse(s, &format!("row {}", k + 1))?);
        }
    }
    if row_samples.is_empty() || col_samples.is_empty() {
        return Err(Error::format(path, "grid has no data"));
    }
    Ok(RawTable {
        row_samples,
        col_samples,
        values,
    })
}

fn write_bin(path: &Path, t: &Table) -> Result<()> {
    let dim = |n: usize| u32::try_from(n).map_err(|_| Error::format(path, format!("dimension {n} exceeds u32")));
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&dim(t.row_axis.len)?.to_le_bytes()).map_err(io)?;
    w.write_all(&dim(t.col_axis.len)?.to_le_bytes()).map_err(io)?;
    w.write_all(&FILE_FORMAT_VERSION.to_le_bytes()).map_err(io)?;
    for v in t.values {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn read_bin(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::format(path, "missing ETPA header"));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[4 * k..4 * k + 4].try_into().unwrap());
    let (rows, cols, version) = (word(1) as usize, word(2) as usize, word(3));
    if version != FILE_FORMAT_VERSION {
        return Err(Error::format(path, format!("unsupported binary version {version}")));
    }
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::format(
            path,
            format!(
                "header declares {rows}×{cols} but the payload is {} bytes",
                bytes.len() - HEADER_LEN
            ),
        ));
    }
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    check_finite(path, &values)?;
    Ok((rows, cols, values))
}

/// Min-max scaling to [0, 1]. A constant grid maps to 0.5 everywhere.
fn unit_scale(values: &[f64]) -> impl Fn(f64) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    move |v| {
        if span > 0.0 {
            ((v - lo) / span).clamp(0.0, 1.0)
        } else {
            0.5
        }
    }
}

/// Binary 16-bit PGM, first row at the top.
fn write_pgm(path: &Path, t: &Table) -> Result<()> {
    let scale = unit_scale(t.values);
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    write!(w, "P5\n{} {}\n65535\n", t.col_axis.len, t.row_axis.len).map_err(io)?;
    for &v in t.values {
        let g = (scale(v) * 65535.0).round() as u16;
        w.write_all(&g.to_be_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn write_png(path: &Path, t: &Table) -> Result<()> {
    let scale = unit_scale(t.values);
    let w = create(path)?;
    let dim = |n: usize| u32::try_from(n).map_err(|_| Error::format(path, format!("dimension {n} exceeds u32")));
    let mut enc = png::Encoder::new(w, dim(t.col_axis.len)?, dim(t.row_axis.len)?);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(|e| Error::format(path, e.to_string()))?;
    let data: Vec<u8> = t
        .values
        .iter()
        .flat_map(|&v| VIRIDIS[(scale(v) * 255.0).round() as usize])
        .collect();
    writer
        .write_image_data(&data)
        .map_err(|e| Error::format(path, e.to_string()))?;
    writer.finish().map_err(|e| Error::format(path, e.to_string()))
}

fn read_meta(base: &Path) -> Result<Option<GridMetadata>> {
    let path = meta_path(base);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let meta: GridMetadata = serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
    if meta.format_version != FILE_FORMAT_VERSION {
        return Err(Error::format(
            &path,
            format!("unsupported format version {}", meta.format_version),
        ));
    }
    Ok(Some(meta))
}

/// The `config_digest` recorded beside a grid, if any.
pub fn meta_digest(base: &Path) -> Option<String> {
    read_meta(&base_of(base)).ok().flatten().and_then(|m| m.config_digest)
}

/// Row axis, column axis, row-major values, metadata.
type LoadedTable = (UniformAxis, UniformAxis, Vec<f64>, Option<GridMetadata>);

/// Reads values and axes from `path` (`.csv` or `.bin`, or a base path with
/// a CSV beside it).
fn load_table(path: &Path) -> Result<LoadedTable> {
    let base = base_of(path);
    let meta = read_meta(&base)?;
    let is_bin = path.extension().and_then(|e| e.to_str()) == Some("bin");
    if is_bin {
        let (rows, cols, values) = read_bin(path)?;
        let meta = meta.ok_or_else(|| Error::format(path, "binary grids need their .meta.json companion for axes"))?;
        if meta.rows != rows || meta.cols != cols {
            return Err(Error::format(
                path,
                format!("{rows}×{cols} payload but metadata says {}×{}", meta.rows, meta.cols),
            ));
        }
        return Ok((meta.row_axis, meta.col_axis, values, Some(meta)));
    }
    let csv_path = with_suffix(&base, "csv");
    let raw = read_csv(&csv_path)?;
    let axis =
        |s: &[f64]| UniformAxis::from_samples(s, AXIS_TOLERANCE).map_err(|e| Error::format(&csv_path, e.to_string()));
    let (mut rows, mut cols) = (axis(&raw.row_samples)?, axis(&raw.col_samples)?);
    if let Some(m) = &meta {
        if m.rows != rows.len || m.cols != cols.len {
            return Err(Error::format(
                &csv_path,
                format!("{}×{} grid but metadata says {}×{}", rows.len, cols.len, m.rows, m.cols),
            ));
        }
        rows = m.row_axis;
        cols = m.col_axis;
    }
    Ok((rows, cols, raw.values, meta))
}

pub fn save_grid(grid: &SignalGrid, base: &Path, formats: &[OutputFormat]) -> Result<Vec<PathBuf>> {
    let table = Table {
        row_axis: grid.temp_axis,
        col_axis: grid.tau_axis,
        row_label: "temperature_C",
        col_label: "tau_ps",
        values: &grid.values,
    };
    let meta = GridMetadata {
        format_version: FILE_FORMAT_VERSION,
        rows: grid.rows(),
        cols: grid.cols(),
        row_axis: grid.temp_axis,
        col_axis: grid.tau_axis,
        row_label: table.row_label.into(),
        col_label: table.col_label.into(),
        config_digest: grid.provenance.as_ref().map(|p| p.digest.clone()),
        content: GridContent::Signal {
            normalization: grid.normalization.clone(),
            provenance: grid.provenance.clone(),
        },
    };
    save_table(&table, &meta, base, formats)
}

/// Loads a signal grid. Without a metadata companion the normalization is
/// unknown and recorded as prefactor-only.
pub fn load_grid(path: &Path) -> Result<SignalGrid> {
    let (temp_axis, tau_axis, values, meta) = load_table(path)?;
    let (normalization, provenance) = match meta.map(|m| m.content) {
        Some(GridContent::Signal {
            normalization,
            provenance,
        }) => (normalization, provenance),
        Some(_) => return Err(Error::format(path, "metadata describes a different kind of grid")),
        None => {
            log::warn!("{}: no metadata companion; normalization unknown", path.display());
            (
                NormalizationRecord {
                    mode: NormalizationMode::PrefactorOnly,
                    constants: PhysicalConstants::default(),
                    pre_normalization_max: None,
                },
                None,
            )
        }
    };
    Ok(SignalGrid {
        tau_axis,
        temp_axis,
        values,
        normalization,
        provenance,
    })
}

pub fn save_spectrum(
    map: &SpectrumMap,
    base: &Path,
    formats: &[OutputFormat],
    digest: Option<&str>,
) -> Result<Vec<PathBuf>> {
    let table = Table {
        row_axis: map.temp_axis,
        col_axis: map.freq_axis,
        row_label: "temperature_C",
        col_label: "omega_rad_per_ps",
        values: &map.magnitudes,
    };
    let meta = GridMetadata {
        format_version: FILE_FORMAT_VERSION,
        rows: map.rows(),
        cols: map.cols(),
        row_axis: map.temp_axis,
        col_axis: map.freq_axis,
        row_label: table.row_label.into(),
        col_label: table.col_label.into(),
        config_digest: digest.map(str::to_owned),
        content: GridContent::Spectrum {
            window: map.window,
            scale: map.scale,
        },
    };
    save_table(&table, &meta, base, formats)
}

pub fn load_spectrum(path: &Path) -> Result<SpectrumMap> {
    let (temp_axis, freq_axis, magnitudes, meta) = load_table(path)?;
    let (window, scale) = match meta.map(|m| m.content) {
        Some(GridContent::Spectrum { window, scale }) => (window, scale),
        Some(_) => return Err(Error::format(path, "metadata describes a different kind of grid")),
        None => (Window::default(), 1.0),
    };
    Ok(SpectrumMap {
        magnitudes,
        freq_axis,
        temp_axis,
        window,
        scale,
    })
}

pub fn save_joint_spectrum(
    js: &JointSpectrum,
    base: &Path,
    formats: &[OutputFormat],
    digest: Option<&str>,
) -> Result<Vec<PathBuf>> {
    let (row_axis, col_axis, row_label, col_label) = match js.axes {
        SpectralAxes::SignalIdler { signal, idler } => (signal, idler, "omega_s_rad_per_ps", "omega_i_rad_per_ps"),
        SpectralAxes::SumDifference { sum, difference } => (sum, difference, "Omega_rad_per_ps", "nu_rad_per_ps"),
    };
    let table = Table {
        row_axis,
        col_axis,
        row_label,
        col_label,
        values: &js.values,
    };
    let meta = GridMetadata {
        format_version: FILE_FORMAT_VERSION,
        rows: js.rows(),
        cols: js.cols(),
        row_axis,
        col_axis,
        row_label: row_label.into(),
        col_label: col_label.into(),
        config_digest: digest.map(str::to_owned),
        content: GridContent::JointSpectrum {
            temperature: js.temperature,
            axes: js.axes,
        },
    };
    save_table(&table, &meta, base, formats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::NormalizationMode;

    fn sample_grid() -> SignalGrid {
        let tau_axis = UniformAxis::new(-1.0, 1.0, 6).unwrap();
        let temp_axis = UniformAxis::new(0.0, 50.0, 3).unwrap();
        let values = (0..18).map(|k| (k as f64 * 0.731).sin().abs() / 3.0 + 1e-300).collect();
        SignalGrid {
            tau_axis,
            temp_axis,
            values,
            normalization: NormalizationRecord {
                mode: NormalizationMode::GridMax,
                constants: PhysicalConstants::default(),
                pre_normalization_max: Some(0.123456789),
            },
            provenance: None,
        }
    }

    const ALL: [OutputFormat; 4] = [
        OutputFormat::Csv,
        OutputFormat::Bin,
        OutputFormat::Pgm,
        OutputFormat::Png,
    ];

    #[test]
    fn csv_and_binary_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("sub/signal");
        let grid = sample_grid();
        let written = save_grid(&grid, &base, &ALL).unwrap();
        assert_eq!(written.len(), 5);
        for ext in ["csv", "bin"] {
            let back = load_grid(&with_suffix(&base, ext)).unwrap();
            assert_eq!(back, grid, "{ext}");
        }
        assert_eq!(load_grid(&base).unwrap(), grid);
    }

    #[test]
    fn csv_without_metadata_rebuilds_axes() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("g");
        let grid = sample_grid();
        save_grid(&grid, &base, &[OutputFormat::Csv]).unwrap();
        std::fs::remove_file(meta_path(&base)).unwrap();
        let back = load_grid(&with_suffix(&base, "csv")).unwrap();
        assert_eq!(back.values, grid.values);
        assert_eq!(back.tau_axis, grid.tau_axis);
        assert_eq!(back.temp_axis, grid.temp_axis);
    }

    #[test]
    fn binary_rejects_bad_header_and_size() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("g");
        save_grid(&sample_grid(), &base, &[OutputFormat::Bin]).unwrap();
        let bin = with_suffix(&base, "bin");
        let bytes = std::fs::read(&bin).unwrap();

        std::fs::write(&bin, &bytes[..bytes.len() - 8]).unwrap();
        assert!(load_grid(&bin).unwrap_err().to_string().contains("payload"));

        let mut bad = bytes.clone();
        bad[0] = b'X';
        std::fs::write(&bin, &bad).unwrap();
        assert!(load_grid(&bin).unwrap_err().to_string().contains("header"));

        let mut nan = bytes.clone();
        nan[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        std::fs::write(&bin, &nan).unwrap();
        assert!(load_grid(&bin).unwrap_err().to_string().contains("non-finite"));
    }

    #[test]
    fn ragged_or_non_numeric_csv_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "T\\tau,0,1,2\n0,1,2\n").unwrap();
        assert!(load_grid(&path).is_err());
        std::fs::write(&path, "T\\tau,0,1\n0,1,abc\n1,1,1\n").unwrap();
        assert!(load_grid(&path).unwrap_err().to_string().contains("abc"));
        std::fs::write(&path, "T\\tau,0,1\n0,1,NaN\n1,1,1\n").unwrap();
        assert!(load_grid(&path).is_err());
    }

    #[test]
    fn non_finite_grid_is_not_written() {
        let dir = tempfile::tempdir().unwrap();
        let mut grid = sample_grid();
        grid.values[3] = f64::INFINITY;
        assert!(save_grid(&grid, &dir.path().join("g"), &ALL).is_err());
    }

    #[test]
    fn pgm_scaling_and_constant_grid() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("g");
        let mut grid = sample_grid();
        save_grid(&grid, &base, &[OutputFormat::Pgm]).unwrap();
        let bytes = std::fs::read(with_suffix(&base, "pgm")).unwrap();
        let header = b"P5\n6 3\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        let pixels: Vec<u16> = bytes[header.len()..]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        assert_eq!(pixels.len(), 18);
        assert_eq!(*pixels.iter().max().unwrap(), 65535);
        assert_eq!(*pixels.iter().min().unwrap(), 0);

        grid.values.iter_mut().for_each(|v| *v = 0.25);
        save_grid(&grid, &base, &[OutputFormat::Pgm]).unwrap();
        let bytes = std::fs::read(with_suffix(&base, "pgm")).unwrap();
        assert!(bytes[header.len()..]
            .chunks_exact(2)
            .all(|c| u16::from_be_bytes([c[0], c[1]]) == 32768));
    }

    #[test]
    fn png_decodes_to_grid_shape() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("g");
        save_grid(&sample_grid(), &base, &[OutputFormat::Png]).unwrap();
        let decoder = png::Decoder::new(std::io::BufReader::new(File::open(with_suffix(&base, "png")).unwrap()));
        let reader = decoder.read_info().unwrap();
        assert_eq!((reader.info().width, reader.info().height), (6, 3));
    }

    #[test]
    fn spectrum_round_trip_keeps_window_and_scale() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("spec");
        let map = SpectrumMap {
            magnitudes: vec![0.0, 0.5, 1.0, 0.25, 0.0, 0.75],
            freq_axis: UniformAxis::new(-1.0, 1.0, 3).unwrap(),
            temp_axis: UniformAxis::new(10.0, 20.0, 2).unwrap(),
            window: Window::None,
            scale: 42.0,
        };
        save_spectrum(&map, &base, &[OutputFormat::Csv], Some("abc")).unwrap();
        assert_eq!(load_spectrum(&base).unwrap(), map);
        assert!(load_grid(&base).is_err());
    }
}
