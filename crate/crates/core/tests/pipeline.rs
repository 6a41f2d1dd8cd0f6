use etpa::analysis::{delay_spectrum, detect_peaks, reconstruct_levels, track_lines};
use etpa::io::{load_grid, load_spectrum, parse_config, save_grid, save_spectrum, OutputFormat};
use etpa::tpa_grid;

const CONFIG: &str = r#"{
    "version": 1,
    "levels": { "intermediate_wavelengths_nm": [563, 612] },
    "source": { "pump_wavelength_nm": 405, "entanglement_time_ps": 0.87 },
    "grid": { "temperature": { "min": -25, "max": 75, "samples": 51 } },
    "analysis": { "window": "hann", "threshold": 0.05 }
}"#;

#[test]
fn grid_survives_disk_and_still_reconstructs() {
    let cfg = parse_config(CONFIG, std::path::Path::new(".")).unwrap();
    let grid = tpa_grid(&cfg.levels, &cfg.source, &cfg.grid, &cfg.normalization).unwrap();
    assert!(grid.normalization.pre_normalization_max.is_some());

    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("signal");
    save_grid(&grid, &base, &[OutputFormat::Csv, OutputFormat::Bin]).unwrap();
    let from_csv = load_grid(&base.with_extension("csv")).unwrap();
    let from_bin = load_grid(&base.with_extension("bin")).unwrap();
    assert_eq!(from_csv, grid);
    assert_eq!(from_bin, grid);

    let map = delay_spectrum(&from_csv, cfg.analysis.window).unwrap();
    let spec_base = dir.path().join("spectrum");
    save_spectrum(&map, &spec_base, &[OutputFormat::Csv], Some(&cfg.digest)).unwrap();
    let map = load_spectrum(&spec_base).unwrap();

    let peaks = detect_peaks(&map, cfg.analysis.threshold).unwrap();
    let lines = track_lines(&peaks, cfg.source.tuning(), &cfg.analysis).unwrap();
    let rec = reconstruct_levels(&lines, cfg.source.omega0(), &cfg.analysis).unwrap();
    let mut nm: Vec<f64> = rec.levels.iter().map(|l| l.lambda.0).collect();
    nm.sort_by(f64::total_cmp);
    assert_eq!(nm.len(), 2);
    assert!((nm[0] - 563.0).abs() < 2.0 && (nm[1] - 612.0).abs() < 2.0, "{nm:?}");
    assert!(!rec.has_warnings());
}

#[test]
fn pulsed_config_grid_is_finite() {
    let text = CONFIG.replace(
        r#""entanglement_time_ps": 0.87 }"#,
        r#""entanglement_time_ps": 0.87, "pump": { "kind": "pulsed", "duration_ps": 0.435 } }"#,
    );
    let cfg = parse_config(&text, std::path::Path::new(".")).unwrap();
    let grid = tpa_grid(&cfg.levels, &cfg.source, &cfg.grid, &cfg.normalization).unwrap();
    assert!(grid.values.iter().all(|v| v.is_finite() && *v >= 0.0));
    assert_eq!(grid.max(), 1.0);
}
