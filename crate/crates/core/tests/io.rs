use std::fs;

use ssmrpe::embed::Method;
use ssmrpe::eval::{ClassRow, MetricsReport, Stat};
use ssmrpe::io::{
    decode_class_map, export_metrics, load_cube, load_labels, render_class_map, save_cube, save_labels,
    DEFAULT_PALETTE,
};
use ssmrpe::{HsiError, HyperCube, LabelRaster};

fn stat(mean: f64, std: f64) -> Stat {
    Stat { mean, std }
}

#[test]
fn metrics_csv_matches_golden_file() {
    let row = |class, train, test, mean, std| ClassRow {
        class,
        train,
        test,
        accuracy: stat(mean, std),
    };
    let report = MetricsReport {
        method: Method::Ssmrpe,
        classes: vec![
            row(1, 10, 246, 97.2749, 0.5912),
            row(2, 10, 246, 88.0071, 12.3488),
            row(3, 5, 0, f64::NAN, f64::NAN),
        ],
        oa: stat(92.6372, 1.0012),
        aa: stat(92.641, 0.9987),
        kappa: stat(90.1251, 1.4999),
        repeats: 10,
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("metrics.csv");
    export_metrics(&report, &path).unwrap();
    let golden = include_bytes!("fixtures/metrics_golden.csv");
    assert_eq!(fs::read(&path).unwrap(), golden.to_vec());
}

#[test]
fn atomic_writes_leave_no_temporaries() {
    let dir = tempfile::tempdir().unwrap();
    let cube = HyperCube::new(2, 3, 2, (0..12).map(|v| v as f64 * 0.25).collect()).unwrap();
    let path = dir.path().join("cube.hsx");
    save_cube(&cube, &path).unwrap();
    // Overwrite in place.
    save_cube(&cube, &path).unwrap();
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("cube.hsx")]);
    assert_eq!(load_cube(&path).unwrap(), cube);
}

#[test]
fn missing_and_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    let missing = load_cube(&dir.path().join("nope.hsx")).unwrap_err();
    assert_eq!(missing.exit_code(), 2);
    let bad = dir.path().join("bad.hsl");
    fs::write(&bad, b"HSL1\x02\x00\x00\x00").unwrap();
    assert!(matches!(load_labels(&bad), Err(HsiError::Format { offset: 8, .. })));
}

#[test]
fn f32_payload_is_lossless_for_f32_values() {
    let values: Vec<f64> = [0.1f32, -3.5, 1e-7, 65504.0, f32::MIN_POSITIVE, 7.25]
        .iter()
        .map(|&v| v as f64)
        .collect();
    let cube = HyperCube::new(1, 2, 3, values).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.hsx");
    save_cube(&cube, &path).unwrap();
    let back = load_cube(&path).unwrap();
    assert_eq!(back, cube);
    assert_eq!(fs::metadata(&path).unwrap().len(), 20 + 4 * 6);
}

#[test]
fn class_map_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let labels = LabelRaster::new(4, 5, 3, (0..20).map(|i| (i % 4) as u16).collect()).unwrap();
    let png = dir.path().join("map.png");
    render_class_map(&labels, &DEFAULT_PALETTE, &png).unwrap();
    assert_eq!(&fs::read(&png).unwrap()[..8], b"\x89PNG\r\n\x1a\n");
    let back = decode_class_map(&fs::read(&png).unwrap(), &DEFAULT_PALETTE, 3).unwrap();
    assert_eq!(back, labels);
    let lpath = dir.path().join("l.hsl");
    save_labels(&labels, &lpath).unwrap();
    assert_eq!(load_labels(&lpath).unwrap(), labels);
}
