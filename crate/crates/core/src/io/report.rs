//! CSV output: metric tables, sweep grids, projections and embeddings.
//! RFC 4180 quoting, LF line endings.

use std::path::Path;

use super::format::write_atomic;
use crate::cube::{FeatureMatrix, HyperCube};
use crate::embed::EmbeddingModel;
use crate::error::{HsiError, Result};
use crate::eval::{MetricsReport, Stat, SweepCell};

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| HsiError::Io(std::io::Error::other(e.to_string())))
}

fn csv_err(e: csv::Error) -> HsiError {
    HsiError::Io(std::io::Error::other(e.to_string()))
}

/// Two decimals; NaN (no data) renders empty and negative zero as zero.
pub fn fixed2(v: f64) -> String {
    if v.is_nan() {
        return String::new();
    }
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

fn stat_cells(s: &Stat) -> [String; 2] {
    [fixed2(s.mean), fixed2(s.std)]
}

/// Table with one row per class, then OA, AA and Kappa rows. Accuracies are
/// percentages and kappa is scaled by 100.
pub fn metrics_csv(report: &MetricsReport) -> Result<Vec<u8>> {
    let mut w = csv_writer();
    w.write_record(["Class", "Train", "Test", "Mean", "Std"]).map_err(csv_err)?;
    for row in &report.classes {
        let [m, s] = stat_cells(&row.accuracy);
        w.write_record([row.class.to_string(), row.train.to_string(), row.test.to_string(), m, s])
            .map_err(csv_err)?;
    }
    let train: usize = report.classes.iter().map(|r| r.train).sum();
    let test: usize = report.classes.iter().map(|r| r.test).sum();
    let [m, s] = stat_cells(&report.oa);
    w.write_record(["OA".to_string(), train.to_string(), test.to_string(), m, s])
        .map_err(csv_err)?;
    for (name, stat) in [("AA", &report.aa), ("Kappa", &report.kappa)] {
        let [m, s] = stat_cells(stat);
        w.write_record([name.to_string(), String::new(), String::new(), m, s])
            .map_err(csv_err)?;
    }
    finish(w)
}

pub fn export_metrics(report: &MetricsReport, path: &Path) -> Result<()> {
    write_atomic(path, &metrics_csv(report)?)
}

pub fn sweep_csv(cells: &[SweepCell]) -> Result<Vec<u8>> {
    let mut w = csv_writer();
    w.write_record(["w", "k", "oa_mean", "oa_std", "aa_mean", "aa_std", "kappa_mean", "kappa_std"])
        .map_err(csv_err)?;
    for c in cells {
        let mut rec = vec![c.w.to_string(), c.k.to_string()];
        for s in [&c.oa, &c.aa, &c.kappa] {
            rec.extend(stat_cells(s));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

pub fn export_sweep(cells: &[SweepCell], path: &Path) -> Result<()> {
    write_atomic(path, &sweep_csv(cells)?)
}

/// Eigenvalue row, then one row per band holding the training mean and the
/// `d` projection vectors. Values use the shortest round-trip representation.
pub fn projection_csv(model: &EmbeddingModel) -> Result<Vec<u8>> {
    let d = model.output_dim();
    let mut w = csv_writer();
    let mut header = vec!["band".to_string(), "mean".to_string()];
    header.extend((1..=d).map(|j| format!("a{j}")));
    w.write_record(&header).map_err(csv_err)?;
    let mut rec = vec!["eigenvalue".to_string(), String::new()];
    rec.extend(model.eigenvalues.iter().map(|v| v.to_string()));
    w.write_record(&rec).map_err(csv_err)?;
    for b in 0..model.input_dim() {
        let mut rec = vec![(b + 1).to_string(), model.mean[b].to_string()];
        rec.extend((0..d).map(|j| model.projection[(b, j)].to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

/// One row per pixel: flat index, row, column, then the embedded coordinates.
pub fn embedded_csv(cube: &HyperCube, pixels: &[usize], features: &FeatureMatrix) -> Result<Vec<u8>> {
    if pixels.len() != features.count() {
        return Err(HsiError::shape(format!(
            "{} pixels for {} feature columns",
            pixels.len(),
            features.count()
        )));
    }
    let mut header = vec!["pixel".to_string(), "p".to_string(), "q".to_string()];
    header.extend((1..=features.dim()).map(|j| format!("y{j}")));
    let mut w = csv_writer();
    w.write_record(&header).map_err(csv_err)?;
    for (n, &i) in pixels.iter().enumerate() {
        let c = cube.coord(i);
        let mut rec = vec![i.to_string(), c.p.to_string(), c.q.to_string()];
        rec.extend(features.values().column(n).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}
