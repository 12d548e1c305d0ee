//! Interchange file formats.
//!
//! - points: JSON `{"width": W, "height": H, "points": [[x, y], ...]}`
//! - masks: JSON array of RLE records `{"size": [H, W], "counts": [...]}`
//! - density: JSON header `{"width": W, "height": H}` next to a raw file of
//!   `W * H` little-endian f32 values, row-major (`<stem>.json` / `<stem>.bin`)
//! - scorer weights and evaluation reports: plain JSON

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::density::DensityMap;
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::geom::Point2D;
use crate::mask::{RasterMask, RleRecord};
use crate::rps::ScorerModel;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PointsFile {
    width: u32,
    height: u32,
    points: Vec<[f64; 2]>,
}

/// A loaded points file: scene dimensions plus the points.
#[derive(Debug, Clone)]
pub struct PointsData {
    pub width: u32,
    pub height: u32,
    pub points: Vec<Point2D>,
}

pub fn save_points(path: &Path, width: u32, height: u32, points: &[Point2D]) -> Result<()> {
    let file = PointsFile {
        width,
        height,
        points: points.iter().map(|p| [p.x, p.y]).collect(),
    };
    write_json(path, &file)
}

pub fn load_points(path: &Path) -> Result<PointsData> {
    let file: PointsFile = read_json(path)?;
    let points: Vec<Point2D> = file.points.iter().map(|&xy| Point2D::from(xy)).collect();
    for p in &points {
        if !p.in_bounds(file.width, file.height) {
            return Err(Error::invalid_data(
                path,
                format!("point ({}, {}) outside {}x{}", p.x, p.y, file.width, file.height),
            ));
        }
    }
    Ok(PointsData { width: file.width, height: file.height, points })
}

pub fn save_masks(path: &Path, masks: &[RasterMask]) -> Result<()> {
    let records: Vec<RleRecord> = masks.iter().map(|m| m.to_rle()).collect();
    write_json(path, &records)
}

pub fn load_mask_records(path: &Path) -> Result<Vec<RleRecord>> {
    read_json(path)
}

/// Load and decode a masks file; all records must share one size.
pub fn load_masks(path: &Path) -> Result<Vec<RasterMask>> {
    let records = load_mask_records(path)?;
    let masks: Vec<RasterMask> = records.iter().map(|r| r.decode()).collect::<Result<_>>()?;
    if let Some(first) = masks.first() {
        for m in &masks {
            if !m.same_size(first) {
                return Err(Error::invalid_data(path, "mask records disagree on size"));
            }
        }
    }
    Ok(masks)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DensityHeader {
    width: u32,
    height: u32,
}

/// Resolve the (header, raw) path pair from either member.
fn density_pair(path: &Path) -> Result<(PathBuf, PathBuf)> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Ok((path.to_path_buf(), path.with_extension("bin"))),
        Some("bin") => Ok((path.with_extension("json"), path.to_path_buf())),
        _ => Err(Error::invalid_data(path, "density path must end in .json or .bin")),
    }
}

pub fn save_density(path: &Path, map: &DensityMap) -> Result<()> {
    let (header_path, raw_path) = density_pair(path)?;
    write_json(&header_path, &DensityHeader { width: map.width(), height: map.height() })?;
    let mut bytes = Vec::with_capacity(map.values().len() * 4);
    for v in map.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&raw_path, bytes).map_err(|e| Error::io(&raw_path, e))
}

pub fn load_density(path: &Path) -> Result<DensityMap> {
    let (header_path, raw_path) = density_pair(path)?;
    let header: DensityHeader = read_json(&header_path)?;
    let bytes = fs::read(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
    let expected = header.width as usize * header.height as usize * 4;
    if bytes.len() != expected {
        return Err(Error::invalid_data(
            &raw_path,
            format!("expected {expected} bytes, found {}", bytes.len()),
        ));
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    DensityMap::from_values(header.width, header.height, values)
}

pub fn save_scorer(path: &Path, model: &ScorerModel) -> Result<()> {
    write_json(path, model)
}

pub fn load_scorer(path: &Path) -> Result<ScorerModel> {
    read_json(path)
}

pub fn save_report(path: &Path, report: &EvalReport) -> Result<()> {
    write_json(path, report)
}

pub fn report_to_string(report: &EvalReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialization cannot fail")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}
