//! Per-pixel crowd density grids.

use crate::error::{Error, Result};

/// A width x height grid of non-negative 32-bit floats, row-major. Each
/// person's region is expected to integrate to 1 in a perfect prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    width: u32,
    height: u32,
    values: Vec<f32>,
}

impl DensityMap {
    pub fn new(width: u32, height: u32) -> Self {
        assert!(width > 0 && height > 0, "density map dimensions must be positive");
        Self { width, height, values: vec![0.0; width as usize * height as usize] }
    }

    pub fn from_values(width: u32, height: u32, values: Vec<f32>) -> Result<Self> {
        if values.len() != width as usize * height as usize {
            return Err(Error::size_mismatch(
                format!("{} values", width as usize * height as usize),
                format!("{} values", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::size_mismatch(
                "finite non-negative densities".to_string(),
                "negative or non-finite value".to_string(),
            ));
        }
        Ok(Self { width, height, values })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn get(&self, col: u32, row: u32) -> f32 {
        self.values[row as usize * self.width as usize + col as usize]
    }

    pub fn set(&mut self, col: u32, row: u32, value: f32) {
        self.values[row as usize * self.width as usize + col as usize] = value;
    }

    /// Total mass over the whole grid, accumulated in f64.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length() {
        assert!(DensityMap::from_values(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn rejects_negative_values() {
        assert!(DensityMap::from_values(2, 1, vec![0.1, -0.5]).is_err());
    }

    #[test]
    fn total_mass_sums() {
        let m = DensityMap::from_values(2, 2, vec![0.25; 4]).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
    }
}
