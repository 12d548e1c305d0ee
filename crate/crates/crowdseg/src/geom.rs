//! Continuous 2D image coordinates.

use serde::{Deserialize, Serialize};

/// A continuous point in image space. The origin is the top-left corner of
/// the image; `x` grows rightward, `y` downward, both in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        self.distance_sq(other).sqrt()
    }

    /// Squared Euclidean distance. Kept as the single primitive so that every
    /// caller (brute-force and grid-accelerated alike) performs the identical
    /// float arithmetic.
    #[inline]
    pub fn distance_sq(&self, other: &Point2D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// The raster pixel containing this point (floor of the coordinates).
    pub fn pixel(&self) -> (i64, i64) {
        (self.x.floor() as i64, self.y.floor() as i64)
    }

    /// True if the point lies in `[0, width) x [0, height)`.
    pub fn in_bounds(&self, width: u32, height: u32) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.x >= 0.0
            && self.y >= 0.0
            && self.x < width as f64
            && self.y < height as f64
    }

    /// Clamp into `[0, width) x [0, height)`.
    pub fn clamped(&self, width: u32, height: u32) -> Point2D {
        let max_x = (width as f64) - 1e-6;
        let max_y = (height as f64) - 1e-6;
        Point2D::new(self.x.clamp(0.0, max_x.max(0.0)), self.y.clamp(0.0, max_y.max(0.0)))
    }
}

impl From<[f64; 2]> for Point2D {
    fn from(v: [f64; 2]) -> Self {
        Point2D::new(v[0], v[1])
    }
}

impl From<Point2D> for [f64; 2] {
    fn from(p: Point2D) -> Self {
        [p.x, p.y]
    }
}
