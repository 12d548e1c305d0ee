//! Nearest-neighbor exclusion circles.
//!
//! Every annotated point gets a circle whose radius stays strictly below the
//! distance to its nearest neighboring point (up to clamping), so the circle
//! contains only its own point. Proposal masks are constrained to their
//! circle; an empty intersection falls back to the rasterized circle itself.

use crate::error::{Error, Result};
use crate::geom::Point2D;
use crate::mask::RasterMask;

/// Circle radius parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnecParams {
    /// Lower clamp for the radius, in pixels.
    pub r_min: f64,
    /// Upper clamp for the radius, in pixels.
    pub r_max: f64,
    /// How far below the nearest-neighbor distance the radius sits, realizing
    /// the strict inequality.
    pub delta: f64,
    /// When set, radii are computed from half the nearest-neighbor distance so
    /// circles cannot overlap (the bounded ablation). Off by default: circles
    /// may overlap and extend to the full distance.
    pub bounded_mode: bool,
}

impl Default for NnecParams {
    fn default() -> Self {
        Self { r_min: 5.0, r_max: 200.0, delta: 1.0, bounded_mode: false }
    }
}

impl NnecParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min <= self.r_max && self.delta >= 0.0) {
            return Err(Error::invalid_data(
                "<params>",
                format!(
                    "require 0 < r_min <= r_max and delta >= 0, got r_min={} r_max={} delta={}",
                    self.r_min, self.r_max, self.delta
                ),
            ));
        }
        Ok(())
    }
}

/// An exclusion circle: center plus clamped radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExclusionCircle {
    pub center: Point2D,
    pub radius: f64,
}

impl ExclusionCircle {
    /// Pixel-center containment test for a point: the point's pixel is inside
    /// the circle iff that pixel's center lies within the radius.
    pub fn contains_point_pixel(&self, p: &Point2D) -> bool {
        let (col, row) = p.pixel();
        let dx = col as f64 + 0.5 - self.center.x;
        let dy = row as f64 + 0.5 - self.center.y;
        dx * dx + dy * dy <= self.radius * self.radius
    }

    /// Area-exact population of the rasterized circle clipped to an image.
    pub fn raster_population(&self, width: u32, height: u32) -> u64 {
        rasterize_circle(self, width, height).population()
    }
}

fn radius_from_distance(d: f64, params: &NnecParams) -> f64 {
    let raw = if params.bounded_mode { d / 2.0 - params.delta } else { d - params.delta };
    raw.clamp(params.r_min, params.r_max)
}

/// Exclusion circle for point `i`: radius is the clamped distance to the
/// nearest other point minus `delta`. A single-point set gets `r_max`.
pub fn nnec_radius(points: &[Point2D], i: usize, params: &NnecParams) -> Result<ExclusionCircle> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    assert!(i < points.len(), "point index {i} out of range");
    if points.len() == 1 {
        return Ok(ExclusionCircle { center: points[0], radius: params.r_max });
    }
    let mut best_sq = f64::INFINITY;
    for (j, p) in points.iter().enumerate() {
        if j != i {
            best_sq = best_sq.min(points[i].distance_sq(p));
        }
    }
    Ok(ExclusionCircle { center: points[i], radius: radius_from_distance(best_sq.sqrt(), params) })
}

/// Exclusion circles for every point. Uses a uniform spatial grid above
/// `GRID_THRESHOLD` points; the result is bit-identical to the pairwise
/// computation because both paths take the minimum of the same squared
/// distances before the final square root.
pub fn all_radii(points: &[Point2D], params: &NnecParams) -> Result<Vec<ExclusionCircle>> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if points.len() == 1 {
        return Ok(vec![ExclusionCircle { center: points[0], radius: params.r_max }]);
    }
    let dist_sq = if points.len() > GRID_THRESHOLD {
        grid_nearest_sq(points)
    } else {
        brute_nearest_sq(points)
    };
    Ok(points
        .iter()
        .zip(dist_sq)
        .map(|(p, d2)| ExclusionCircle { center: *p, radius: radius_from_distance(d2.sqrt(), params) })
        .collect())
}

const GRID_THRESHOLD: usize = 256;

/// Pairwise nearest-neighbor squared distances. The reference path.
pub fn brute_nearest_sq(points: &[Point2D]) -> Vec<f64> {
    let n = points.len();
    let mut best = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in i + 1..n {
            let d2 = points[i].distance_sq(&points[j]);
            if d2 < best[i] {
                best[i] = d2;
            }
            if d2 < best[j] {
                best[j] = d2;
            }
        }
    }
    best
}

/// Grid-bucketed nearest-neighbor squared distances, expected O(n) for
/// roughly uniform point sets.
fn grid_nearest_sq(points: &[Point2D]) -> Vec<f64> {
    let n = points.len();
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    let extent = (max_x - min_x).max(max_y - min_y);
    let cells_per_side = (n as f64).sqrt().ceil() as usize;
    let cell = if extent > 0.0 { extent / cells_per_side as f64 } else { 1.0 };
    let cols = (((max_x - min_x) / cell).floor() as usize + 1).max(1);
    let rows = (((max_y - min_y) / cell).floor() as usize + 1).max(1);

    let cell_of = |p: &Point2D| -> (isize, isize) {
        let c = (((p.x - min_x) / cell).floor() as isize).min(cols as isize - 1);
        let r = (((p.y - min_y) / cell).floor() as isize).min(rows as isize - 1);
        (c, r)
    };

    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); cols * rows];
    for (i, p) in points.iter().enumerate() {
        let (c, r) = cell_of(p);
        buckets[r as usize * cols + c as usize].push(i as u32);
    }

    let max_ring = cols.max(rows) as isize;
    let mut best = vec![f64::INFINITY; n];
    for (i, p) in points.iter().enumerate() {
        let (pc, pr) = cell_of(p);
        let mut best_sq = f64::INFINITY;

        let scan = |c: isize, r: isize, best_sq: &mut f64| {
            if c < 0 || r < 0 || c >= cols as isize || r >= rows as isize {
                return;
            }
            for &j in &buckets[r as usize * cols + c as usize] {
                if j as usize != i {
                    let d2 = p.distance_sq(&points[j as usize]);
                    if d2 < *best_sq {
                        *best_sq = d2;
                    }
                }
            }
        };

        for ring in 0..=max_ring {
            // Any point in a ring-k cell is at least (k-1)*cell away from p,
            // so once that bound exceeds the current best the search is done.
            if ring > 1 {
                let bound = (ring - 1) as f64 * cell;
                if bound * bound > best_sq {
                    break;
                }
            }
            if ring == 0 {
                scan(pc, pr, &mut best_sq);
                continue;
            }
            for c in pc - ring..=pc + ring {
                scan(c, pr - ring, &mut best_sq);
                scan(c, pr + ring, &mut best_sq);
            }
            for r in pr - ring + 1..=pr + ring - 1 {
                scan(pc - ring, r, &mut best_sq);
                scan(pc + ring, r, &mut best_sq);
            }
        }
        best[i] = best_sq;
    }
    best
}

/// Rasterize a circle: pixel `(c, r)` is set iff its center lies within the
/// radius. Clipped to the image bounds.
pub fn rasterize_circle(circle: &ExclusionCircle, width: u32, height: u32) -> RasterMask {
    let mut mask = RasterMask::new(width, height);
    let r = circle.radius;
    let r_sq = r * r;
    let col_lo = ((circle.center.x - r - 0.5).floor().max(0.0)) as i64;
    let col_hi = ((circle.center.x + r + 0.5).ceil()) as i64;
    let row_lo = ((circle.center.y - r - 0.5).floor().max(0.0)) as i64;
    let row_hi = ((circle.center.y + r + 0.5).ceil()) as i64;
    for row in row_lo.max(0)..row_hi.min(height as i64) {
        for col in col_lo.max(0)..col_hi.min(width as i64) {
            let dx = col as f64 + 0.5 - circle.center.x;
            let dy = row as f64 + 0.5 - circle.center.y;
            if dx * dx + dy * dy <= r_sq {
                mask.set(col as u32, row as u32, true);
            }
        }
    }
    mask
}

/// Constrain a proposal mask to its exclusion circle. When the proposal is
/// absent or does not intersect the circle, the rasterized circle itself is
/// adopted as the mask. Returns the mask and whether the fallback fired.
pub fn constrain(
    proposal: Option<&RasterMask>,
    circle: &ExclusionCircle,
    width: u32,
    height: u32,
) -> Result<(RasterMask, bool)> {
    let circle_mask = rasterize_circle(circle, width, height);
    match proposal {
        Some(p) => {
            if p.width() != width || p.height() != height {
                return Err(Error::size_mismatch(
                    format!("{width}x{height}"),
                    format!("{}x{}", p.width(), p.height()),
                ));
            }
            let clipped = p.and(&circle_mask)?;
            if clipped.is_empty() {
                Ok((circle_mask, true))
            } else {
                Ok((clipped, false))
            }
        }
        None => Ok((circle_mask, true)),
    }
}

/// Resolve overlapping masks into a disjoint set: every contested pixel is
/// assigned to the claiming mask whose center is nearest (pixel-center
/// distance, ties to the lowest index). Pixels claimed once are kept as-is.
pub fn resolve_overlaps(masks: &[RasterMask], centers: &[Point2D]) -> Result<Vec<RasterMask>> {
    if masks.len() != centers.len() {
        return Err(Error::LengthMismatch { left: masks.len(), right: centers.len() });
    }
    if masks.is_empty() {
        return Ok(Vec::new());
    }
    let width = masks[0].width();
    let height = masks[0].height();
    for m in masks {
        if m.width() != width || m.height() != height {
            return Err(Error::size_mismatch(
                format!("{width}x{height}"),
                format!("{}x{}", m.width(), m.height()),
            ));
        }
    }

    const FREE: u32 = u32::MAX;
    let mut owner = vec![FREE; width as usize * height as usize];
    let mut owner_dist = vec![0.0f64; width as usize * height as usize];
    for (i, mask) in masks.iter().enumerate() {
        let center = &centers[i];
        for (c, r) in mask.iter_set() {
            let idx = r as usize * width as usize + c as usize;
            let dx = c as f64 + 0.5 - center.x;
            let dy = r as f64 + 0.5 - center.y;
            let d = dx * dx + dy * dy;
            if owner[idx] == FREE || d < owner_dist[idx] {
                owner[idx] = i as u32;
                owner_dist[idx] = d;
            }
        }
    }

    let mut out: Vec<RasterMask> = (0..masks.len()).map(|_| RasterMask::new(width, height)).collect();
    for (idx, &who) in owner.iter().enumerate() {
        if who != FREE {
            let col = (idx % width as usize) as u32;
            let row = (idx / width as usize) as u32;
            out[who as usize].set(col, row, true);
        }
    }
    Ok(out)
}
