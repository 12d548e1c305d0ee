//! Annotated crowd scenes.

use crate::error::{Error, Result};
use crate::geom::Point2D;
use crate::mask::{all_disjoint, RasterMask};

/// A crowd image annotation: point labels, and optionally one ground-truth
/// mask per point (aligned index-for-index, pairwise disjoint).
#[derive(Debug, Clone)]
pub struct Scene {
    width: u32,
    height: u32,
    points: Vec<Point2D>,
    gt_masks: Option<Vec<RasterMask>>,
    image_id: String,
}

impl Scene {
    pub fn new(
        width: u32,
        height: u32,
        points: Vec<Point2D>,
        gt_masks: Option<Vec<RasterMask>>,
        image_id: impl Into<String>,
    ) -> Result<Self> {
        for p in &points {
            if !p.in_bounds(width, height) {
                return Err(Error::OutOfBounds { x: p.x, y: p.y, width, height });
            }
        }
        if let Some(masks) = &gt_masks {
            if masks.len() != points.len() {
                return Err(Error::LengthMismatch { left: masks.len(), right: points.len() });
            }
            for m in masks {
                if m.width() != width || m.height() != height {
                    return Err(Error::size_mismatch(
                        format!("{width}x{height}"),
                        format!("{}x{}", m.width(), m.height()),
                    ));
                }
            }
            if !all_disjoint(masks) {
                return Err(Error::invalid_data(
                    "<scene>",
                    "ground-truth masks overlap".to_string(),
                ));
            }
        }
        Ok(Self { width, height, points, gt_masks, image_id: image_id.into() })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn gt_masks(&self) -> Option<&[RasterMask]> {
        self.gt_masks.as_deref()
    }

    /// Ground-truth masks, or the error every mask-supervised operation
    /// reports when they are missing.
    pub fn require_gt_masks(&self) -> Result<&[RasterMask]> {
        self.gt_masks.as_deref().ok_or(Error::MissingGroundTruth)
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
