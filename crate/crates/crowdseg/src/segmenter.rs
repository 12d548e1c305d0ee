//! Pluggable prompt-to-mask backends.
//!
//! A segmenter turns a point prompt into a mask proposal (or nothing). Three
//! backends stand in for a neural segmenter: a fixed-radius circle, a
//! synthetic oracle that corrupts the scene's ground-truth masks, and
//! file-backed proposal records.

use crate::error::{Error, Result};
use crate::geom::Point2D;
use crate::mask::{RasterMask, RleRecord};
use crate::nnec::{rasterize_circle, ExclusionCircle};
use crate::rng::Rng;
use crate::scene::Scene;

/// Fixed proposal radius of the circle backend, in pixels.
pub const CIRCLE_PROPOSAL_RADIUS: f64 = 8.0;

/// Default search radius for centroid fallback lookups: twice the default
/// maximum exclusion radius.
pub const DEFAULT_MAX_CENTER_DIST: f64 = 400.0;

/// Oracle corruption parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Maximum magnitude of the random dilation/erosion, in pixels.
    pub noise_px: u32,
    /// Probability of returning no proposal at all.
    pub p_miss: f64,
    /// Maximum centroid distance for the nearest-mask fallback.
    pub max_center_dist: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { noise_px: 2, p_miss: 0.05, max_center_dist: DEFAULT_MAX_CENTER_DIST }
    }
}

/// Proposal records loaded from a masks file, with a pixel-ownership index
/// for O(1) containment lookups.
#[derive(Debug, Clone)]
pub struct FileProposals {
    masks: Vec<RasterMask>,
    centroids: Vec<Option<(f64, f64)>>,
    owner: Vec<u32>,
    width: u32,
    height: u32,
    max_center_dist: f64,
}

const FREE: u32 = u32::MAX;

impl FileProposals {
    /// Build from decoded records. All records must share one size. Records
    /// may overlap; containment queries resolve to the lowest index.
    pub fn new(records: &[RleRecord], max_center_dist: f64) -> Result<Self> {
        let masks: Vec<RasterMask> = records.iter().map(|r| r.decode()).collect::<Result<_>>()?;
        let (width, height) = match masks.first() {
            Some(m) => (m.width(), m.height()),
            None => (0, 0),
        };
        for m in &masks {
            if m.width() != width || m.height() != height {
                return Err(Error::size_mismatch(
                    format!("{width}x{height}"),
                    format!("{}x{}", m.width(), m.height()),
                ));
            }
        }
        let mut owner = vec![FREE; width as usize * height as usize];
        for (i, m) in masks.iter().enumerate() {
            for (c, r) in m.iter_set() {
                let idx = r as usize * width as usize + c as usize;
                if owner[idx] == FREE {
                    owner[idx] = i as u32;
                }
            }
        }
        let centroids = masks.iter().map(|m| m.centroid()).collect();
        Ok(Self { masks, centroids, owner, width, height, max_center_dist })
    }

    fn lookup(&self, prompt: &Point2D) -> Option<&RasterMask> {
        if self.masks.is_empty() {
            return None;
        }
        let (col, row) = prompt.pixel();
        if col >= 0 && row >= 0 && (col as u32) < self.width && (row as u32) < self.height {
            let idx = row as usize * self.width as usize + col as usize;
            if self.owner[idx] != FREE {
                return Some(&self.masks[self.owner[idx] as usize]);
            }
        }
        nearest_by_centroid(&self.centroids, prompt, self.max_center_dist)
            .map(|i| &self.masks[i])
    }
}

fn nearest_by_centroid(
    centroids: &[Option<(f64, f64)>],
    prompt: &Point2D,
    max_dist: f64,
) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, c) in centroids.iter().enumerate() {
        if let Some((cx, cy)) = c {
            let d = prompt.distance(&Point2D::new(*cx, *cy));
            if d <= max_dist && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
    }
    best.map(|(_, i)| i)
}

/// A prompt-to-mask backend.
#[derive(Debug, Clone)]
pub enum SegmenterBackend {
    /// Fixed-radius disc centered on the prompt.
    Circle { radius: f64 },
    /// Ground-truth masks of the scene, morphologically corrupted.
    Oracle(OracleConfig),
    /// Stored proposal records.
    File(FileProposals),
}

impl SegmenterBackend {
    pub fn circle() -> Self {
        SegmenterBackend::Circle { radius: CIRCLE_PROPOSAL_RADIUS }
    }

    pub fn oracle(config: OracleConfig) -> Self {
        SegmenterBackend::Oracle(config)
    }

    /// An oracle that reproduces ground truth exactly and never misses.
    pub fn exact_oracle() -> Self {
        SegmenterBackend::Oracle(OracleConfig { noise_px: 0, p_miss: 0.0, ..Default::default() })
    }
}

/// Query the backend for a mask proposal at `prompt`. Randomness comes only
/// from the caller-provided generator, so identical (backend, prompt, scene,
/// seed) always produce the identical proposal.
pub fn segment(
    backend: &SegmenterBackend,
    prompt: &Point2D,
    scene: &Scene,
    rng: &mut Rng,
) -> Result<Option<RasterMask>> {
    if !prompt.in_bounds(scene.width(), scene.height()) {
        return Err(Error::OutOfBounds {
            x: prompt.x,
            y: prompt.y,
            width: scene.width(),
            height: scene.height(),
        });
    }
    match backend {
        SegmenterBackend::Circle { radius } => {
            let circle = ExclusionCircle { center: *prompt, radius: *radius };
            Ok(Some(rasterize_circle(&circle, scene.width(), scene.height())))
        }
        SegmenterBackend::Oracle(cfg) => {
            let masks = scene.require_gt_masks()?;
            if rng.next_uniform() < cfg.p_miss {
                return Ok(None);
            }
            let offset = rng.next_int(-(cfg.noise_px as i64), cfg.noise_px as i64);
            let (col, row) = prompt.pixel();
            let hit = masks
                .iter()
                .position(|m| {
                    col >= 0
                        && row >= 0
                        && (col as u32) < m.width()
                        && (row as u32) < m.height()
                        && m.get(col as u32, row as u32)
                })
                .or_else(|| {
                    let centroids: Vec<Option<(f64, f64)>> =
                        masks.iter().map(|m| m.centroid()).collect();
                    nearest_by_centroid(&centroids, prompt, cfg.max_center_dist)
                });
            Ok(hit.map(|i| {
                let mask = &masks[i];
                match offset.cmp(&0) {
                    std::cmp::Ordering::Greater => mask.dilated(offset as u32),
                    std::cmp::Ordering::Less => mask.eroded((-offset) as u32),
                    std::cmp::Ordering::Equal => mask.clone(),
                }
            }))
        }
        SegmenterBackend::File(proposals) => Ok(proposals.lookup(prompt).cloned()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnec::resolve_overlaps;

    fn oracle_scene() -> Scene {
        let points = vec![Point2D::new(8.0, 8.0), Point2D::new(24.0, 24.0)];
        let masks: Vec<RasterMask> = points
            .iter()
            .map(|p| rasterize_circle(&ExclusionCircle { center: *p, radius: 4.0 }, 32, 32))
            .collect();
        let masks = resolve_overlaps(&masks, &points).unwrap();
        Scene::new(32, 32, points, Some(masks), "oracle").unwrap()
    }

    #[test]
    fn circle_backend_returns_disc_at_prompt() {
        let scene = Scene::new(64, 64, vec![Point2D::new(32.0, 32.0)], None, "s").unwrap();
        let mut rng = Rng::new(0);
        let mask = segment(&SegmenterBackend::circle(), &Point2D::new(32.0, 32.0), &scene, &mut rng)
            .unwrap()
            .unwrap();
        let expected = rasterize_circle(
            &ExclusionCircle { center: Point2D::new(32.0, 32.0), radius: 8.0 },
            64,
            64,
        );
        assert_eq!(mask, expected);
    }

    #[test]
    fn exact_oracle_returns_gt_mask() {
        let scene = oracle_scene();
        let mut rng = Rng::new(1);
        let mask = segment(&SegmenterBackend::exact_oracle(), &scene.points()[0], &scene, &mut rng)
            .unwrap()
            .unwrap();
        assert_eq!(&mask, &scene.gt_masks().unwrap()[0]);
    }

    #[test]
    fn oracle_always_misses_at_p_one() {
        let scene = oracle_scene();
        let backend = SegmenterBackend::Oracle(OracleConfig {
            noise_px: 0,
            p_miss: 1.0,
            ..Default::default()
        });
        for seed in 0..20 {
            let mut rng = Rng::new(seed);
            let out = segment(&backend, &scene.points()[0], &scene, &mut rng).unwrap();
            assert!(out.is_none());
        }
    }

    #[test]
    fn oracle_falls_back_to_nearest_centroid() {
        let scene = oracle_scene();
        let mut rng = Rng::new(2);
        // a prompt on the background, nearer to the second head
        let prompt = Point2D::new(20.0, 20.0);
        let mask = segment(&SegmenterBackend::exact_oracle(), &prompt, &scene, &mut rng)
            .unwrap()
            .unwrap();
        assert_eq!(&mask, &scene.gt_masks().unwrap()[1]);
    }

    #[test]
    fn oracle_out_of_bounds_prompt_errors() {
        let scene = oracle_scene();
        let mut rng = Rng::new(0);
        let r = segment(&SegmenterBackend::exact_oracle(), &Point2D::new(-1.0, 5.0), &scene, &mut rng);
        assert!(matches!(r, Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn oracle_is_deterministic_per_seed() {
        let scene = oracle_scene();
        let backend = SegmenterBackend::Oracle(OracleConfig {
            noise_px: 2,
            p_miss: 0.3,
            ..Default::default()
        });
        for seed in 0..10 {
            let mut a = Rng::new(seed);
            let mut b = Rng::new(seed);
            let out_a = segment(&backend, &scene.points()[0], &scene, &mut a).unwrap();
            let out_b = segment(&backend, &scene.points()[0], &scene, &mut b).unwrap();
            assert_eq!(out_a, out_b);
        }
    }

    #[test]
    fn file_backend_containment_and_fallback() {
        let records: Vec<RleRecord> = oracle_scene()
            .gt_masks()
            .unwrap()
            .iter()
            .map(|m| m.to_rle())
            .collect();
        let proposals = FileProposals::new(&records, DEFAULT_MAX_CENTER_DIST).unwrap();
        let backend = SegmenterBackend::File(proposals);
        let scene = oracle_scene();
        let mut rng = Rng::new(3);

        // prompt inside stored mask 1
        let mask = segment(&backend, &Point2D::new(24.0, 24.0), &scene, &mut rng)
            .unwrap()
            .unwrap();
        assert_eq!(&mask, &scene.gt_masks().unwrap()[1]);

        // background prompt binds to the nearest centroid
        let mask = segment(&backend, &Point2D::new(12.0, 12.0), &scene, &mut rng)
            .unwrap()
            .unwrap();
        assert_eq!(&mask, &scene.gt_masks().unwrap()[0]);
    }

    #[test]
    fn file_backend_rejects_mixed_sizes() {
        let a = RasterMask::new(4, 4).to_rle();
        let b = RasterMask::new(5, 4).to_rle();
        assert!(FileProposals::new(&[a, b], 10.0).is_err());
    }

    #[test]
    fn dilation_grows_and_erosion_shrinks() {
        let mask = rasterize_circle(
            &ExclusionCircle { center: Point2D::new(8.0, 8.0), radius: 4.0 },
            16,
            16,
        );
        assert!(mask.dilated(1).population() > mask.population());
        assert!(mask.eroded(1).population() < mask.population());
        assert_eq!(mask.dilated(0), mask);
        // erosion then dilation stays within the original
        let opened = mask.eroded(1).dilated(1);
        assert_eq!(opened.intersection_count(&mask), opened.population());
    }
}
