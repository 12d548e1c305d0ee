//! Seeded synthetic crowd scenes.
//!
//! Generates elliptical head masks with point annotations across density
//! regimes, plus perturbed predictions and reference density maps, so the
//! whole pipeline can be exercised without real imagery.

use crate::density::DensityMap;
use crate::error::{Error, Result};
use crate::geom::Point2D;
use crate::mask::RasterMask;
use crate::nnec::resolve_overlaps;
use crate::rng::Rng;
use crate::scene::Scene;

/// Crowd density regime of a generated scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityRegime {
    /// Heads spaced far apart; every exclusion circle comfortably contains
    /// its whole head.
    Sparse,
    /// Heads packed tightly; a sizable share of nearest-neighbor distances
    /// falls below twice the minimum exclusion radius.
    Dense,
    /// In between.
    Mixed,
}

impl std::str::FromStr for DensityRegime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sparse" => Ok(DensityRegime::Sparse),
            "dense" => Ok(DensityRegime::Dense),
            "mixed" => Ok(DensityRegime::Mixed),
            other => Err(format!("unknown regime '{other}' (expected sparse|dense|mixed)")),
        }
    }
}

/// Scene generation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub width: u32,
    pub height: u32,
    pub n_heads: usize,
    pub regime: DensityRegime,
    /// Semi-axis range of head ellipses, in pixels.
    pub head_radius_range: [f64; 2],
    /// Minimum distance between head centers, in pixels.
    pub min_center_spacing: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// Sparse preset: wide spacing so exclusion circles contain whole heads.
    pub fn sparse(n_heads: usize, seed: u64) -> Self {
        Self {
            width: 768,
            height: 768,
            n_heads,
            regime: DensityRegime::Sparse,
            head_radius_range: [6.0, 10.0],
            min_center_spacing: 40.0,
            seed,
        }
    }

    /// Dense preset: tight spacing with overlapping head placements.
    pub fn dense(n_heads: usize, seed: u64) -> Self {
        Self {
            width: 256,
            height: 256,
            n_heads,
            regime: DensityRegime::Dense,
            head_radius_range: [3.0, 5.0],
            min_center_spacing: 4.0,
            seed,
        }
    }

    /// Mixed preset.
    pub fn mixed(n_heads: usize, seed: u64) -> Self {
        Self {
            width: 512,
            height: 512,
            n_heads,
            regime: DensityRegime::Mixed,
            head_radius_range: [4.0, 8.0],
            min_center_spacing: 8.0,
            seed,
        }
    }

    pub fn preset(regime: DensityRegime, n_heads: usize, seed: u64) -> Self {
        match regime {
            DensityRegime::Sparse => Self::sparse(n_heads, seed),
            DensityRegime::Dense => Self::dense(n_heads, seed),
            DensityRegime::Mixed => Self::mixed(n_heads, seed),
        }
    }
}

fn rasterize_ellipse(
    center: Point2D,
    semi_x: f64,
    semi_y: f64,
    width: u32,
    height: u32,
) -> RasterMask {
    let mut mask = RasterMask::new(width, height);
    let col_lo = ((center.x - semi_x - 0.5).floor().max(0.0)) as i64;
    let col_hi = ((center.x + semi_x + 0.5).ceil()) as i64;
    let row_lo = ((center.y - semi_y - 0.5).floor().max(0.0)) as i64;
    let row_hi = ((center.y + semi_y + 0.5).ceil()) as i64;
    for row in row_lo.max(0)..row_hi.min(height as i64) {
        for col in col_lo.max(0)..col_hi.min(width as i64) {
            let dx = (col as f64 + 0.5 - center.x) / semi_x;
            let dy = (row as f64 + 0.5 - center.y) / semi_y;
            if dx * dx + dy * dy <= 1.0 {
                mask.set(col as u32, row as u32, true);
            }
        }
    }
    mask
}

/// Generate a seeded scene: place head centers by rejection sampling (at most
/// `10 * n_heads` candidate draws), rasterize one ellipse per head, and make
/// the masks disjoint by nearest-center resolution.
pub fn generate_scene(cfg: &SynthConfig) -> Result<Scene> {
    let mut rng = Rng::stream(cfg.seed, "synth");
    let mut centers: Vec<Point2D> = Vec::with_capacity(cfg.n_heads);
    let max_attempts = 10 * cfg.n_heads;
    let mut attempts = 0;
    while centers.len() < cfg.n_heads && attempts < max_attempts {
        attempts += 1;
        let candidate = Point2D::new(
            rng.next_range(0.0, cfg.width as f64),
            rng.next_range(0.0, cfg.height as f64),
        );
        let spacing_sq = cfg.min_center_spacing * cfg.min_center_spacing;
        if centers.iter().all(|c| c.distance_sq(&candidate) >= spacing_sq) {
            centers.push(candidate);
        }
    }
    if centers.len() < cfg.n_heads {
        return Err(Error::PlacementFailure {
            placed: centers.len(),
            requested: cfg.n_heads,
            attempts,
        });
    }

    let [r_lo, r_hi] = cfg.head_radius_range;
    let masks: Vec<RasterMask> = centers
        .iter()
        .map(|&center| {
            let semi_x = rng.next_range(r_lo, r_hi);
            let ratio = rng.next_range(0.7, 1.3);
            let semi_y = (semi_x * ratio).clamp(r_lo, r_hi);
            rasterize_ellipse(center, semi_x, semi_y, cfg.width, cfg.height)
        })
        .collect();
    let masks = resolve_overlaps(&masks, &centers)?;

    let image_id = format!("synth-{:?}-{}", cfg.regime, cfg.seed).to_lowercase();
    Scene::new(cfg.width, cfg.height, centers, Some(masks), image_id)
}

/// Displace each point by an isotropic Gaussian offset, clamped to bounds.
pub fn perturb_points(
    points: &[Point2D],
    sigma: f64,
    width: u32,
    height: u32,
    rng: &mut Rng,
) -> Vec<Point2D> {
    points
        .iter()
        .map(|p| {
            let dx = rng.next_gaussian(0.0, sigma);
            let dy = rng.next_gaussian(0.0, sigma);
            Point2D::new(p.x + dx, p.y + dy).clamped(width, height)
        })
        .collect()
}

/// Reference density map construction mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMode {
    /// Each mask's pixels share mass summing to exactly 1; background zero.
    Perfect,
    /// Total mass `n_heads` spread uniformly over the whole image.
    UniformMass,
}

impl std::str::FromStr for DensityMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "perfect" => Ok(DensityMode::Perfect),
            "uniform-mass" | "uniform_mass" => Ok(DensityMode::UniformMass),
            other => Err(format!("unknown density mode '{other}' (expected perfect|uniform-mass)")),
        }
    }
}

/// Build a density map for a scene with ground-truth masks.
pub fn make_density_map(scene: &Scene, mode: DensityMode) -> Result<DensityMap> {
    let masks = scene.require_gt_masks()?;
    let mut map = DensityMap::new(scene.width(), scene.height());
    match mode {
        DensityMode::Perfect => {
            for mask in masks {
                let pop = mask.population();
                if pop == 0 {
                    continue;
                }
                let value = 1.0f32 / pop as f32;
                for (c, r) in mask.iter_set() {
                    map.set(c, r, value);
                }
            }
        }
        DensityMode::UniformMass => {
            let total_px = scene.width() as f64 * scene.height() as f64;
            let value = (masks.len() as f64 / total_px) as f32;
            for r in 0..scene.height() {
                for c in 0..scene.width() {
                    map.set(c, r, value);
                }
            }
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::density_mask_loss;
    use crate::nnec::{all_radii, brute_nearest_sq, NnecParams};

    #[test]
    fn single_head_scene() {
        let cfg = SynthConfig { n_heads: 1, ..SynthConfig::sparse(1, 5) };
        let scene = generate_scene(&cfg).unwrap();
        assert_eq!(scene.len(), 1);
        let mask = &scene.gt_masks().unwrap()[0];
        let (cx, cy) = mask.centroid().unwrap();
        let p = scene.points()[0];
        assert!((cx - p.x).abs() <= 0.5 && (cy - p.y).abs() <= 0.5);
    }

    #[test]
    fn sparse_scene_spacing_and_circle_containment() {
        let scene = generate_scene(&SynthConfig::sparse(40, 9)).unwrap();
        let d2 = brute_nearest_sq(scene.points());
        assert!(d2.iter().all(|&d| d.sqrt() >= 40.0));
        // every exclusion circle fully contains its head mask
        let circles = all_radii(scene.points(), &NnecParams::default()).unwrap();
        for (circle, mask) in circles.iter().zip(scene.gt_masks().unwrap()) {
            for (c, r) in mask.iter_set() {
                let dx = c as f64 + 0.5 - circle.center.x;
                let dy = r as f64 + 0.5 - circle.center.y;
                assert!(dx * dx + dy * dy <= circle.radius * circle.radius);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_scene(&SynthConfig::dense(60, 5)).unwrap();
        let b = generate_scene(&SynthConfig::dense(60, 5)).unwrap();
        assert_eq!(a.points(), b.points());
        assert_eq!(a.gt_masks().unwrap(), b.gt_masks().unwrap());
    }

    #[test]
    fn infeasible_config_fails_placement() {
        let cfg = SynthConfig {
            width: 32,
            height: 32,
            min_center_spacing: 30.0,
            ..SynthConfig::sparse(50, 1)
        };
        assert!(matches!(generate_scene(&cfg), Err(Error::PlacementFailure { .. })));
    }

    #[test]
    fn points_lie_in_their_own_masks() {
        for seed in 0..5 {
            let scene = generate_scene(&SynthConfig::dense(100, seed)).unwrap();
            for (p, mask) in scene.points().iter().zip(scene.gt_masks().unwrap()) {
                let (c, r) = p.pixel();
                assert!(mask.get(c as u32, r as u32), "point {p:?} outside its mask");
            }
        }
    }

    #[test]
    fn dense_regime_contract() {
        for seed in 0..5 {
            let scene = generate_scene(&SynthConfig::dense(180, seed)).unwrap();
            let d2 = brute_nearest_sq(scene.points());
            let close = d2.iter().filter(|&&d| d.sqrt() < 10.0).count();
            assert!(
                close * 10 >= scene.len(),
                "only {close}/{} nearest-neighbor distances below 10",
                scene.len()
            );
        }
    }

    #[test]
    fn perturb_identity_at_zero_sigma() {
        let scene = generate_scene(&SynthConfig::sparse(10, 2)).unwrap();
        let mut rng = Rng::new(0);
        let moved = perturb_points(scene.points(), 0.0, scene.width(), scene.height(), &mut rng);
        assert_eq!(moved, scene.points());
    }

    #[test]
    fn perturb_mean_displacement_is_rayleigh() {
        // mean |offset| of an isotropic Gaussian is sigma * sqrt(pi/2)
        let sigma = 2.0;
        let points = vec![Point2D::new(500.0, 500.0); 10_000];
        let mut rng = Rng::new(11);
        let moved = perturb_points(&points, sigma, 1000, 1000, &mut rng);
        let mean: f64 = points
            .iter()
            .zip(&moved)
            .map(|(a, b)| a.distance(b))
            .sum::<f64>()
            / points.len() as f64;
        let expected = sigma * (std::f64::consts::PI / 2.0).sqrt();
        assert!((mean - expected).abs() / expected < 0.05, "mean {mean} vs {expected}");
    }

    #[test]
    fn perfect_density_map_is_lossless() {
        let scene = generate_scene(&SynthConfig::mixed(30, 4)).unwrap();
        let map = make_density_map(&scene, DensityMode::Perfect).unwrap();
        let loss = density_mask_loss(&map, scene.gt_masks().unwrap()).unwrap();
        assert!(loss < 1e-9, "loss {loss}");
        assert!((map.total_mass() - 30.0).abs() < 1e-6);
    }

    #[test]
    fn uniform_mass_map_has_positive_loss() {
        let scene = generate_scene(&SynthConfig::sparse(12, 8)).unwrap();
        let map = make_density_map(&scene, DensityMode::UniformMass).unwrap();
        let loss = density_mask_loss(&map, scene.gt_masks().unwrap()).unwrap();
        assert!(loss > 0.0);
        assert!((map.total_mass() - 12.0).abs() < 1e-3);
    }
}
