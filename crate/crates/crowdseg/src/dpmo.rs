//! Point-to-mask pipeline: segment each prompt, constrain by its exclusion
//! circle (adopting the circle on an empty intersection), then resolve
//! overlaps into disjoint per-instance masks.

use rayon::prelude::*;

use crate::error::Result;
use crate::geom::Point2D;
use crate::mask::RasterMask;
use crate::nnec::{all_radii, constrain, resolve_overlaps, ExclusionCircle, NnecParams};
use crate::rng::Rng;
use crate::scene::Scene;
use crate::segmenter::{segment, SegmenterBackend};

/// Output of a pipeline run: one mask per prompt (pairwise disjoint), the
/// exclusion circles, and whether each prompt fell back to its circle.
#[derive(Debug, Clone)]
pub struct DpmoResult {
    pub masks: Vec<RasterMask>,
    pub circles: Vec<ExclusionCircle>,
    pub fallback_flags: Vec<bool>,
}

/// Run the full pipeline. Each prompt draws from its own seed-derived stream,
/// so results do not depend on execution order or thread count.
pub fn run_dpmo(
    prompts: &[Point2D],
    scene: &Scene,
    backend: &SegmenterBackend,
    params: &NnecParams,
    seed: u64,
) -> Result<DpmoResult> {
    params.validate()?;
    let circles = all_radii(prompts, params)?;
    let width = scene.width();
    let height = scene.height();

    let per_prompt: Vec<(RasterMask, bool)> = prompts
        .par_iter()
        .enumerate()
        .map(|(i, prompt)| {
            let mut rng = Rng::stream(seed, &format!("prompt:{i}"));
            let proposal = segment(backend, prompt, scene, &mut rng)?;
            constrain(proposal.as_ref(), &circles[i], width, height)
        })
        .collect::<Result<_>>()?;

    let (masks, fallback_flags): (Vec<RasterMask>, Vec<bool>) = per_prompt.into_iter().unzip();
    let masks = resolve_overlaps(&masks, prompts)?;
    Ok(DpmoResult { masks, circles, fallback_flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::eval::mean_matched_iou;
    use crate::nnec::rasterize_circle;
    use crate::segmenter::{OracleConfig, CIRCLE_PROPOSAL_RADIUS};
    use crate::synth::{generate_scene, SynthConfig};

    #[test]
    fn circle_backend_two_distant_prompts() {
        let scene = Scene::new(
            256,
            256,
            vec![Point2D::new(50.0, 50.0), Point2D::new(150.0, 50.0)],
            None,
            "s",
        )
        .unwrap();
        let result = run_dpmo(
            scene.points(),
            &scene,
            &SegmenterBackend::circle(),
            &NnecParams::default(),
            7,
        )
        .unwrap();
        assert_eq!(result.masks.len(), 2);
        // exclusion circles (radius 99) dwarf the radius-8 proposals
        for (mask, prompt) in result.masks.iter().zip(scene.points()) {
            let disc = rasterize_circle(
                &ExclusionCircle { center: *prompt, radius: CIRCLE_PROPOSAL_RADIUS },
                256,
                256,
            );
            assert_eq!(mask, &disc);
        }
        assert!(result.masks[0].is_disjoint(&result.masks[1]));
        assert_eq!(result.fallback_flags, vec![false, false]);
    }

    #[test]
    fn forced_miss_adopts_circles_everywhere() {
        let scene = generate_scene(&SynthConfig::sparse(20, 11)).unwrap();
        let backend = SegmenterBackend::Oracle(OracleConfig {
            noise_px: 0,
            p_miss: 1.0,
            ..Default::default()
        });
        let result =
            run_dpmo(scene.points(), &scene, &backend, &NnecParams::default(), 3).unwrap();
        assert!(result.fallback_flags.iter().all(|&f| f));
        // each mask is its circle minus pixels lost to overlap resolution
        for (i, mask) in result.masks.iter().enumerate() {
            let circle = rasterize_circle(&result.circles[i], scene.width(), scene.height());
            assert_eq!(mask.intersection_count(&circle), mask.population());
            assert!(!mask.is_empty());
        }
    }

    #[test]
    fn exact_oracle_recovers_ground_truth_on_sparse_scene() {
        let scene = generate_scene(&SynthConfig::sparse(24, 5)).unwrap();
        let result = run_dpmo(
            scene.points(),
            &scene,
            &SegmenterBackend::exact_oracle(),
            &NnecParams::default(),
            1,
        )
        .unwrap();
        let iou = mean_matched_iou(&result.masks, scene.gt_masks().unwrap()).unwrap();
        assert!(iou >= 0.95, "mean matched IoU {iou}");
    }

    #[test]
    fn one_mask_per_prompt_disjoint_union() {
        let scene = generate_scene(&SynthConfig::dense(80, 21)).unwrap();
        let result = run_dpmo(
            scene.points(),
            &scene,
            &SegmenterBackend::exact_oracle(),
            &NnecParams::default(),
            2,
        )
        .unwrap();
        assert_eq!(result.masks.len(), scene.len());
        let sum: u64 = result.masks.iter().map(|m| m.population()).sum();
        let mut union = RasterMask::new(scene.width(), scene.height());
        for m in &result.masks {
            for (c, r) in m.iter_set() {
                union.set(c, r, true);
            }
        }
        assert_eq!(sum, union.population());
    }

    #[test]
    fn deterministic_across_runs_and_thread_counts() {
        let scene = generate_scene(&SynthConfig::dense(40, 33)).unwrap();
        let backend = SegmenterBackend::Oracle(OracleConfig {
            noise_px: 2,
            p_miss: 0.2,
            ..Default::default()
        });
        let params = NnecParams::default();
        let a = run_dpmo(scene.points(), &scene, &backend, &params, 99).unwrap();
        let b = run_dpmo(scene.points(), &scene, &backend, &params, 99).unwrap();
        assert_eq!(a.masks, b.masks);
        assert_eq!(a.fallback_flags, b.fallback_flags);

        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool
            .install(|| run_dpmo(scene.points(), &scene, &backend, &params, 99))
            .unwrap();
        assert_eq!(a.masks, c.masks);
    }

    #[test]
    fn propagates_empty_and_out_of_bounds() {
        let scene = Scene::new(64, 64, vec![], None, "s").unwrap();
        let r = run_dpmo(&[], &scene, &SegmenterBackend::circle(), &NnecParams::default(), 0);
        assert!(matches!(r, Err(Error::EmptyPointSet)));

        let scene = Scene::new(64, 64, vec![Point2D::new(5.0, 5.0)], None, "s").unwrap();
        let r = run_dpmo(
            &[Point2D::new(100.0, 5.0)],
            &scene,
            &SegmenterBackend::circle(),
            &NnecParams::default(),
            0,
        );
        assert!(matches!(r, Err(Error::OutOfBounds { .. })));
    }
}
