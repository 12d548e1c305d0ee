//! The full point-to-mask pipeline: segment each prompt, constrain by its
//! exclusion circle (falling back to the circle itself when the proposal
//! misses), resolve overlaps, and render the result.
//!
//! ```sh
//! cargo run --example point_to_mask
//! ```

use crowdseg::dpmo::run_dpmo;
use crowdseg::eval::mean_matched_iou;
use crowdseg::nnec::NnecParams;
use crowdseg::render::render_overlay;
use crowdseg::segmenter::{OracleConfig, SegmenterBackend};
use crowdseg::synth::{generate_scene, SynthConfig};
use crowdseg::Result;

fn main() -> Result<()> {
    let out_dir = std::path::PathBuf::from("target/example-artifacts/point_to_mask");
    std::fs::create_dir_all(&out_dir).expect("create output dir");

    let scene = generate_scene(&SynthConfig::mixed(60, 11))?;
    let params = NnecParams::default();
    let gt = scene.gt_masks().unwrap();

    for (name, backend) in [
        ("circle", SegmenterBackend::circle()),
        ("exact oracle", SegmenterBackend::exact_oracle()),
        (
            "noisy oracle",
            SegmenterBackend::Oracle(OracleConfig { noise_px: 2, p_miss: 0.15, ..Default::default() }),
        ),
    ] {
        let result = run_dpmo(scene.points(), &scene, &backend, &params, 7)?;
        let fallbacks = result.fallback_flags.iter().filter(|&&f| f).count();
        let iou = mean_matched_iou(&result.masks, gt)?;
        println!(
            "{name:12} -> {} masks, {fallbacks:2} circle fallbacks, mean matched IoU {iou:.4}",
            result.masks.len()
        );

        let path = out_dir.join(format!("{}.png", name.replace(' ', "_")));
        render_overlay(&scene, &result.masks, &path)?;
        println!("{:>16} {}", "overlay:", path.display());
    }
    Ok(())
}
