//! Reinforced point selection end to end: displace the annotations into
//! poor initial predictions, sample candidate groups around them, score
//! candidates by pipeline IoU, train the linear scorer with the
//! group-relative loss, and compare selection strategies.
//!
//! ```sh
//! cargo run --example select_prompts
//! ```

use crowdseg::dpmo::run_dpmo;
use crowdseg::eval::mean_matched_iou;
use crowdseg::nnec::NnecParams;
use crowdseg::rng::{derive_seed, Rng};
use crowdseg::rps::{build_groups, select_point, train_scorer, RewardContext, TrainConfig};
use crowdseg::segmenter::SegmenterBackend;
use crowdseg::synth::{generate_scene, DensityRegime, SynthConfig};
use crowdseg::{Point2D, Result, Scene};

/// Annotations displaced by a fixed distance in a random direction: the kind
/// of systematically-off initial predictions that make selection matter.
fn displaced(scene: &Scene, dist: f64, seed: u64) -> Vec<Point2D> {
    let mut rng = Rng::stream(seed, "displace");
    scene
        .points()
        .iter()
        .map(|p| {
            let angle = rng.next_range(0.0, std::f64::consts::TAU);
            Point2D::new(p.x + dist * angle.cos(), p.y + dist * angle.sin())
                .clamped(scene.width(), scene.height())
        })
        .collect()
}

fn main() -> Result<()> {
    let seed = 17u64;
    let cfg = SynthConfig {
        width: 384,
        height: 384,
        n_heads: 30,
        regime: DensityRegime::Mixed,
        head_radius_range: [5.0, 7.0],
        min_center_spacing: 28.0,
        seed,
    };
    let scene = generate_scene(&cfg)?;
    let backend = SegmenterBackend::exact_oracle();
    // a tight maximum radius keeps badly-placed prompts from rescuing
    // themselves with a huge circle
    let params = NnecParams { r_max: 13.0, ..Default::default() };
    let gt = scene.gt_masks().unwrap();

    let initials = displaced(&scene, 20.0, seed);
    let ctx = RewardContext {
        scene: &scene,
        backend: &backend,
        params: &params,
        seed: derive_seed(seed, "rewards"),
    };
    println!("sampling and scoring {} candidate groups (sigma 8)...", initials.len());
    let groups = build_groups(&ctx, &initials, 8.0, derive_seed(seed, "sample"))?;

    let mean_reward_initial: f64 =
        groups.iter().map(|g| g.rewards[0]).sum::<f64>() / groups.len() as f64;
    let mean_reward_best: f64 =
        groups.iter().map(|g| g.rewards[g.best]).sum::<f64>() / groups.len() as f64;
    let initial_fallbacks = groups.iter().filter(|g| g.features[0][4] == 1.0).count();
    let best_fallbacks = groups.iter().filter(|g| g.features[g.best][4] == 1.0).count();
    println!("mean candidate reward: initial {mean_reward_initial:.4}, group best {mean_reward_best:.4}");
    println!(
        "circle fallbacks: {initial_fallbacks}/{} initial candidates, {best_fallbacks}/{} best candidates",
        groups.len(),
        groups.len()
    );

    let (model, history) =
        train_scorer(&groups, &TrainConfig { lr: 0.002, epochs: 600, ..Default::default() })?;
    println!(
        "trained scorer: loss {:.4} -> {:.4}, weights {:?} (feature 4 = fallback flag)",
        history[0],
        history.last().unwrap(),
        model.weights.map(|w| (w * 1000.0).round() / 1000.0)
    );

    let strategies: [(&str, Vec<Point2D>); 3] = [
        ("initial predictions", initials.clone()),
        ("reward-oracle pick", groups.iter().map(|g| g.candidates[g.best]).collect()),
        ("trained scorer pick", groups.iter().map(|g| select_point(g, &model)).collect()),
    ];
    for (name, prompts) in strategies {
        let result = run_dpmo(&prompts, &scene, &backend, &params, derive_seed(seed, "final"))?;
        let iou = mean_matched_iou(&result.masks, gt)?;
        println!("{name:20} -> mean matched IoU {iou:.4}");
    }
    Ok(())
}
