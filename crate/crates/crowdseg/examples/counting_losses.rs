//! The two mask-supervised counting losses: the density-map loss with its
//! analytic gradient, and mask-constrained point matching (greedy three-case
//! vs exact assignment).
//!
//! ```sh
//! cargo run --example counting_losses
//! ```

use crowdseg::losses::{
    density_mask_loss, density_mask_loss_grad, match_exact, match_three_case, MatchingProblem,
};
use crowdseg::nnec::{rasterize_circle, ExclusionCircle};
use crowdseg::rng::Rng;
use crowdseg::synth::{generate_scene, make_density_map, perturb_points, DensityMode, SynthConfig};
use crowdseg::{Point2D, Result};

fn main() -> Result<()> {
    let scene = generate_scene(&SynthConfig::mixed(40, 23))?;
    let masks = scene.gt_masks().unwrap();

    // density loss: perfect vs uniform-mass predictions
    let perfect = make_density_map(&scene, DensityMode::Perfect)?;
    let uniform = make_density_map(&scene, DensityMode::UniformMass)?;
    println!("density loss, perfect map:      {:.3e}", density_mask_loss(&perfect, masks)?);
    println!("density loss, uniform-mass map: {:.4}", density_mask_loss(&uniform, masks)?);

    let grad = density_mask_loss_grad(&uniform, masks)?;
    let max_grad = grad.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_grad = grad.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("uniform-map gradient range: [{min_grad:.4}, {max_grad:.4}]");

    // point matching on perturbed predictions
    let mut rng = Rng::new(5);
    let preds = perturb_points(scene.points(), 3.0, scene.width(), scene.height(), &mut rng);
    let problem =
        MatchingProblem::new(preds, scene.points().to_vec(), masks.to_vec())?;
    let greedy = match_three_case(&problem)?;
    let exact = match_exact(&problem)?;
    println!(
        "matching {} preds to {} gts: three-case cost {:.2} ({} pairs), exact cost {:.2} ({} pairs)",
        problem.pred_points.len(),
        problem.gt_points.len(),
        greedy.total_cost,
        greedy.pairs.len(),
        exact.total_cost,
        exact.pairs.len()
    );

    // a crossing fixture where the greedy matcher pays for its short-sighted
    // first pairing and the exact solver does not
    let disc =
        |cx, cy, r| rasterize_circle(&ExclusionCircle { center: Point2D::new(cx, cy), radius: r }, 32, 32);
    let crossing = MatchingProblem::new(
        vec![Point2D::new(11.0, 10.0), Point2D::new(8.8, 10.0)],
        vec![Point2D::new(10.0, 10.0), Point2D::new(12.0, 10.0)],
        vec![disc(11.0, 10.0, 4.0), disc(12.5, 10.0, 1.6)],
    )?;
    let greedy = match_three_case(&crossing)?;
    let exact = match_exact(&crossing)?;
    println!(
        "crossing fixture: three-case pairs {:?} cost {:.2}; exact pairs {:?} cost {:.2}",
        greedy.pairs, greedy.total_cost, exact.pairs, exact.total_cost
    );
    Ok(())
}
