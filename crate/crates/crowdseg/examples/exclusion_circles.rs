//! Exclusion-circle geometry: per-point radii from nearest-neighbor
//! distances, the clamp bounds, the exclusivity guarantee, and the
//! bounded (non-overlapping) ablation.
//!
//! ```sh
//! cargo run --example exclusion_circles
//! ```

use crowdseg::nnec::{all_radii, NnecParams};
use crowdseg::synth::{generate_scene, SynthConfig};
use crowdseg::{Point2D, Result};

fn main() -> Result<()> {
    // a tiny hand-made layout first
    let points = vec![
        Point2D::new(20.0, 20.0),
        Point2D::new(32.0, 20.0), // 12 px from the first
        Point2D::new(90.0, 60.0), // far from everyone
        Point2D::new(33.0, 24.0), // 4.1 px from its neighbor: clamps to r_min
    ];
    let params = NnecParams::default();
    println!("defaults: r_min {} r_max {} delta {}", params.r_min, params.r_max, params.delta);
    for (i, circle) in all_radii(&points, &params)?.iter().enumerate() {
        println!(
            "  point {} at ({:5.1}, {:5.1}) -> radius {:6.2}",
            i, circle.center.x, circle.center.y, circle.radius
        );
    }

    // exclusivity on a generated sparse scene
    let scene = generate_scene(&SynthConfig::sparse(40, 3))?;
    let circles = all_radii(scene.points(), &params)?;
    let mut own = 0usize;
    let mut foreign = 0usize;
    for circle in &circles {
        for p in scene.points() {
            if circle.contains_point_pixel(p) {
                if p == &circle.center {
                    own += 1;
                } else {
                    foreign += 1;
                }
            }
        }
    }
    println!(
        "sparse scene ({} points): {} circles contain their own point, {} contain a foreign one",
        scene.len(),
        own,
        foreign
    );

    // bounded ablation: radii halve (before clamping), circles cannot overlap
    let bounded = NnecParams { bounded_mode: true, ..params };
    let unbounded_mean: f64 =
        circles.iter().map(|c| c.radius).sum::<f64>() / circles.len() as f64;
    let bounded_circles = all_radii(scene.points(), &bounded)?;
    let bounded_mean: f64 =
        bounded_circles.iter().map(|c| c.radius).sum::<f64>() / bounded_circles.len() as f64;
    println!("mean radius: unbounded {unbounded_mean:.2} px, bounded {bounded_mean:.2} px");
    Ok(())
}
