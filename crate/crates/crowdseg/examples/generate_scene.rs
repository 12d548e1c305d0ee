//! Generate seeded synthetic crowd scenes across the three density regimes
//! and write them in the interchange formats.
//!
//! ```sh
//! cargo run --example generate_scene
//! ```

use crowdseg::nnec::brute_nearest_sq;
use crowdseg::synth::{generate_scene, make_density_map, DensityMode, DensityRegime, SynthConfig};
use crowdseg::{io, Result};

fn main() -> Result<()> {
    let out_root = std::path::PathBuf::from("target/example-artifacts/generate_scene");
    std::fs::create_dir_all(&out_root).expect("create output dir");

    for (regime, n_heads) in [
        (DensityRegime::Sparse, 40),
        (DensityRegime::Mixed, 90),
        (DensityRegime::Dense, 180),
    ] {
        let cfg = SynthConfig::preset(regime, n_heads, 7);
        let scene = generate_scene(&cfg)?;

        let d: Vec<f64> = brute_nearest_sq(scene.points()).iter().map(|d2| d2.sqrt()).collect();
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let total_mask_px: u64 =
            scene.gt_masks().unwrap().iter().map(|m| m.population()).sum();
        println!(
            "{:?}: {} heads on {}x{}, nearest-neighbor distance min {:.1} / mean {:.1} px, {} mask px",
            regime,
            scene.len(),
            scene.width(),
            scene.height(),
            min,
            mean,
            total_mask_px
        );

        let dir = out_root.join(format!("{regime:?}").to_lowercase());
        std::fs::create_dir_all(&dir).expect("create scene dir");
        io::save_points(&dir.join("points.json"), scene.width(), scene.height(), scene.points())?;
        io::save_masks(&dir.join("masks.json"), scene.gt_masks().unwrap())?;
        let density = make_density_map(&scene, DensityMode::Perfect)?;
        io::save_density(&dir.join("density.json"), &density)?;
        println!("  -> {}", dir.display());
    }
    Ok(())
}
