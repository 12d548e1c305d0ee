//! The evaluation protocol: IoU matrix, Hungarian matching, mean matched
//! IoU, and confusion-matrix precision/recall/F1 across thresholds.
//!
//! ```sh
//! cargo run --example evaluate_masks
//! ```

use crowdseg::dpmo::run_dpmo;
use crowdseg::eval::{confusion, hungarian_match, iou_matrix, mean_matched_iou, prf1};
use crowdseg::nnec::NnecParams;
use crowdseg::rng::Rng;
use crowdseg::segmenter::{OracleConfig, SegmenterBackend};
use crowdseg::synth::{generate_scene, perturb_points, SynthConfig};
use crowdseg::Result;

fn main() -> Result<()> {
    let scene = generate_scene(&SynthConfig::mixed(25, 41))?;
    let gt = scene.gt_masks().unwrap();

    // imperfect predictions: perturbed prompts through a noisy oracle
    let mut rng = Rng::new(2);
    let prompts = perturb_points(scene.points(), 3.0, scene.width(), scene.height(), &mut rng);
    let backend =
        SegmenterBackend::Oracle(OracleConfig { noise_px: 2, p_miss: 0.1, ..Default::default() });
    let preds = run_dpmo(&prompts, &scene, &backend, &NnecParams::default(), 13)?.masks;

    let matrix = iou_matrix(&preds, gt)?;
    let pairs = hungarian_match(&matrix);
    println!("IoU matrix is {}x{}; first rows:", matrix.len(), matrix[0].len());
    for row in matrix.iter().take(4) {
        let cells: Vec<String> = row.iter().take(8).map(|v| format!("{v:.2}")).collect();
        println!("  [{}{}]", cells.join(" "), if row.len() > 8 { " ..." } else { "" });
    }
    let matched_iou: Vec<f64> = pairs.iter().map(|&(i, j)| matrix[i][j]).collect();
    println!(
        "hungarian matched {} pairs, IoU quartiles ~ {:.2} / {:.2} / {:.2}",
        pairs.len(),
        percentile(&matched_iou, 0.25),
        percentile(&matched_iou, 0.5),
        percentile(&matched_iou, 0.75),
    );
    println!("mean matched IoU: {:.4}", mean_matched_iou(&preds, gt)?);

    println!("threshold  tp  fp  fn  precision recall f1");
    for threshold in [0.3, 0.5, 0.7, 0.9] {
        let cm = confusion(&preds, gt, threshold)?;
        let (p, r, f1) = prf1(&cm);
        println!(
            "{threshold:9.1} {:3} {:3} {:3} {p:10.4} {r:6.4} {f1:6.4}",
            cm.tp, cm.fp, cm.fn_
        );
    }
    Ok(())
}

fn percentile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.is_empty() {
        return 0.0;
    }
    sorted[((sorted.len() - 1) as f64 * q).round() as usize]
}
