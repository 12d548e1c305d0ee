//! Instance segmentation evaluation: IoU, Hungarian matching on the IoU
//! matrix, and confusion-matrix precision/recall/F1.

use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{Error, Result};
use crate::mask::RasterMask;

/// Intersection over union of two same-sized masks. Two empty masks score 0.
pub fn iou(a: &RasterMask, b: &RasterMask) -> Result<f64> {
    if !a.same_size(b) {
        return Err(Error::size_mismatch(
            format!("{}x{}", a.width(), a.height()),
            format!("{}x{}", b.width(), b.height()),
        ));
    }
    let union = a.union_count(b);
    if union == 0 {
        return Ok(0.0);
    }
    Ok(a.intersection_count(b) as f64 / union as f64)
}

/// Pairwise IoU matrix with entry `(i, j) = iou(preds[i], gts[j])`.
pub fn iou_matrix(preds: &[RasterMask], gts: &[RasterMask]) -> Result<Vec<Vec<f64>>> {
    preds
        .iter()
        .map(|p| gts.iter().map(|g| iou(p, g)).collect())
        .collect()
}

/// Optimal one-to-one matching maximizing total IoU. Returns `min(m, n)`
/// pairs `(pred, gt)` sorted by pred index.
pub fn hungarian_match(iou: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let m = iou.len();
    let n = iou.first().map_or(0, |row| row.len());
    if m == 0 || n == 0 {
        return Vec::new();
    }
    let cost: Vec<f64> = iou.iter().flat_map(|row| row.iter().map(|&v| -v)).collect();
    assignment::solve_min_cost(&cost, m, n)
}

/// Mean IoU over the Hungarian-matched pairs; 0 when there are no pairs.
pub fn mean_matched_iou(preds: &[RasterMask], gts: &[RasterMask]) -> Result<f64> {
    if gts.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let matrix = iou_matrix(preds, gts)?;
    let pairs = hungarian_match(&matrix);
    if pairs.is_empty() {
        return Ok(0.0);
    }
    Ok(pairs.iter().map(|&(i, j)| matrix[i][j]).sum::<f64>() / pairs.len() as f64)
}

/// Detection counts at a given IoU threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn add(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix { tp: self.tp + other.tp, fp: self.fp + other.fp, fn_: self.fn_ + other.fn_ }
    }
}

/// Confusion matrix from Hungarian-matched masks: a matched pair counts as a
/// true positive when its IoU reaches the threshold.
pub fn confusion(
    preds: &[RasterMask],
    gts: &[RasterMask],
    iou_threshold: f64,
) -> Result<ConfusionMatrix> {
    let matrix = iou_matrix(preds, gts)?;
    let pairs = hungarian_match(&matrix);
    let tp = pairs.iter().filter(|&&(i, j)| matrix[i][j] >= iou_threshold).count();
    Ok(ConfusionMatrix { tp, fp: preds.len() - tp, fn_: gts.len() - tp })
}

/// Precision, recall, F1. Zero denominators yield 0.
pub fn prf1(cm: &ConfusionMatrix) -> (f64, f64, f64) {
    let precision = if cm.tp + cm.fp > 0 { cm.tp as f64 / (cm.tp + cm.fp) as f64 } else { 0.0 };
    let recall = if cm.tp + cm.fn_ > 0 { cm.tp as f64 / (cm.tp + cm.fn_) as f64 } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

/// Per-image evaluation entry of a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerImageEval {
    pub image_id: String,
    pub iou: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Dataset-level report: IoU averaged over per-image means, precision /
/// recall / F1 from confusion counts summed over images.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub iou: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_image: Vec<PerImageEval>,
}

/// Evaluate a single image's predictions against its ground truth.
pub fn evaluate_image(
    image_id: &str,
    preds: &[RasterMask],
    gts: &[RasterMask],
    iou_threshold: f64,
) -> Result<PerImageEval> {
    let mean_iou = mean_matched_iou(preds, gts)?;
    let cm = confusion(preds, gts, iou_threshold)?;
    let (precision, recall, f1) = prf1(&cm);
    Ok(PerImageEval {
        image_id: image_id.to_string(),
        iou: mean_iou,
        precision,
        recall,
        f1,
        tp: cm.tp,
        fp: cm.fp,
        fn_: cm.fn_,
    })
}

/// Aggregate per-image results into a dataset report.
pub fn aggregate(per_image: Vec<PerImageEval>) -> Result<EvalReport> {
    if per_image.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let iou = per_image.iter().map(|e| e.iou).sum::<f64>() / per_image.len() as f64;
    let cm = per_image.iter().fold(ConfusionMatrix { tp: 0, fp: 0, fn_: 0 }, |acc, e| {
        acc.add(&ConfusionMatrix { tp: e.tp, fp: e.fp, fn_: e.fn_ })
    });
    let (precision, recall, f1) = prf1(&cm);
    Ok(EvalReport { iou, precision, recall, f1, per_image })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point2D;
    use crate::nnec::{rasterize_circle, ExclusionCircle};
    use crate::rng::Rng;

    fn disc(cx: f64, cy: f64, r: f64) -> RasterMask {
        rasterize_circle(&ExclusionCircle { center: Point2D::new(cx, cy), radius: r }, 32, 32)
    }

    #[test]
    fn identical_masks_iou_one() {
        let a = disc(10.0, 10.0, 4.0);
        assert_eq!(iou(&a, &a.clone()).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_masks_iou_zero() {
        let a = disc(5.0, 5.0, 2.0);
        let b = disc(25.0, 25.0, 2.0);
        assert_eq!(iou(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn subset_iou_is_ratio() {
        let mut a = RasterMask::new(4, 4);
        for (c, r) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            a.set(c, r, true);
        }
        let mut b = RasterMask::new(4, 4);
        b.set(0, 0, true);
        b.set(1, 0, true);
        assert_eq!(iou(&a, &b).unwrap(), 0.5);
    }

    #[test]
    fn both_empty_iou_zero() {
        let a = RasterMask::new(4, 4);
        assert_eq!(iou(&a, &a.clone()).unwrap(), 0.0);
    }

    #[test]
    fn size_mismatch_detected() {
        let a = RasterMask::new(4, 4);
        let b = RasterMask::new(5, 4);
        assert!(iou(&a, &b).is_err());
    }

    #[test]
    fn hungarian_two_pair_example() {
        let matrix = vec![vec![0.8, 0.1], vec![0.2, 0.9]];
        let pairs = hungarian_match(&matrix);
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
        let total: f64 = pairs.iter().map(|&(i, j)| matrix[i][j]).sum();
        assert!((total - 1.7).abs() < 1e-12);
    }

    #[test]
    fn hungarian_prefers_diagonal_dominant() {
        let k = 5;
        let matrix: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 0.9 } else { 0.05 }).collect())
            .collect();
        let pairs = hungarian_match(&matrix);
        assert_eq!(pairs, (0..k).map(|i| (i, i)).collect::<Vec<_>>());
    }

    #[test]
    fn mean_matched_iou_examples() {
        let gts = vec![disc(8.0, 8.0, 4.0), disc(22.0, 22.0, 4.0)];
        assert_eq!(mean_matched_iou(&gts, &gts).unwrap(), 1.0);

        // far-away predictions share no pixels with the ground truth
        let preds = vec![disc(8.0, 28.0, 1.0), disc(28.0, 8.0, 1.0)];
        assert_eq!(mean_matched_iou(&preds, &gts).unwrap(), 0.0);

        assert!(matches!(mean_matched_iou(&gts, &[]), Err(Error::EmptyGroundTruth)));
    }

    #[test]
    fn confusion_thresholding() {
        let gts = vec![disc(8.0, 8.0, 4.0), disc(22.0, 22.0, 4.0)];
        let cm = confusion(&gts, &gts, 0.5).unwrap();
        assert_eq!(cm, ConfusionMatrix { tp: 2, fp: 0, fn_: 0 });

        let cm = confusion(&[], &gts, 0.5).unwrap();
        assert_eq!(cm, ConfusionMatrix { tp: 0, fp: 0, fn_: 2 });
    }

    /// Masks engineered to IoU 0.8 and 0.9 against their ground truths: the
    /// matched mean is 0.85 and a 0.85 threshold keeps only the 0.9 pair.
    #[test]
    fn two_pair_mean_and_threshold() {
        let strip = |len: u32, row: u32| {
            let mut m = RasterMask::new(16, 16);
            for c in 0..len {
                m.set(c, row, true);
            }
            m
        };
        let gts = vec![strip(10, 0), strip(10, 8)];
        let preds = vec![strip(8, 0), strip(9, 8)]; // IoU 8/10 and 9/10
        let matrix = iou_matrix(&preds, &gts).unwrap();
        assert_eq!(matrix[0][0], 0.8);
        assert_eq!(matrix[1][1], 0.9);
        let mean = mean_matched_iou(&preds, &gts).unwrap();
        assert!((mean - 0.85).abs() < 1e-12);

        let cm = confusion(&preds, &gts, 0.85).unwrap();
        assert_eq!(cm, ConfusionMatrix { tp: 1, fp: 1, fn_: 1 });
    }

    #[test]
    fn empty_prediction_side() {
        let gts = vec![disc(8.0, 8.0, 4.0)];
        let matrix = iou_matrix(&[], &gts).unwrap();
        assert!(matrix.is_empty());
        assert!(hungarian_match(&matrix).is_empty());
        assert_eq!(mean_matched_iou(&[], &gts).unwrap(), 0.0);
    }

    #[test]
    fn prf1_fixture() {
        let (p, r, f1) = prf1(&ConfusionMatrix { tp: 3, fp: 1, fn_: 2 });
        assert_eq!(p, 0.75);
        assert_eq!(r, 0.6);
        assert!((f1 - 2.0 * 0.45 / 1.35).abs() < 1e-15);

        assert_eq!(prf1(&ConfusionMatrix { tp: 0, fp: 0, fn_: 0 }), (0.0, 0.0, 0.0));
        assert_eq!(prf1(&ConfusionMatrix { tp: 4, fp: 0, fn_: 0 }), (1.0, 1.0, 1.0));
    }

    #[test]
    fn prf1_monotone_in_tp() {
        let mut prev = (0.0, 0.0, 0.0);
        for tp in 0..10 {
            let cur = prf1(&ConfusionMatrix { tp, fp: 3, fn_: 4 });
            assert!(cur.0 >= prev.0 && cur.1 >= prev.1 && cur.2 >= prev.2);
            prev = cur;
        }
    }

    #[test]
    fn mean_matched_iou_permutation_invariant() {
        let mut rng = Rng::new(17);
        let masks: Vec<RasterMask> = (0..4)
            .map(|_| disc(rng.next_range(4.0, 28.0), rng.next_range(4.0, 28.0), rng.next_range(2.0, 5.0)))
            .collect();
        let preds: Vec<RasterMask> = (0..4)
            .map(|_| disc(rng.next_range(4.0, 28.0), rng.next_range(4.0, 28.0), rng.next_range(2.0, 5.0)))
            .collect();
        let base = mean_matched_iou(&preds, &masks).unwrap();
        // reverse both lists: value must not move
        let preds_rev: Vec<_> = preds.iter().rev().cloned().collect();
        let masks_rev: Vec<_> = masks.iter().rev().cloned().collect();
        let permuted = mean_matched_iou(&preds_rev, &masks_rev).unwrap();
        assert!((base - permuted).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&base));
    }
}
