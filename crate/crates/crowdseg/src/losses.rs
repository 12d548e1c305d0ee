//! Mask-supervised counting losses.
//!
//! Two losses trained against instance masks: a density-map loss that pushes
//! each mask's integrated density to 1 and the background to 0, and a
//! point-matching loss that pairs predicted points with ground-truth points
//! under the constraint that a finite-cost pairing requires the prediction to
//! lie inside the ground-truth mask. The matching comes in two flavors: the
//! greedy three-case procedure and the exact assignment optimum.

use crate::assignment;
use crate::density::DensityMap;
use crate::error::{Error, Result};
use crate::geom::Point2D;
use crate::mask::RasterMask;

const BACKGROUND: u32 = u32::MAX;

fn mask_owner_map(width: u32, height: u32, masks: &[RasterMask]) -> Result<Vec<u32>> {
    let mut owner = vec![BACKGROUND; width as usize * height as usize];
    for (i, mask) in masks.iter().enumerate() {
        if mask.width() != width || mask.height() != height {
            return Err(Error::size_mismatch(
                format!("{width}x{height}"),
                format!("{}x{}", mask.width(), mask.height()),
            ));
        }
        for (c, r) in mask.iter_set() {
            owner[r as usize * width as usize + c as usize] = i as u32;
        }
    }
    Ok(owner)
}

/// Density loss: mean over masks of the squared deviation of the mask's
/// integrated density from 1, plus the squared total background density.
/// With no masks the whole map is background and the loss is its squared sum.
pub fn density_mask_loss(map: &DensityMap, masks: &[RasterMask]) -> Result<f64> {
    let (mask_sums, bg_sum) = density_sums(map, masks)?;
    if masks.is_empty() {
        return Ok(bg_sum * bg_sum);
    }
    let n = masks.len() as f64;
    let mask_term = mask_sums.iter().map(|s| (s - 1.0) * (s - 1.0)).sum::<f64>() / n;
    Ok(mask_term + bg_sum * bg_sum)
}

/// Analytic gradient of [`density_mask_loss`] with respect to every pixel,
/// returned row-major: `(2/N)(S_i - 1)` inside mask `i`, `2 * S_bg` on the
/// background.
pub fn density_mask_loss_grad(map: &DensityMap, masks: &[RasterMask]) -> Result<Vec<f64>> {
    let (mask_sums, bg_sum) = density_sums(map, masks)?;
    let owner = mask_owner_map(map.width(), map.height(), masks)?;
    let n = masks.len() as f64;
    let bg_grad = 2.0 * bg_sum;
    Ok(owner
        .iter()
        .map(|&who| {
            if who == BACKGROUND {
                bg_grad
            } else {
                2.0 / n * (mask_sums[who as usize] - 1.0)
            }
        })
        .collect())
}

/// Per-mask density sums and the background sum, accumulated in f64.
fn density_sums(map: &DensityMap, masks: &[RasterMask]) -> Result<(Vec<f64>, f64)> {
    let owner = mask_owner_map(map.width(), map.height(), masks)?;
    let mut sums = vec![0.0f64; masks.len()];
    let mut bg = 0.0f64;
    for (idx, &who) in owner.iter().enumerate() {
        let v = map.values()[idx] as f64;
        if who == BACKGROUND {
            bg += v;
        } else {
            sums[who as usize] += v;
        }
    }
    Ok((sums, bg))
}

/// A point-matching instance: predicted points, ground-truth points, and one
/// mask per ground-truth point.
#[derive(Debug, Clone)]
pub struct MatchingProblem {
    pub pred_points: Vec<Point2D>,
    pub gt_points: Vec<Point2D>,
    pub masks: Vec<RasterMask>,
}

impl MatchingProblem {
    pub fn new(
        pred_points: Vec<Point2D>,
        gt_points: Vec<Point2D>,
        masks: Vec<RasterMask>,
    ) -> Result<Self> {
        if masks.len() != gt_points.len() {
            return Err(Error::LengthMismatch { left: masks.len(), right: gt_points.len() });
        }
        Ok(Self { pred_points, gt_points, masks })
    }

    /// Whether prediction `i` lies inside mask `j` (pixel containing the
    /// point).
    fn inside(&self, i: usize, j: usize) -> bool {
        let (col, row) = self.pred_points[i].pixel();
        let mask = &self.masks[j];
        col >= 0
            && row >= 0
            && (col as u32) < mask.width()
            && (row as u32) < mask.height()
            && mask.get(col as u32, row as u32)
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.pred_points[i].distance(&self.gt_points[j])
    }
}

/// The outcome of a matching: matched `(pred, gt)` pairs, leftovers on both
/// sides, and the summed Euclidean distance over the pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
    pub total_cost: f64,
}

fn finish_matching(problem: &MatchingProblem, mut pairs: Vec<(usize, usize)>) -> Matching {
    pairs.sort_unstable();
    let total_cost = pairs.iter().map(|&(i, j)| problem.distance(i, j)).sum();
    let mut pred_used = vec![false; problem.pred_points.len()];
    let mut gt_used = vec![false; problem.gt_points.len()];
    for &(i, j) in &pairs {
        pred_used[i] = true;
        gt_used[j] = true;
    }
    Matching {
        pairs,
        unmatched_pred: (0..pred_used.len()).filter(|&i| !pred_used[i]).collect(),
        unmatched_gt: (0..gt_used.len()).filter(|&j| !gt_used[j]).collect(),
        total_cost,
    }
}

/// Nearest available prediction to gt `j`, restricted to `eligible`.
fn nearest_pred(
    problem: &MatchingProblem,
    j: usize,
    eligible: impl Iterator<Item = usize>,
) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for i in eligible {
        let d = problem.distance(i, j);
        let better = match best {
            None => true,
            Some((bd, bi)) => d < bd || (d == bd && i < bi),
        };
        if better {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i)
}

/// Greedy three-case matching. Per ground-truth mask, in ascending index:
/// one prediction inside pairs directly; several inside pair the one nearest
/// the ground-truth point; masks left with no available inside prediction are
/// handled afterward by pairing the nearest still-unmatched prediction.
pub fn match_three_case(problem: &MatchingProblem) -> Result<Matching> {
    let m = problem.pred_points.len();
    let n = problem.gt_points.len();
    if m == 0 && n > 0 {
        return Err(Error::NoPredictions { gt: n });
    }

    let mut paired = vec![false; m];
    let mut pairs = Vec::new();
    let mut case3 = Vec::new();

    for j in 0..n {
        let inside = (0..m).filter(|&i| !paired[i] && problem.inside(i, j));
        match nearest_pred(problem, j, inside) {
            Some(i) => {
                paired[i] = true;
                pairs.push((i, j));
            }
            None => case3.push(j),
        }
    }
    for j in case3 {
        let background = (0..m).filter(|&i| !paired[i]);
        if let Some(i) = nearest_pred(problem, j, background) {
            paired[i] = true;
            pairs.push((i, j));
        }
    }
    Ok(finish_matching(problem, pairs))
}

/// Exact matching: minimum-cost assignment where a pairing is feasible only
/// when the prediction lies inside the ground-truth mask; ground-truth points
/// whose mask contains no prediction at all fall back to the nearest
/// still-unmatched prediction, mirroring case 3.
pub fn match_exact(problem: &MatchingProblem) -> Result<Matching> {
    let m = problem.pred_points.len();
    let n = problem.gt_points.len();
    if m == 0 && n > 0 {
        return Err(Error::Infeasible(format!("no predictions for {n} ground-truth points")));
    }

    // columns with at least one feasible prediction enter the solver
    let feasible_cols: Vec<usize> =
        (0..n).filter(|&j| (0..m).any(|i| problem.inside(i, j))).collect();

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if !feasible_cols.is_empty() {
        let mut max_d = 0.0f64;
        for i in 0..m {
            for &j in &feasible_cols {
                if problem.inside(i, j) {
                    max_d = max_d.max(problem.distance(i, j));
                }
            }
        }
        // exceeds any feasible total, so the solver prefers every extra
        // feasible pair over a single sentinel pair
        let big = m.min(feasible_cols.len()) as f64 * max_d + 1.0;
        let nf = feasible_cols.len();
        let mut cost = vec![0.0f64; m * nf];
        for i in 0..m {
            for (jj, &j) in feasible_cols.iter().enumerate() {
                cost[i * nf + jj] =
                    if problem.inside(i, j) { problem.distance(i, j) } else { big };
            }
        }
        pairs = assignment::solve_min_cost(&cost, m, nf)
            .into_iter()
            .filter(|&(i, jj)| cost[i * nf + jj] < big)
            .map(|(i, jj)| (i, feasible_cols[jj]))
            .collect();
    }

    // case-3 fallback for ground truths with an all-infeasible column
    let mut paired = vec![false; m];
    for &(i, _) in &pairs {
        paired[i] = true;
    }
    for j in (0..n).filter(|j| !feasible_cols.contains(j)) {
        let background = (0..m).filter(|&i| !paired[i]);
        if let Some(i) = nearest_pred(problem, j, background) {
            paired[i] = true;
            pairs.push((i, j));
        }
    }
    Ok(finish_matching(problem, pairs))
}
