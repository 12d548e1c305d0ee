//! Reinforced point selection.
//!
//! Around every initial predicted point, four extra candidates are drawn by
//! Gaussian sampling; the five points form a group. Each candidate is scored
//! by the IoU its pipeline mask achieves against the group's ground-truth
//! mask, and a small feature-based scorer is trained with the group-relative
//! cross-entropy loss to put its highest logit on the reward-optimal
//! candidate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dpmo::run_dpmo;
use crate::error::{Error, Result};
use crate::eval::iou;
use crate::geom::Point2D;
use crate::nnec::NnecParams;
use crate::rng::Rng;
use crate::scene::Scene;
use crate::segmenter::SegmenterBackend;

/// Candidates per group: the initial prediction plus four samples.
pub const GROUP_SIZE: usize = 5;

/// Features per candidate fed to the scorer: offset from the group centroid
/// (x, y), distance to the nearest other group's initial point, mask-to-circle
/// population ratio, and the fallback flag.
pub const FEATURE_COUNT: usize = 5;

/// A candidate group: five prompt candidates with their rewards, features,
/// and the index of the reward-optimal candidate.
#[derive(Debug, Clone)]
pub struct CandidateGroup {
    pub candidates: [Point2D; GROUP_SIZE],
    pub rewards: [f64; GROUP_SIZE],
    pub features: [[f64; FEATURE_COUNT]; GROUP_SIZE],
    /// argmax of `rewards`, ties to the lowest index.
    pub best: usize,
}

/// Sample a candidate group around an initial prediction: element 0 is the
/// initial point, elements 1..4 add Gaussian offsets in a fixed draw order,
/// clamped to the scene bounds.
pub fn sample_group(
    initial: Point2D,
    sigma: f64,
    width: u32,
    height: u32,
    rng: &mut Rng,
) -> [Point2D; GROUP_SIZE] {
    let mut out = [initial; GROUP_SIZE];
    for slot in out.iter_mut().skip(1) {
        let dx = rng.next_gaussian(0.0, sigma);
        let dy = rng.next_gaussian(0.0, sigma);
        *slot = Point2D::new(initial.x + dx, initial.y + dy).clamped(width, height);
    }
    out
}

/// Everything a reward computation needs besides the candidates themselves.
#[derive(Debug, Clone, Copy)]
pub struct RewardContext<'a> {
    pub scene: &'a Scene,
    pub backend: &'a SegmenterBackend,
    pub params: &'a NnecParams,
    pub seed: u64,
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Compute rewards and features for one group. Candidate `c` is substituted
/// as prompt `gt_index` while every other prompt stays at its initial
/// prediction; the reward is the IoU of the resulting mask against
/// `gt_masks[gt_index]`.
pub fn compute_rewards(
    ctx: &RewardContext,
    initials: &[Point2D],
    gt_index: usize,
    candidates: &[Point2D; GROUP_SIZE],
) -> Result<CandidateGroup> {
    let gt_masks = ctx.scene.require_gt_masks()?;
    assert!(gt_index < initials.len(), "group index out of range");
    let gt = &gt_masks[gt_index];

    let centroid_x = candidates.iter().map(|p| p.x).sum::<f64>() / GROUP_SIZE as f64;
    let centroid_y = candidates.iter().map(|p| p.y).sum::<f64>() / GROUP_SIZE as f64;

    let mut rewards = [0.0; GROUP_SIZE];
    let mut features = [[0.0; FEATURE_COUNT]; GROUP_SIZE];
    let mut prompts = initials.to_vec();
    for (c, candidate) in candidates.iter().enumerate() {
        prompts[gt_index] = *candidate;
        let result = run_dpmo(&prompts, ctx.scene, ctx.backend, ctx.params, ctx.seed)?;
        rewards[c] = iou(&result.masks[gt_index], gt)?;

        let nearest_other = initials
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != gt_index)
            .map(|(_, p)| candidate.distance(p))
            .fold(f64::INFINITY, f64::min);
        let circle_pop =
            result.circles[gt_index].raster_population(ctx.scene.width(), ctx.scene.height());
        let ratio = if circle_pop > 0 {
            result.masks[gt_index].population() as f64 / circle_pop as f64
        } else {
            0.0
        };
        features[c] = [
            candidate.x - centroid_x,
            candidate.y - centroid_y,
            if nearest_other.is_finite() { nearest_other } else { 0.0 },
            ratio,
            if result.fallback_flags[gt_index] { 1.0 } else { 0.0 },
        ];
    }
    let best = argmax_lowest(&rewards);
    Ok(CandidateGroup { candidates: *candidates, rewards, features, best })
}

/// Sample and score one group per initial prediction. Groups draw from
/// per-index substreams and evaluate independently (in parallel).
pub fn build_groups(
    ctx: &RewardContext,
    initials: &[Point2D],
    sigma: f64,
    sample_seed: u64,
) -> Result<Vec<CandidateGroup>> {
    (0..initials.len())
        .into_par_iter()
        .map(|i| {
            let mut rng = Rng::stream(sample_seed, &format!("group:{i}"));
            let candidates =
                sample_group(initials[i], sigma, ctx.scene.width(), ctx.scene.height(), &mut rng);
            compute_rewards(ctx, initials, i, &candidates)
        })
        .collect()
}

/// Group-relative cross-entropy for one group: `-s_y + log sum_c exp(s_c)`,
/// computed with max subtraction.
pub fn grpo_loss(logits: &[f64; GROUP_SIZE], y: usize) -> f64 {
    assert!(y < GROUP_SIZE);
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|s| (s - m).exp()).sum::<f64>().ln();
    -logits[y] + lse
}

/// Mean loss over many `(logits, best)` groups.
pub fn grpo_loss_batch(groups: &[([f64; GROUP_SIZE], usize)]) -> f64 {
    if groups.is_empty() {
        return 0.0;
    }
    groups.iter().map(|(s, y)| grpo_loss(s, *y)).sum::<f64>() / groups.len() as f64
}

/// Gradient of [`grpo_loss`] with respect to the logits: `softmax(s) -
/// onehot(y)`. Components sum to zero.
pub fn grpo_loss_grad(logits: &[f64; GROUP_SIZE], y: usize) -> [f64; GROUP_SIZE] {
    assert!(y < GROUP_SIZE);
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    let mut grad = [0.0; GROUP_SIZE];
    for (g, e) in grad.iter_mut().zip(&exps) {
        *g = e / z;
    }
    grad[y] -= 1.0;
    grad
}

/// Linear candidate scorer over the five per-candidate features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerModel {
    pub weights: [f64; FEATURE_COUNT],
    pub bias: f64,
}

impl ScorerModel {
    pub fn zeros() -> Self {
        Self { weights: [0.0; FEATURE_COUNT], bias: 0.0 }
    }

    pub fn score(&self, features: &[f64; FEATURE_COUNT]) -> f64 {
        self.weights.iter().zip(features).map(|(w, f)| w * f).sum::<f64>() + self.bias
    }

    pub fn scores(&self, group: &CandidateGroup) -> [f64; GROUP_SIZE] {
        let mut out = [0.0; GROUP_SIZE];
        for (s, f) in out.iter_mut().zip(&group.features) {
            *s = self.score(f);
        }
        out
    }
}

/// Training hyperparameters for the scorer.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    /// Scale of the seeded Gaussian weight initialization; 0 gives exact
    /// zero initialization.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { lr: 0.01, epochs: 300, init_scale: 0.0, seed: 0 }
    }
}

/// Full-batch gradient descent on the mean group loss. Returns the trained
/// model and the loss history (one entry per epoch plus the final loss).
pub fn train_scorer(
    groups: &[CandidateGroup],
    cfg: &TrainConfig,
) -> Result<(ScorerModel, Vec<f64>)> {
    if groups.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut model = ScorerModel::zeros();
    if cfg.init_scale > 0.0 {
        let mut rng = Rng::new(cfg.seed);
        for w in &mut model.weights {
            *w = rng.next_gaussian(0.0, cfg.init_scale);
        }
    }

    let n = groups.len() as f64;
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    for _ in 0..cfg.epochs {
        let mut loss = 0.0;
        let mut grad_w = [0.0; FEATURE_COUNT];
        let mut grad_b = 0.0;
        for group in groups {
            let scores = model.scores(group);
            loss += grpo_loss(&scores, group.best);
            let g = grpo_loss_grad(&scores, group.best);
            for (c, gc) in g.iter().enumerate() {
                for (k, gw) in grad_w.iter_mut().enumerate() {
                    *gw += gc * group.features[c][k];
                }
                grad_b += gc;
            }
        }
        history.push(loss / n);
        for (w, gw) in model.weights.iter_mut().zip(&grad_w) {
            *w -= cfg.lr * gw / n;
        }
        model.bias -= cfg.lr * grad_b / n;
    }
    let final_loss = groups
        .iter()
        .map(|g| grpo_loss(&model.scores(g), g.best))
        .sum::<f64>()
        / n;
    history.push(final_loss);
    Ok((model, history))
}

/// The candidate the model scores highest, ties to the lowest index.
pub fn select_point(group: &CandidateGroup, model: &ScorerModel) -> Point2D {
    group.candidates[argmax_lowest(&model.scores(group))]
}

/// The reward-optimal candidate (oracle selection).
pub fn select_by_reward(group: &CandidateGroup) -> Point2D {
    group.candidates[group.best]
}
