//! crowdseg — point-prompted crowd instance segmentation at desk scale.
//!
//! The library turns per-person point annotations into disjoint instance
//! masks and builds the training/evaluation machinery around that:
//!
//! - **nnec** — nearest-neighbor exclusion circles: per-point radii strictly
//!   below the nearest-neighbor distance, rasterization, proposal
//!   constraining with circle fallback, and overlap resolution.
//! - **segmenter** — pluggable prompt-to-mask backends (fixed circle,
//!   noisy ground-truth oracle, file-backed proposals) standing in for a
//!   neural segmenter.
//! - **dpmo** — the point-to-mask pipeline gluing the two together.
//! - **rps** — reinforced point selection: Gaussian candidate groups,
//!   pipeline-IoU rewards, the group-relative cross-entropy loss, and a
//!   linear scorer trained with it.
//! - **losses** — mask-supervised counting losses: the density-map loss and
//!   mask-constrained point matching (greedy three-case and exact assignment).
//! - **eval** — IoU matrices, Hungarian matching, precision/recall/F1.
//! - **synth** — seeded synthetic crowd scenes for end-to-end verification.
//!
//! Everything random flows through the seeded [`rng::Rng`], so any run is
//! reproducible bit-for-bit from its seed. See the `examples/` directory for
//! one runnable walkthrough per capability; the `crowdseg` binary exposes the
//! same flows as subcommands.

pub mod assignment;
pub mod cli;
pub mod density;
pub mod dpmo;
pub mod error;
pub mod eval;
pub mod geom;
pub mod io;
pub mod losses;
pub mod mask;
pub mod nnec;
pub mod render;
pub mod rng;
pub mod rps;
pub mod scene;
pub mod segmenter;
pub mod synth;

pub use density::DensityMap;
pub use dpmo::{run_dpmo, DpmoResult};
pub use error::{Error, Result};
pub use eval::{confusion, hungarian_match, iou, iou_matrix, mean_matched_iou, prf1, ConfusionMatrix, EvalReport};
pub use geom::Point2D;
pub use losses::{density_mask_loss, density_mask_loss_grad, match_exact, match_three_case, Matching, MatchingProblem};
pub use mask::{RasterMask, RleRecord};
pub use nnec::{all_radii, constrain, nnec_radius, rasterize_circle, resolve_overlaps, ExclusionCircle, NnecParams};
pub use rng::Rng;
pub use rps::{grpo_loss, grpo_loss_grad, sample_group, select_point, train_scorer, CandidateGroup, ScorerModel};
pub use scene::Scene;
pub use segmenter::{segment, OracleConfig, SegmenterBackend};
pub use synth::{generate_scene, make_density_map, perturb_points, DensityRegime, SynthConfig};
