//! Subcommand front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. A JSON config file
//! passed with `--config` supplies defaults; explicit flags override it.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::eval;
use crate::geom::Point2D;
use crate::io;
use crate::losses::{match_exact, match_three_case, MatchingProblem};
use crate::nnec::NnecParams;
use crate::rng::{derive_seed, Rng};
use crate::rps::{self, GROUP_SIZE};
use crate::scene::Scene;
use crate::segmenter::{FileProposals, OracleConfig, SegmenterBackend, DEFAULT_MAX_CENTER_DIST};
use crate::synth::{generate_scene, make_density_map, perturb_points, DensityMode, DensityRegime, SynthConfig};
use crate::{dpmo, render};

#[derive(Parser, Debug)]
#[command(
    name = "crowdseg",
    version,
    about = "Point-prompted crowd instance segmentation toolkit",
    propagate_version = true
)]
struct Cli {
    /// JSON config file providing flag defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads; results are identical for any value.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic crowd scene (points, masks, optional density).
    Synth(SynthArgs),
    /// Run the point-to-mask pipeline over a points file.
    Dpmo(DpmoArgs),
    /// Sample candidate groups and select the best prompt per group.
    Select(SelectArgs),
    /// Evaluate predicted masks against ground truth.
    Eval(EvalArgs),
    /// Counting losses.
    #[command(subcommand)]
    Loss(LossCommand),
    /// Render a mask overlay image.
    Render(RenderArgs),
    /// End-to-end: scene -> perturb -> select -> masks -> report.
    Pipeline(PipelineArgs),
}

/// Optional defaults read from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    delta: Option<f64>,
    bounded: Option<bool>,
    segmenter: Option<String>,
    proposals: Option<PathBuf>,
    noise: Option<u32>,
    p_miss: Option<f64>,
    sigma: Option<f64>,
    iou_threshold: Option<f64>,
    jobs: Option<usize>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| Error::json(p, e))
            }
        }
    }
}

#[derive(Args, Debug, Clone)]
struct NnecArgs {
    /// Minimum exclusion radius in pixels [default: 5].
    #[arg(long)]
    r_min: Option<f64>,
    /// Maximum exclusion radius in pixels [default: 200].
    #[arg(long)]
    r_max: Option<f64>,
    /// Strictness margin below the nearest-neighbor distance [default: 1].
    #[arg(long)]
    delta: Option<f64>,
    /// Non-overlapping circle ablation (half nearest-neighbor distance).
    #[arg(long, action = ArgAction::SetTrue)]
    bounded: bool,
}

impl NnecArgs {
    fn resolve(&self, cfg: &FileConfig) -> NnecParams {
        let defaults = NnecParams::default();
        NnecParams {
            r_min: self.r_min.or(cfg.r_min).unwrap_or(defaults.r_min),
            r_max: self.r_max.or(cfg.r_max).unwrap_or(defaults.r_max),
            delta: self.delta.or(cfg.delta).unwrap_or(defaults.delta),
            bounded_mode: self.bounded || cfg.bounded.unwrap_or(false),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct SegmenterArgs {
    /// Backend: circle | oracle | file [default: circle].
    #[arg(long)]
    segmenter: Option<String>,
    /// Proposal masks file for the file backend.
    #[arg(long)]
    proposals: Option<PathBuf>,
    /// Oracle morphological noise magnitude in pixels [default: 2].
    #[arg(long)]
    noise: Option<u32>,
    /// Oracle miss probability [default: 0.05].
    #[arg(long)]
    p_miss: Option<f64>,
}

impl SegmenterArgs {
    fn resolve(&self, cfg: &FileConfig) -> Result<SegmenterBackend> {
        let kind = self
            .segmenter
            .clone()
            .or_else(|| cfg.segmenter.clone())
            .unwrap_or_else(|| "circle".to_string());
        match kind.as_str() {
            "circle" => Ok(SegmenterBackend::circle()),
            "oracle" => Ok(SegmenterBackend::oracle(OracleConfig {
                noise_px: self.noise.or(cfg.noise).unwrap_or(2),
                p_miss: self.p_miss.or(cfg.p_miss).unwrap_or(0.05),
                max_center_dist: DEFAULT_MAX_CENTER_DIST,
            })),
            "file" => {
                let path = self
                    .proposals
                    .clone()
                    .or_else(|| cfg.proposals.clone())
                    .ok_or_else(|| {
                        Error::invalid_data("<args>", "--proposals is required for the file backend")
                    })?;
                let records = io::load_mask_records(&path)?;
                Ok(SegmenterBackend::File(FileProposals::new(
                    &records,
                    DEFAULT_MAX_CENTER_DIST,
                )?))
            }
            other => Err(Error::invalid_data(
                "<args>",
                format!("unknown segmenter '{other}' (expected circle|oracle|file)"),
            )),
        }
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Number of heads to place.
    #[arg(long)]
    n_heads: usize,
    /// Density regime: sparse | dense | mixed.
    #[arg(long)]
    regime: DensityRegime,
    /// Master seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (points.json, masks.json, optional density files).
    #[arg(long)]
    out: PathBuf,
    /// Override the preset image width.
    #[arg(long)]
    width: Option<u32>,
    /// Override the preset image height.
    #[arg(long)]
    height: Option<u32>,
    /// Override the preset minimum center spacing.
    #[arg(long)]
    spacing: Option<f64>,
    /// Also write a density map: perfect | uniform-mass.
    #[arg(long)]
    density: Option<DensityMode>,
}

#[derive(Args, Debug)]
struct DpmoArgs {
    /// Prompt points file.
    #[arg(long)]
    points: PathBuf,
    /// Ground-truth masks (required by the oracle backend).
    #[arg(long)]
    gt_masks: Option<PathBuf>,
    /// Output masks file.
    #[arg(long)]
    out: PathBuf,
    /// Optional overlay image path.
    #[arg(long)]
    render: Option<PathBuf>,
    /// Master seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    nnec: NnecArgs,
    #[command(flatten)]
    segmenter: SegmenterArgs,
}

#[derive(Debug, Clone)]
enum ScorerChoice {
    RewardOracle,
    Trained(PathBuf),
}

impl FromStr for ScorerChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "reward-oracle" {
            Ok(ScorerChoice::RewardOracle)
        } else if let Some(path) = s.strip_prefix("trained:") {
            Ok(ScorerChoice::Trained(PathBuf::from(path)))
        } else {
            Err(format!("expected 'reward-oracle' or 'trained:<path>', got '{s}'"))
        }
    }
}

#[derive(Args, Debug)]
struct SelectArgs {
    /// Initial predicted points.
    #[arg(long)]
    points: PathBuf,
    /// Ground-truth masks aligned with the scene (rewards need them).
    #[arg(long)]
    gt_masks: PathBuf,
    /// Gaussian sampling radius [default: 1].
    #[arg(long)]
    sigma: Option<f64>,
    /// Candidates per group (fixed at 5).
    #[arg(long, default_value_t = GROUP_SIZE)]
    group_size: usize,
    /// Selection rule: reward-oracle | trained:<path>.
    #[arg(long)]
    scorer: ScorerChoice,
    /// Train a scorer on the sampled groups and persist it here; it is then
    /// used for selection when --scorer names the same path.
    #[arg(long)]
    train_scorer: Option<PathBuf>,
    /// Learning rate for --train-scorer [default: 0.01].
    #[arg(long)]
    lr: Option<f64>,
    /// Epochs for --train-scorer [default: 300].
    #[arg(long)]
    epochs: Option<usize>,
    /// Master seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Output points file with the selected prompts.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    nnec: NnecArgs,
    #[command(flatten)]
    segmenter: SegmenterArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Predicted masks: a file, or a directory of files.
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth masks: a file, or a directory with matching names.
    #[arg(long)]
    gt: PathBuf,
    /// IoU threshold for a true positive [default: 0.5].
    #[arg(long)]
    iou_threshold: Option<f64>,
    /// Write the JSON report here (always printed to stdout).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum LossCommand {
    /// Density-map loss against instance masks.
    Density {
        /// Density map (.bin or .json of the pair).
        #[arg(long)]
        map: PathBuf,
        /// Instance masks file.
        #[arg(long)]
        masks: PathBuf,
    },
    /// Mask-constrained point matching.
    Match {
        /// Predicted points file.
        #[arg(long)]
        pred: PathBuf,
        /// Ground-truth points file.
        #[arg(long)]
        gt: PathBuf,
        /// Ground-truth masks aligned with the points.
        #[arg(long)]
        masks: PathBuf,
        /// three-case | exact.
        #[arg(long)]
        method: MatchMethod,
    },
}

#[derive(Debug, Clone, Copy)]
enum MatchMethod {
    ThreeCase,
    Exact,
}

impl FromStr for MatchMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "three-case" => Ok(MatchMethod::ThreeCase),
            "exact" => Ok(MatchMethod::Exact),
            other => Err(format!("expected 'three-case' or 'exact', got '{other}'")),
        }
    }
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Points file (scene dimensions and crosses).
    #[arg(long)]
    points: PathBuf,
    /// Masks file to color.
    #[arg(long)]
    masks: PathBuf,
    /// Output PNG path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// Master seed [default: 0]; every stage derives its stream from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Load a scene from files instead of generating one.
    #[arg(long, requires = "scene_masks")]
    scene_points: Option<PathBuf>,
    #[arg(long, requires = "scene_points")]
    scene_masks: Option<PathBuf>,
    /// Heads for the generated scene [default: 80].
    #[arg(long)]
    n_heads: Option<usize>,
    /// Regime for the generated scene [default: dense].
    #[arg(long)]
    regime: Option<DensityRegime>,
    /// Perturbation and sampling radius [default: 1].
    #[arg(long)]
    sigma: Option<f64>,
    /// Prompt selection: none | reward-oracle | trained:<path> [default: none].
    #[arg(long)]
    select: Option<String>,
    /// IoU threshold for a true positive [default: 0.5].
    #[arg(long)]
    iou_threshold: Option<f64>,
    /// Write the JSON report here (always printed to stdout).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Optional overlay image path.
    #[arg(long)]
    render: Option<PathBuf>,
    #[command(flatten)]
    nnec: NnecArgs,
    #[command(flatten)]
    segmenter: SegmenterArgs,
}

/// Parse arguments, execute, and map errors onto the exit-code convention.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            2
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = FileConfig::load(cli.config.as_deref())?;
    if let Some(jobs) = cli.jobs.or(config.jobs) {
        // ignore failure: the global pool can already be set in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match cli.command {
        Command::Synth(args) => cmd_synth(args, &config),
        Command::Dpmo(args) => cmd_dpmo(args, &config),
        Command::Select(args) => cmd_select(args, &config),
        Command::Eval(args) => cmd_eval(args, &config),
        Command::Loss(args) => cmd_loss(args),
        Command::Render(args) => cmd_render(args),
        Command::Pipeline(args) => cmd_pipeline(args, &config),
    }
}

fn load_scene(points_path: &Path, masks_path: Option<&Path>) -> Result<Scene> {
    let points = io::load_points(points_path)?;
    let masks = masks_path.map(io::load_masks).transpose()?;
    let image_id = points_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scene".to_string());
    Scene::new(points.width, points.height, points.points, masks, image_id)
}

fn cmd_synth(args: SynthArgs, config: &FileConfig) -> Result<()> {
    let mut cfg = SynthConfig::preset(args.regime, args.n_heads, args.seed.or(config.seed).unwrap_or(0));
    if let Some(w) = args.width {
        cfg.width = w;
    }
    if let Some(h) = args.height {
        cfg.height = h;
    }
    if let Some(s) = args.spacing {
        cfg.min_center_spacing = s;
    }
    let scene = generate_scene(&cfg)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    io::save_points(&args.out.join("points.json"), scene.width(), scene.height(), scene.points())?;
    io::save_masks(&args.out.join("masks.json"), scene.gt_masks().expect("synth scenes have masks"))?;
    if let Some(mode) = args.density {
        let map = make_density_map(&scene, mode)?;
        io::save_density(&args.out.join("density.json"), &map)?;
    }
    println!(
        "wrote scene '{}' ({} heads, {}x{}) to {}",
        scene.image_id(),
        scene.len(),
        scene.width(),
        scene.height(),
        args.out.display()
    );
    Ok(())
}

fn cmd_dpmo(args: DpmoArgs, config: &FileConfig) -> Result<()> {
    let scene = load_scene(&args.points, args.gt_masks.as_deref())?;
    let params = args.nnec.resolve(config);
    let backend = args.segmenter.resolve(config)?;
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let result = dpmo::run_dpmo(scene.points(), &scene, &backend, &params, seed)?;
    io::save_masks(&args.out, &result.masks)?;
    if let Some(render_path) = &args.render {
        render::render_overlay(&scene, &result.masks, render_path)?;
    }
    let fallbacks = result.fallback_flags.iter().filter(|&&f| f).count();
    println!(
        "wrote {} masks ({} circle fallbacks) to {}",
        result.masks.len(),
        fallbacks,
        args.out.display()
    );
    Ok(())
}

fn cmd_select(args: SelectArgs, config: &FileConfig) -> Result<()> {
    if args.group_size != GROUP_SIZE {
        return Err(Error::invalid_data(
            "<args>",
            format!("group size is fixed at {GROUP_SIZE}"),
        ));
    }
    let scene = load_scene(&args.points, Some(&args.gt_masks))?;
    let params = args.nnec.resolve(config);
    let backend = args.segmenter.resolve(config)?;
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let sigma = args.sigma.or(config.sigma).unwrap_or(1.0);

    let ctx = rps::RewardContext {
        scene: &scene,
        backend: &backend,
        params: &params,
        seed: derive_seed(seed, "stage:rewards"),
    };
    let groups = rps::build_groups(&ctx, scene.points(), sigma, derive_seed(seed, "stage:sample"))?;

    if let Some(path) = &args.train_scorer {
        let train_cfg = rps::TrainConfig {
            lr: args.lr.unwrap_or(0.01),
            epochs: args.epochs.unwrap_or(300),
            init_scale: 0.0,
            seed,
        };
        let (model, history) = rps::train_scorer(&groups, &train_cfg)?;
        io::save_scorer(path, &model)?;
        println!(
            "trained scorer over {} groups: loss {:.6} -> {:.6}, saved to {}",
            groups.len(),
            history.first().unwrap(),
            history.last().unwrap(),
            path.display()
        );
    }

    let selected: Vec<Point2D> = match &args.scorer {
        ScorerChoice::RewardOracle => groups.iter().map(rps::select_by_reward).collect(),
        ScorerChoice::Trained(path) => {
            let model = io::load_scorer(path)?;
            groups.iter().map(|g| rps::select_point(g, &model)).collect()
        }
    };
    io::save_points(&args.out, scene.width(), scene.height(), &selected)?;

    let mean_initial: f64 =
        groups.iter().map(|g| g.rewards[0]).sum::<f64>() / groups.len() as f64;
    let mean_best: f64 =
        groups.iter().map(|g| g.rewards[g.best]).sum::<f64>() / groups.len() as f64;
    println!(
        "selected {} prompts (mean reward: initial {:.4}, group best {:.4}) -> {}",
        selected.len(),
        mean_initial,
        mean_best,
        args.out.display()
    );
    Ok(())
}

fn eval_inputs(pred: &Path, gt: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    if pred.is_dir() != gt.is_dir() {
        return Err(Error::invalid_data(
            pred,
            "--pred and --gt must both be files or both be directories",
        ));
    }
    if !pred.is_dir() {
        let id = pred.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        return Ok(vec![(id, pred.to_path_buf(), gt.to_path_buf())]);
    }
    let mut names: Vec<String> = std::fs::read_dir(pred)
        .map_err(|e| Error::io(pred, e))?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.file_name().to_string_lossy().into_owned())
        .filter(|name| name.ends_with(".json"))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(Error::invalid_data(pred, "no .json mask files in directory"));
    }
    names
        .into_iter()
        .map(|name| {
            let gt_path = gt.join(&name);
            if !gt_path.exists() {
                return Err(Error::invalid_data(&gt_path, "missing ground-truth counterpart"));
            }
            let id = name.trim_end_matches(".json").to_string();
            Ok((id, pred.join(&name), gt_path))
        })
        .collect()
}

fn cmd_eval(args: EvalArgs, config: &FileConfig) -> Result<()> {
    let threshold = args.iou_threshold.or(config.iou_threshold).unwrap_or(0.5);
    if !(0.0 < threshold && threshold <= 1.0) {
        return Err(Error::invalid_data("<args>", "iou threshold must lie in (0, 1]"));
    }
    let inputs = eval_inputs(&args.pred, &args.gt)?;
    let per_image = inputs
        .into_iter()
        .map(|(id, pred_path, gt_path)| {
            let preds = io::load_masks(&pred_path)?;
            let gts = io::load_masks(&gt_path)?;
            eval::evaluate_image(&id, &preds, &gts, threshold)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = eval::aggregate(per_image)?;
    println!("{}", io::report_to_string(&report));
    if let Some(path) = &args.report {
        io::save_report(path, &report)?;
    }
    Ok(())
}

fn cmd_loss(cmd: LossCommand) -> Result<()> {
    match cmd {
        LossCommand::Density { map, masks } => {
            let map = io::load_density(&map)?;
            let masks = io::load_masks(&masks)?;
            let loss = crate::losses::density_mask_loss(&map, &masks)?;
            println!("{}", serde_json::json!({ "loss": loss }));
        }
        LossCommand::Match { pred, gt, masks, method } => {
            let pred_points = io::load_points(&pred)?;
            let gt_points = io::load_points(&gt)?;
            let masks = io::load_masks(&masks)?;
            let problem =
                MatchingProblem::new(pred_points.points, gt_points.points, masks)?;
            let matching = match method {
                MatchMethod::ThreeCase => match_three_case(&problem)?,
                MatchMethod::Exact => match_exact(&problem)?,
            };
            println!(
                "{}",
                serde_json::json!({
                    "pairs": matching.pairs,
                    "total_cost": matching.total_cost,
                    "unmatched_pred": matching.unmatched_pred,
                    "unmatched_gt": matching.unmatched_gt,
                })
            );
        }
    }
    Ok(())
}

fn cmd_render(args: RenderArgs) -> Result<()> {
    let scene = load_scene(&args.points, None)?;
    let masks = io::load_masks(&args.masks)?;
    for m in &masks {
        if m.width() != scene.width() || m.height() != scene.height() {
            return Err(Error::size_mismatch(
                format!("{}x{}", scene.width(), scene.height()),
                format!("{}x{}", m.width(), m.height()),
            ));
        }
    }
    render::render_overlay(&scene, &masks, &args.out)?;
    println!("wrote overlay to {}", args.out.display());
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs, config: &FileConfig) -> Result<()> {
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let sigma = args.sigma.or(config.sigma).unwrap_or(1.0);
    let threshold = args.iou_threshold.or(config.iou_threshold).unwrap_or(0.5);

    let scene = match (&args.scene_points, &args.scene_masks) {
        (Some(points), Some(masks)) => load_scene(points, Some(masks))?,
        _ => {
            let regime = args.regime.unwrap_or(DensityRegime::Dense);
            let cfg = SynthConfig::preset(
                regime,
                args.n_heads.unwrap_or(80),
                derive_seed(seed, "stage:synth"),
            );
            generate_scene(&cfg)?
        }
    };
    let gt_masks = scene.require_gt_masks()?.to_vec();
    let params = args.nnec.resolve(config);
    let backend = args.segmenter.resolve(config)?;

    let mut perturb_rng = Rng::stream(seed, "stage:perturb");
    let initials =
        perturb_points(scene.points(), sigma, scene.width(), scene.height(), &mut perturb_rng);

    let select = args.select.as_deref().unwrap_or("none");
    let prompts: Vec<Point2D> = if select == "none" {
        initials
    } else {
        let choice: ScorerChoice =
            select.parse().map_err(|e: String| Error::invalid_data("<args>", e))?;
        let ctx = rps::RewardContext {
            scene: &scene,
            backend: &backend,
            params: &params,
            seed: derive_seed(seed, "stage:rewards"),
        };
        let groups =
            rps::build_groups(&ctx, &initials, sigma, derive_seed(seed, "stage:sample"))?;
        match choice {
            ScorerChoice::RewardOracle => groups.iter().map(rps::select_by_reward).collect(),
            ScorerChoice::Trained(path) => {
                let model = io::load_scorer(&path)?;
                groups.iter().map(|g| rps::select_point(g, &model)).collect()
            }
        }
    };

    let result =
        dpmo::run_dpmo(&prompts, &scene, &backend, &params, derive_seed(seed, "stage:dpmo"))?;
    let per_image =
        eval::evaluate_image(scene.image_id(), &result.masks, &gt_masks, threshold)?;
    let report = eval::aggregate(vec![per_image])?;
    println!("{}", io::report_to_string(&report));
    if let Some(path) = &args.report {
        io::save_report(path, &report)?;
    }
    if let Some(path) = &args.render {
        render::render_overlay(&scene, &result.masks, path)?;
    }
    Ok(())
}
