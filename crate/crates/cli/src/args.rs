use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tokenprune_core::features::FeatureConfig;
use tokenprune_core::keyframe::KeyframeConfig;
use tokenprune_core::RansacConfig;

#[derive(Debug, Parser)]
#[command(
    name = "tokenprune",
    version,
    about = "Geometry-aware visual token pruning for egomotion video"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic scene: frames, token tensor, prompt and ground truth.
    Synth(SynthArgs),
    /// Select keyframes from a directory of frames.
    Keyframes(KeyframesArgs),
    /// Run the full pruning pipeline and write a result document.
    Prune(PruneArgs),
    /// Draw token overlays or alignment panels for a result document.
    Visualize(VisualizeArgs),
    /// Time the token-level stages across sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Random seed.
    #[arg(long, env = "EGOPRUNE_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    /// Number of frames.
    #[arg(long, default_value_t = 8)]
    pub frames: usize,
    /// Frame size as WIDTHxHEIGHT.
    #[arg(long, default_value = "320x240", value_parser = parse_size)]
    pub size: (usize, usize),
    /// identity, pan:DX[,DY] or rotate:DEG (per frame).
    #[arg(long, default_value = "pan:32")]
    pub motion: String,
    /// Output directory.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Patch side in pixels.
    #[arg(long, default_value_t = 16)]
    pub patch: usize,
    /// Embedding dimension.
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// Texture octaves.
    #[arg(long, default_value_t = 4)]
    pub octaves: usize,
    /// Relative Gaussian noise added to every token.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Fraction of tokens with a counterpart copied from the previous frame.
    #[arg(long, default_value_t = 0.5)]
    pub redundancy: f64,
    /// Canvas size as a multiple of the frame size.
    #[arg(long, default_value_t = 4.0)]
    pub canvas_scale: f64,
    /// Number of prompt tokens.
    #[arg(long, default_value_t = 8)]
    pub prompt_tokens: usize,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    /// FAST intensity threshold.
    #[arg(long, default_value_t = 20)]
    pub fast_threshold: u8,
    /// Keypoints kept per frame.
    #[arg(long, default_value_t = 1000)]
    pub max_keypoints: usize,
    /// Ratio-test threshold.
    #[arg(long, default_value_t = 0.75)]
    pub ratio: f64,
    /// RANSAC iterations.
    #[arg(long, default_value_t = 2000)]
    pub ransac_iters: usize,
    /// RANSAC inlier threshold in pixels.
    #[arg(long, default_value_t = 3.0)]
    pub reproj_thresh: f64,
    /// Enables adaptive RANSAC early exit at this confidence.
    #[arg(long)]
    pub ransac_confidence: Option<f64>,
    /// Minimum matches and inliers for a trusted homography.
    #[arg(long, default_value_t = 12)]
    pub min_matches: usize,
}

impl FeatureArgs {
    pub fn keyframe_config(&self, overlap_threshold: f64) -> KeyframeConfig {
        KeyframeConfig {
            overlap_threshold,
            min_matches: self.min_matches,
            features: FeatureConfig {
                fast_threshold: self.fast_threshold,
                max_keypoints: self.max_keypoints,
                ratio: self.ratio,
            },
            ransac: RansacConfig {
                iters: self.ransac_iters,
                reproj_thresh: self.reproj_thresh,
                adaptive_confidence: self.ransac_confidence,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct KeyframesArgs {
    /// Directory of frame_%05d.ppm files.
    #[arg(long)]
    pub frames_dir: PathBuf,
    /// Overlap below which a frame becomes a keyframe.
    #[arg(long, default_value_t = 0.6)]
    pub threshold: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Output JSON file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    /// Directory of frame_%05d.ppm files.
    #[arg(long)]
    pub frames_dir: PathBuf,
    /// Visual token tensor (EGT), one grid per frame.
    #[arg(long)]
    pub egt: PathBuf,
    /// Prompt tokens (EGT); every token in the file is used.
    #[arg(long)]
    pub prompt_egt: PathBuf,
    /// Retention rate: fraction of keyframe tokens kept.
    #[arg(long = "r", default_value_t = 0.5)]
    pub r: f64,
    /// Relevance/diversity trade-off.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Number of recent selections compared against.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Cosine similarity above which an aligned token is redundant.
    #[arg(long, default_value_t = 0.75)]
    pub sim_threshold: f64,
    /// Keyframe overlap threshold.
    #[arg(long, default_value_t = 0.6)]
    pub overlap_threshold: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Text tokens assumed in the savings model.
    #[arg(long, default_value_t = 0)]
    pub n_text: usize,
    /// Output JSON file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VisualizeMode {
    Tokens,
    Alignment,
}

#[derive(Debug, Args)]
pub struct VisualizeArgs {
    /// Result document written by `prune`.
    #[arg(long)]
    pub result: PathBuf,
    /// Directory of frame_%05d.ppm files.
    #[arg(long)]
    pub frames_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = VisualizeMode::Tokens)]
    pub mode: VisualizeMode,
    /// Output directory for P6 images.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Tint for retained patches as R,G,B.
    #[arg(long, default_value = "255,96,0", value_parser = parse_rgb)]
    pub tint: [u8; 3],
    /// Tint blend weight in [0, 1].
    #[arg(long, default_value_t = 0.3)]
    pub tint_alpha: f64,
    /// Dimming of pruned patches in [0, 1].
    #[arg(long, default_value_t = 0.7)]
    pub dim: f64,
    /// Draw patch grid lines.
    #[arg(long)]
    pub grid_lines: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated token counts.
    #[arg(long, default_value = "2000,4000,8000")]
    pub sizes: String,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Timed runs per stage and size.
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    /// Embedding dimension.
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// MMR selection count.
    #[arg(long, default_value_t = 64)]
    pub k: usize,
    /// MMR window.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(w)?, p(h)?))
}

fn parse_rgb(s: &str) -> Result<[u8; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected R,G,B".into());
    }
    let mut out = [0u8; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(out)
}
