//! End-to-end pruning: keyframes → aligned redundancy filtering → windowed
//! MMR over the pooled survivors, plus a compute-savings model.

use std::borrow::Borrow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Homography;
use crate::image::ImageBuffer;
use crate::keyframe::{check_frames, extract_all, select_with_features, KeyframeConfig, KeyframeReport};
use crate::mmr::{
    mmr_select, prompt_centroid, relevance_scores, MmrConfig, PromptEmbedding, TokenPool, DEFAULT_LAMBDA,
    DEFAULT_WINDOW,
};
use crate::parf::{parf_chain, ParfConfig, DEFAULT_SIM_THRESHOLD};
use crate::tokens::TokenGrid;

pub const DEFAULT_RETENTION_RATE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Fraction of the keyframe token total kept for decoding.
    pub retention_rate: f64,
    pub lambda: f64,
    pub window: usize,
    pub sim_threshold: f64,
    pub keyframe: KeyframeConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            retention_rate: DEFAULT_RETENTION_RATE,
            lambda: DEFAULT_LAMBDA,
            window: DEFAULT_WINDOW,
            sim_threshold: DEFAULT_SIM_THRESHOLD,
            keyframe: KeyframeConfig::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.retention_rate > 0.0 && self.retention_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "retention rate {} outside (0, 1]",
                self.retention_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidConfig(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be >= 1".into()));
        }
        ParfConfig {
            sim_threshold: self.sim_threshold,
        }
        .validate()?;
        self.keyframe.validate()
    }

    pub fn parf(&self) -> ParfConfig {
        ParfConfig {
            sim_threshold: self.sim_threshold,
        }
    }
}

/// Token budget `max(1, round(r·total))`, rounding halves away from zero.
pub fn token_budget(retention_rate: f64, total: usize) -> usize {
    ((retention_rate * total as f64).round() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruneStats {
    pub tokens_per_frame: usize,
    pub n_keyframes: usize,
    /// `N · T_key`.
    pub original: usize,
    pub post_parf: usize,
    /// Requested final count `max(1, round(r · original))`.
    pub budget: usize,
    /// Achieved count, `min(budget, post_parf)`.
    pub final_count: usize,
    /// True when fewer tokens than the budget survived filtering.
    pub mmr_skipped: bool,
    pub parf_reduction_pct: f64,
    pub mmr_reduction_pct: f64,
    pub total_reduction_pct: f64,
}

impl PruneStats {
    fn new(tokens_per_frame: usize, n_keyframes: usize, post_parf: usize, budget: usize) -> Self {
        let original = tokens_per_frame * n_keyframes;
        let final_count = budget.min(post_parf);
        let pct = |from: usize, to: usize| 100.0 * (from - to) as f64 / from as f64;
        Self {
            tokens_per_frame,
            n_keyframes,
            original,
            post_parf,
            budget,
            final_count,
            mmr_skipped: post_parf < budget,
            parf_reduction_pct: pct(original, post_parf),
            mmr_reduction_pct: pct(post_parf, final_count),
            total_reduction_pct: pct(original, final_count),
        }
    }
}

/// Selected token, identified by source frame and index within the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TokenRef {
    pub frame: usize,
    pub token: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneResult {
    pub keyframes: KeyframeReport,
    /// `H` between consecutive keyframes; `None` where estimation failed.
    pub homographies: Vec<Option<Homography>>,
    /// Per keyframe, ascending token indices kept by redundancy filtering.
    pub parf_retained: Vec<Vec<usize>>,
    /// Final tokens in selection order.
    pub final_selection: Vec<TokenRef>,
    pub stats: PruneStats,
}

impl PruneResult {
    pub fn keyframe_indices(&self) -> &[usize] {
        &self.keyframes.keyframe_indices
    }
}

/// Token-level stages after keyframes and homographies are known.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenStages {
    pub parf_retained: Vec<Vec<usize>>,
    pub final_selection: Vec<TokenRef>,
    pub stats: PruneStats,
}

/// Runs redundancy filtering and MMR on keyframe grids. `frame_ids[i]` is
/// the source frame of `grids[i]`; `homographies[i]` maps keyframe `i` to
/// keyframe `i + 1`.
pub fn prune_keyframes<G: Borrow<TokenGrid>>(
    grids: &[G],
    frame_ids: &[usize],
    homographies: &[Option<Homography>],
    prompt: &PromptEmbedding,
    cfg: &PipelineConfig,
) -> Result<TokenStages> {
    if grids.is_empty() {
        return Err(Error::EmptyInput("keyframe grids"));
    }
    if frame_ids.len() != grids.len() {
        return Err(Error::DimensionMismatch {
            what: "frame ids vs keyframe grids",
            left: frame_ids.len(),
            right: grids.len(),
        });
    }
    let first = grids[0].borrow();
    if prompt.dim != first.dim {
        return Err(Error::DimensionMismatch {
            what: "prompt dimension vs visual token dimension",
            left: prompt.dim,
            right: first.dim,
        });
    }
    let q_avg = prompt_centroid(prompt)?;
    let parf_retained = parf_chain(grids, homographies, &cfg.parf())?;

    let n = first.len();
    let dim = first.dim;
    let mut scalars = Vec::new();
    let mut origins = Vec::new();
    for ((grid, kept), &frame) in grids.iter().zip(&parf_retained).zip(frame_ids) {
        for &i in kept {
            scalars.extend_from_slice(grid.borrow().token(i));
            origins.push((frame, i));
        }
    }
    let post_parf = origins.len();
    let budget = token_budget(cfg.retention_rate, n * grids.len());
    let stats = PruneStats::new(n, grids.len(), post_parf, budget);

    let to_ref = |(frame, token): (usize, usize)| TokenRef { frame, token };
    let final_selection = if stats.mmr_skipped {
        origins.iter().copied().map(to_ref).collect()
    } else {
        let pool = TokenPool::new(dim, scalars, origins)?;
        let rewards = relevance_scores(&pool, &q_avg)?;
        let mmr = MmrConfig {
            lambda: cfg.lambda,
            window: cfg.window,
            k: budget,
        };
        mmr_select(&pool, &rewards, &mmr)?
            .into_iter()
            .map(|i| to_ref(pool.origins()[i]))
            .collect()
    };
    Ok(TokenStages {
        parf_retained,
        final_selection,
        stats,
    })
}

fn check_grids(frames: &[ImageBuffer], grids: &[TokenGrid]) -> Result<()> {
    if frames.len() != grids.len() {
        return Err(Error::DimensionMismatch {
            what: "frames vs token grids",
            left: frames.len(),
            right: grids.len(),
        });
    }
    let g0 = grids.first().ok_or(Error::EmptyInput("token grids"))?;
    for g in grids {
        if g.geometry != g0.geometry {
            return Err(Error::DimensionMismatch {
                what: "token count of grid vs first grid",
                left: g.len(),
                right: g0.len(),
            });
        }
        if g.dim != g0.dim {
            return Err(Error::DimensionMismatch {
                what: "embedding dimension of grid vs first grid",
                left: g.dim,
                right: g0.dim,
            });
        }
    }
    let (w, h) = frames[0].dims();
    if g0.geometry.frame_w != w {
        return Err(Error::DimensionMismatch {
            what: "grid frame width vs image width",
            left: g0.geometry.frame_w,
            right: w,
        });
    }
    if g0.geometry.frame_h != h {
        return Err(Error::DimensionMismatch {
            what: "grid frame height vs image height",
            left: g0.geometry.frame_h,
            right: h,
        });
    }
    Ok(())
}

pub fn prune_video(
    frames: &[ImageBuffer],
    grids: &[TokenGrid],
    prompt: &PromptEmbedding,
    cfg: &PipelineConfig,
) -> Result<PruneResult> {
    cfg.validate()?;
    check_frames(frames)?;
    check_grids(frames, grids)?;
    let feats = extract_all(frames, &cfg.keyframe.features)?;
    let keyframes = select_with_features(frames, &feats, &cfg.keyframe, cfg.seed)?;
    let homographies = keyframes.keyframe_homographies();
    let key_grids: Vec<&TokenGrid> = keyframes.keyframe_indices.iter().map(|&k| &grids[k]).collect();
    let stages = prune_keyframes(&key_grids, &keyframes.keyframe_indices, &homographies, prompt, cfg)?;
    Ok(PruneResult {
        keyframes,
        homographies,
        parf_retained: stages.parf_retained,
        final_selection: stages.final_selection,
        stats: stages.stats,
    })
}

/// Ratio model of decoder cost after pruning. These are modelled ratios
/// relative to the unpruned keyframe input, not measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavingsEstimate {
    pub context_ratio: f64,
    /// Prefill attention scales with the square of the context length.
    pub attention_ratio: f64,
    pub linear_ratio: f64,
    pub kv_cache_ratio: f64,
}

pub fn estimate_savings(stats: &PruneStats, n_text_tokens: usize) -> SavingsEstimate {
    let context_ratio = (stats.final_count + n_text_tokens) as f64 / (stats.original + n_text_tokens) as f64;
    SavingsEstimate {
        context_ratio,
        attention_ratio: context_ratio * context_ratio,
        linear_ratio: context_ratio,
        kv_cache_ratio: context_ratio,
    }
}
