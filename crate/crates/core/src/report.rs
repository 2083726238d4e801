//! JSON result documents.
//!
//! Documents echo every effective parameter, so feeding the echoed
//! configuration back in reproduces the document byte for byte. Field order
//! is fixed by the struct definitions.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::Homography;
use crate::keyframe::{KeyframeConfig, KeyframeReport, Transition};
use crate::pipeline::{estimate_savings, PipelineConfig, PruneResult};
use crate::tokens::GridGeometry;

/// Input locations as given on the command line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputEcho {
    pub frames_dir: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub egt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_egt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub retention_rate: f64,
    pub lambda: f64,
    pub window: usize,
    pub sim_threshold: f64,
    pub n_text: usize,
    pub keyframe: KeyframeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomographyEntry {
    pub from: usize,
    pub to: usize,
    /// Canonical row-major matrix; `None` when estimation failed.
    pub h: Option<Homography>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub frame: usize,
    pub parf_retained: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionEntry {
    pub frame: usize,
    pub token: usize,
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsEntry {
    pub original: usize,
    pub post_parf: usize,
    pub budget: usize,
    #[serde(rename = "final")]
    pub final_count: usize,
    pub mmr_skipped: bool,
    pub parf_reduction_pct: f64,
    pub mmr_reduction_pct: f64,
    pub total_reduction_pct: f64,
    pub context_ratio: f64,
    pub attention_ratio: f64,
    pub linear_ratio: f64,
    pub kv_cache_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub inputs: InputEcho,
    pub config: ConfigEcho,
    pub grid: GridGeometry,
    pub n_frames: usize,
    pub keyframes: Vec<usize>,
    pub transitions: Vec<Transition>,
    pub homographies: Vec<HomographyEntry>,
    pub frames: Vec<FrameEntry>,
    pub final_selection: Vec<SelectionEntry>,
    pub stats: StatsEntry,
}

impl ResultDocument {
    pub fn new(
        result: &PruneResult,
        cfg: &PipelineConfig,
        grid: GridGeometry,
        n_frames: usize,
        n_text: usize,
        inputs: InputEcho,
    ) -> Self {
        let kf = &result.keyframes.keyframe_indices;
        let s = &result.stats;
        let savings = estimate_savings(s, n_text);
        Self {
            inputs,
            config: ConfigEcho {
                seed: cfg.seed,
                retention_rate: cfg.retention_rate,
                lambda: cfg.lambda,
                window: cfg.window,
                sim_threshold: cfg.sim_threshold,
                n_text,
                keyframe: cfg.keyframe,
            },
            grid,
            n_frames,
            keyframes: kf.clone(),
            transitions: result.keyframes.transitions.clone(),
            homographies: kf
                .windows(2)
                .zip(&result.homographies)
                .map(|(p, h)| HomographyEntry {
                    from: p[0],
                    to: p[1],
                    h: *h,
                })
                .collect(),
            frames: kf
                .iter()
                .zip(&result.parf_retained)
                .map(|(&frame, kept)| FrameEntry {
                    frame,
                    parf_retained: kept.clone(),
                })
                .collect(),
            final_selection: result
                .final_selection
                .iter()
                .enumerate()
                .map(|(order, t)| SelectionEntry {
                    frame: t.frame,
                    token: t.token,
                    order,
                })
                .collect(),
            stats: StatsEntry {
                original: s.original,
                post_parf: s.post_parf,
                budget: s.budget,
                final_count: s.final_count,
                mmr_skipped: s.mmr_skipped,
                parf_reduction_pct: s.parf_reduction_pct,
                mmr_reduction_pct: s.mmr_reduction_pct,
                total_reduction_pct: s.total_reduction_pct,
                context_ratio: savings.context_ratio,
                attention_ratio: savings.attention_ratio,
                linear_ratio: savings.linear_ratio,
                kv_cache_ratio: savings.kv_cache_ratio,
            },
        }
    }

    /// Pipeline configuration recovered from the echo.
    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            retention_rate: self.config.retention_rate,
            lambda: self.config.lambda,
            window: self.config.window,
            sim_threshold: self.config.sim_threshold,
            keyframe: self.config.keyframe,
            seed: self.config.seed,
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        to_json_bytes(self)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyframeDocument {
    pub frames_dir: String,
    pub seed: u64,
    pub config: KeyframeConfig,
    pub n_frames: usize,
    pub keyframes: Vec<usize>,
    pub transitions: Vec<Transition>,
}

impl KeyframeDocument {
    pub fn new(
        frames_dir: String,
        seed: u64,
        config: KeyframeConfig,
        n_frames: usize,
        report: &KeyframeReport,
    ) -> Self {
        Self {
            frames_dir,
            seed,
            config,
            n_frames,
            keyframes: report.keyframe_indices.clone(),
            transitions: report.transitions.clone(),
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}
