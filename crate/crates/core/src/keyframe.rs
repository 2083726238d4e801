//! Overlap-threshold keyframe selection.
//!
//! Frames are compared with the most recent keyframe, not with their
//! immediate predecessor, so slow motion accumulates until the overlap drops
//! below the threshold. A frame whose homography cannot be estimated becomes
//! a keyframe and is flagged as a fallback.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{match_ratio, FeatureConfig, FrameFeatures};
use crate::geometry::{frame_overlap, ransac_homography, Correspondence, Homography, RansacConfig};
use crate::image::ImageBuffer;

pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.6;
pub const DEFAULT_MIN_MATCHES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyframeConfig {
    pub overlap_threshold: f64,
    /// Minimum ratio-test matches, and minimum RANSAC inliers, for an
    /// estimate to be trusted.
    pub min_matches: usize,
    pub features: FeatureConfig,
    pub ransac: RansacConfig,
}

impl Default for KeyframeConfig {
    fn default() -> Self {
        Self {
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
            min_matches: DEFAULT_MIN_MATCHES,
            features: FeatureConfig::default(),
            ransac: RansacConfig::default(),
        }
    }
}

impl KeyframeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.overlap_threshold > 0.0 && self.overlap_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "overlap threshold {} outside (0, 1)",
                self.overlap_threshold
            )));
        }
        if self.min_matches < 4 {
            return Err(Error::InvalidConfig("min_matches must be >= 4".into()));
        }
        if !(self.features.ratio > 0.0 && self.features.ratio <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "ratio-test threshold {} outside (0, 1]",
                self.features.ratio
            )));
        }
        if self.ransac.iters == 0 || self.ransac.reproj_thresh.is_nan() || self.ransac.reproj_thresh <= 0.0 {
            return Err(Error::InvalidConfig(
                "RANSAC needs iters >= 1 and a positive threshold".into(),
            ));
        }
        if let Some(c) = self.ransac.adaptive_confidence {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::InvalidConfig(format!("RANSAC confidence {c} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Outcome of comparing one frame with the keyframe before it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub frame: usize,
    /// Keyframe the frame was measured against.
    pub reference: usize,
    pub n_matches: usize,
    pub n_inliers: usize,
    /// `None` when estimation failed.
    pub overlap: Option<f64>,
    pub homography: Option<Homography>,
    pub fallback: bool,
    pub is_keyframe: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyframeReport {
    pub keyframe_indices: Vec<usize>,
    /// One entry per frame after the first.
    pub transitions: Vec<Transition>,
}

impl KeyframeReport {
    /// For each adjacent keyframe pair, the homography estimated when the
    /// later one was selected (`None` for fallbacks).
    pub fn keyframe_homographies(&self) -> Vec<Option<Homography>> {
        self.keyframe_indices[1..]
            .iter()
            .map(|&k| self.transitions[k - 1].homography)
            .collect()
    }

    pub fn transition_into(&self, frame: usize) -> Option<&Transition> {
        frame.checked_sub(1).and_then(|i| self.transitions.get(i))
    }
}

/// What estimating `H` between two frames produced.
#[derive(Debug)]
pub struct PairEstimate {
    pub n_matches: usize,
    pub homography: Result<Homography>,
}

/// Matches features of `a` against `b` and fits `H: a → b` robustly.
pub fn estimate_pair(a: &FrameFeatures, b: &FrameFeatures, cfg: &KeyframeConfig, seed: u64) -> PairEstimate {
    let matches = match_ratio(&a.descriptors, &b.descriptors, cfg.features.ratio);
    let corrs: Vec<Correspondence> = matches
        .iter()
        .map(|m| Correspondence::new(a.keypoints[m.idx_a].position, b.keypoints[m.idx_b].position))
        .collect();
    let n_matches = corrs.len();
    let homography = if n_matches < cfg.min_matches {
        Err(Error::InsufficientConstraints {
            needed: cfg.min_matches,
            got: n_matches,
        })
    } else {
        ransac_homography(&corrs, &cfg.ransac, seed).and_then(|out| {
            let h = out.homography;
            if h.n_inliers < cfg.min_matches {
                Err(Error::NoConsensus {
                    inliers: h.n_inliers,
                    needed: cfg.min_matches,
                })
            } else {
                Ok(h)
            }
        })
    };
    PairEstimate { n_matches, homography }
}

/// Seed for the RANSAC run between frames `a` and `b`.
pub fn pair_seed(seed: u64, a: usize, b: usize) -> u64 {
    let mut z = seed ^ (a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (b as u64).rotate_left(32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn check_frames(frames: &[ImageBuffer]) -> Result<()> {
    let first = frames.first().ok_or(Error::EmptyInput("frame sequence"))?;
    for f in &frames[1..] {
        if f.width() != first.width() {
            return Err(Error::DimensionMismatch {
                what: "frame width vs first frame width",
                left: f.width(),
                right: first.width(),
            });
        }
        if f.height() != first.height() {
            return Err(Error::DimensionMismatch {
                what: "frame height vs first frame height",
                left: f.height(),
                right: first.height(),
            });
        }
    }
    Ok(())
}

pub fn extract_all(frames: &[ImageBuffer], cfg: &FeatureConfig) -> Result<Vec<FrameFeatures>> {
    frames.iter().map(|f| FrameFeatures::extract(f, cfg)).collect()
}

pub fn select_keyframes(frames: &[ImageBuffer], cfg: &KeyframeConfig, seed: u64) -> Result<KeyframeReport> {
    check_frames(frames)?;
    cfg.validate()?;
    let feats = extract_all(frames, &cfg.features)?;
    select_with_features(frames, &feats, cfg, seed)
}

pub(crate) fn select_with_features(
    frames: &[ImageBuffer],
    feats: &[FrameFeatures],
    cfg: &KeyframeConfig,
    seed: u64,
) -> Result<KeyframeReport> {
    let (w, h) = frames[0].dims();
    let mut keyframe_indices = vec![0];
    let mut transitions = Vec::with_capacity(frames.len().saturating_sub(1));
    let mut last = 0;
    for t in 1..frames.len() {
        let est = estimate_pair(&feats[last], &feats[t], cfg, pair_seed(seed, last, t));
        let measured = est
            .homography
            .and_then(|hm| frame_overlap(&hm, w, h).map(|ov| (hm, ov)));
        let (overlap, homography, n_inliers, fallback) = match measured {
            Ok((hm, ov)) => (Some(ov), Some(hm), hm.n_inliers, false),
            Err(_) => (None, None, 0, true),
        };
        let is_keyframe = fallback || overlap.is_some_and(|ov| ov < cfg.overlap_threshold);
        transitions.push(Transition {
            frame: t,
            reference: last,
            n_matches: est.n_matches,
            n_inliers,
            overlap,
            homography,
            fallback,
            is_keyframe,
        });
        if is_keyframe {
            keyframe_indices.push(t);
            last = t;
        }
    }
    Ok(KeyframeReport {
        keyframe_indices,
        transitions,
    })
}
