//! Keypoints, binary descriptors and ratio-test matching.
//!
//! Corners come from a single-scale FAST-9 segment test, descriptors are
//! BRIEF-256 on a box-smoothed patch, and matching is brute-force Hamming.
//! Consecutive keyframes differ by modest translation and rotation, so no
//! orientation or scale pyramid is computed.

mod brief;
mod fast;
mod matching;

pub use brief::{describe, BinaryDescriptor, Described, DESCRIPTOR_MARGIN};
pub use fast::{detect_corners, detect_corners_in, FastConfig};
pub use matching::{match_ratio, Match};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::image::ImageBuffer;
use crate::linalg::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub position: Vec2,
    pub score: f64,
}

/// Parameters for the detect → describe → match chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub fast_threshold: u8,
    pub max_keypoints: usize,
    pub ratio: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            fast_threshold: 20,
            max_keypoints: 1000,
            ratio: 0.75,
        }
    }
}

/// Keypoints that survived description, paired with their descriptors.
#[derive(Debug, Clone)]
pub struct FrameFeatures {
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<BinaryDescriptor>,
}

impl FrameFeatures {
    /// Detects corners away from the descriptor border and describes them.
    pub fn extract(image: &ImageBuffer, cfg: &FeatureConfig) -> Result<Self> {
        let fast = FastConfig {
            threshold: cfg.fast_threshold,
            max_keypoints: cfg.max_keypoints,
            border: DESCRIPTOR_MARGIN,
        };
        let kps = detect_corners_in(image, &fast)?;
        let described = describe(image, &kps);
        let keypoints = described.kept.iter().map(|&i| kps[i]).collect();
        Ok(Self {
            keypoints,
            descriptors: described.descriptors,
        })
    }
}
