//! Training-free visual token pruning for egomotion video.
//!
//! Stages: overlap-based keyframe selection, homography-aligned redundancy
//! filtering between consecutive keyframes, and windowed maximal marginal
//! relevance selection against a prompt embedding.

pub mod bench;
pub mod error;
pub mod features;
pub mod geometry;
pub mod image;
pub mod io;
pub mod keyframe;
pub mod linalg;
pub mod mmr;
pub mod parf;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod synth;
pub mod tokens;
pub mod visualize;

pub use error::{Error, ErrorClass, Result};
pub use geometry::{Correspondence, Homography, RansacConfig};
pub use image::ImageBuffer;
pub use keyframe::{select_keyframes, KeyframeConfig, KeyframeReport};
pub use linalg::{cosine_sim, Embedding, Mat3, Vec2};
pub use mmr::{mmr_select, MmrConfig, PromptEmbedding, TokenPool};
pub use parf::{align_token_grid, naive_filter, parf_chain, parf_filter, AlignmentMap, ParfConfig};
pub use pipeline::{estimate_savings, prune_video, PipelineConfig, PruneResult, SavingsEstimate, TokenRef};
pub use report::ResultDocument;
pub use rng::Prng;
pub use synth::{synth_scene, Motion, SynthConfig, SynthScene};
pub use tokens::{patch_centers, GridGeometry, TokenGrid};
