//! Projective geometry: homography estimation, warping and frame overlap.
//!
//! Every homography maps previous-frame pixel coordinates to current-frame
//! pixel coordinates. Pixel `(x, y)` covers `[x, x+1) × [y, y+1)`.

mod homography;
mod overlap;
mod warp;

pub use homography::{
    dlt_homography, ransac_homography, warp_point, Correspondence, Homography, RansacConfig, RansacOutcome,
};
pub use overlap::{clip_to_rect, frame_overlap, polygon_area};
pub use warp::{warp_image, WarpedImage};
