//! Overlay renderings of pruning results.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{warp_image, Homography};
use crate::image::ImageBuffer;
use crate::tokens::GridGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlayStyle {
    /// Colour blended into retained patches.
    pub tint: [u8; 3],
    /// Blend weight of the tint, in `[0, 1]`.
    pub tint_alpha: f64,
    /// Pruned pixels are scaled by `1 - dim`.
    pub dim: f64,
    pub grid_lines: bool,
}

impl Default for OverlayStyle {
    fn default() -> Self {
        Self {
            tint: [255, 96, 0],
            tint_alpha: 0.3,
            dim: 0.7,
            grid_lines: false,
        }
    }
}

impl OverlayStyle {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("dim", self.dim), ("tint alpha", self.tint_alpha)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

const GRID_LINE: [u8; 3] = [255, 255, 255];

fn scale(p: [u8; 3], f: f64) -> [u8; 3] {
    p.map(|c| (c as f64 * f).round() as u8)
}

fn blend(p: [u8; 3], tint: [u8; 3], a: f64) -> [u8; 3] {
    std::array::from_fn(|c| (p[c] as f64 * (1.0 - a) + tint[c] as f64 * a).round() as u8)
}

/// Tints the patches flagged in `retained` and dims every other patch.
/// Pixels outside the patch grid are left as they are.
pub fn token_overlay(
    frame: &ImageBuffer,
    grid: &GridGeometry,
    retained: &[bool],
    style: &OverlayStyle,
) -> Result<ImageBuffer> {
    style.validate()?;
    if retained.len() != grid.n_tokens() {
        return Err(Error::DimensionMismatch {
            what: "retained flags vs grid tokens",
            left: retained.len(),
            right: grid.n_tokens(),
        });
    }
    if frame.width() != grid.frame_w || frame.height() != grid.frame_h {
        return Err(Error::DimensionMismatch {
            what: "image width vs grid frame width",
            left: frame.width(),
            right: grid.frame_w,
        });
    }
    let mut out = frame.clone();
    let (gw, gh) = (
        (grid.cols * grid.patch_w).min(frame.width()),
        (grid.rows * grid.patch_h).min(frame.height()),
    );
    for y in 0..gh {
        for x in 0..gw {
            let (r, c) = (y / grid.patch_h, x / grid.patch_w);
            let p = frame.get(x, y);
            let on_line = style.grid_lines && (x % grid.patch_w == 0 || y % grid.patch_h == 0);
            let v = if on_line {
                GRID_LINE
            } else if retained[r * grid.cols + c] {
                blend(p, style.tint, style.tint_alpha)
            } else {
                scale(p, 1.0 - style.dim)
            };
            out.put(x, y, v);
        }
    }
    Ok(out)
}

/// Current frame on the left, previous frame warped into the current view
/// on the right.
pub fn alignment_panel(current: &ImageBuffer, previous: &ImageBuffer, h: &Homography) -> Result<ImageBuffer> {
    let (w, ht) = current.dims();
    let warped = warp_image(h, previous, w, ht)?;
    let mut out = ImageBuffer::new(2 * w, ht);
    for y in 0..ht {
        for x in 0..w {
            out.put(x, y, current.get(x, y));
            out.put(w + x, y, warped.image.get(x, y));
        }
    }
    Ok(out)
}
