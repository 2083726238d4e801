use super::Keypoint;
use crate::error::{Error, Result};
use crate::image::{GrayImage, ImageBuffer};
use crate::linalg::Vec2;

/// Bresenham circle of radius 3, clockwise from 12 o'clock.
const CIRCLE: [(i32, i32); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

const ARC: usize = 9;
const MIN_SIDE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FastConfig {
    pub threshold: u8,
    pub max_keypoints: usize,
    /// Pixels closer than this to any edge are not tested. At least 3.
    pub border: usize,
}

impl Default for FastConfig {
    fn default() -> Self {
        Self {
            threshold: 20,
            max_keypoints: 1000,
            border: 3,
        }
    }
}

/// FAST-9 corners with 3x3 non-maximum suppression, strongest first.
pub fn detect_corners(image: &ImageBuffer, threshold: u8, max_keypoints: usize) -> Result<Vec<Keypoint>> {
    detect_corners_in(
        image,
        &FastConfig {
            threshold,
            max_keypoints,
            border: 3,
        },
    )
}

pub fn detect_corners_in(image: &ImageBuffer, cfg: &FastConfig) -> Result<Vec<Keypoint>> {
    let (w, h) = image.dims();
    if w < MIN_SIDE || h < MIN_SIDE {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: MIN_SIDE,
        });
    }
    let gray = image.to_luma();
    let border = cfg.border.max(3);
    if 2 * border >= w || 2 * border >= h {
        return Ok(Vec::new());
    }

    let mut scores = vec![0u32; w * h];
    for y in border..h - border {
        for x in border..w - border {
            scores[y * w + x] = segment_score(&gray, x, y, cfg.threshold);
        }
    }

    let mut out = Vec::new();
    for y in border..h - border {
        for x in border..w - border {
            let s = scores[y * w + x];
            if s == 0 || !is_local_max(&scores, w, x, y) {
                continue;
            }
            out.push(Keypoint {
                position: Vec2::new(x as f64, y as f64),
                score: s as f64,
            });
        }
    }
    // Stable sort keeps raster order among equal scores.
    out.sort_by(|a, b| b.score.total_cmp(&a.score));
    out.truncate(cfg.max_keypoints);
    Ok(out)
}

/// Strict maximum against raster-earlier neighbours, non-strict against later
/// ones, so plateaus keep exactly their first pixel.
fn is_local_max(scores: &[u32], w: usize, x: usize, y: usize) -> bool {
    let s = scores[y * w + x];
    for dy in -1i32..=1 {
        for dx in -1i32..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let n = scores[(y as i32 + dy) as usize * w + (x as i32 + dx) as usize];
            let earlier = dy < 0 || (dy == 0 && dx < 0);
            if n > s || (earlier && n == s) {
                return false;
            }
        }
    }
    true
}

/// Zero when the pixel fails the segment test, otherwise the summed absolute
/// excess over the threshold along the stronger (bright or dark) side.
fn segment_score(img: &GrayImage, x: usize, y: usize, t: u8) -> u32 {
    let c = img.at(x, y) as i32;
    let t = t as i32;
    let mut ring = [0i32; 16];
    for (k, (dx, dy)) in CIRCLE.iter().enumerate() {
        ring[k] = img.at((x as i32 + dx) as usize, (y as i32 + dy) as usize) as i32;
    }

    // Quick reject: a 9-arc always covers at least two of the four compass points.
    let compass = [ring[0], ring[4], ring[8], ring[12]];
    let bright_c = compass.iter().filter(|&&p| p > c + t).count();
    let dark_c = compass.iter().filter(|&&p| p < c - t).count();
    if bright_c < 2 && dark_c < 2 {
        return 0;
    }

    let bright = has_arc(&ring, |p| p > c + t);
    let dark = has_arc(&ring, |p| p < c - t);
    if !bright && !dark {
        return 0;
    }
    let sb: i32 = ring.iter().filter(|&&p| p > c + t).map(|&p| p - c - t).sum();
    let sd: i32 = ring.iter().filter(|&&p| p < c - t).map(|&p| c - t - p).sum();
    let score = match (bright, dark) {
        (true, true) => sb.max(sd),
        (true, false) => sb,
        _ => sd,
    };
    // Guarantee nonzero for detected corners.
    score.max(0) as u32 + 1
}

fn has_arc(ring: &[i32; 16], pred: impl Fn(i32) -> bool) -> bool {
    let mut run = 0;
    for k in 0..16 + ARC - 1 {
        if pred(ring[k % 16]) {
            run += 1;
            if run >= ARC {
                return true;
            }
        } else {
            run = 0;
        }
    }
    false
}
