use super::Homography;
use crate::error::Result;
use crate::image::ImageBuffer;
use crate::linalg::Vec2;

/// Output of [`warp_image`]: the resampled raster and which pixels had a source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpedImage {
    pub image: ImageBuffer,
    pub coverage: Vec<bool>,
}

impl WarpedImage {
    pub fn covered(&self) -> usize {
        self.coverage.iter().filter(|&&c| c).count()
    }
}

/// Inverse-mapped bilinear warp. Pixel `(x, y)` is centred at `(x+½, y+½)`.
/// Outputs without a source sample stay black and are left out of `coverage`.
pub fn warp_image(h: &Homography, src: &ImageBuffer, out_w: usize, out_h: usize) -> Result<WarpedImage> {
    let inv = h.h.inverse()?;
    let (sw, sh) = (src.width() as f64, src.height() as f64);
    let mut image = ImageBuffer::new(out_w, out_h);
    let mut coverage = vec![false; out_w * out_h];
    for y in 0..out_h {
        for x in 0..out_w {
            let p = Vec2::new(x as f64 + 0.5, y as f64 + 0.5);
            let [qx, qy, qw] = inv.apply_h(p);
            if qw.abs() <= crate::linalg::ZERO_NORM {
                continue;
            }
            let (cx, cy) = (qx / qw, qy / qw);
            if !(cx >= 0.0 && cy >= 0.0 && cx <= sw && cy <= sh) {
                continue;
            }
            image.put(x, y, bilinear(src, cx - 0.5, cy - 0.5));
            coverage[y * out_w + x] = true;
        }
    }
    Ok(WarpedImage { image, coverage })
}

/// Bilinear sample at index-space coordinates, clamping to the edge pixels.
fn bilinear(src: &ImageBuffer, fx: f64, fy: f64) -> [u8; 3] {
    let max_x = src.width() - 1;
    let max_y = src.height() - 1;
    let fx = fx.clamp(0.0, max_x as f64);
    let fy = fy.clamp(0.0, max_y as f64);
    let x0 = fx.floor() as usize;
    let y0 = fy.floor() as usize;
    let x1 = (x0 + 1).min(max_x);
    let y1 = (y0 + 1).min(max_y);
    let ax = fx - x0 as f64;
    let ay = fy - y0 as f64;
    let (p00, p10, p01, p11) = (src.get(x0, y0), src.get(x1, y0), src.get(x0, y1), src.get(x1, y1));
    std::array::from_fn(|c| {
        let top = p00[c] as f64 * (1.0 - ax) + p10[c] as f64 * ax;
        let bot = p01[c] as f64 * (1.0 - ax) + p11[c] as f64 * ax;
        (top * (1.0 - ay) + bot * ay).round().clamp(0.0, 255.0) as u8
    })
}
