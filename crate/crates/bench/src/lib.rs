//! Fixtures shared by the criterion benches.
//!
//! Token-level fixtures come from [`tokenprune_core::bench`] so the criterion
//! numbers and the `tokenprune bench` table time the same workloads.

use tokenprune_core::geometry::{Correspondence, Homography};
use tokenprune_core::{synth_scene, ImageBuffer, Motion, Prng, Result, SynthConfig, Vec2};

pub use tokenprune_core::bench::{mmr_fixture, parf_fixture};

pub const SEED: u64 = 0x5EED;

/// Two consecutive synthetic frames related by a small pan.
pub fn frame_pair(width: usize, height: usize) -> Result<(ImageBuffer, ImageBuffer)> {
    let cfg = SynthConfig {
        frames: 2,
        width,
        height,
        motion: Motion::Pan { dx: 24.0, dy: 6.0 },
        ..SynthConfig::default()
    };
    let mut frames = synth_scene(SEED, &cfg)?.frames.into_iter();
    Ok((frames.next().unwrap(), frames.next().unwrap()))
}

/// `n` correspondences under a mild projective map, the last
/// `outlier_fraction` of them replaced by uniform noise.
pub fn correspondences(n: usize, outlier_fraction: f64) -> Result<Vec<Correspondence>> {
    let h = Homography::from_matrix(tokenprune_core::Mat3([
        1.02, 0.03, 14.0, -0.02, 0.98, -6.0, 1e-5, -2e-5, 1.0,
    ]))?;
    let mut rng = Prng::new(SEED);
    let n_out = (n as f64 * outlier_fraction).round() as usize;
    (0..n)
        .map(|i| {
            let src = Vec2::new(640.0 * rng.next_f64(), 480.0 * rng.next_f64());
            let dst = if i >= n - n_out {
                Vec2::new(640.0 * rng.next_f64(), 480.0 * rng.next_f64())
            } else {
                h.apply(src)?
            };
            Ok(Correspondence::new(src, dst))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_requested_shapes() {
        let (a, b) = frame_pair(160, 128).unwrap();
        assert_eq!((a.dims(), b.dims()), ((160, 128), (160, 128)));
        assert_ne!(a, b);
        assert_eq!(correspondences(100, 0.4).unwrap().len(), 100);
        let (prev, cur, _) = parf_fixture(50, 8, SEED).unwrap();
        assert_eq!((prev.len(), cur.len()), (50, 50));
    }
}
