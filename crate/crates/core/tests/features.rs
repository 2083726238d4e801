//! Feature matching on rendered frame pairs with a known homography.

use tokenprune_core::features::{match_ratio, FeatureConfig, FrameFeatures};
use tokenprune_core::{synth_scene, Motion, SynthConfig};

fn consistent_fraction(seed: u64, motion: Motion) -> (usize, f64) {
    let cfg = SynthConfig {
        frames: 2,
        motion,
        ..SynthConfig::default()
    };
    let scene = synth_scene(seed, &cfg).unwrap();
    let fc = FeatureConfig::default();
    let a = FrameFeatures::extract(&scene.frames[0], &fc).unwrap();
    let b = FrameFeatures::extract(&scene.frames[1], &fc).unwrap();
    let matches = match_ratio(&a.descriptors, &b.descriptors, fc.ratio);
    let h = scene.true_homographies[0].0;
    let good = matches
        .iter()
        .filter(|m| {
            let p = a.keypoints[m.idx_a].position;
            let q = b.keypoints[m.idx_b].position;
            let w = h[6] * p.x + h[7] * p.y + h[8];
            let x = (h[0] * p.x + h[1] * p.y + h[2]) / w;
            let y = (h[3] * p.x + h[4] * p.y + h[5]) / w;
            (x - q.x).hypot(y - q.y) <= 2.0
        })
        .count();
    (matches.len(), good as f64 / matches.len().max(1) as f64)
}

#[test]
fn warped_pairs_match_consistently() {
    let cases = [
        (1, Motion::Pan { dx: 24.0, dy: 5.0 }),
        (2, Motion::Pan { dx: -37.5, dy: 0.0 }),
        (3, Motion::Rotate { degrees: 4.0 }),
        (4, Motion::Rotate { degrees: -7.0 }),
    ];
    for (seed, motion) in cases {
        let (n, frac) = consistent_fraction(seed, motion);
        assert!(n >= 30, "{motion}: only {n} matches");
        assert!(frac >= 0.7, "{motion}: {:.1}% consistent of {n}", 100.0 * frac);
    }
}
