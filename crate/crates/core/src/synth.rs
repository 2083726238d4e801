//! Synthetic egomotion scenes with known geometry and known redundancy.
//!
//! A procedural texture covers a virtual planar canvas. Each frame samples a
//! window of it through a homography, so consecutive frames are related by an
//! exact, known `H`. Token embeddings are a fixed random projection of the
//! statistics of the texture under each patch (mean colour and a
//! gradient-orientation histogram), taken in canvas coordinates so the same
//! surface point embeds the same way in every frame. A chosen
//! fraction of the tokens that have a geometric counterpart in the previous
//! frame are then overwritten with exact copies of that counterpart; the rest
//! receive strong independent noise so they stay clearly dissimilar.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Homography;
use crate::image::ImageBuffer;
use crate::linalg::{cosine_sim, Mat3, Vec2};
use crate::mmr::PromptEmbedding;
use crate::rng::Prng;
use crate::tokens::{GridGeometry, TokenGrid};

/// Length of the per-patch statistics vector: RGB mean + 8 orientation bins.
pub const FEATURE_LEN: usize = 11;

/// Non-redundant tokens are redrawn until their similarity to the
/// counterpart is at most this.
pub const NON_REDUNDANT_MAX_SIM: f64 = 0.5;

/// Frame-to-frame camera motion. Every step applies the same `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    Identity,
    /// Content moves by `(dx, dy)` pixels per frame.
    Pan {
        dx: f64,
        dy: f64,
    },
    /// Camera yaw in degrees per frame, pinhole with focal length = width.
    Rotate {
        degrees: f64,
    },
}

impl Motion {
    /// Homography from frame `t` to frame `t + 1` for a `width×height` frame.
    pub fn step_matrix(&self, width: usize, height: usize) -> Mat3 {
        match *self {
            Motion::Identity => Mat3::IDENTITY,
            Motion::Pan { dx, dy } => Mat3::translation(dx, dy),
            Motion::Rotate { degrees } => {
                let f = width as f64;
                let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
                let k = Mat3([f, 0.0, cx, 0.0, f, cy, 0.0, 0.0, 1.0]);
                let k_inv = Mat3([1.0 / f, 0.0, -cx / f, 0.0, 1.0 / f, -cy / f, 0.0, 0.0, 1.0]);
                let (s, c) = degrees.to_radians().sin_cos();
                let r = Mat3([c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c]);
                k.mul(&r).mul(&k_inv)
            }
        }
    }
}

impl fmt::Display for Motion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Motion::Identity => write!(f, "identity"),
            Motion::Pan { dx, dy } => write!(f, "pan:{dx},{dy}"),
            Motion::Rotate { degrees } => write!(f, "rotate:{degrees}"),
        }
    }
}

impl FromStr for Motion {
    type Err = Error;

    /// `identity`, `pan:DX`, `pan:DX,DY` or `rotate:DEG`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("motion '{s}' is not one of identity, pan:DX[,DY], rotate:DEG"));
        let num = |v: &str| v.trim().parse::<f64>().ok().filter(|x| x.is_finite());
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        match kind.trim() {
            "identity" if args.is_empty() => Ok(Motion::Identity),
            "pan" => {
                let mut parts = args.split(',');
                let dx = parts.next().and_then(num).ok_or_else(bad)?;
                let dy = match parts.next() {
                    Some(v) => num(v).ok_or_else(bad)?,
                    None => 0.0,
                };
                if parts.next().is_some() {
                    return Err(bad());
                }
                Ok(Motion::Pan { dx, dy })
            }
            "rotate" | "yaw" => Ok(Motion::Rotate {
                degrees: num(args).ok_or_else(bad)?,
            }),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Motion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Motion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub patch: usize,
    pub dim: usize,
    pub motion: Motion,
    /// Smooth value-noise octaves, coarse to fine.
    pub octaves: usize,
    /// Standard deviation of Gaussian noise added to every token, relative to
    /// the token's norm. Applied after the redundancy copy.
    pub noise: f64,
    /// Fraction of tokens with a counterpart that become exact copies.
    pub redundancy: f64,
    /// Canvas side lengths as multiples of the frame size.
    pub canvas_scale: f64,
    pub prompt_tokens: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            frames: 8,
            width: 320,
            height: 240,
            patch: 16,
            dim: 64,
            motion: Motion::Pan { dx: 32.0, dy: 0.0 },
            octaves: 4,
            noise: 0.0,
            redundancy: 0.5,
            canvas_scale: 4.0,
            prompt_tokens: 8,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.frames == 0 {
            return fail("scene needs at least one frame".into());
        }
        if self.width < 32 || self.height < 32 {
            return fail(format!("frame {}x{} is smaller than 32x32", self.width, self.height));
        }
        if self.patch == 0 || !self.width.is_multiple_of(self.patch) || !self.height.is_multiple_of(self.patch) {
            return fail(format!(
                "frame {}x{} is not a whole number of {}-px patches",
                self.width, self.height, self.patch
            ));
        }
        if self.dim == 0 {
            return fail("embedding dimension must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.redundancy) {
            return fail(format!("redundancy {} outside [0, 1]", self.redundancy));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return fail(format!("noise {} must be finite and >= 0", self.noise));
        }
        if !(self.canvas_scale >= 1.0 && self.canvas_scale.is_finite()) {
            return fail(format!("canvas scale {} must be >= 1", self.canvas_scale));
        }
        if self.prompt_tokens == 0 {
            return fail("prompt needs at least one token".into());
        }
        Ok(())
    }

    pub fn grid_geometry(&self) -> GridGeometry {
        GridGeometry {
            rows: self.height / self.patch,
            cols: self.width / self.patch,
            patch_w: self.patch,
            patch_h: self.patch,
            frame_w: self.width,
            frame_h: self.height,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthScene {
    pub config: SynthConfig,
    pub seed: u64,
    pub frames: Vec<ImageBuffer>,
    /// Maps frame-`t` pixel coordinates to canvas coordinates.
    pub frame_to_canvas: Vec<Mat3>,
    /// `true_homographies[t]` maps frame `t` to frame `t + 1`, unnormalized.
    pub true_homographies: Vec<Mat3>,
    /// Embeddings straight from patch statistics.
    pub base_grids: Vec<TokenGrid>,
    /// Final embeddings after copying and noise.
    pub grids: Vec<TokenGrid>,
    /// `counterparts[t][i]`: cell of frame `t` containing the pre-image of
    /// the centre of token `i` of frame `t + 1`.
    pub counterparts: Vec<Vec<Option<usize>>>,
    /// `redundant[t]`: ascending tokens of frame `t + 1` copied from frame `t`.
    pub redundant: Vec<Vec<usize>>,
    /// Row-major `dim × FEATURE_LEN` projection.
    pub projection: Vec<f64>,
    pub prompt: PromptEmbedding,
}

impl SynthScene {
    pub fn homography(&self, t: usize) -> Result<Homography> {
        Homography::from_matrix(self.true_homographies[t])
    }

    /// Base embedding of a patch centred anywhere in frame `t`.
    pub fn embedding_at(&self, t: usize, center: Vec2) -> Vec<f64> {
        let [u, v, w] = self.frame_to_canvas[t].apply_h(center);
        let f = canvas_feature(
            self.seed,
            self.config.octaves,
            Vec2::new(u / w, v / w),
            self.config.patch,
        );
        project(&self.projection, &f)
    }

    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            seed: self.seed,
            config: self.config,
            homographies: self.true_homographies.iter().map(|m| m.0).collect(),
            counterparts: self.counterparts.clone(),
            redundant: self.redundant.clone(),
        }
    }
}

/// Sidecar written next to generated scenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub config: SynthConfig,
    pub homographies: Vec<[f64; 9]>,
    pub counterparts: Vec<Vec<Option<usize>>>,
    pub redundant: Vec<Vec<usize>>,
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform value in `[-1, 1]` attached to lattice point `(ix, iy)` of `layer`.
fn lattice(seed: u64, layer: u64, ix: i64, iy: i64) -> f64 {
    let h = mix(seed ^ mix(layer ^ mix((ix as u64) ^ mix(iy as u64 ^ 0x5851_F42D))));
    (h >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

fn smooth_noise(seed: u64, layer: u64, u: f64, v: f64) -> f64 {
    let (fu, fv) = (u.floor(), v.floor());
    let (ix, iy) = (fu as i64, fv as i64);
    let s = |t: f64| t * t * (3.0 - 2.0 * t);
    let (ax, ay) = (s(u - fu), s(v - fv));
    let l = |dx, dy| lattice(seed, layer, ix + dx, iy + dy);
    let top = l(0, 0) * (1.0 - ax) + l(1, 0) * ax;
    let bot = l(0, 1) * (1.0 - ax) + l(1, 1) * ax;
    top * (1.0 - ay) + bot * ay
}

const BLOCK: f64 = 7.0;

/// Procedural canvas colour at canvas point `(u, v)`.
fn texture(seed: u64, octaves: usize, u: f64, v: f64) -> [f64; 3] {
    let mut lum = 0.0;
    let mut cell = 96.0;
    let mut amp = 50.0;
    for o in 0..octaves {
        lum += amp * smooth_noise(seed, o as u64, u / cell, v / cell);
        cell /= 2.0;
        amp *= 0.6;
    }
    // Piecewise-constant blocks give the corner detector something to find.
    lum += 55.0 * lattice(seed, 100, (u / BLOCK).floor() as i64, (v / BLOCK).floor() as i64);
    let c1 = 30.0 * smooth_noise(seed, 200, u / 128.0, v / 128.0);
    let c2 = 30.0 * smooth_noise(seed, 201, u / 128.0, v / 128.0);
    let q = |x: f64| (128.0 + x).clamp(0.0, 255.0);
    [q(lum + c1), q(lum - 0.5 * c1 + c2), q(lum - 0.5 * c1 - c2)]
}

fn render(seed: u64, cfg: &SynthConfig, g: &Mat3) -> ImageBuffer {
    let mut img = ImageBuffer::new(cfg.width, cfg.height);
    for y in 0..cfg.height {
        for x in 0..cfg.width {
            let [u, v, w] = g.apply_h(Vec2::new(x as f64 + 0.5, y as f64 + 0.5));
            img.put(x, y, texture(seed, cfg.octaves, u / w, v / w).map(|c| c.round() as u8));
        }
    }
    img
}

fn check_window(g: &Mat3, cfg: &SynthConfig, canvas: (f64, f64), t: usize) -> Result<()> {
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    for c in [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)] {
        let [u, v, z] = g.apply_h(Vec2::new(c.0, c.1));
        let inside = z > 1e-9 && {
            let (u, v) = (u / z, v / z);
            u >= 0.0 && v >= 0.0 && u <= canvas.0 && v <= canvas.1
        };
        if !inside {
            return Err(Error::Degenerate(format!(
                "frame {t} leaves the {:.0}x{:.0} canvas under motion {}; \
                 use fewer frames, smaller motion or a larger canvas scale",
                canvas.0, canvas.1, cfg.motion
            )));
        }
    }
    Ok(())
}

/// Statistics of the canvas texture in a `patch×patch` window centred on a
/// canvas point, with a Gaussian spatial weight (σ = patch/2). Orientations
/// are soft-binned into 8 bins of 45°.
pub fn canvas_feature(seed: u64, octaves: usize, center: Vec2, patch: usize) -> [f64; FEATURE_LEN] {
    let p = patch;
    let half = p as f64 / 2.0;
    let sigma2 = 2.0 * half * half;
    let offset = |k: usize| k as f64 + 0.5 - half;
    let mut lum = vec![0.0; p * p];
    let mut mean = [0.0; 3];
    let mut wsum = 0.0;
    for i in 0..p {
        for j in 0..p {
            let (dx, dy) = (offset(j), offset(i));
            let s = texture(seed, octaves, center.x + dx, center.y + dy);
            let wt = (-(dx * dx + dy * dy) / sigma2).exp();
            for c in 0..3 {
                mean[c] += wt * s[c];
            }
            wsum += wt;
            lum[i * p + j] = 0.299 * s[0] + 0.587 * s[1] + 0.114 * s[2];
        }
    }
    let mut f = [0.0; FEATURE_LEN];
    for c in 0..3 {
        f[c] = (mean[c] / wsum - 128.0) / 64.0;
    }
    let mut hist = [0.0; 8];
    let mut total = 0.0;
    for i in 1..p.saturating_sub(1) {
        for j in 1..p - 1 {
            let gx = lum[i * p + j + 1] - lum[i * p + j - 1];
            let gy = lum[(i + 1) * p + j] - lum[(i - 1) * p + j];
            let (dx, dy) = (offset(j), offset(i));
            let m = (gx * gx + gy * gy).sqrt() * (-(dx * dx + dy * dy) / sigma2).exp();
            if m == 0.0 {
                continue;
            }
            let pos = (gy.atan2(gx) / std::f64::consts::FRAC_PI_4).rem_euclid(8.0);
            let lo = pos.floor();
            let frac = pos - lo;
            let lo = lo as usize % 8;
            hist[lo] += m * (1.0 - frac);
            hist[(lo + 1) % 8] += m * frac;
            total += m;
        }
    }
    for b in 0..8 {
        let share = if total > 0.0 { hist[b] / total } else { 0.125 };
        f[3 + b] = 4.0 * (share - 0.125);
    }
    f
}

/// Seeded `dim × FEATURE_LEN` Gaussian projection.
pub fn projection_matrix(seed: u64, dim: usize) -> Vec<f64> {
    let mut rng = Prng::new(seed).fork(1);
    let s = 1.0 / (FEATURE_LEN as f64).sqrt();
    (0..dim * FEATURE_LEN).map(|_| rng.normal() * s).collect()
}

pub fn project(projection: &[f64], feature: &[f64; FEATURE_LEN]) -> Vec<f64> {
    projection
        .chunks_exact(FEATURE_LEN)
        .map(|row| row.iter().zip(feature).map(|(a, b)| a * b).sum())
        .collect()
}

fn embed_frame(seed: u64, cfg: &SynthConfig, g: &Mat3, projection: &[f64]) -> Result<TokenGrid> {
    let geom = cfg.grid_geometry();
    let data = (0..geom.n_tokens())
        .flat_map(|i| {
            let [u, v, w] = g.apply_h(geom.center(i));
            project(
                projection,
                &canvas_feature(seed, cfg.octaves, Vec2::new(u / w, v / w), cfg.patch),
            )
        })
        .collect();
    TokenGrid::new(geom, cfg.dim, data)
}

/// Cell of `geom` containing the pre-image of each token centre under `h`.
fn true_counterparts(h: &Mat3, geom: &GridGeometry) -> Result<Vec<Option<usize>>> {
    let inv = h.inverse()?;
    let (fw, fh) = (geom.frame_w as f64, geom.frame_h as f64);
    Ok((0..geom.n_tokens())
        .map(|i| {
            let [x, y, w] = inv.apply_h(geom.center(i));
            if w <= 0.0 {
                return None;
            }
            let (x, y) = (x / w, y / w);
            if x < 0.0 || y < 0.0 || x >= fw || y >= fh {
                return None;
            }
            let col = ((x / geom.patch_w as f64).floor() as usize).min(geom.cols - 1);
            let row = ((y / geom.patch_h as f64).floor() as usize).min(geom.rows - 1);
            Some(row * geom.cols + col)
        })
        .collect())
}

fn gaussian(rng: &mut Prng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.normal()).collect()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Base embedding plus noise twice its norm, redrawn until it is clearly
/// dissimilar to `counterpart`.
fn perturb_away(base: &[f64], counterpart: &[f64], rng: &mut Prng) -> Vec<f64> {
    let scale = 2.0 * l2(base).max(1e-3) / (base.len() as f64).sqrt();
    loop {
        let v: Vec<f64> = base
            .iter()
            .zip(gaussian(rng, base.len()))
            .map(|(b, g)| b + scale * g)
            .collect();
        let sim = cosine_sim(&v, counterpart).unwrap_or(1.0);
        if l2(&v) > 1e-9 && sim <= NON_REDUNDANT_MAX_SIM {
            return v;
        }
    }
}

pub fn synth_scene(seed: u64, cfg: &SynthConfig) -> Result<SynthScene> {
    cfg.validate()?;
    let geom = cfg.grid_geometry();
    geom.validate()?;
    let canvas = (
        cfg.width as f64 * cfg.canvas_scale,
        cfg.height as f64 * cfg.canvas_scale,
    );
    let step = cfg.motion.step_matrix(cfg.width, cfg.height);
    let step_inv = step.inverse()?;

    // g maps frame-t pixels to canvas points.
    let mut g = Mat3::translation(
        (canvas.0 - cfg.width as f64) / 2.0,
        (canvas.1 - cfg.height as f64) / 2.0,
    );
    let mut frames = Vec::with_capacity(cfg.frames);
    let mut frame_to_canvas = Vec::with_capacity(cfg.frames);
    for t in 0..cfg.frames {
        if t > 0 {
            g = g.mul(&step_inv);
        }
        check_window(&g, cfg, canvas, t)?;
        frames.push(render(seed, cfg, &g));
        frame_to_canvas.push(g);
    }

    let projection = projection_matrix(seed, cfg.dim);
    let base_grids = frame_to_canvas
        .iter()
        .map(|g| embed_frame(seed, cfg, g, &projection))
        .collect::<Result<Vec<_>>>()?;
    let true_homographies = vec![step; cfg.frames - 1];
    let cp = true_counterparts(&step, &geom)?;
    let counterparts = vec![cp.clone(); cfg.frames - 1];

    let mut master = Prng::new(seed);
    let mut copy_rng = master.fork(2);
    let mut noise_rng = master.fork(3);
    let mut prompt_rng = master.fork(4);

    let mut grids = vec![base_grids[0].clone()];
    let mut redundant = Vec::with_capacity(cfg.frames - 1);
    for t in 1..cfg.frames {
        let prev = &grids[t - 1];
        let mut cur = base_grids[t].clone();
        let matched: Vec<usize> = (0..cp.len()).filter(|&i| cp[i].is_some()).collect();
        let n_copy = (cfg.redundancy * matched.len() as f64).round() as usize;
        let mut picks: Vec<usize> = copy_rng
            .choose_k(matched.len(), n_copy)?
            .into_iter()
            .map(|k| matched[k])
            .collect();
        picks.sort_unstable();
        for &i in &matched {
            let j = cp[i].unwrap();
            let v = if picks.binary_search(&i).is_ok() {
                prev.token(j).to_vec()
            } else {
                perturb_away(base_grids[t].token(i), prev.token(j), &mut copy_rng)
            };
            cur.token_mut(i).copy_from_slice(&v);
        }
        redundant.push(picks);
        grids.push(cur);
    }

    if cfg.noise > 0.0 {
        for grid in &mut grids {
            for i in 0..grid.len() {
                let tok = grid.token_mut(i);
                let s = cfg.noise * l2(tok) / (tok.len() as f64).sqrt();
                for v in tok.iter_mut() {
                    *v += s * noise_rng.normal();
                }
            }
        }
    }

    let mut prompt = Vec::with_capacity(cfg.prompt_tokens * cfg.dim);
    for _ in 0..cfg.prompt_tokens {
        let f = prompt_rng.below(cfg.frames);
        let i = prompt_rng.below(geom.n_tokens());
        let tok = grids[f].token(i);
        let s = 0.1 * l2(tok) / (tok.len() as f64).sqrt();
        prompt.extend(tok.iter().map(|v| v + s * prompt_rng.normal()));
    }

    Ok(SynthScene {
        config: *cfg,
        seed,
        frames,
        frame_to_canvas,
        true_homographies,
        base_grids,
        grids,
        counterparts,
        redundant,
        projection,
        prompt: PromptEmbedding::new(cfg.dim, prompt)?,
    })
}
