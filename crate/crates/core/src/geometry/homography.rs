use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{null_vector_9, Mat3, Vec2, ZERO_NORM};
use crate::rng::Prng;

/// Projective map from previous-frame pixels to current-frame pixels.
///
/// The matrix is stored canonically: unit Frobenius norm, `h₉ > 0` (or the
/// first nonzero entry positive when `h₉` vanishes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Homography {
    pub h: Mat3,
    pub n_inliers: usize,
    pub mean_reproj_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub src: Vec2,
    pub dst: Vec2,
}

impl Correspondence {
    pub fn new(src: Vec2, dst: Vec2) -> Self {
        Self { src, dst }
    }
}

impl Homography {
    pub fn identity() -> Self {
        Self::from_matrix(Mat3::IDENTITY).expect("identity is invertible")
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self::from_matrix(Mat3::translation(tx, ty)).expect("translation is invertible")
    }

    /// Canonicalizes `m`; fails when it is singular or non-finite.
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::Degenerate("non-finite homography".into()));
        }
        let n = m.frobenius();
        if n < ZERO_NORM {
            return Err(Error::NotInvertible { det: 0.0 });
        }
        let mut h = m.scale(1.0 / n);
        let pivot = if h.0[8].abs() >= ZERO_NORM {
            h.0[8]
        } else {
            h.0.iter().copied().find(|v| *v != 0.0).unwrap_or(1.0)
        };
        if pivot < 0.0 {
            h = h.scale(-1.0);
        }
        let det = h.det();
        if det.abs() <= ZERO_NORM {
            return Err(Error::NotInvertible { det });
        }
        Ok(Self {
            h,
            n_inliers: 0,
            mean_reproj_error: 0.0,
        })
    }

    pub fn inverse(&self) -> Result<Homography> {
        Self::from_matrix(self.h.inverse()?)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Homography) -> Result<Homography> {
        Self::from_matrix(next.h.mul(&self.h))
    }

    pub fn apply(&self, p: Vec2) -> Result<Vec2> {
        warp_point(self, p)
    }
}

/// `((h₁x + h₂y + h₃)/w, (h₄x + h₅y + h₆)/w)` with `w = h₇x + h₈y + h₉`.
pub fn warp_point(h: &Homography, p: Vec2) -> Result<Vec2> {
    warp_with(&h.h, p)
}

#[inline]
pub(crate) fn warp_with(m: &Mat3, p: Vec2) -> Result<Vec2> {
    let [x, y, w] = m.apply_h(p);
    if w.abs() <= ZERO_NORM {
        return Err(Error::PointAtInfinity { w });
    }
    Ok(Vec2::new(x / w, y / w))
}

/// Translate to the centroid and scale to mean distance √2.
fn hartley(points: impl Iterator<Item = Vec2> + Clone) -> Mat3 {
    let n = points.clone().count() as f64;
    let (sx, sy) = points.clone().fold((0.0, 0.0), |a, p| (a.0 + p.x, a.1 + p.y));
    let c = Vec2::new(sx / n, sy / n);
    let mean = points.map(|p| p.dist(c)).sum::<f64>() / n;
    let s = if mean > ZERO_NORM {
        std::f64::consts::SQRT_2 / mean
    } else {
        1.0
    };
    Mat3([s, 0.0, -s * c.x, 0.0, s, -s * c.y, 0.0, 0.0, 1.0])
}

fn normalized(t: &Mat3, p: Vec2) -> Vec2 {
    Vec2::new(t.0[0] * p.x + t.0[2], t.0[4] * p.y + t.0[5])
}

/// Direct linear transform on Hartley-normalized points.
pub fn dlt_homography(corrs: &[Correspondence]) -> Result<Homography> {
    if corrs.len() < 4 {
        return Err(Error::InsufficientConstraints {
            needed: 4,
            got: corrs.len(),
        });
    }
    if corrs.iter().any(|c| !c.src.is_finite() || !c.dst.is_finite()) {
        return Err(Error::Degenerate("non-finite correspondence".into()));
    }
    let ts = hartley(corrs.iter().map(|c| c.src));
    let td = hartley(corrs.iter().map(|c| c.dst));
    let mut rows = Vec::with_capacity(2 * corrs.len());
    for c in corrs {
        let s = normalized(&ts, c.src);
        let d = normalized(&td, c.dst);
        rows.push([s.x, s.y, 1.0, 0.0, 0.0, 0.0, -d.x * s.x, -d.x * s.y, -d.x]);
        rows.push([0.0, 0.0, 0.0, s.x, s.y, 1.0, -d.y * s.x, -d.y * s.y, -d.y]);
    }
    let hn = Mat3(null_vector_9(&rows)?);
    let m = td.inverse()?.mul(&hn).mul(&ts);
    Homography::from_matrix(m).map_err(|e| match e {
        Error::NotInvertible { det } => Error::Degenerate(format!("estimated homography is singular (det = {det:e})")),
        other => other,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RansacConfig {
    pub iters: usize,
    /// Forward reprojection threshold in pixels.
    pub reproj_thresh: f64,
    /// Stop once a sample of four inliers has been drawn with this probability.
    pub adaptive_confidence: Option<f64>,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            iters: 2000,
            reproj_thresh: 3.0,
            adaptive_confidence: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacOutcome {
    pub homography: Homography,
    pub inliers: Vec<bool>,
}

fn reproj_error(m: &Mat3, c: &Correspondence) -> f64 {
    match warp_with(m, c.src) {
        Ok(p) => p.dist(c.dst),
        Err(_) => f64::INFINITY,
    }
}

fn twice_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)).abs()
}

/// True when any three of the four points are (nearly) collinear.
fn has_collinear_triple(p: [Vec2; 4]) -> bool {
    let scale = p
        .iter()
        .flat_map(|a| p.iter().map(move |b| a.dist(*b)))
        .fold(0.0, f64::max);
    let tol = 1e-9 * scale * scale;
    [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
        .iter()
        .any(|&(i, j, k)| twice_area(p[i], p[j], p[k]) <= tol)
}

/// Classic RANSAC over minimal four-point samples.
///
/// All samples are drawn up front from `seed`, so the result does not depend
/// on evaluation order. The best hypothesis (most inliers, then lowest mean
/// inlier error) is refit on its inlier set.
pub fn ransac_homography(matches: &[Correspondence], cfg: &RansacConfig, seed: u64) -> Result<RansacOutcome> {
    let n = matches.len();
    if n < 4 {
        return Err(Error::InsufficientConstraints { needed: 4, got: n });
    }
    if cfg.reproj_thresh.is_nan() || cfg.reproj_thresh <= 0.0 || cfg.iters == 0 {
        return Err(Error::InvalidConfig(
            "RANSAC needs iters >= 1 and a positive threshold".into(),
        ));
    }
    if let Some(c) = cfg.adaptive_confidence {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidConfig(format!("RANSAC confidence {c} outside (0, 1)")));
        }
    }
    let mut rng = Prng::new(seed);
    let samples: Vec<Vec<usize>> = (0..cfg.iters).map(|_| rng.choose_k(n, 4)).collect::<Result<_>>()?;

    let mut best: Option<(usize, f64, Homography)> = None;
    let mut scratch = [Correspondence::new(Vec2::default(), Vec2::default()); 4];
    for (it, sample) in samples.iter().enumerate() {
        for (slot, &i) in scratch.iter_mut().zip(sample) {
            *slot = matches[i];
        }
        if has_collinear_triple(scratch.map(|c| c.src)) || has_collinear_triple(scratch.map(|c| c.dst)) {
            continue;
        }
        let Ok(model) = dlt_homography(&scratch) else {
            continue;
        };
        let (count, err_sum) = matches
            .iter()
            .map(|c| reproj_error(&model.h, c))
            .filter(|e| *e < cfg.reproj_thresh)
            .fold((0usize, 0.0), |(k, s), e| (k + 1, s + e));
        if count == 0 {
            continue;
        }
        let mean = err_sum / count as f64;
        let better = match &best {
            None => true,
            Some((bc, be, _)) => count > *bc || (count == *bc && mean < *be),
        };
        if better {
            best = Some((count, mean, model));
        }
        if let (Some(conf), Some((bc, _, _))) = (cfg.adaptive_confidence, &best) {
            let w = *bc as f64 / n as f64;
            let p_hit = 1.0 - (1.0 - w.powi(4)).powi(it as i32 + 1);
            if p_hit >= conf {
                break;
            }
        }
    }

    let Some((count, _, model)) = best else {
        return Err(Error::NoConsensus { inliers: 0, needed: 4 });
    };
    if count < 4 {
        return Err(Error::NoConsensus {
            inliers: count,
            needed: 4,
        });
    }
    let inliers: Vec<bool> = matches
        .iter()
        .map(|c| reproj_error(&model.h, c) < cfg.reproj_thresh)
        .collect();
    let inlier_set: Vec<Correspondence> = matches
        .iter()
        .zip(&inliers)
        .filter(|(_, &keep)| keep)
        .map(|(c, _)| *c)
        .collect();
    let mut refit = dlt_homography(&inlier_set).unwrap_or(model);
    refit.n_inliers = inlier_set.len();
    refit.mean_reproj_error =
        inlier_set.iter().map(|c| reproj_error(&refit.h, c)).sum::<f64>() / inlier_set.len() as f64;
    Ok(RansacOutcome {
        homography: refit,
        inliers,
    })
}
