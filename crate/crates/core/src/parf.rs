//! Perspective-aware redundancy filtering.
//!
//! Each current-frame token centre is pulled back through `H⁻¹` into the
//! previous keyframe; the previous token whose patch contains that point is
//! its counterpart. Current tokens whose counterpart is cosine-similar above
//! the threshold are dropped. Previous-frame tokens are never touched, and a
//! token with no counterpart is always kept.

use std::borrow::Borrow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Homography;
use crate::linalg::{cosine_with_norms, Vec2};
use crate::tokens::TokenGrid;

pub const DEFAULT_SIM_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParfConfig {
    /// Strict: a token is redundant when similarity `> sim_threshold`.
    /// Values above 1 disable pruning.
    pub sim_threshold: f64,
}

impl Default for ParfConfig {
    fn default() -> Self {
        Self {
            sim_threshold: DEFAULT_SIM_THRESHOLD,
        }
    }
}

impl ParfConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.sim_threshold.is_finite() || self.sim_threshold <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "similarity threshold must be a positive number, got {}",
                self.sim_threshold
            )));
        }
        Ok(())
    }
}

/// Counterpart in the previous grid for each current token, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentMap {
    pub counterparts: Vec<Option<usize>>,
}

impl AlignmentMap {
    pub fn identity(n: usize) -> Self {
        Self {
            counterparts: (0..n).map(Some).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.counterparts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counterparts.is_empty()
    }

    pub fn unmatched(&self) -> usize {
        self.counterparts.iter().filter(|c| c.is_none()).count()
    }
}

pub fn align_token_grid(h: &Homography, prev: &TokenGrid, cur: &TokenGrid) -> Result<AlignmentMap> {
    let (pg, cg) = (&prev.geometry, &cur.geometry);
    if pg.patch_w != cg.patch_w || pg.patch_h != cg.patch_h {
        return Err(Error::DimensionMismatch {
            what: "patch width of previous vs current grid",
            left: pg.patch_w,
            right: cg.patch_w,
        });
    }
    let inv = h.h.inverse()?;
    let (fw, fh) = (pg.frame_w as f64, pg.frame_h as f64);
    let counterparts = (0..cur.len())
        .map(|i| {
            let c = cg.center(i);
            let [x, y, w] = inv.apply_h(c);
            if w.abs() <= crate::linalg::ZERO_NORM {
                return None;
            }
            let p = Vec2::new(x / w, y / w);
            if !(p.x >= 0.0 && p.y >= 0.0 && p.x < fw && p.y < fh) {
                return None;
            }
            let col = ((p.x / pg.patch_w as f64) as usize).min(pg.cols - 1);
            let row = ((p.y / pg.patch_h as f64) as usize).min(pg.rows - 1);
            Some(row * pg.cols + col)
        })
        .collect();
    Ok(AlignmentMap { counterparts })
}

fn check_dims(prev: &TokenGrid, cur: &TokenGrid) -> Result<()> {
    if prev.dim != cur.dim {
        return Err(Error::DimensionMismatch {
            what: "embedding dimension of previous vs current grid",
            left: prev.dim,
            right: cur.dim,
        });
    }
    Ok(())
}

/// Current-token indices kept by aligned comparison, ascending.
pub fn parf_filter(prev: &TokenGrid, cur: &TokenGrid, amap: &AlignmentMap, cfg: &ParfConfig) -> Result<Vec<usize>> {
    check_dims(prev, cur)?;
    cfg.validate()?;
    if amap.len() != cur.len() {
        return Err(Error::DimensionMismatch {
            what: "alignment map length vs current token count",
            left: amap.len(),
            right: cur.len(),
        });
    }
    if let Some(bad) = amap.counterparts.iter().flatten().find(|&&j| j >= prev.len()) {
        return Err(Error::DimensionMismatch {
            what: "counterpart index vs previous token count",
            left: *bad,
            right: prev.len(),
        });
    }
    let prev_norms = prev.norms();
    let cur_norms = cur.norms();
    Ok((0..cur.len())
        .filter(|&i| match amap.counterparts[i] {
            None => true,
            Some(j) => {
                let s = cosine_with_norms(cur.token(i), prev.token(j), cur_norms[i], prev_norms[j]);
                s <= cfg.sim_threshold
            }
        })
        .collect())
}

/// Fixed-position baseline: compares token `i` with previous token `i`.
pub fn naive_filter(prev: &TokenGrid, cur: &TokenGrid, cfg: &ParfConfig) -> Result<Vec<usize>> {
    if prev.geometry.rows != cur.geometry.rows || prev.geometry.cols != cur.geometry.cols {
        return Err(Error::DimensionMismatch {
            what: "token count of previous vs current grid",
            left: prev.len(),
            right: cur.len(),
        });
    }
    parf_filter(prev, cur, &AlignmentMap::identity(cur.len()), cfg)
}

/// Filters every keyframe against its predecessor's full grid.
///
/// `homographies[i]` maps keyframe `i` to keyframe `i + 1`; `None` marks a
/// failed estimate, in which case the whole frame is kept.
pub fn parf_chain<G: Borrow<TokenGrid>>(
    keyframes: &[G],
    homographies: &[Option<Homography>],
    cfg: &ParfConfig,
) -> Result<Vec<Vec<usize>>> {
    if keyframes.is_empty() {
        return Ok(Vec::new());
    }
    if homographies.len() + 1 != keyframes.len() {
        return Err(Error::DimensionMismatch {
            what: "homographies vs keyframes - 1",
            left: homographies.len(),
            right: keyframes.len() - 1,
        });
    }
    let mut out = Vec::with_capacity(keyframes.len());
    out.push((0..keyframes[0].borrow().len()).collect());
    for (pair, h) in keyframes.windows(2).zip(homographies) {
        let (prev, cur) = (pair[0].borrow(), pair[1].borrow());
        let kept = match h {
            Some(h) => {
                let amap = align_token_grid(h, prev, cur)?;
                parf_filter(prev, cur, &amap, cfg)?
            }
            None => (0..cur.len()).collect(),
        };
        out.push(kept);
    }
    Ok(out)
}
