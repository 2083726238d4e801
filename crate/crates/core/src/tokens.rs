//! Per-frame token grids and their patch geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vec2;

/// Patch tiling shared by every frame of a video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub rows: usize,
    pub cols: usize,
    pub patch_w: usize,
    pub patch_h: usize,
    pub frame_w: usize,
    pub frame_h: usize,
}

impl GridGeometry {
    pub fn n_tokens(&self) -> usize {
        self.rows * self.cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.patch_w == 0 || self.patch_h == 0 {
            return Err(Error::InvalidConfig(format!(
                "grid needs positive rows/cols/patch size, got {self:?}"
            )));
        }
        if self.rows * self.patch_h > self.frame_h + self.patch_h
            || self.cols * self.patch_w > self.frame_w + self.patch_w
        {
            return Err(Error::InvalidConfig(format!(
                "patch grid {}x{} of {}x{} px does not fit a {}x{} frame",
                self.rows, self.cols, self.patch_w, self.patch_h, self.frame_w, self.frame_h
            )));
        }
        Ok(())
    }

    /// Token index → (row, col), row-major.
    pub fn cell(&self, index: usize) -> (usize, usize) {
        (index / self.cols, index % self.cols)
    }

    /// Patch centre in pixels: `((c + ½)·patch_w, (r + ½)·patch_h)`.
    pub fn center(&self, index: usize) -> Vec2 {
        let (r, c) = self.cell(index);
        Vec2::new(
            (c as f64 + 0.5) * self.patch_w as f64,
            (r as f64 + 0.5) * self.patch_h as f64,
        )
    }
}

/// One frame's token embeddings, row-major over the patch grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenGrid {
    pub geometry: GridGeometry,
    pub dim: usize,
    embeddings: Vec<f64>,
}

impl TokenGrid {
    pub fn new(geometry: GridGeometry, dim: usize, embeddings: Vec<f64>) -> Result<Self> {
        geometry.validate()?;
        if dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be >= 1".into()));
        }
        let expect = geometry.n_tokens() * dim;
        if embeddings.len() != expect {
            return Err(Error::DimensionMismatch {
                what: "token grid scalars vs rows*cols*d",
                left: embeddings.len(),
                right: expect,
            });
        }
        if embeddings.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("token grid contains non-finite values".into()));
        }
        Ok(Self {
            geometry,
            dim,
            embeddings,
        })
    }

    pub fn len(&self) -> usize {
        self.geometry.n_tokens()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn token(&self, i: usize) -> &[f64] {
        &self.embeddings[i * self.dim..(i + 1) * self.dim]
    }

    pub fn token_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.embeddings[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.embeddings
    }

    pub fn norms(&self) -> Vec<f64> {
        self.embeddings
            .chunks_exact(self.dim)
            .map(crate::linalg::norm)
            .collect()
    }
}

/// Centres of every patch, in token order.
pub fn patch_centers(grid: &TokenGrid) -> Vec<Vec2> {
    (0..grid.len()).map(|i| grid.geometry.center(i)).collect()
}
