//! EGT embedding tensors.
//!
//! Layout, all integers little-endian `u32`:
//!
//! | offset | field   |
//! |--------|---------|
//! | 0      | magic `EGTK` |
//! | 4      | version (1) |
//! | 8      | T (frames) |
//! | 12     | N (tokens per frame) |
//! | 16     | d (embedding dimension) |
//! | 20     | rows |
//! | 24     | cols |
//! | 28     | patch_w |
//! | 32     | patch_h |
//! | 36     | frame_w |
//! | 40     | frame_h |
//! | 44     | payload: T·N·d little-endian `f32`, frame-major, then token, then channel |
//!
//! Besides `N = rows·cols`, the reader requires `frame_w = cols·patch_w`,
//! `frame_h = rows·patch_h`, every count to be nonzero, and the file to end
//! exactly after the payload. Together these make every single-field header
//! mutation detectable.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tokens::{GridGeometry, TokenGrid};

pub const EGT_MAGIC: [u8; 4] = *b"EGTK";
pub const EGT_VERSION: u32 = 1;
pub const EGT_HEADER_LEN: usize = 44;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EgtHeader {
    pub frames: u32,
    pub tokens: u32,
    pub dim: u32,
    pub rows: u32,
    pub cols: u32,
    pub patch_w: u32,
    pub patch_h: u32,
    pub frame_w: u32,
    pub frame_h: u32,
}

impl EgtHeader {
    pub fn geometry(&self) -> GridGeometry {
        GridGeometry {
            rows: self.rows as usize,
            cols: self.cols as usize,
            patch_w: self.patch_w as usize,
            patch_h: self.patch_h as usize,
            frame_w: self.frame_w as usize,
            frame_h: self.frame_h as usize,
        }
    }

    pub fn payload_len(&self) -> u64 {
        (self.frames as u64)
            .saturating_mul(self.tokens as u64)
            .saturating_mul(self.dim as u64)
            .saturating_mul(4)
    }

    fn fields(&self) -> [u32; 9] {
        [
            self.frames,
            self.tokens,
            self.dim,
            self.rows,
            self.cols,
            self.patch_w,
            self.patch_h,
            self.frame_w,
            self.frame_h,
        ]
    }

    fn check(&self) -> Result<()> {
        let bad = |offset: u64, detail: String| Err(Error::HeaderInvariant { offset, detail });
        const NAMES: [&str; 9] = [
            "T", "N", "d", "rows", "cols", "patch_w", "patch_h", "frame_w", "frame_h",
        ];
        for (k, (v, name)) in self.fields().iter().zip(NAMES).enumerate() {
            if *v == 0 {
                return bad(8 + 4 * k as u64, format!("{name} must be nonzero"));
            }
        }
        if self.tokens as u64 != self.rows as u64 * self.cols as u64 {
            return bad(
                12,
                format!("N = {} but rows x cols = {} x {}", self.tokens, self.rows, self.cols),
            );
        }
        if self.frame_w as u64 != self.cols as u64 * self.patch_w as u64 {
            return bad(
                36,
                format!(
                    "frame_w = {} but cols x patch_w = {} x {}",
                    self.frame_w, self.cols, self.patch_w
                ),
            );
        }
        if self.frame_h as u64 != self.rows as u64 * self.patch_h as u64 {
            return bad(
                40,
                format!(
                    "frame_h = {} but rows x patch_h = {} x {}",
                    self.frame_h, self.rows, self.patch_h
                ),
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EgtFile {
    pub header: EgtHeader,
    pub grids: Vec<TokenGrid>,
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

pub fn decode_egt(bytes: &[u8]) -> Result<EgtFile> {
    if bytes.len() < 4 || bytes[..4] != EGT_MAGIC {
        return Err(Error::BadMagic {
            expected: "EGTK".into(),
            found: String::from_utf8_lossy(&bytes[..bytes.len().min(4)]).into_owned(),
        });
    }
    if bytes.len() < EGT_HEADER_LEN {
        return Err(Error::TruncatedHeader {
            needed: EGT_HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    let version = u32_at(bytes, 4);
    if version != EGT_VERSION {
        return Err(Error::VersionMismatch {
            expected: EGT_VERSION,
            found: version,
            offset: 4,
        });
    }
    let f: Vec<u32> = (0..9).map(|k| u32_at(bytes, 8 + 4 * k)).collect();
    let header = EgtHeader {
        frames: f[0],
        tokens: f[1],
        dim: f[2],
        rows: f[3],
        cols: f[4],
        patch_w: f[5],
        patch_h: f[6],
        frame_w: f[7],
        frame_h: f[8],
    };
    header.check()?;

    let expected = EGT_HEADER_LEN as u64 + header.payload_len();
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(Error::TruncatedPayload {
            expected: header.payload_len(),
            actual: actual - EGT_HEADER_LEN as u64,
        });
    }
    if actual > expected {
        return Err(Error::TrailingData { expected, actual });
    }

    let per_frame = header.tokens as usize * header.dim as usize;
    let geometry = header.geometry();
    let mut grids = Vec::with_capacity(header.frames as usize);
    for t in 0..header.frames as usize {
        let start = EGT_HEADER_LEN + t * per_frame * 4;
        let mut values = Vec::with_capacity(per_frame);
        for k in 0..per_frame {
            let off = start + 4 * k;
            let v = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            if !v.is_finite() {
                return Err(Error::NonFinite { offset: off as u64 });
            }
            values.push(v as f64);
        }
        grids.push(TokenGrid::new(geometry, header.dim as usize, values)?);
    }
    Ok(EgtFile { header, grids })
}

/// Serializes grids that share one geometry and dimension. Values are
/// narrowed to `f32`; a value that overflows is rejected.
pub fn encode_egt(grids: &[TokenGrid]) -> Result<Vec<u8>> {
    let first = grids.first().ok_or(Error::EmptyInput("no token grids to write"))?;
    let g = first.geometry;
    let to_u32 = |v: usize, what: &str| {
        u32::try_from(v).map_err(|_| Error::InvalidConfig(format!("{what} = {v} does not fit in u32")))
    };
    let header = EgtHeader {
        frames: to_u32(grids.len(), "T")?,
        tokens: to_u32(g.n_tokens(), "N")?,
        dim: to_u32(first.dim, "d")?,
        rows: to_u32(g.rows, "rows")?,
        cols: to_u32(g.cols, "cols")?,
        patch_w: to_u32(g.patch_w, "patch_w")?,
        patch_h: to_u32(g.patch_h, "patch_h")?,
        frame_w: to_u32(g.frame_w, "frame_w")?,
        frame_h: to_u32(g.frame_h, "frame_h")?,
    };
    header
        .check()
        .map_err(|e| Error::InvalidConfig(format!("grid cannot be stored as EGT: {e}")))?;
    let mut out = Vec::with_capacity(EGT_HEADER_LEN + header.payload_len() as usize);
    out.extend_from_slice(&EGT_MAGIC);
    out.extend_from_slice(&EGT_VERSION.to_le_bytes());
    for v in header.fields() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for grid in grids {
        if grid.geometry != g {
            return Err(Error::DimensionMismatch {
                what: "token count of grid vs first grid",
                left: grid.len(),
                right: first.len(),
            });
        }
        if grid.dim != first.dim {
            return Err(Error::DimensionMismatch {
                what: "embedding dimension of grid vs first grid",
                left: grid.dim,
                right: first.dim,
            });
        }
        for &v in grid.as_slice() {
            let x = v as f32;
            if !x.is_finite() {
                return Err(Error::NonFinite {
                    offset: out.len() as u64,
                });
            }
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn read_egt(path: &Path) -> Result<EgtFile> {
    decode_egt(&super::read_bytes(path)?)
}

pub fn write_egt(path: &Path, grids: &[TokenGrid]) -> Result<()> {
    super::write_bytes(path, &encode_egt(grids)?)
}
