//! Binary PPM (`P6`) with maxval 255.
//!
//! Header grammar: `P6`, whitespace, width, whitespace, height, whitespace,
//! maxval, exactly one whitespace byte, raster. A `#` outside the raster
//! starts a comment that runs to the end of the line.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n' && c != b'\r') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader(format!("expected {what} at byte {start}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::MalformedHeader(format!("{what} out of range at byte {start}")))
    }
}

pub fn decode_p6(bytes: &[u8]) -> Result<ImageBuffer> {
    match bytes {
        [b'P', b'6', ..] => {}
        [b'P', d, ..] if d.is_ascii_digit() => {
            return Err(Error::UnsupportedFormat(format!(
                "P{} (only binary P6 is supported)",
                *d as char
            )))
        }
        _ => {
            return Err(Error::BadMagic {
                expected: "P6".into(),
                found: String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned(),
            })
        }
    }
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(Error::MalformedHeader("missing whitespace after P6".into()));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("empty image {width}x{height}")));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::MalformedHeader("missing whitespace after maxval".into())),
    }
    let raster = &bytes[cur.pos..];
    let expected = width as u64 * height as u64 * 3;
    if (raster.len() as u64) < expected {
        return Err(Error::TruncatedPayload {
            expected,
            actual: raster.len() as u64,
        });
    }
    if raster.len() as u64 > expected {
        return Err(Error::TrailingData {
            expected: cur.pos as u64 + expected,
            actual: bytes.len() as u64,
        });
    }
    ImageBuffer::from_raw(width as usize, height as usize, raster.to_vec())
}

pub fn encode_p6(img: &ImageBuffer) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

pub fn read_image_p6(path: &Path) -> Result<ImageBuffer> {
    decode_p6(&super::read_bytes(path)?)
}

pub fn write_image_p6(path: &Path, img: &ImageBuffer) -> Result<()> {
    super::write_bytes(path, &encode_p6(img))
}
