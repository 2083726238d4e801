//! File formats: EGT embedding tensors, binary PPM frames, and frame
//! directories (`frame_00000.ppm`, `frame_00001.ppm`, ...).

mod egt;
mod ppm;

use std::path::{Path, PathBuf};

pub use egt::{
    decode_egt, encode_egt, read_egt, write_egt, EgtFile, EgtHeader, EGT_HEADER_LEN, EGT_MAGIC, EGT_VERSION,
};
pub use ppm::{decode_p6, encode_p6, read_image_p6, write_image_p6};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::mmr::PromptEmbedding;
use crate::tokens::{GridGeometry, TokenGrid};

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:05}.ppm")
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Paths of `frame_%05d.ppm` files in `dir`, in index order. The sequence
/// must start at 0 and have no gaps.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut indexed = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        let Some(idx) = name
            .strip_prefix("frame_")
            .and_then(|s| s.strip_suffix(".ppm"))
            .filter(|s| s.len() >= 5 && s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse::<usize>().ok())
        else {
            continue;
        };
        indexed.push((idx, entry.path()));
    }
    indexed.sort();
    for (expect, (idx, path)) in indexed.iter().enumerate() {
        if *idx != expect {
            return Err(Error::MalformedHeader(format!(
                "frame sequence in {} has a gap: expected {}, found {}",
                dir.display(),
                frame_file_name(expect),
                path.display()
            )));
        }
    }
    if indexed.is_empty() {
        return Err(Error::EmptyInput("no frame_%05d.ppm files in frames directory"));
    }
    Ok(indexed.into_iter().map(|(_, p)| p).collect())
}

pub fn read_frames(dir: &Path) -> Result<Vec<ImageBuffer>> {
    list_frames(dir)?.iter().map(|p| read_image_p6(p)).collect()
}

pub fn write_frames(dir: &Path, frames: &[ImageBuffer]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, f) in frames.iter().enumerate() {
        write_image_p6(&dir.join(frame_file_name(i)), f)?;
    }
    Ok(())
}

/// Prompt tokens stored as a single `1×N_Q` grid of 1-pixel patches.
pub fn prompt_grid(prompt: &PromptEmbedding) -> Result<TokenGrid> {
    let n = prompt.len();
    let geometry = GridGeometry {
        rows: 1,
        cols: n,
        patch_w: 1,
        patch_h: 1,
        frame_w: n,
        frame_h: 1,
    };
    TokenGrid::new(geometry, prompt.dim, prompt.tokens.clone())
}

/// Every token of every frame in the file, in storage order.
pub fn prompt_from_egt(file: &EgtFile) -> Result<PromptEmbedding> {
    let dim = file.header.dim as usize;
    let tokens = file.grids.iter().flat_map(|g| g.as_slice().iter().copied()).collect();
    PromptEmbedding::new(dim, tokens)
}

pub fn read_prompt_egt(path: &Path) -> Result<PromptEmbedding> {
    prompt_from_egt(&read_egt(path)?)
}

pub fn write_prompt_egt(path: &Path, prompt: &PromptEmbedding) -> Result<()> {
    write_egt(path, &[prompt_grid(prompt)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prompt_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("prompt.egt");
        let prompt = PromptEmbedding::new(2, vec![1.0, -2.0, 0.5, 0.25, 3.0, 4.0]).unwrap();
        write_prompt_egt(&path, &prompt).unwrap();
        let file = read_egt(&path).unwrap();
        assert_eq!(
            (
                file.header.frames,
                file.header.rows,
                file.header.cols,
                file.header.frame_w
            ),
            (1, 1, 3, 3)
        );
        assert_eq!(read_prompt_egt(&path).unwrap(), prompt);
    }

    #[test]
    fn frame_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let frames: Vec<ImageBuffer> = (0..3u8).map(|i| ImageBuffer::filled(4, 3, [i, 2 * i, 3 * i])).collect();
        write_frames(dir.path(), &frames).unwrap();
        std::fs::write(dir.path().join("notes.txt"), b"ignored").unwrap();
        assert_eq!(read_frames(dir.path()).unwrap(), frames);
        assert!(dir.path().join("frame_00002.ppm").exists());

        std::fs::remove_file(dir.path().join("frame_00001.ppm")).unwrap();
        assert!(read_frames(dir.path()).is_err());
    }

    #[test]
    fn missing_or_empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(read_frames(dir.path()), Err(Error::EmptyInput(_))));
        assert!(matches!(read_frames(&dir.path().join("nope")), Err(Error::Io { .. })));
    }
}
