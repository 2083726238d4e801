//! Subcommand implementations.

use std::io::Write;
use std::path::Path;

use tokenprune_core::bench::{format_table, run_bench, BenchConfig};
use tokenprune_core::io::{
    frame_file_name, read_egt, read_frames, read_prompt_egt, write_egt, write_frames, write_prompt_egt,
};
use tokenprune_core::report::{to_json_bytes, InputEcho, KeyframeDocument};
use tokenprune_core::visualize::{alignment_panel, token_overlay, OverlayStyle};
use tokenprune_core::{
    io, prune_video, select_keyframes, synth_scene, Error, PipelineConfig, Result, ResultDocument, SynthConfig,
};

use crate::args::{BenchArgs, KeyframesArgs, PruneArgs, SynthArgs, VisualizeArgs, VisualizeMode};

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => write_file(path, bytes),
        None => std::io::stdout().write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        frames: a.frames,
        width: a.size.0,
        height: a.size.1,
        patch: a.patch,
        dim: a.dim,
        motion: a.motion.parse()?,
        octaves: a.octaves,
        noise: a.noise,
        redundancy: a.redundancy,
        canvas_scale: a.canvas_scale,
        prompt_tokens: a.prompt_tokens,
    };
    let scene = synth_scene(a.seed.seed, &cfg)?;
    create_dir(&a.out_dir)?;
    write_frames(&a.out_dir, &scene.frames)?;
    write_egt(&a.out_dir.join("tokens.egt"), &scene.grids)?;
    write_prompt_egt(&a.out_dir.join("prompt.egt"), &scene.prompt)?;
    write_file(
        &a.out_dir.join("ground_truth.json"),
        &to_json_bytes(&scene.ground_truth())?,
    )
}

pub fn keyframes(a: KeyframesArgs) -> Result<()> {
    let cfg = a.features.keyframe_config(a.threshold);
    cfg.validate()?;
    let frames = read_frames(&a.frames_dir)?;
    let report = select_keyframes(&frames, &cfg, a.seed.seed)?;
    let doc = KeyframeDocument::new(display(&a.frames_dir), a.seed.seed, cfg, frames.len(), &report);
    emit(a.out.as_deref(), &to_json_bytes(&doc)?)
}

pub fn prune(a: PruneArgs) -> Result<()> {
    let cfg = PipelineConfig {
        retention_rate: a.r,
        lambda: a.lambda,
        window: a.window,
        sim_threshold: a.sim_threshold,
        keyframe: a.features.keyframe_config(a.overlap_threshold),
        seed: a.seed.seed,
    };
    cfg.validate()?;
    let frames = read_frames(&a.frames_dir)?;
    let tokens = read_egt(&a.egt)?;
    let prompt = read_prompt_egt(&a.prompt_egt)?;
    let result = prune_video(&frames, &tokens.grids, &prompt, &cfg)?;
    let inputs = InputEcho {
        frames_dir: display(&a.frames_dir),
        egt: Some(display(&a.egt)),
        prompt_egt: Some(display(&a.prompt_egt)),
    };
    let doc = ResultDocument::new(&result, &cfg, tokens.header.geometry(), frames.len(), a.n_text, inputs);
    emit(a.out.as_deref(), &doc.to_json()?)
}

pub fn visualize(a: VisualizeArgs) -> Result<()> {
    let style = OverlayStyle {
        tint: a.tint,
        tint_alpha: a.tint_alpha,
        dim: a.dim,
        grid_lines: a.grid_lines,
    };
    style.validate()?;
    let doc = ResultDocument::from_json(&std::fs::read(&a.result).map_err(|e| Error::io(&a.result, e))?)?;
    let frames = read_frames(&a.frames_dir)?;
    let frame = |i: usize| {
        frames.get(i).ok_or_else(|| {
            Error::Inconsistent(format!(
                "result references frame {i} but {} holds {} frames",
                a.frames_dir.display(),
                frames.len()
            ))
        })
    };
    create_dir(&a.out_dir)?;
    match a.mode {
        VisualizeMode::Tokens => {
            let n = doc.grid.n_tokens();
            for entry in &doc.frames {
                let image = frame(entry.frame)?;
                let mut retained = vec![false; n];
                for s in doc.final_selection.iter().filter(|s| s.frame == entry.frame) {
                    let flag = retained.get_mut(s.token).ok_or_else(|| {
                        Error::Inconsistent(format!(
                            "token {} of frame {} is outside the {n}-token grid",
                            s.token, s.frame
                        ))
                    })?;
                    *flag = true;
                }
                let out = token_overlay(image, &doc.grid, &retained, &style)?;
                io::write_image_p6(&a.out_dir.join(format!("tokens_{:05}.ppm", entry.frame)), &out)?;
            }
        }
        VisualizeMode::Alignment => {
            for entry in &doc.homographies {
                let (prev, cur) = (frame(entry.from)?, frame(entry.to)?);
                let Some(h) = &entry.h else {
                    eprintln!(
                        "skipping {} -> {}: no homography",
                        frame_file_name(entry.from),
                        frame_file_name(entry.to)
                    );
                    continue;
                };
                let out = alignment_panel(cur, prev, h)?;
                io::write_image_p6(&a.out_dir.join(format!("align_{:05}.ppm", entry.to)), &out)?;
            }
        }
    }
    Ok(())
}

fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|_| Error::InvalidConfig(format!("size '{p}' is not a non-negative integer")))
        })
        .collect()
}

pub fn bench(a: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        sizes: parse_sizes(&a.sizes)?,
        repetitions: a.repetitions,
        seed: a.seed.seed,
        dim: a.dim,
        k: a.k,
        window: a.window,
    };
    let rows = run_bench(&cfg)?;
    emit(None, format_table(&rows).as_bytes())
}
