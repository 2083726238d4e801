//! Acceptance gate. Each criterion runs in sequence (the timing criterion
//! must not share the CPU with the others) and prints one PASS/FAIL line.
//! Expected values are computed here from first principles, never by calling
//! the code under test a second way.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use tokenprune_core::bench::{run_bench, BenchConfig, Stage};
use tokenprune_core::geometry::{dlt_homography, ransac_homography};
use tokenprune_core::io::{
    decode_egt, decode_p6, encode_egt, encode_p6, read_egt, read_image_p6, write_egt, write_image_p6,
};
use tokenprune_core::mmr::mmr_select_reference;
use tokenprune_core::pipeline::prune_keyframes;
use tokenprune_core::report::InputEcho;
use tokenprune_core::{
    align_token_grid, estimate_savings, mmr_select, naive_filter, parf_filter, prune_video, synth_scene,
    Correspondence, Error, GridGeometry, Homography, ImageBuffer, Mat3, MmrConfig, Motion, ParfConfig, PipelineConfig,
    Prng, PromptEmbedding, RansacConfig, ResultDocument, SynthConfig, SynthScene, TokenGrid, TokenPool, Vec2,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type Corruption = (Vec<u8>, fn(&Error) -> bool);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn uniform(rng: &mut Prng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_f64()
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn project(m: &[f64; 9], p: Vec2) -> Vec2 {
    let w = m[6] * p.x + m[7] * p.y + m[8];
    Vec2::new(
        (m[0] * p.x + m[1] * p.y + m[2]) / w,
        (m[3] * p.x + m[4] * p.y + m[5]) / w,
    )
}

// 1. DLT recovery

fn random_homography(rng: &mut Prng) -> [f64; 9] {
    let mut u = |s: f64| uniform(rng, -s, s);
    [
        1.0 + u(0.2),
        u(0.2),
        u(50.0),
        u(0.2),
        1.0 + u(0.2),
        u(50.0),
        u(2e-4),
        u(2e-4),
        1.0,
    ]
}

/// Max entry error after normalizing the truth to unit Frobenius norm and
/// least-squares scaling the estimate onto it.
fn aligned_error(truth: &[f64; 9], est: &[f64; 9]) -> f64 {
    let nt = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    let t: Vec<f64> = truth.iter().map(|v| v / nt).collect();
    let s = t.iter().zip(est).map(|(a, b)| a * b).sum::<f64>() / est.iter().map(|v| v * v).sum::<f64>();
    t.iter().zip(est).map(|(a, b)| (a - s * b).abs()).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let mut rng = Prng::new(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let h = random_homography(&mut rng);
        let corrs: Vec<Correspondence> = (0..8)
            .map(|_| {
                let p = Vec2::new(uniform(&mut rng, 0.0, 640.0), uniform(&mut rng, 0.0, 480.0));
                Correspondence::new(p, project(&h, p))
            })
            .collect();
        let est = dlt_homography(&corrs).map_err(|e| e.to_string())?;
        worst = worst.max(aligned_error(&h, &est.h.0));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(worst < 1e-8, "max entry error {worst:.3e} >= 1e-8");
    ensure!(secs < 5.0, "took {secs:.2} s");
    Ok(format!("500 homographies, max entry error {worst:.2e}, {secs:.3} s"))
}

// 2. RANSAC robustness

fn criterion_2() -> Outcome {
    let mut good_runs = 0;
    for seed in 0..100u64 {
        let mut rng = Prng::new(1000 + seed);
        let h = random_homography(&mut rng);
        let mut corrs = Vec::with_capacity(100);
        for i in 0..100 {
            let p = Vec2::new(uniform(&mut rng, 0.0, 640.0), uniform(&mut rng, 0.0, 480.0));
            let q = if i < 60 {
                let q = project(&h, p);
                Vec2::new(q.x + 0.25 * rng.normal(), q.y + 0.25 * rng.normal())
            } else {
                Vec2::new(uniform(&mut rng, 0.0, 640.0), uniform(&mut rng, 0.0, 480.0))
            };
            corrs.push(Correspondence::new(p, q));
        }
        let Ok(out) = ransac_homography(&corrs, &RansacConfig::default(), seed) else {
            continue;
        };
        let recovered = out.inliers[..60].iter().filter(|&&b| b).count();
        let m = out.homography.h.0;
        let mean_err = corrs[..60].iter().map(|c| project(&m, c.src).dist(c.dst)).sum::<f64>() / 60.0;
        if recovered >= 55 && mean_err < 0.5 {
            good_runs += 1;
        }
    }
    ensure!(good_runs >= 95, "only {good_runs}/100 runs met both bounds");
    Ok(format!(
        "{good_runs}/100 runs with >= 55 true inliers and mean error < 0.5 px"
    ))
}

// 3 and 4. Redundancy filtering against scene ground truth

const PATCH: usize = 16;

/// A coordinate offset that keeps every pulled-back patch centre at least
/// half a pixel from a cell boundary.
fn off_boundary(rng: &mut Prng, lo: f64, hi: f64) -> f64 {
    loop {
        let v = uniform(rng, lo, hi);
        let frac = (v.abs() - 8.0).rem_euclid(PATCH as f64);
        if frac > 0.5 && frac < PATCH as f64 - 0.5 {
            return v;
        }
    }
}

/// Inverse motion applied to a point, written out per motion kind.
fn pull_back(motion: Motion, w: usize, h: usize, p: Vec2) -> Vec2 {
    match motion {
        Motion::Identity => p,
        Motion::Pan { dx, dy } => Vec2::new(p.x - dx, p.y - dy),
        Motion::Rotate { degrees } => {
            let f = w as f64;
            let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
            let (s, c) = (-degrees).to_radians().sin_cos();
            let ray = [(p.x - cx) / f, (p.y - cy) / f, 1.0];
            let r = [c * ray[0] + s * ray[2], ray[1], -s * ray[0] + c * ray[2]];
            Vec2::new(f * r[0] / r[2] + cx, f * r[1] / r[2] + cy)
        }
    }
}

fn oracle_counterparts(cfg: &SynthConfig) -> Vec<Option<usize>> {
    let (rows, cols) = (cfg.height / PATCH, cfg.width / PATCH);
    (0..rows * cols)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            let centre = Vec2::new((c as f64 + 0.5) * PATCH as f64, (r as f64 + 0.5) * PATCH as f64);
            let p = pull_back(cfg.motion, cfg.width, cfg.height, centre);
            let inside = p.x >= 0.0 && p.y >= 0.0 && p.x < cfg.width as f64 && p.y < cfg.height as f64;
            inside.then(|| (p.y / PATCH as f64) as usize * cols + (p.x / PATCH as f64) as usize)
        })
        .collect()
}

fn scene_for(seed: u64, motion: Motion, redundancy: f64) -> Result<SynthScene, String> {
    let cfg = SynthConfig {
        frames: 4,
        width: 192,
        height: 144,
        patch: PATCH,
        dim: 32,
        motion,
        noise: 0.0,
        redundancy,
        ..SynthConfig::default()
    };
    synth_scene(seed, &cfg).map_err(|e| e.to_string())
}

fn pruned(kept: &[usize], n: usize) -> Vec<usize> {
    let kept: BTreeSet<usize> = kept.iter().copied().collect();
    (0..n).filter(|i| !kept.contains(i)).collect()
}

fn criterion_3() -> Outcome {
    let cfg = ParfConfig::default();
    let mut pairs = 0;
    let mut total_pruned = 0;
    for seed in 0..50u64 {
        let mut rng = Prng::new(3000 + seed);
        let motion = if seed % 2 == 0 {
            Motion::Pan {
                dx: off_boundary(&mut rng, -40.0, 40.0),
                dy: off_boundary(&mut rng, -12.0, 12.0),
            }
        } else {
            Motion::Rotate {
                degrees: uniform(&mut rng, -6.0, 6.0),
            }
        };
        let scene = scene_for(seed, motion, uniform(&mut rng, 0.2, 0.8))?;
        let expected_cp = oracle_counterparts(&scene.config);
        for t in 0..scene.grids.len() - 1 {
            let h = scene.homography(t).map_err(|e| e.to_string())?;
            let (prev, cur) = (&scene.grids[t], &scene.grids[t + 1]);
            let amap = align_token_grid(&h, prev, cur).map_err(|e| e.to_string())?;
            ensure!(
                amap.counterparts == expected_cp,
                "seed {seed} ({motion}) pair {t}: alignment differs from the geometric oracle"
            );
            let kept = parf_filter(prev, cur, &amap, &cfg).map_err(|e| e.to_string())?;
            let got = pruned(&kept, cur.len());
            ensure!(
                got == scene.redundant[t],
                "seed {seed} ({motion}) pair {t}: pruned {} tokens, ground truth has {}",
                got.len(),
                scene.redundant[t].len()
            );
            pairs += 1;
            total_pruned += got.len();
        }
    }
    Ok(format!(
        "{pairs} frame pairs over 50 scenes, {total_pruned} pruned tokens all match ground truth"
    ))
}

fn criterion_4() -> Outcome {
    let cfg = ParfConfig::default();
    let (mut parf_total, mut naive_total) = (0, 0);
    for seed in 0..50u64 {
        let mut rng = Prng::new(4000 + seed);
        let width = 192.0;
        let sign = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
        let motion = Motion::Pan {
            dx: sign * off_boundary(&mut rng, 0.25 * width, 0.4 * width),
            dy: off_boundary(&mut rng, -6.0, 6.0),
        };
        let scene = scene_for(seed, motion, 0.5)?;
        let cp = oracle_counterparts(&scene.config);
        let (mut parf_hits, mut naive_hits) = (0, 0);
        for t in 0..scene.grids.len() - 1 {
            let (prev, cur) = (&scene.grids[t], &scene.grids[t + 1]);
            let h = scene.homography(t).map_err(|e| e.to_string())?;
            let amap = align_token_grid(&h, prev, cur).map_err(|e| e.to_string())?;
            let parf = pruned(
                &parf_filter(prev, cur, &amap, &cfg).map_err(|e| e.to_string())?,
                cur.len(),
            );
            let naive = pruned(&naive_filter(prev, cur, &cfg).map_err(|e| e.to_string())?, cur.len());
            if let Some(i) = parf.iter().find(|&&i| cp[i].is_none()) {
                return Err(format!("seed {seed}: token {i} has no counterpart but was pruned"));
            }
            let truth: BTreeSet<usize> = scene.redundant[t].iter().copied().collect();
            parf_hits += parf.iter().filter(|i| truth.contains(i)).count();
            naive_hits += naive.iter().filter(|i| truth.contains(i)).count();
        }
        ensure!(
            parf_hits > naive_hits,
            "seed {seed} ({motion}): aligned pruned {parf_hits} redundant tokens, fixed-position {naive_hits}"
        );
        parf_total += parf_hits;
        naive_total += naive_hits;
    }
    Ok(format!(
        "50/50 scenes; redundant tokens pruned: aligned {parf_total}, fixed-position {naive_total}"
    ))
}

// 5 and 6. MMR

fn random_pool(rng: &mut Prng, n: usize, dim: usize) -> (TokenPool, Vec<f64>) {
    let tokens = (0..n * dim).map(|_| rng.normal()).collect();
    let rewards = (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect();
    (TokenPool::from_rows(dim, tokens).unwrap(), rewards)
}

fn argmax_lowest(scores: &[(usize, f64)]) -> usize {
    let mut best = scores[0];
    for &s in &scores[1..] {
        if s.1 > best.1 {
            best = s;
        }
    }
    best.0
}

/// Re-derives every pick of a windowed trace from the definition.
fn replay(pool: &TokenPool, rewards: &[f64], lambda: f64, window: usize, trace: &[usize]) -> Result<(), String> {
    let n = pool.len();
    let mut remaining: Vec<usize> = (0..n).collect();
    for (step, &pick) in trace.iter().enumerate() {
        let scores: Vec<(usize, f64)> = remaining
            .iter()
            .map(|&i| {
                if step == 0 {
                    return (i, rewards[i]);
                }
                let recent = &trace[step.saturating_sub(window)..step];
                let max_sim = recent
                    .iter()
                    .map(|&j| cos(pool.token(i), pool.token(j)))
                    .fold(f64::NEG_INFINITY, f64::max);
                (i, lambda * rewards[i] - (1.0 - lambda) * max_sim)
            })
            .collect();
        let want = argmax_lowest(&scores);
        if pick != want {
            return Err(format!("step {step}: picked {pick}, definition gives {want}"));
        }
        remaining.retain(|&i| i != pick);
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let mut rng = Prng::new(5);
    for case in 0..100 {
        let n = 10 + rng.below(191);
        let k = 1 + rng.below(10);
        let lambda = rng.next_f64();
        let (pool, rewards) = random_pool(&mut rng, n, 16);
        let cfg = MmrConfig { lambda, window: 10, k };
        let fast = mmr_select(&pool, &rewards, &cfg).map_err(|e| e.to_string())?;
        let slow = mmr_select_reference(&pool, &rewards, lambda, k).map_err(|e| e.to_string())?;
        ensure!(fast == slow, "pool {case} (n = {n}, k = {k}): {fast:?} vs {slow:?}");
    }
    for case in 0..20 {
        let n = 2 + rng.below(79);
        let lambda = rng.next_f64();
        let (pool, rewards) = random_pool(&mut rng, n, 8);
        let cfg = MmrConfig {
            lambda,
            window: 10,
            k: n,
        };
        let trace = mmr_select(&pool, &rewards, &cfg).map_err(|e| e.to_string())?;
        let distinct: BTreeSet<usize> = trace.iter().copied().collect();
        ensure!(distinct.len() == n, "replay pool {case}: trace is not a permutation");
        replay(&pool, &rewards, lambda, 10, &trace).map_err(|e| format!("replay pool {case}: {e}"))?;
    }
    Ok("100 pools equal the unwindowed reference (k <= 10); 20 full traces (k = n) replay".into())
}

fn criterion_6() -> Outcome {
    let mut rng = Prng::new(6);
    for case in 0..100 {
        let n = 20 + rng.below(181);
        let k = 1 + rng.below(n.min(40));
        let (pool, rewards) = random_pool(&mut rng, n, 16);

        let picked: BTreeSet<usize> = mmr_select(
            &pool,
            &rewards,
            &MmrConfig {
                lambda: 1.0,
                window: 10,
                k,
            },
        )
        .map_err(|e| e.to_string())?
        .into_iter()
        .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| rewards[b].total_cmp(&rewards[a]).then(a.cmp(&b)));
        let top: BTreeSet<usize> = order[..k].iter().copied().collect();
        ensure!(
            picked == top,
            "pool {case}: lambda = 1 set differs from the top-{k} rewards"
        );

        let zero = MmrConfig {
            lambda: 0.0,
            window: 10,
            k,
        };
        let base = mmr_select(&pool, &rewards, &zero).map_err(|e| e.to_string())?;
        let best = order[0];
        let mut perturbed: Vec<f64> = rewards.iter().map(|r| r + 0.5 * rng.normal()).collect();
        let top_other = perturbed
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        perturbed[best] = top_other + 1.0;
        let moved = mmr_select(&pool, &perturbed, &zero).map_err(|e| e.to_string())?;
        ensure!(
            base == moved,
            "pool {case}: lambda = 0 picks changed under reward perturbation"
        );
    }
    Ok("100 pools: lambda = 1 is top-k by reward; lambda = 0 ignores rewards after the first pick".into())
}

// 7. End-to-end determinism, containment and budget

fn criterion_7() -> Outcome {
    let mut runs = 0;
    for seed in 0..20u64 {
        let mut rng = Prng::new(7000 + seed);
        let cfg = SynthConfig {
            frames: 8,
            width: 192,
            height: 144,
            dim: 32,
            motion: Motion::Pan {
                dx: uniform(&mut rng, 12.0, 36.0),
                dy: uniform(&mut rng, -4.0, 4.0),
            },
            noise: 0.05,
            ..SynthConfig::default()
        };
        let scene = synth_scene(seed, &cfg).map_err(|e| e.to_string())?;
        let grid = cfg.grid_geometry();
        let n = grid.rows * grid.cols;
        for r in [0.7, 0.5, 0.3] {
            let pcfg = PipelineConfig {
                retention_rate: r,
                seed,
                ..PipelineConfig::default()
            };
            let run = || -> Result<Vec<u8>, String> {
                let result =
                    prune_video(&scene.frames, &scene.grids, &scene.prompt, &pcfg).map_err(|e| e.to_string())?;
                let doc = ResultDocument::new(
                    &result,
                    &pcfg,
                    grid,
                    cfg.frames,
                    0,
                    InputEcho {
                        frames_dir: "frames".into(),
                        egt: None,
                        prompt_egt: None,
                    },
                );
                doc.to_json().map_err(|e| e.to_string())
            };
            let first = run()?;
            ensure!(first == run()?, "seed {seed}, r = {r}: rerun is not byte-identical");
            runs += 1;

            let doc = ResultDocument::from_json(&first).map_err(|e| e.to_string())?;
            let keyframes: BTreeSet<usize> = doc.keyframes.iter().copied().collect();
            let survivors: BTreeSet<(usize, usize)> = doc
                .frames
                .iter()
                .flat_map(|f| f.parf_retained.iter().map(move |&t| (f.frame, t)))
                .collect();
            for &(f, t) in &survivors {
                ensure!(
                    keyframes.contains(&f) && t < n,
                    "seed {seed}: survivor ({f}, {t}) is not a keyframe token"
                );
            }
            let finals: Vec<(usize, usize)> = doc.final_selection.iter().map(|s| (s.frame, s.token)).collect();
            let unique: BTreeSet<(usize, usize)> = finals.iter().copied().collect();
            ensure!(unique.len() == finals.len(), "seed {seed}: duplicate final tokens");
            ensure!(
                unique.is_subset(&survivors),
                "seed {seed}: final selection escapes the survivors"
            );
            let budget = (r * (n * keyframes.len()) as f64).round() as usize;
            let want = budget.min(survivors.len());
            ensure!(
                finals.len() == want,
                "seed {seed}, r = {r}: final count {} but min(round(r N T), post) = {want}",
                finals.len()
            );
        }
    }
    Ok(format!(
        "{runs} runs (20 seeds x r in {{0.7, 0.5, 0.3}}): reruns identical, containment and counts hold"
    ))
}

// 8. Scaling

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let cfg = BenchConfig {
        repetitions: 15,
        ..BenchConfig::default()
    };
    let rows = run_bench(&cfg).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let median = |stage: Stage, size: usize| {
        rows.iter()
            .find(|r| r.stage == stage && r.size == size)
            .map(|r| r.median_ms)
            .unwrap()
    };
    let mut notes = Vec::new();
    for pair in cfg.sizes.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        ensure!(b == 2 * a, "sizes must double");
        let parf = median(Stage::Parf, b) / median(Stage::Parf, a);
        let mmr = median(Stage::Mmr, b) / median(Stage::Mmr, a);
        ensure!(parf <= 2.6, "aligned filtering {a} -> {b}: ratio {parf:.2} > 2.6");
        ensure!(mmr <= 2.5, "MMR {a} -> {b}: ratio {mmr:.2} > 2.5");
        notes.push(format!("{a}->{b}: filter x{parf:.2}, mmr x{mmr:.2}"));
    }
    ensure!(secs < 120.0, "bench took {secs:.1} s");
    Ok(format!("{}; {secs:.2} s total", notes.join(", ")))
}

// 9. Savings

fn criterion_9() -> Outcome {
    let (side, frames, dim) = (14, 20, 8);
    let geometry = GridGeometry {
        rows: side,
        cols: side,
        patch_w: 16,
        patch_h: 16,
        frame_w: side * 16,
        frame_h: side * 16,
    };
    let mut rng = Prng::new(9);
    let grids: Vec<TokenGrid> = (0..frames)
        .map(|_| TokenGrid::new(geometry, dim, (0..side * side * dim).map(|_| rng.normal()).collect()).unwrap())
        .collect();
    let ids: Vec<usize> = (0..frames).collect();
    let prompt = PromptEmbedding::new(dim, (0..4 * dim).map(|_| rng.normal()).collect()).unwrap();
    let cfg = PipelineConfig {
        retention_rate: 0.5,
        ..PipelineConfig::default()
    };
    let stages = prune_keyframes(&grids, &ids, &vec![None; frames - 1], &prompt, &cfg).map_err(|e| e.to_string())?;
    ensure!(stages.stats.original == 3920, "original {}", stages.stats.original);
    ensure!(stages.stats.final_count == 1960, "final {}", stages.stats.final_count);
    let s = estimate_savings(&stages.stats, 100);
    let want = (1960.0 + 100.0) / (3920.0 + 100.0);
    ensure!(
        (s.context_ratio - want).abs() <= 1e-12,
        "context ratio {} vs {want}",
        s.context_ratio
    );
    ensure!(
        (s.attention_ratio - want * want).abs() <= 1e-12,
        "attention ratio {} vs {}",
        s.attention_ratio,
        want * want
    );
    Ok(format!(
        "context ratio {:.6} (2060/4020), attention {:.6}",
        s.context_ratio, s.attention_ratio
    ))
}

// 10. Formats

fn random_egt(rng: &mut Prng) -> Vec<TokenGrid> {
    let (rows, cols) = (1 + rng.below(6), 1 + rng.below(6));
    let (pw, ph) = (1 + rng.below(16), 1 + rng.below(16));
    let dim = 1 + rng.below(12);
    let geometry = GridGeometry {
        rows,
        cols,
        patch_w: pw,
        patch_h: ph,
        frame_w: cols * pw,
        frame_h: rows * ph,
    };
    (0..1 + rng.below(4))
        .map(|_| {
            let values = (0..rows * cols * dim)
                .map(|_| loop {
                    let x = f32::from_bits((rng.next_f64() * u32::MAX as f64) as u32);
                    if x.is_finite() {
                        break x as f64;
                    }
                })
                .collect();
            TokenGrid::new(geometry, dim, values).unwrap()
        })
        .collect()
}

/// Byte layout written out by hand: magic, version, nine counts, payload.
fn egt_bytes_by_hand(grids: &[TokenGrid]) -> Vec<u8> {
    let g = grids[0].geometry;
    let mut out = b"EGTK".to_vec();
    let fields = [
        1,
        grids.len(),
        g.rows * g.cols,
        grids[0].dim,
        g.rows,
        g.cols,
        g.patch_w,
        g.patch_h,
        g.frame_w,
        g.frame_h,
    ];
    for v in fields {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for grid in grids {
        for &v in grid.as_slice() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

fn egt_kind(e: &Error) -> &'static str {
    match e {
        Error::BadMagic { .. } => "bad-magic",
        Error::VersionMismatch { .. } => "version",
        Error::HeaderInvariant { .. } => "header-invariant",
        Error::TruncatedPayload { .. } => "truncated-payload",
        Error::TrailingData { .. } => "trailing-data",
        _ => "other",
    }
}

/// Designated error for replacing header field `k` (0 = T, ... 8 = frame_h)
/// with `new`, given the old value.
fn designated_egt(k: usize, old: u32, new: u32) -> &'static str {
    let payload_field = k == 0 || k == 2;
    match () {
        _ if new == 0 => "header-invariant",
        _ if payload_field && new > old => "truncated-payload",
        _ if payload_field => "trailing-data",
        _ => "header-invariant",
    }
}

fn random_image(rng: &mut Prng) -> ImageBuffer {
    let (w, h) = (1 + rng.below(40), 1 + rng.below(40));
    ImageBuffer::from_raw(w, h, (0..w * h * 3).map(|_| rng.below(256) as u8).collect()).unwrap()
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = Prng::new(10);
    let mut corruptions = 0;
    for case in 0..50 {
        let grids = random_egt(&mut rng);
        let path = dir.path().join(format!("t{case}.egt"));
        write_egt(&path, &grids).map_err(|e| e.to_string())?;
        let on_disk = std::fs::read(&path).map_err(|e| e.to_string())?;
        ensure!(
            on_disk == egt_bytes_by_hand(&grids),
            "tensor {case}: bytes differ from the layout"
        );
        let back = read_egt(&path).map_err(|e| e.to_string())?;
        ensure!(back.grids == grids, "tensor {case}: values changed on round trip");
        ensure!(
            encode_egt(&back.grids).unwrap() == on_disk,
            "tensor {case}: re-encode differs"
        );

        let mut bad = on_disk.clone();
        bad[rng.below(4)] ^= 0x20;
        let err = decode_egt(&bad).unwrap_err();
        ensure!(
            egt_kind(&err) == "bad-magic",
            "tensor {case}: magic corruption gave {err}"
        );
        let mut bad = on_disk.clone();
        bad[4..8].copy_from_slice(&(2 + rng.below(1000) as u32).to_le_bytes());
        let err = decode_egt(&bad).unwrap_err();
        ensure!(
            egt_kind(&err) == "version",
            "tensor {case}: version corruption gave {err}"
        );
        corruptions += 2;

        for k in 0..9 {
            let at = 8 + 4 * k;
            let old = u32::from_le_bytes(on_disk[at..at + 4].try_into().unwrap());
            let candidates = [
                0,
                old + 1,
                old.saturating_sub(1),
                old * 2,
                rng.below(1 << 20) as u32,
                u32::MAX,
            ];
            for new in candidates.into_iter().filter(|&v| v != old) {
                let mut bad = on_disk.clone();
                bad[at..at + 4].copy_from_slice(&new.to_le_bytes());
                let err = match decode_egt(&bad) {
                    Err(e) => e,
                    Ok(_) => return Err(format!("tensor {case}: field {k} {old} -> {new} was accepted")),
                };
                let want = designated_egt(k, old, new);
                ensure!(
                    egt_kind(&err) == want,
                    "tensor {case}: field {k} {old} -> {new} gave {err}, want {want}"
                );
                corruptions += 1;
            }
        }
    }

    for case in 0..50 {
        let img = random_image(&mut rng);
        let path = dir.path().join(format!("i{case}.ppm"));
        write_image_p6(&path, &img).map_err(|e| e.to_string())?;
        let on_disk = std::fs::read(&path).map_err(|e| e.to_string())?;
        let mut by_hand = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
        by_hand.extend_from_slice(img.as_raw());
        ensure!(on_disk == by_hand, "image {case}: bytes differ from the layout");
        ensure!(
            read_image_p6(&path).map_err(|e| e.to_string())? == img,
            "image {case}: pixels changed"
        );
        ensure!(
            encode_p6(&decode_p6(&on_disk).unwrap()) == on_disk,
            "image {case}: re-encode differs"
        );

        let (w, h) = (img.width(), img.height());
        let raster = img.as_raw();
        let with_header = |magic: &str, w: usize, h: usize, maxval: u32| {
            let mut b = format!("{magic}\n{w} {h}\n{maxval}\n").into_bytes();
            b.extend_from_slice(raster);
            b
        };
        let cases: Vec<Corruption> = vec![
            (with_header("P3", w, h, 255), |e| {
                matches!(e, Error::UnsupportedFormat(_))
            }),
            (with_header("P5", w, h, 255), |e| {
                matches!(e, Error::UnsupportedFormat(_))
            }),
            (with_header("Q6", w, h, 255), |e| matches!(e, Error::BadMagic { .. })),
            (with_header("P6", w + 1, h, 255), |e| {
                matches!(e, Error::TruncatedPayload { .. })
            }),
            (with_header("P6", w, h + 1, 255), |e| {
                matches!(e, Error::TruncatedPayload { .. })
            }),
            (with_header("P6", 0, h, 255), |e| matches!(e, Error::MalformedHeader(_))),
            (with_header("P6", w, 0, 255), |e| matches!(e, Error::MalformedHeader(_))),
            (with_header("P6", w, h, 65535), |e| {
                matches!(e, Error::UnsupportedMaxval(65535))
            }),
            (with_header("P6", w, h, 254), |e| {
                matches!(e, Error::UnsupportedMaxval(254))
            }),
        ];
        let mut cases = cases;
        if w > 1 {
            cases.push((with_header("P6", w - 1, h, 255), |e| {
                matches!(e, Error::TrailingData { .. })
            }));
        }
        if h > 1 {
            cases.push((with_header("P6", w, h - 1, 255), |e| {
                matches!(e, Error::TrailingData { .. })
            }));
        }
        for (i, (bytes, designated)) in cases.iter().enumerate() {
            let err = match decode_p6(bytes) {
                Err(e) => e,
                Ok(_) => return Err(format!("image {case}: corruption {i} was accepted")),
            };
            ensure!(designated(&err), "image {case}: corruption {i} gave {err}");
            corruptions += 1;
        }
    }
    Ok(format!("50 tensors and 50 images round-trip bit-exactly; {corruptions} header corruptions rejected with their designated errors"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("homography recovery", criterion_1),
        ("RANSAC robustness", criterion_2),
        ("aligned filtering equals ground truth", criterion_3),
        ("aligned vs fixed-position filtering", criterion_4),
        ("windowed MMR equivalence", criterion_5),
        ("lambda endpoints", criterion_6),
        ("pipeline determinism and containment", criterion_7),
        ("complexity scaling", criterion_8),
        ("savings model", criterion_9),
        ("format round trips", criterion_10),
    ];
    let mut failures = Vec::new();
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2} s]", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2} s]", i + 1);
                failures.push(i + 1);
            }
        }
    }
    assert!(failures.is_empty(), "failing criteria: {failures:?}");
}

#[test]
fn oracle_counterparts_match_scene_for_pans() {
    let scene = scene_for(1, Motion::Pan { dx: 21.0, dy: -3.0 }, 0.5).unwrap();
    assert_eq!(scene.counterparts[0], oracle_counterparts(&scene.config));
    let m = Mat3::translation(21.0, -3.0);
    let h = Homography::from_matrix(m).unwrap();
    assert!(project(&h.h.0, Vec2::new(1.0, 1.0)).dist(Vec2::new(22.0, -2.0)) < 1e-12);
}
