//! Wall-clock scaling harness for the token-level stages.
//!
//! Redundancy filtering is timed on two `1×N` grids related by a translation
//! (alignment plus filtering, fixed `d`). MMR is timed on an `n`-token random
//! pool with fixed `k` and window.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Homography;
use crate::mmr::{mmr_select, MmrConfig, TokenPool};
use crate::parf::{align_token_grid, parf_filter, ParfConfig};
use crate::rng::Prng;
use crate::tokens::{GridGeometry, TokenGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub dim: usize,
    /// MMR selection count, held fixed across sizes.
    pub k: usize,
    pub window: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![2000, 4000, 8000],
            repetitions: 5,
            seed: 0,
            dim: 64,
            k: 64,
            window: 10,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidConfig("sizes list is empty".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be >= 1".into()));
        }
        if self.dim == 0 || self.window == 0 || self.k == 0 {
            return Err(Error::InvalidConfig("dim, k and window must be >= 1".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < self.k) {
            return Err(Error::InvalidConfig(format!("size {n} is smaller than k = {}", self.k)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Parf,
    Mmr,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Parf => "parf",
            Stage::Mmr => "mmr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub stage: Stage,
    pub size: usize,
    pub samples_ms: Vec<f64>,
    pub median_ms: f64,
}

pub fn median(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Two `1×n` grids whose second frame is the first shifted by 3.5 patches.
pub fn parf_fixture(n: usize, dim: usize, seed: u64) -> Result<(TokenGrid, TokenGrid, Homography)> {
    let mut rng = Prng::new(seed);
    let g = GridGeometry {
        rows: 1,
        cols: n,
        patch_w: 16,
        patch_h: 16,
        frame_w: 16 * n,
        frame_h: 16,
    };
    let mut grid = || TokenGrid::new(g, dim, (0..n * dim).map(|_| rng.normal()).collect());
    Ok((grid()?, grid()?, Homography::translation(56.0, 0.0)))
}

pub fn mmr_fixture(n: usize, dim: usize, seed: u64) -> Result<(TokenPool, Vec<f64>)> {
    let mut rng = Prng::new(seed);
    let tokens = (0..n * dim).map(|_| rng.normal()).collect();
    let rewards = (0..n).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
    Ok((TokenPool::from_rows(dim, tokens)?, rewards))
}

fn time_ms<T>(f: impl FnOnce() -> Result<T>) -> Result<f64> {
    let start = Instant::now();
    std::hint::black_box(f()?);
    Ok(start.elapsed().as_secs_f64() * 1e3)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let parf_cfg = ParfConfig::default();
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let (prev, cur, h) = parf_fixture(n, cfg.dim, cfg.seed)?;
        let samples = (0..cfg.repetitions)
            .map(|_| {
                time_ms(|| {
                    let amap = align_token_grid(&h, &prev, &cur)?;
                    parf_filter(&prev, &cur, &amap, &parf_cfg)
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(BenchRow {
            stage: Stage::Parf,
            size: n,
            median_ms: median(&samples),
            samples_ms: samples,
        });

        let (pool, rewards) = mmr_fixture(n, cfg.dim, cfg.seed)?;
        let mmr = MmrConfig {
            lambda: 0.5,
            window: cfg.window,
            k: cfg.k,
        };
        let samples = (0..cfg.repetitions)
            .map(|_| time_ms(|| mmr_select(&pool, &rewards, &mmr)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(BenchRow {
            stage: Stage::Mmr,
            size: n,
            median_ms: median(&samples),
            samples_ms: samples,
        });
    }
    Ok(rows)
}

/// Plain-text table: one line per stage and size.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = String::from("stage  size      median_ms  samples_ms\n");
    for r in rows {
        let samples: Vec<String> = r.samples_ms.iter().map(|s| format!("{s:.3}")).collect();
        out.push_str(&format!(
            "{:<6} {:<9} {:<10.3} {}\n",
            r.stage.name(),
            r.size,
            r.median_ms,
            samples.join(",")
        ));
    }
    out
}
