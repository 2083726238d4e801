//! Greedy maximal marginal relevance over the tokens that survive redundancy
//! filtering.
//!
//! The marginal score of a candidate is
//! `λ·reward − (1−λ)·max sim(candidate, recent)`, where `recent` holds the
//! last `window` selections. Argmax ties go to the lowest candidate index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cosine_sim, cosine_with_norms, norm, Embedding};

pub const DEFAULT_LAMBDA: f64 = 0.5;
pub const DEFAULT_WINDOW: usize = 10;

/// Candidate tokens with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenPool {
    dim: usize,
    tokens: Vec<f64>,
    /// `(frame index, token index within that frame)`.
    origins: Vec<(usize, usize)>,
}

impl TokenPool {
    pub fn new(dim: usize, tokens: Vec<f64>, origins: Vec<(usize, usize)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be >= 1".into()));
        }
        if origins.is_empty() {
            return Err(Error::EmptyInput("token pool"));
        }
        if tokens.len() != origins.len() * dim {
            return Err(Error::DimensionMismatch {
                what: "pool scalars vs tokens*d",
                left: tokens.len(),
                right: origins.len() * dim,
            });
        }
        let mut seen = origins.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("duplicate token origin in pool".into()));
        }
        Ok(Self { dim, tokens, origins })
    }

    /// Pool with synthetic origins `(0, i)`.
    pub fn from_rows(dim: usize, tokens: Vec<f64>) -> Result<Self> {
        let n = tokens.len().checked_div(dim).unwrap_or(0);
        Self::new(dim, tokens, (0..n).map(|i| (0, i)).collect())
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn token(&self, i: usize) -> &[f64] {
        &self.tokens[i * self.dim..(i + 1) * self.dim]
    }

    pub fn origins(&self) -> &[(usize, usize)] {
        &self.origins
    }
}

/// Prompt tokens in the visual embedding space.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptEmbedding {
    pub dim: usize,
    pub tokens: Vec<f64>,
}

impl PromptEmbedding {
    pub fn new(dim: usize, tokens: Vec<f64>) -> Result<Self> {
        if dim == 0 || !tokens.len().is_multiple_of(dim) {
            return Err(Error::InvalidConfig(format!(
                "prompt of {} scalars is not a whole number of {dim}-d tokens",
                tokens.len()
            )));
        }
        Ok(Self { dim, tokens })
    }

    pub fn len(&self) -> usize {
        self.tokens.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmrConfig {
    pub lambda: f64,
    pub window: usize,
    pub k: usize,
}

impl MmrConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidConfig(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be >= 1".into()));
        }
        check_k(self.k, n)
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidConfig("selection count k must be >= 1".into()));
    }
    if k > n {
        return Err(Error::InvalidConfig(format!(
            "selection count k = {k} exceeds pool size {n}"
        )));
    }
    Ok(())
}

fn check_rewards(rewards: &[f64], n: usize) -> Result<()> {
    if rewards.len() != n {
        return Err(Error::DimensionMismatch {
            what: "rewards vs pool size",
            left: rewards.len(),
            right: n,
        });
    }
    if rewards.iter().any(|r| !r.is_finite()) {
        return Err(Error::Degenerate("non-finite reward".into()));
    }
    Ok(())
}

/// Mean of the prompt tokens.
pub fn prompt_centroid(q: &PromptEmbedding) -> Result<Embedding> {
    if q.is_empty() {
        return Err(Error::EmptyInput("prompt has no tokens"));
    }
    let n = q.len() as f64;
    let mut mean = vec![0.0; q.dim];
    for tok in q.tokens.chunks_exact(q.dim) {
        for (m, v) in mean.iter_mut().zip(tok) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    Embedding::new(mean)
}

/// Cosine similarity of each pool token to the prompt centroid.
pub fn relevance_scores(pool: &TokenPool, q_avg: &Embedding) -> Result<Vec<f64>> {
    if q_avg.dim() != pool.dim {
        return Err(Error::DimensionMismatch {
            what: "prompt dimension vs visual token dimension",
            left: q_avg.dim(),
            right: pool.dim,
        });
    }
    (0..pool.len())
        .map(|i| cosine_sim(pool.token(i), q_avg.as_slice()))
        .collect()
}

fn argmax_lowest(values: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Windowed greedy selection; returns pool indices in selection order.
///
/// Each candidate keeps a ring of its similarities to the last `window`
/// selections, so one step costs `O(n·(d + window))`.
pub fn mmr_select(pool: &TokenPool, rewards: &[f64], cfg: &MmrConfig) -> Result<Vec<usize>> {
    let n = pool.len();
    cfg.validate(n)?;
    check_rewards(rewards, n)?;
    let (lambda, w) = (cfg.lambda, cfg.window);

    let norms: Vec<f64> = (0..n).map(|i| norm(pool.token(i))).collect();
    let mut remaining = vec![true; n];
    let mut ring = vec![f64::NEG_INFINITY; n * w];
    let mut selected = Vec::with_capacity(cfg.k);

    let first = argmax_lowest(rewards.iter().copied().enumerate()).expect("pool is non-empty");
    selected.push(first);
    remaining[first] = false;

    while selected.len() < cfg.k {
        let step = selected.len() - 1;
        let newest = *selected.last().unwrap();
        let slot = step % w;
        let filled = (step + 1).min(w);
        let newest_tok = pool.token(newest);
        for i in (0..n).filter(|&i| remaining[i]) {
            ring[i * w + slot] = cosine_with_norms(pool.token(i), newest_tok, norms[i], norms[newest]);
        }
        let next = argmax_lowest((0..n).filter(|&i| remaining[i]).map(|i| {
            let recent = &ring[i * w..i * w + w];
            let max_sim = recent[..filled].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (i, lambda * rewards[i] - (1.0 - lambda) * max_sim)
        }))
        .expect("k <= n leaves a candidate");
        selected.push(next);
        remaining[next] = false;
    }
    Ok(selected)
}

/// Unwindowed greedy selection, straight from the textbook loop. Quadratic in
/// the selection size; used to cross-check [`mmr_select`].
pub fn mmr_select_reference(pool: &TokenPool, rewards: &[f64], lambda: f64, k: usize) -> Result<Vec<usize>> {
    let n = pool.len();
    check_k(k, n)?;
    check_rewards(rewards, n)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidConfig(format!("lambda {lambda} outside [0, 1]")));
    }
    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut remaining: Vec<usize> = (0..n).collect();

    let mut best = remaining[0];
    for &i in &remaining {
        if rewards[i] > rewards[best] {
            best = i;
        }
    }
    selected.push(best);
    remaining.retain(|&i| i != best);

    for _ in 1..k {
        let mut best: Option<(usize, f64)> = None;
        for &i in &remaining {
            let mut max_sim = f64::NEG_INFINITY;
            for &j in &selected {
                max_sim = max_sim.max(cosine_sim(pool.token(i), pool.token(j))?);
            }
            let mr = lambda * rewards[i] - (1.0 - lambda) * max_sim;
            if best.is_none_or(|(_, b)| mr > b) {
                best = Some((i, mr));
            }
        }
        let (pick, _) = best.expect("k <= n leaves a candidate");
        selected.push(pick);
        remaining.retain(|&i| i != pick);
    }
    Ok(selected)
}
