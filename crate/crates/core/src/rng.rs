//! Seeded pseudo-random source.
//!
//! Backed by ChaCha8 seeded through `SeedableRng::seed_from_u64`, whose output
//! is specified bit-for-bit and does not depend on platform or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Prng {
    inner: ChaCha8Rng,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Derives an independent stream, e.g. one per frame or per RANSAC call.
    pub fn fork(&mut self, salt: u64) -> Prng {
        let s = self.next_u64() ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Prng::new(s)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Standard normal deviate (Box–Muller).
    pub fn normal(&mut self) -> f64 {
        loop {
            let u = self.next_f64();
            if u > 0.0 {
                let v = self.next_f64();
                return (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
            }
        }
    }

    /// `k` distinct indices from `0..n`, by partial Fisher–Yates.
    pub fn choose_k(&mut self, n: usize, k: usize) -> Result<Vec<usize>> {
        if k > n {
            return Err(Error::InvalidConfig(format!(
                "cannot choose {k} distinct indices from {n}"
            )));
        }
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        Ok(pool)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Prng::new(42);
        let mut b = Prng::new(42);
        for _ in 0..100 {
            assert_eq!(a.choose_k(50, 5).unwrap(), b.choose_k(50, 5).unwrap());
            assert_eq!(a.next_f64().to_bits(), b.next_f64().to_bits());
        }
    }

    #[test]
    fn choose_all_is_permutation() {
        let mut r = Prng::new(3);
        let mut v = r.choose_k(4, 4).unwrap();
        v.sort_unstable();
        assert_eq!(v, vec![0, 1, 2, 3]);
    }

    #[test]
    fn choose_too_many_fails() {
        assert!(Prng::new(0).choose_k(3, 4).is_err());
    }

    #[test]
    fn f64_in_unit_interval() {
        let mut r = Prng::new(9);
        for _ in 0..10_000 {
            let x = r.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn choose_k_is_uniform() {
        // 10^4 draws of 4 from 1000: each index expected 40 times.
        let (n, k, draws) = (1000usize, 4usize, 10_000usize);
        let mut r = Prng::new(2024);
        let mut counts = vec![0u32; n];
        for _ in 0..draws {
            let s = r.choose_k(n, k).unwrap();
            let mut d = s.clone();
            d.sort_unstable();
            d.dedup();
            assert_eq!(d.len(), k);
            for i in s {
                counts[i] += 1;
            }
        }
        let p = k as f64 / n as f64;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            assert!((c as f64 - mean).abs() <= 5.0 * sigma, "index {i} drawn {c} times");
        }
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2) / mean).sum();
        // 999 degrees of freedom: mean 999, sd ~44.7
        assert!((chi2 - 999.0).abs() < 5.0 * 44.7, "chi2 = {chi2}");
    }
}
