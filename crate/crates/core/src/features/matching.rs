use super::BinaryDescriptor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Match {
    pub idx_a: usize,
    pub idx_b: usize,
    pub distance: u32,
}

/// Brute-force Hamming matching with Lowe's ratio test.
///
/// A match survives when `nearest < ratio * second_nearest` (a lone candidate
/// in `desc_b` always passes). When several `a` descriptors claim the same
/// `b`, only the closest (then lowest `idx_a`) is kept. Output is sorted by
/// `idx_a`.
pub fn match_ratio(desc_a: &[BinaryDescriptor], desc_b: &[BinaryDescriptor], ratio: f64) -> Vec<Match> {
    if desc_a.is_empty() || desc_b.is_empty() {
        return Vec::new();
    }
    let mut best_for_b: Vec<Option<Match>> = vec![None; desc_b.len()];
    for (ia, da) in desc_a.iter().enumerate() {
        let mut best = (u32::MAX, usize::MAX);
        let mut second = u32::MAX;
        for (ib, db) in desc_b.iter().enumerate() {
            let d = da.hamming(db);
            if d < best.0 {
                second = best.0;
                best = (d, ib);
            } else if d < second {
                second = d;
            }
        }
        let passes = second == u32::MAX || (best.0 as f64) < ratio * second as f64;
        if !passes {
            continue;
        }
        let cand = Match {
            idx_a: ia,
            idx_b: best.1,
            distance: best.0,
        };
        let slot = &mut best_for_b[best.1];
        match slot {
            Some(m) if m.distance <= cand.distance => {}
            _ => *slot = Some(cand),
        }
    }
    let mut out: Vec<Match> = best_for_b.into_iter().flatten().collect();
    out.sort_by_key(|m| m.idx_a);
    out
}
