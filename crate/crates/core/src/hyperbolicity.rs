//! Four-point hyperbolicity: the worst gap between the largest and
//! second-largest of the three pair-sum matchings over quadruples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::metric::DistanceMatrix;

/// Default quadruple-scan threshold: `C(80,4)` is about 1.6M quadruples,
/// still well under a second.
pub const DEFAULT_QUAD_EXHAUSTIVE_THRESHOLD: usize = 80;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum HyperbolicityError {
    #[error("diameter is zero; the normalized delta is undefined")]
    ZeroDiameter,
}

/// Plan for the quadruple scan.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaConfig {
    pub exhaustive_threshold: usize,
    pub sample_size: usize,
    pub seed: u64,
    /// Number of worst quadruples to retain alongside the maximum.
    pub top_k: usize,
}

impl Default for DeltaConfig {
    fn default() -> Self {
        DeltaConfig {
            exhaustive_threshold: DEFAULT_QUAD_EXHAUSTIVE_THRESHOLD,
            sample_size: 2000,
            seed: 0,
            top_k: 0,
        }
    }
}

/// One quadruple with its pair-sum defect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadrupleDefect {
    pub indices: [usize; 4],
    pub defect: f64,
}

/// Outcome of a quadruple scan. `witness` is `None` only when fewer than four
/// points exist.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaReport {
    pub delta: f64,
    pub witness: Option<[usize; 4]>,
    pub quadruples_checked: u64,
    pub exhaustive: bool,
    /// The `top_k` worst quadruples in descending defect order.
    pub top: Vec<QuadrupleDefect>,
}

/// Pair-sum defect of one quadruple: largest minus second-largest of
/// `d(1,2)+d(3,4)`, `d(1,3)+d(2,4)`, `d(1,4)+d(2,3)`. Symmetric under all
/// permutations of the four points.
pub fn quadruple_defect(d: &DistanceMatrix, q: [usize; 4]) -> f64 {
    let [i, j, k, l] = q;
    let mut sums = [
        d.dist(i, j) + d.dist(k, l),
        d.dist(i, k) + d.dist(j, l),
        d.dist(i, l) + d.dist(j, k),
    ];
    // Select the middle by comparison: the arithmetic shortcut
    // (sum - max - min) picks up round-off and can dip below zero when the
    // two largest sums tie.
    sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sums[2] - sums[1]
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

fn unrank_quadruple(n: u64, mut rank: u64) -> [usize; 4] {
    let mut out = [0usize; 4];
    let mut next = 0u64;
    let mut slot = 0;
    while slot < 4 {
        let with_next = binomial(n - next - 1, 3 - slot as u64);
        if rank < with_next {
            out[slot] = next as usize;
            slot += 1;
        } else {
            rank -= with_next;
        }
        next += 1;
    }
    out
}

fn merge_top(acc: &mut Vec<QuadrupleDefect>, item: QuadrupleDefect, k: usize) {
    if k == 0 {
        return;
    }
    let pos = acc
        .iter()
        .position(|q| item.defect > q.defect)
        .unwrap_or(acc.len());
    if pos < k {
        acc.insert(pos, item);
        acc.truncate(k);
    }
}

/// Maximum pair-sum defect over quadruples: exhaustive below the threshold,
/// a seeded uniform sample above. Spaces with fewer than four points report
/// zero. Deterministic for a fixed seed, independent of the worker count.
pub fn four_point_delta(d: &DistanceMatrix, cfg: &DeltaConfig) -> DeltaReport {
    let n = d.n();
    if n < 4 {
        return DeltaReport {
            delta: 0.0,
            witness: None,
            quadruples_checked: 0,
            exhaustive: true,
            top: Vec::new(),
        };
    }

    let exhaustive = n <= cfg.exhaustive_threshold;
    // Per-slice bests computed in parallel, merged sequentially in slice
    // order so ties resolve to the lexicographically first witness.
    let locals: Vec<(f64, [usize; 4], u64, Vec<QuadrupleDefect>)> = if exhaustive {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut best = f64::NEG_INFINITY;
                let mut wit = [0usize; 4];
                let mut count = 0u64;
                let mut top = Vec::new();
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        for l in (k + 1)..n {
                            let q = [i, j, k, l];
                            let v = quadruple_defect(d, q);
                            count += 1;
                            if v > best {
                                best = v;
                                wit = q;
                            }
                            merge_top(
                                &mut top,
                                QuadrupleDefect {
                                    indices: q,
                                    defect: v,
                                },
                                cfg.top_k,
                            );
                        }
                    }
                }
                (best, wit, count, top)
            })
            .collect()
    } else {
        let total = binomial(n as u64, 4);
        let amount = (cfg.sample_size as u64).min(total) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut picked = std::collections::HashSet::with_capacity(amount);
        let mut ranks = Vec::with_capacity(amount);
        while ranks.len() < amount {
            let r = rng.random_range(0..total);
            if picked.insert(r) {
                ranks.push(r);
            }
        }
        ranks.sort_unstable();
        let quads: Vec<[usize; 4]> = ranks
            .into_iter()
            .map(|r| unrank_quadruple(n as u64, r))
            .collect();
        quads
            .par_iter()
            .map(|&q| {
                let v = quadruple_defect(d, q);
                (
                    v,
                    q,
                    1u64,
                    vec![QuadrupleDefect {
                        indices: q,
                        defect: v,
                    }],
                )
            })
            .collect()
    };

    let mut delta = f64::NEG_INFINITY;
    let mut witness = None;
    let mut checked = 0u64;
    let mut top = Vec::new();
    for (best, wit, count, local_top) in locals {
        checked += count;
        if count > 0 && best > delta {
            delta = best;
            witness = Some(wit);
        }
        for item in local_top {
            merge_top(&mut top, item, cfg.top_k);
        }
    }
    DeltaReport {
        delta: if checked == 0 { 0.0 } else { delta },
        witness,
        quadruples_checked: checked,
        exhaustive,
        top,
    }
}

/// Scale-free variant: delta divided by the diameter. Lies in `[0, 1)`.
pub fn delta_normalized(d: &DistanceMatrix, cfg: &DeltaConfig) -> Result<f64, HyperbolicityError> {
    if d.diameter() <= 0.0 {
        return Err(HyperbolicityError::ZeroDiameter);
    }
    Ok(four_point_delta(d, cfg).delta / d.diameter())
}
