//! The per-triple curvature machinery: Gromov products, the discrete rho
//! functional over ball families, tripod and quadruple defects, the scan that
//! compares every triple against its planar counterpart, and a lower-bound
//! estimate of the expansion constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::euclid::{build_comparison, rho_bar, MinimaxError};
use crate::metric::DistanceMatrix;

/// Default triple count above which scans fall back to seeded sampling.
pub const DEFAULT_EXHAUSTIVE_THRESHOLD: usize = 60;
/// Default relative threshold below which a Gromov radius counts as zero.
pub const DEFAULT_TAU_DEG: f64 = 1e-12;
/// Default relative tolerance for the nonpositive-verdict comparison.
pub const DEFAULT_TAU_CMP: f64 = 1e-9;

/// The unique radii with `r_i + r_j = d(x_i, x_j)` for each pair of a triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GromovRadii {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl GromovRadii {
    pub fn as_array(&self) -> [f64; 3] {
        [self.r1, self.r2, self.r3]
    }

    pub fn min(&self) -> f64 {
        self.r1.min(self.r2).min(self.r3)
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("indices must be distinct, got {0:?}")]
    DuplicateIndices(Vec<usize>),
    #[error("index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("points {i} and {j} coincide (zero distance)")]
    CoincidentPoints { i: usize, j: usize },
    #[error("ball system is empty")]
    EmptySystem,
    #[error("ball radius for center {center} must be positive, got {radius}")]
    NonPositiveRadius { center: usize, radius: f64 },
    #[error("balls {i} and {j} violate pairwise feasibility: r_i + r_j = {sum} < d = {dist}")]
    InfeasiblePair {
        i: usize,
        j: usize,
        sum: f64,
        dist: f64,
    },
    #[error("need at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error(
        "exhaustive enumeration of {triples} triples exceeds the {cap} limit; \
         lower the exhaustive threshold so sampling kicks in"
    )]
    ExhaustiveTooLarge { triples: u64, cap: u64 },
    #[error("planar comparison failed: {0}")]
    Comparison(String),
}

/// Most triples an exhaustive enumeration may materialize. Per-triple
/// records run ~100 bytes, so this bounds the allocation near a gigabyte.
pub const MAX_EXHAUSTIVE_TRIPLES: u64 = 10_000_000;

fn check_indices(d: &DistanceMatrix, idx: &[usize]) -> Result<(), CurvatureError> {
    for &i in idx {
        if i >= d.n() {
            return Err(CurvatureError::IndexOutOfRange { index: i, n: d.n() });
        }
    }
    for a in 0..idx.len() {
        for b in (a + 1)..idx.len() {
            if idx[a] == idx[b] {
                return Err(CurvatureError::DuplicateIndices(idx.to_vec()));
            }
        }
    }
    Ok(())
}

/// Gromov products of the triple `(i, j, k)`:
/// `r1 = (d(i,j) + d(i,k) - d(j,k)) / 2` and cyclically.
pub fn gromov_products(
    d: &DistanceMatrix,
    i: usize,
    j: usize,
    k: usize,
) -> Result<GromovRadii, CurvatureError> {
    check_indices(d, &[i, j, k])?;
    let dij = d.dist(i, j);
    let dik = d.dist(i, k);
    let djk = d.dist(j, k);
    Ok(GromovRadii {
        r1: 0.5 * (dij + dik - djk),
        r2: 0.5 * (dij + djk - dik),
        r3: 0.5 * (dik + djk - dij),
    })
}

/// A finite family of balls `(center index, radius)` with pairwise-feasible
/// radii: `r_i + r_j >= d(x_i, x_j)` up to the construction tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallSystem {
    members: Vec<(usize, f64)>,
}

impl BallSystem {
    pub fn new(
        d: &DistanceMatrix,
        members: Vec<(usize, f64)>,
        tau_rel: f64,
    ) -> Result<Self, CurvatureError> {
        if members.is_empty() {
            return Err(CurvatureError::EmptySystem);
        }
        for &(c, r) in &members {
            if c >= d.n() {
                return Err(CurvatureError::IndexOutOfRange { index: c, n: d.n() });
            }
            if !r.is_finite() || r <= 0.0 {
                return Err(CurvatureError::NonPositiveRadius {
                    center: c,
                    radius: r,
                });
            }
        }
        let slack = tau_rel * d.diameter();
        for a in 0..members.len() {
            for b in (a + 1)..members.len() {
                let (ca, ra) = members[a];
                let (cb, rb) = members[b];
                let dist = d.dist(ca, cb);
                if ra + rb < dist - slack {
                    return Err(CurvatureError::InfeasiblePair {
                        i: ca,
                        j: cb,
                        sum: ra + rb,
                        dist,
                    });
                }
            }
        }
        Ok(BallSystem { members })
    }

    pub(crate) fn new_unchecked(members: Vec<(usize, f64)>) -> Self {
        BallSystem { members }
    }

    pub fn members(&self) -> &[(usize, f64)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The same system with every radius multiplied by `factor`.
    pub fn inflated(&self, factor: f64) -> BallSystem {
        BallSystem {
            members: self.members.iter().map(|&(c, r)| (c, r * factor)).collect(),
        }
    }
}

/// `min over points x of max_i d(x_i, x) / r_i`, with the smallest-index
/// witness. The minimal uniform inflation making all balls share a point of
/// the space.
pub fn rho_family(d: &DistanceMatrix, system: &BallSystem) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut witness = 0;
    for x in 0..d.n() {
        let mut v: f64 = 0.0;
        for &(c, r) in &system.members {
            v = v.max(d.dist(c, x) / r);
        }
        if v < best {
            best = v;
            witness = x;
        }
    }
    (best, witness)
}

/// Outcome of the per-triple rho evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TripleRho {
    Value {
        rho: f64,
        witness: usize,
    },
    /// Some Gromov radius vanished (colinear triple); rho is not evaluated.
    Degenerate,
}

/// Discrete rho of a triple under its Gromov radii. Triples with a Gromov
/// radius at or below `1e-12 * diameter` report the degenerate branch rather
/// than dividing by a vanishing radius.
pub fn rho_discrete(
    d: &DistanceMatrix,
    i: usize,
    j: usize,
    k: usize,
) -> Result<TripleRho, CurvatureError> {
    let radii = gromov_products(d, i, j, k)?;
    Ok(rho_discrete_with(
        d,
        [i, j, k],
        &radii,
        DEFAULT_TAU_DEG * d.diameter(),
    ))
}

fn rho_discrete_with(
    d: &DistanceMatrix,
    idx: [usize; 3],
    radii: &GromovRadii,
    tau_deg_abs: f64,
) -> TripleRho {
    if radii.min() <= tau_deg_abs {
        return TripleRho::Degenerate;
    }
    let system = BallSystem::new_unchecked(vec![
        (idx[0], radii.r1),
        (idx[1], radii.r2),
        (idx[2], radii.r3),
    ]);
    let (rho, witness) = rho_family(d, &system);
    TripleRho::Value { rho, witness }
}

/// Rho of a pair under the canonical half-distance radii. Equals 1 exactly
/// when the space contains an exact midpoint.
pub fn rho_pair(d: &DistanceMatrix, i: usize, j: usize) -> Result<(f64, usize), CurvatureError> {
    check_indices(d, &[i, j])?;
    let dij = d.dist(i, j);
    if dij == 0.0 {
        return Err(CurvatureError::CoincidentPoints { i, j });
    }
    let r = 0.5 * dij;
    let system = BallSystem::new_unchecked(vec![(i, r), (j, r)]);
    Ok(rho_family(d, &system))
}

/// Smallest worst-case median defect of the triple:
/// `min over m of max over pairs |d(x_i,m) + d(x_j,m) - d(x_i,x_j)|`.
/// Zero exactly when the space contains a median. Defined for degenerate
/// triples as well.
pub fn tripod_defect(
    d: &DistanceMatrix,
    i: usize,
    j: usize,
    k: usize,
) -> Result<(f64, usize), CurvatureError> {
    check_indices(d, &[i, j, k])?;
    let dij = d.dist(i, j);
    let dik = d.dist(i, k);
    let djk = d.dist(j, k);
    let mut best = f64::INFINITY;
    let mut witness = 0;
    for m in 0..d.n() {
        let a = (d.dist(i, m) + d.dist(j, m) - dij).abs();
        let b = (d.dist(i, m) + d.dist(k, m) - dik).abs();
        let c = (d.dist(j, m) + d.dist(k, m) - djk).abs();
        let v = a.max(b).max(c);
        if v < best {
            best = v;
            witness = m;
        }
    }
    Ok((best, witness))
}

/// Signed defect of the labeled quadruple `(x1, x2, x3, x4)`:
/// `d^2(x1,x4) + d^2(x2,x3) - d^2(x1,x3) - d^2(x2,x4) - 2 d(x1,x2) d(x3,x4)`.
/// Nonpositive for every labeling is the quadruple comparison condition
/// satisfied by nonpositively curved geodesic spaces.
pub fn quad_inequality_defect(d: &DistanceMatrix, q: [usize; 4]) -> Result<f64, CurvatureError> {
    check_indices(d, &q)?;
    let [x1, x2, x3, x4] = q;
    let d14 = d.dist(x1, x4);
    let d23 = d.dist(x2, x3);
    let d13 = d.dist(x1, x3);
    let d24 = d.dist(x2, x4);
    let d12 = d.dist(x1, x2);
    let d34 = d.dist(x3, x4);
    Ok(d14 * d14 + d23 * d23 - d13 * d13 - d24 * d24 - 2.0 * d12 * d34)
}

/// Verdict of a triple against its planar comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Nonpositive,
    /// `rho > rho_bar`: the comparison inequality fails. Label chosen for
    /// reporting symmetry; the source definition only names the nonpositive
    /// case.
    Positive,
    Degenerate,
}

/// Everything the scan records about one triple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TripleReport {
    pub indices: [usize; 3],
    pub radii: GromovRadii,
    pub rho: Option<f64>,
    pub witness: Option<usize>,
    pub rho_bar: Option<f64>,
    pub verdict: Verdict,
    pub tripod_defect: f64,
    pub tripod_witness: usize,
}

/// Aggregate outcome of a triple scan. Gap statistics are over nondegenerate
/// triples; `fraction_nonpositive` is `None` when every triple was
/// degenerate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSummary {
    pub triples_evaluated: u64,
    pub total_triples: u64,
    pub exhaustive: bool,
    /// Set when a requested sample exceeded the number of existing triples
    /// and was clamped.
    pub sample_clamped: bool,
    pub degenerate: u64,
    pub nonpositive: u64,
    pub positive: u64,
    pub fraction_nonpositive: Option<f64>,
    pub max_rho_gap: Option<f64>,
    pub mean_rho_gap: Option<f64>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub max_tripod_defect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TripleScan {
    pub reports: Vec<TripleReport>,
    pub summary: ScanSummary,
}

/// Scan plan: exhaustive below the threshold, seeded uniform sampling above.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub exhaustive_threshold: usize,
    pub sample_size: usize,
    pub seed: u64,
    /// Degeneracy threshold relative to the diameter.
    pub tau_deg: f64,
    /// Verdict tolerance relative to `max(1, rho_bar)`.
    pub tau_cmp: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            exhaustive_threshold: DEFAULT_EXHAUSTIVE_THRESHOLD,
            sample_size: 2000,
            seed: 0,
            tau_deg: DEFAULT_TAU_DEG,
            tau_cmp: DEFAULT_TAU_CMP,
        }
    }
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

/// Lexicographic unranking of a k-combination of `0..n`.
fn unrank_combination(n: u64, k: u64, mut rank: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(k as usize);
    let mut next = 0u64;
    let mut remaining = k;
    while remaining > 0 {
        let with_next = binomial(n - next - 1, remaining - 1);
        if rank < with_next {
            out.push(next as usize);
            next += 1;
            remaining -= 1;
        } else {
            rank -= with_next;
            next += 1;
        }
    }
    out
}

/// Seeded sample of `amount` distinct combination ranks out of `total`,
/// returned sorted so downstream iteration order is deterministic.
fn sample_ranks(total: u64, amount: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = std::collections::HashSet::with_capacity(amount);
    let mut out = Vec::with_capacity(amount);
    while out.len() < amount {
        let r = rng.random_range(0..total);
        if picked.insert(r) {
            out.push(r);
        }
    }
    out.sort_unstable();
    out
}

fn triple_list(
    n: usize,
    cfg: &ScanConfig,
) -> Result<(Vec<[usize; 3]>, bool, bool), CurvatureError> {
    let total = binomial(n as u64, 3);
    if n <= cfg.exhaustive_threshold {
        if total > MAX_EXHAUSTIVE_TRIPLES {
            return Err(CurvatureError::ExhaustiveTooLarge {
                triples: total,
                cap: MAX_EXHAUSTIVE_TRIPLES,
            });
        }
        let mut out = Vec::with_capacity(total as usize);
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    out.push([i, j, k]);
                }
            }
        }
        Ok((out, true, false))
    } else {
        let clamped = cfg.sample_size as u64 > total;
        let amount = (cfg.sample_size as u64).min(total) as usize;
        let list = sample_ranks(total, amount, cfg.seed)
            .into_iter()
            .map(|r| {
                let c = unrank_combination(n as u64, 3, r);
                [c[0], c[1], c[2]]
            })
            .collect();
        Ok((list, false, clamped))
    }
}

/// Evaluates one triple: radii, discrete rho, planar comparison, verdict and
/// tripod defect.
fn evaluate_triple(
    d: &DistanceMatrix,
    idx: [usize; 3],
    tau_deg_abs: f64,
    tau_cmp: f64,
    tri_tol: f64,
) -> Result<TripleReport, CurvatureError> {
    let [i, j, k] = idx;
    let radii = gromov_products(d, i, j, k)?;
    let (tripod, tripod_witness) = tripod_defect(d, i, j, k)?;
    match rho_discrete_with(d, idx, &radii, tau_deg_abs) {
        TripleRho::Degenerate => Ok(TripleReport {
            indices: idx,
            radii,
            rho: None,
            witness: None,
            rho_bar: None,
            verdict: Verdict::Degenerate,
            tripod_defect: tripod,
            tripod_witness,
        }),
        TripleRho::Value { rho, witness } => {
            let tri = build_comparison(d.dist(i, j), d.dist(i, k), d.dist(j, k), tri_tol)
                .map_err(|e| CurvatureError::Comparison(e.to_string()))?;
            let cmp = rho_bar(&tri, radii.as_array())
                .map_err(|e: MinimaxError| CurvatureError::Comparison(e.to_string()))?;
            let verdict = if rho <= cmp.rho_bar + tau_cmp * cmp.rho_bar.max(1.0) {
                Verdict::Nonpositive
            } else {
                Verdict::Positive
            };
            Ok(TripleReport {
                indices: idx,
                radii,
                rho: Some(rho),
                witness: Some(witness),
                rho_bar: Some(cmp.rho_bar),
                verdict,
                tripod_defect: tripod,
                tripod_witness,
            })
        }
    }
}

/// Scans triples (all of them below the threshold, a seeded sample above)
/// and reports per-triple records plus a summary. Output is a function of
/// the matrix and config alone, independent of the worker count.
pub fn scan_triples(d: &DistanceMatrix, cfg: &ScanConfig) -> Result<TripleScan, CurvatureError> {
    if d.n() < 3 {
        return Err(CurvatureError::TooFewPoints { min: 3, got: d.n() });
    }
    let (triples, exhaustive, sample_clamped) = triple_list(d.n(), cfg)?;
    let tau_deg_abs = cfg.tau_deg * d.diameter();
    let tri_tol = 1e-9 * d.diameter();

    let reports: Result<Vec<TripleReport>, CurvatureError> = triples
        .par_iter()
        .map(|&idx| evaluate_triple(d, idx, tau_deg_abs, cfg.tau_cmp, tri_tol))
        .collect();
    let reports = reports?;

    // Sequential aggregation in index order keeps all floating-point sums
    // independent of the parallel split.
    let mut summary = ScanSummary {
        triples_evaluated: reports.len() as u64,
        total_triples: binomial(d.n() as u64, 3),
        exhaustive,
        sample_clamped,
        degenerate: 0,
        nonpositive: 0,
        positive: 0,
        fraction_nonpositive: None,
        max_rho_gap: None,
        mean_rho_gap: None,
        rho_min: None,
        rho_max: None,
        max_tripod_defect: 0.0,
    };
    let mut gap_sum = 0.0;
    for rep in &reports {
        summary.max_tripod_defect = summary.max_tripod_defect.max(rep.tripod_defect);
        match rep.verdict {
            Verdict::Degenerate => summary.degenerate += 1,
            Verdict::Nonpositive => summary.nonpositive += 1,
            Verdict::Positive => summary.positive += 1,
        }
        if let (Some(rho), Some(rho_bar)) = (rep.rho, rep.rho_bar) {
            let gap = rho - rho_bar;
            gap_sum += gap;
            summary.max_rho_gap = Some(summary.max_rho_gap.map_or(gap, |m: f64| m.max(gap)));
            summary.rho_min = Some(summary.rho_min.map_or(rho, |m: f64| m.min(rho)));
            summary.rho_max = Some(summary.rho_max.map_or(rho, |m: f64| m.max(rho)));
        }
    }
    let nondegenerate = summary.triples_evaluated - summary.degenerate;
    if nondegenerate > 0 {
        summary.fraction_nonpositive = Some(summary.nonpositive as f64 / nondegenerate as f64);
        summary.mean_rho_gap = Some(gap_sum / nondegenerate as f64);
    }
    Ok(TripleScan { reports, summary })
}

/// Configuration for the expansion-constant lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionConfig {
    /// Random ball systems to draw beyond the canonical triples and pairs.
    pub trials: usize,
    /// Largest random system size.
    pub k_max: usize,
    pub seed: u64,
    /// Point count above which canonical triples and pairs are sampled
    /// rather than enumerated.
    pub exhaustive_threshold: usize,
    /// Sample size for triples and for pairs when above the threshold.
    pub sample_size: usize,
    pub tau_deg: f64,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            trials: 200,
            k_max: 6,
            seed: 0,
            exhaustive_threshold: DEFAULT_EXHAUSTIVE_THRESHOLD,
            sample_size: 2000,
            tau_deg: DEFAULT_TAU_DEG,
        }
    }
}

/// A certified lower bound on the expansion constant, with the system that
/// attains it. Never an exact value: the supremum ranges over all radius
/// families, which no finite enumeration exhausts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionEstimate {
    pub lower_bound: f64,
    pub worst_system: Vec<(usize, f64)>,
    pub witness: usize,
    pub systems_evaluated: u64,
    /// Whether the canonical triple and pair families were enumerated
    /// exhaustively.
    pub exhaustive_canonical: bool,
}

/// Radii for a random center set that saturate pair constraints greedily:
/// two sweeps of `r_i = max_j (d(i,j) - r_j)+`, then a repair pass inflating
/// both radii of any still-violated pair equally. Inflation never breaks a
/// satisfied pair, so one pass repairs everything.
fn saturated_radii(d: &DistanceMatrix, centers: &[usize]) -> Vec<f64> {
    let k = centers.len();
    let mut r = vec![0.0_f64; k];
    for _ in 0..2 {
        for a in 0..k {
            let mut need: f64 = 0.0;
            for b in 0..k {
                if a != b {
                    need = need.max(d.dist(centers[a], centers[b]) - r[b]);
                }
            }
            r[a] = need.max(0.0);
        }
    }
    for a in 0..k {
        for b in (a + 1)..k {
            let deficit = d.dist(centers[a], centers[b]) - r[a] - r[b];
            if deficit > 0.0 {
                r[a] += 0.5 * deficit;
                r[b] += 0.5 * deficit;
            }
        }
    }
    // A zero radius here means every other ball already covers this center;
    // any positive value keeps the system feasible.
    let floor = 1e-9 * d.diameter().max(1.0);
    for v in &mut r {
        if *v <= 0.0 {
            *v = floor;
        }
    }
    r
}

/// Lower-bounds the expansion constant by maximizing `rho_family` over the
/// canonical Gromov-radius triples, the half-distance pairs, and `trials`
/// random saturated systems of size at most `k_max`.
pub fn expansion_constant_estimate(
    d: &DistanceMatrix,
    cfg: &ExpansionConfig,
) -> Result<ExpansionEstimate, CurvatureError> {
    let n = d.n();
    if n < 2 {
        return Err(CurvatureError::TooFewPoints { min: 2, got: n });
    }
    let tau_deg_abs = cfg.tau_deg * d.diameter();
    let exhaustive = n <= cfg.exhaustive_threshold;
    if exhaustive && binomial(n as u64, 3) > MAX_EXHAUSTIVE_TRIPLES {
        return Err(CurvatureError::ExhaustiveTooLarge {
            triples: binomial(n as u64, 3),
            cap: MAX_EXHAUSTIVE_TRIPLES,
        });
    }

    let mut systems: Vec<BallSystem> = Vec::new();

    // (a) triples with Gromov radii (nondegenerate only).
    let triples: Vec<[usize; 3]> = if n >= 3 {
        if exhaustive {
            let mut v = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        v.push([i, j, k]);
                    }
                }
            }
            v
        } else {
            let total = binomial(n as u64, 3);
            sample_ranks(
                total,
                (cfg.sample_size as u64).min(total) as usize,
                cfg.seed,
            )
            .into_iter()
            .map(|r| {
                let c = unrank_combination(n as u64, 3, r);
                [c[0], c[1], c[2]]
            })
            .collect()
        }
    } else {
        Vec::new()
    };
    for [i, j, k] in triples {
        let radii = gromov_products(d, i, j, k)?;
        if radii.min() > tau_deg_abs {
            systems.push(BallSystem::new_unchecked(vec![
                (i, radii.r1),
                (j, radii.r2),
                (k, radii.r3),
            ]));
        }
    }

    // (b) pairs with half-distance radii.
    let pairs: Vec<[usize; 2]> = if exhaustive {
        let mut v = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                v.push([i, j]);
            }
        }
        v
    } else {
        let total = binomial(n as u64, 2);
        sample_ranks(
            total,
            (cfg.sample_size as u64).min(total) as usize,
            cfg.seed.wrapping_add(1),
        )
        .into_iter()
        .map(|r| {
            let c = unrank_combination(n as u64, 2, r);
            [c[0], c[1]]
        })
        .collect()
    };
    for [i, j] in pairs {
        let dij = d.dist(i, j);
        if dij > tau_deg_abs {
            let r = 0.5 * dij;
            systems.push(BallSystem::new_unchecked(vec![(i, r), (j, r)]));
        }
    }

    // (c) random saturated systems.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
    let k_max = cfg.k_max.min(n).max(2);
    for _ in 0..cfg.trials {
        let k = rng.random_range(2..=k_max);
        let centers: Vec<usize> = rand::seq::index::sample(&mut rng, n, k).into_vec();
        let radii = saturated_radii(d, &centers);
        let members: Vec<(usize, f64)> = centers.into_iter().zip(radii).collect();
        systems.push(BallSystem::new_unchecked(members));
    }

    // Evaluate in parallel, reduce sequentially in construction order so the
    // argmax is independent of the worker count.
    let values: Vec<(f64, usize)> = systems.par_iter().map(|s| rho_family(d, s)).collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (idx, &(v, _)) in values.iter().enumerate() {
        if v > best {
            best = v;
            best_idx = idx;
        }
    }
    Ok(ExpansionEstimate {
        lower_bound: best,
        worst_system: systems[best_idx].members().to_vec(),
        witness: values[best_idx].1,
        systems_evaluated: systems.len() as u64,
        exhaustive_canonical: exhaustive,
    })
}
