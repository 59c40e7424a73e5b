//! Finite metric spaces: dense distance matrices, validation, Minkowski point
//! clouds, the sup-metric embedding, and l1/l-infinity products.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative tolerance for metric validation.
pub const DEFAULT_TAU_REL: f64 = 1e-9;

/// Default cap on the number of points in a dense matrix.
pub const DEFAULT_MAX_POINTS: usize = 2048;

/// Hard cap on the number of violations collected by a single validation run.
/// Adversarial tables can violate the triangle inequality at Theta(n^3)
/// triples; the report keeps the first `VIOLATION_CAP` in scan order and sets
/// the `truncated` flag.
const VIOLATION_CAP: usize = 100_000;

/// A dense, immutable finite metric space: symmetric nonnegative distances
/// with zero diagonal satisfying the triangle inequality (within the
/// validation tolerance used at construction).
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
    labels: Option<Vec<String>>,
    diameter: f64,
}

impl DistanceMatrix {
    /// Number of points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Distance between points `i` and `j`.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// Row `i` of the distance table, i.e. all distances from point `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    /// Largest entry of the matrix.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Optional point labels, carried verbatim from construction.
    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of point `i`, falling back to the index.
    pub fn label_of(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }

    /// The full table as rows, mostly for round-trips in tests and I/O.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Validated construction with the default tolerance and no labels.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ValidationReport> {
        validate_metric(rows, None, DEFAULT_TAU_REL)
    }

    /// The same space with every distance multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> DistanceMatrix {
        assert!(c > 0.0, "scale factor must be positive");
        let d: Vec<f64> = self.d.iter().map(|&x| x * c).collect();
        let diameter = self.diameter * c;
        DistanceMatrix {
            n: self.n,
            d,
            labels: self.labels.clone(),
            diameter,
        }
    }

    /// The subspace on the given points, in the given order.
    pub fn restriction(&self, keep: &[usize]) -> DistanceMatrix {
        let m = keep.len();
        let mut d = vec![0.0; m * m];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                d[a * m + b] = self.dist(i, j);
            }
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| keep.iter().map(|&i| l[i].clone()).collect());
        DistanceMatrix::from_parts(m, d, labels)
    }

    /// Internal constructor for tables that are symmetric with zero diagonal
    /// by construction (generators, products, point clouds).
    pub(crate) fn from_parts(n: usize, d: Vec<f64>, labels: Option<Vec<String>>) -> Self {
        debug_assert_eq!(d.len(), n * n);
        let diameter = d.iter().cloned().fold(0.0_f64, f64::max);
        DistanceMatrix {
            n,
            d,
            labels,
            diameter,
        }
    }
}

/// A single violated invariant found during validation.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricViolation {
    /// Row `row` has `len` entries where `expected` were required.
    NonSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    NonFinite {
        i: usize,
        j: usize,
    },
    Negative {
        i: usize,
        j: usize,
        value: f64,
    },
    NonzeroDiagonal {
        i: usize,
        value: f64,
    },
    Asymmetric {
        i: usize,
        j: usize,
        delta: f64,
    },
    /// d(i,j) exceeds d(i,k) + d(k,j) by `defect`.
    TriangleDefect {
        i: usize,
        j: usize,
        k: usize,
        defect: f64,
    },
    /// Distinct points at distance zero (rejected unless merging is requested).
    DuplicatePoints {
        i: usize,
        j: usize,
    },
}

/// Everything that went wrong with a candidate table.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<MetricViolation>,
    /// Violations found before any cap kicked in; a lower bound on the true
    /// count whenever `truncated` is set.
    pub total: u64,
    pub truncated: bool,
}

impl ValidationReport {
    fn push(&mut self, v: MetricViolation) {
        self.total += 1;
        if self.violations.len() < VIOLATION_CAP {
            self.violations.push(v);
        } else {
            self.truncated = true;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} metric violation(s)", self.total)?;
        if let Some(first) = self.violations.first() {
            write!(f, ", first: {first:?}")?;
        }
        Ok(())
    }
}

/// Checks every metric invariant on a raw square table and returns the
/// validated matrix, or the full list of violations.
///
/// Tolerances are relative to the largest entry: diagonal and asymmetry
/// defects at most `tau_rel * max` are clamped (diagonal to zero, asymmetric
/// pairs to their average), and triangle defects up to the same bound are
/// accepted as-is. Distinct points at distance zero are rejected; use
/// [`validate_pseudometric`] to merge them instead.
pub fn validate_metric(
    table: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
    tau_rel: f64,
) -> Result<DistanceMatrix, ValidationReport> {
    run_validation(table, labels, tau_rel, false).map(|(m, _)| m)
}

/// Like [`validate_metric`] but merges duplicate points (distance exactly
/// zero) instead of rejecting them. Returns the quotient map from original
/// indices to indices of the merged space.
pub fn validate_pseudometric(
    table: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
    tau_rel: f64,
) -> Result<(DistanceMatrix, Vec<usize>), ValidationReport> {
    run_validation(table, labels, tau_rel, true)
}

/// Accepts a table on the caller's word that the triangle inequality holds:
/// runs only the O(n^2) checks (squareness, finiteness, nonnegativity,
/// symmetry, zero diagonal). Distinct points at distance zero pass through
/// here; downstream scans treat the triples they touch as degenerate. For
/// pipelines that construct distances from coordinates or generators, where
/// the full scan would be wasted work.
pub fn trusted_metric(
    table: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
    tau_rel: f64,
) -> Result<DistanceMatrix, ValidationReport> {
    let mut report = ValidationReport::default();
    let n = table.len();
    for (row, r) in table.iter().enumerate() {
        if r.len() != n {
            report.push(MetricViolation::NonSquare {
                row,
                len: r.len(),
                expected: n,
            });
        }
    }
    if !report.is_empty() {
        return Err(report);
    }
    for (i, r) in table.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            if !v.is_finite() {
                report.push(MetricViolation::NonFinite { i, j });
            } else if v < 0.0 {
                report.push(MetricViolation::Negative { i, j, value: v });
            }
        }
    }
    if !report.is_empty() {
        return Err(report);
    }
    let max_entry = table
        .iter()
        .flat_map(|r| r.iter().cloned())
        .fold(0.0_f64, f64::max);
    let tol = tau_rel * max_entry;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = table[i][j];
        }
    }
    for i in 0..n {
        let v = d[i * n + i];
        if v != 0.0 {
            if v.abs() <= tol {
                d[i * n + i] = 0.0;
            } else {
                report.push(MetricViolation::NonzeroDiagonal { i, value: v });
            }
        }
        for j in (i + 1)..n {
            let a = d[i * n + j];
            let b = d[j * n + i];
            if a != b {
                let delta = (a - b).abs();
                if delta <= tol {
                    let avg = 0.5 * (a + b);
                    d[i * n + j] = avg;
                    d[j * n + i] = avg;
                } else {
                    report.push(MetricViolation::Asymmetric { i, j, delta });
                }
            }
        }
    }
    if !report.is_empty() {
        return Err(report);
    }
    Ok(DistanceMatrix::from_parts(n, d, labels))
}

fn run_validation(
    table: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
    tau_rel: f64,
    merge_duplicates: bool,
) -> Result<(DistanceMatrix, Vec<usize>), ValidationReport> {
    let mut report = ValidationReport::default();
    let n = table.len();

    for (row, r) in table.iter().enumerate() {
        if r.len() != n {
            report.push(MetricViolation::NonSquare {
                row,
                len: r.len(),
                expected: n,
            });
        }
    }
    if !report.is_empty() {
        return Err(report);
    }

    for (i, r) in table.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            if !v.is_finite() {
                report.push(MetricViolation::NonFinite { i, j });
            } else if v < 0.0 {
                report.push(MetricViolation::Negative { i, j, value: v });
            }
        }
    }
    if !report.is_empty() {
        return Err(report);
    }

    let max_entry = table
        .iter()
        .flat_map(|r| r.iter().cloned())
        .fold(0.0_f64, f64::max);
    let tol = tau_rel * max_entry;

    // Clamp tolerable diagonal and asymmetry noise; flag anything larger.
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = table[i][j];
        }
    }
    for i in 0..n {
        let v = d[i * n + i];
        if v != 0.0 {
            if v.abs() <= tol {
                d[i * n + i] = 0.0;
            } else {
                report.push(MetricViolation::NonzeroDiagonal { i, value: v });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let a = d[i * n + j];
            let b = d[j * n + i];
            if a != b {
                let delta = (a - b).abs();
                if delta <= tol {
                    let avg = 0.5 * (a + b);
                    d[i * n + j] = avg;
                    d[j * n + i] = avg;
                } else {
                    report.push(MetricViolation::Asymmetric { i, j, delta });
                }
            }
        }
    }
    if !report.is_empty() {
        return Err(report);
    }

    // Triangle inequality over all ordered triples; the table is symmetric
    // now, so i < j with every k covers all distinct cases. Rows scan in
    // parallel; per-row violation lists are flattened in row order so the
    // report is independent of the worker count.
    {
        use rayon::prelude::*;
        let d_ref = &d;
        let per_row: Vec<Vec<MetricViolation>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut local = Vec::new();
                for j in (i + 1)..n {
                    let dij = d_ref[i * n + j];
                    for k in 0..n {
                        if k == i || k == j {
                            continue;
                        }
                        let defect = dij - (d_ref[i * n + k] + d_ref[k * n + j]);
                        if defect > tol {
                            local.push(MetricViolation::TriangleDefect { i, j, k, defect });
                            if local.len() >= VIOLATION_CAP {
                                return local;
                            }
                        }
                    }
                }
                local
            })
            .collect();
        for local in per_row {
            if local.len() >= VIOLATION_CAP {
                report.truncated = true;
            }
            for v in local {
                report.push(v);
            }
        }
    }

    // Duplicate points: zero distance off the diagonal.
    let mut quotient: Vec<usize> = (0..n).collect();
    let mut duplicates = false;
    for i in 0..n {
        for j in (i + 1)..n {
            if d[i * n + j] == 0.0 {
                duplicates = true;
                if merge_duplicates {
                    // Union toward the smallest index.
                    let root = find_root(&mut quotient, i);
                    let other = find_root(&mut quotient, j);
                    let (lo, hi) = if root < other {
                        (root, other)
                    } else {
                        (other, root)
                    };
                    quotient[hi] = lo;
                } else {
                    report.push(MetricViolation::DuplicatePoints { i, j });
                }
            }
        }
    }
    if !report.is_empty() {
        return Err(report);
    }

    if merge_duplicates && duplicates {
        // Flatten the union-find and reindex representatives.
        for i in 0..n {
            find_root(&mut quotient, i);
        }
        let mut reps: Vec<usize> = quotient.clone();
        reps.sort_unstable();
        reps.dedup();
        let mut map = vec![0usize; n];
        for (new_idx, &rep) in reps.iter().enumerate() {
            map[rep] = new_idx;
        }
        let cls: Vec<usize> = quotient.iter().map(|&r| map[r]).collect();
        let m = reps.len();
        let mut dq = vec![0.0; m * m];
        for (a, &i) in reps.iter().enumerate() {
            for (b, &j) in reps.iter().enumerate() {
                dq[a * m + b] = d[i * n + j];
            }
        }
        let labels_q = labels
            .as_ref()
            .map(|l| reps.iter().map(|&i| l[i].clone()).collect());
        return Ok((DistanceMatrix::from_parts(m, dq, labels_q), cls));
    }

    Ok((DistanceMatrix::from_parts(n, d, labels), quotient))
}

fn find_root(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Metric exponent of a Minkowski distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricExponent {
    One,
    Two,
    Infinity,
    /// Any other exponent `p >= 1`.
    Other(f64),
}

impl MetricExponent {
    pub fn from_value(p: f64) -> Result<Self, MetricError> {
        if p.is_infinite() && p > 0.0 {
            Ok(MetricExponent::Infinity)
        } else if p == 1.0 {
            Ok(MetricExponent::One)
        } else if p == 2.0 {
            Ok(MetricExponent::Two)
        } else if p.is_finite() && p >= 1.0 {
            Ok(MetricExponent::Other(p))
        } else {
            Err(MetricError::BadExponent(p))
        }
    }

    pub fn as_value(self) -> f64 {
        match self {
            MetricExponent::One => 1.0,
            MetricExponent::Two => 2.0,
            MetricExponent::Infinity => f64::INFINITY,
            MetricExponent::Other(p) => p,
        }
    }
}

impl std::str::FromStr for MetricExponent {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "infinity" | "oo" => Ok(MetricExponent::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| MetricError::BadExponent(f64::NAN))?;
                MetricExponent::from_value(p)
            }
        }
    }
}

impl std::fmt::Display for MetricExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricExponent::Infinity => write!(f, "inf"),
            other => write!(f, "{}", other.as_value()),
        }
    }
}

impl Serialize for MetricExponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MetricExponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => MetricExponent::from_value(p).map_err(D::Error::custom),
            Raw::Str(s) => s.parse().map_err(D::Error::custom),
        }
    }
}

/// A finite set of points in `R^dim` together with a metric exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    n: usize,
    dim: usize,
    coords: Vec<f64>,
    p: MetricExponent,
}

impl PointCloud {
    pub fn new(rows: Vec<Vec<f64>>, p: MetricExponent) -> Result<Self, MetricError> {
        let n = rows.len();
        let dim = rows.first().map_or(0, |r| r.len());
        let mut coords = Vec::with_capacity(n * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(MetricError::RaggedRows {
                    row: i,
                    got: r.len(),
                    expected: dim,
                });
            }
            for (j, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(MetricError::NonFiniteCoordinate { i, j });
                }
                coords.push(v);
            }
        }
        Ok(PointCloud { n, dim, coords, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> MetricExponent {
        self.p
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Distance between points `i` and `j` under the cloud's exponent.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        minkowski(self.point(i), self.point(j), self.p)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.point(i).to_vec()).collect()
    }
}

fn minkowski(a: &[f64], b: &[f64], p: MetricExponent) -> f64 {
    match p {
        MetricExponent::One => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        MetricExponent::Two => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        MetricExponent::Infinity => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max),
        MetricExponent::Other(p) => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p),
    }
}

/// Pairwise distance matrix of a point cloud under its metric exponent.
pub fn lp_distance_matrix(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.n;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = cloud.distance(i, j);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    DistanceMatrix::from_parts(n, d, None)
}

/// Embeds the space into `(R^n, d_inf)` by `x -> d(x, .) - d(base, .)`.
/// The sup-distance matrix of the output reproduces the input.
pub fn kuratowski_embed(d: &DistanceMatrix, base: usize) -> Result<PointCloud, MetricError> {
    let n = d.n();
    if base >= n {
        return Err(MetricError::BaseOutOfRange { base, n });
    }
    let base_row = d.row(base).to_vec();
    let mut coords = Vec::with_capacity(n * n);
    for i in 0..n {
        for (j, &b) in base_row.iter().enumerate() {
            coords.push(d.dist(i, j) - b);
        }
    }
    Ok(PointCloud {
        n,
        dim: n,
        coords,
        p: MetricExponent::Infinity,
    })
}

fn product_labels(a: &DistanceMatrix, b: &DistanceMatrix) -> Option<Vec<String>> {
    if a.labels().is_none() && b.labels().is_none() {
        return None;
    }
    let mut out = Vec::with_capacity(a.n() * b.n());
    for i in 0..a.n() {
        for j in 0..b.n() {
            out.push(format!("({},{})", a.label_of(i), b.label_of(j)));
        }
    }
    Some(out)
}

fn product_with(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    max_points: usize,
    combine: impl Fn(f64, f64) -> f64,
) -> Result<DistanceMatrix, MetricError> {
    let size = a
        .n()
        .checked_mul(b.n())
        .ok_or(MetricError::ProductTooLarge {
            size: usize::MAX,
            cap: max_points,
        })?;
    if size > max_points {
        return Err(MetricError::ProductTooLarge {
            size,
            cap: max_points,
        });
    }
    let (na, nb) = (a.n(), b.n());
    let mut d = vec![0.0; size * size];
    for i in 0..na {
        for j in 0..nb {
            let row = i * nb + j;
            for k in 0..na {
                for l in 0..nb {
                    d[row * size + k * nb + l] = combine(a.dist(i, k), b.dist(j, l));
                }
            }
        }
    }
    Ok(DistanceMatrix::from_parts(size, d, product_labels(a, b)))
}

/// The l1 product: points are index pairs, distances add coordinatewise.
pub fn product_l1(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    max_points: usize,
) -> Result<DistanceMatrix, MetricError> {
    product_with(a, b, max_points, |x, y| x + y)
}

/// The l-infinity product: as [`product_l1`] with max in place of sum.
pub fn product_linf(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    max_points: usize,
) -> Result<DistanceMatrix, MetricError> {
    product_with(a, b, max_points, f64::max)
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MetricError {
    #[error("base point {base} out of range for {n} points")]
    BaseOutOfRange { base: usize, n: usize },
    #[error("product would have {size} points, exceeding the cap of {cap}")]
    ProductTooLarge { size: usize, cap: usize },
    #[error("coordinate ({i},{j}) is not finite")]
    NonFiniteCoordinate { i: usize, j: usize },
    #[error("row {row} has {got} coordinates, expected {expected}")]
    RaggedRows {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("metric exponent must be >= 1, got {0}")]
    BadExponent(f64),
}
