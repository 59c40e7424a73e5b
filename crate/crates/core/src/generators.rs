//! Seeded constructors for metric spaces with known curvature behavior:
//! random weighted trees, stars, paths, cycles, lp grids and Euclidean
//! samples. Identical specs produce bit-identical output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{lp_distance_matrix, DistanceMatrix, MetricExponent, PointCloud};

/// Denominator used for dyadic edge weights (`k / 2^10`), which keep tree
/// distances exact in f64 so that zero-defect assertions need no tolerance.
pub const DYADIC_DENOMINATOR: f64 = 1024.0;

fn default_weight_min() -> f64 {
    0.5
}

fn default_weight_max() -> f64 {
    1.5
}

fn default_edge_weight() -> f64 {
    1.0
}

/// A reproducible description of a generated space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    /// Shortest-path metric of a uniformly random labeled tree.
    WeightedTree {
        nodes: usize,
        seed: u64,
        #[serde(default = "default_weight_min")]
        weight_min: f64,
        #[serde(default = "default_weight_max")]
        weight_max: f64,
        /// Draw weights as multiples of 1/1024 for exact arithmetic.
        #[serde(default)]
        dyadic: bool,
    },
    /// Center plus `leaves` pendant vertices with random edge weights.
    Star {
        leaves: usize,
        seed: u64,
        #[serde(default = "default_weight_min")]
        weight_min: f64,
        #[serde(default = "default_weight_max")]
        weight_max: f64,
    },
    /// Path on `nodes` vertices with a uniform edge weight.
    Path {
        nodes: usize,
        #[serde(default = "default_edge_weight")]
        edge_weight: f64,
    },
    /// Arc-length metric on equally spaced points of a circle.
    Cycle { nodes: usize, circumference: f64 },
    /// As `Cycle`, parameterized by radius instead of circumference.
    CircleGeodesic { nodes: usize, radius: f64 },
    /// Integer lattice `side^dim` scaled by `spacing` under the exponent `p`.
    LpGrid {
        side: usize,
        dim: usize,
        spacing: f64,
        p: MetricExponent,
    },
    /// Uniform i.i.d. points in `[0, box_size]^dim` under the Euclidean metric.
    EuclideanSample {
        count: usize,
        dim: usize,
        seed: u64,
        box_size: f64,
    },
}

/// Output of a generator: either a bare matrix or a point cloud that still
/// remembers its coordinates.
#[derive(Clone, Debug)]
pub enum Generated {
    Matrix(DistanceMatrix),
    Cloud(PointCloud),
}

impl Generated {
    pub fn into_matrix(self) -> DistanceMatrix {
        match self {
            Generated::Matrix(m) => m,
            Generated::Cloud(c) => lp_distance_matrix(&c),
        }
    }

    pub fn as_cloud(&self) -> Option<&PointCloud> {
        match self {
            Generated::Cloud(c) => Some(c),
            Generated::Matrix(_) => None,
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("generator needs at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("weight range [{min}, {max}] is empty or not positive")]
    EmptyWeightRange { min: f64, max: f64 },
    #[error("generated space would have {size} points, exceeding the cap of {cap}")]
    TooManyPoints { size: usize, cap: usize },
    #[error("parameter {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("grid dimension must be 1, 2 or 3, got {0}")]
    BadGridDim(usize),
}

/// Runs a spec, enforcing the point cap.
pub fn generate(spec: &GeneratorSpec, max_points: usize) -> Result<Generated, GeneratorError> {
    match *spec {
        GeneratorSpec::WeightedTree {
            nodes,
            seed,
            weight_min,
            weight_max,
            dyadic,
        } => {
            check_cap(nodes, max_points)?;
            gen_weighted_tree(nodes, seed, (weight_min, weight_max), dyadic).map(Generated::Matrix)
        }
        GeneratorSpec::Star {
            leaves,
            seed,
            weight_min,
            weight_max,
        } => {
            check_cap(leaves + 1, max_points)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let weights = draw_weights(leaves, &mut rng, (weight_min, weight_max), false)?;
            Ok(Generated::Matrix(star_metric(&weights)))
        }
        GeneratorSpec::Path { nodes, edge_weight } => {
            check_cap(nodes, max_points)?;
            if nodes == 0 {
                return Err(GeneratorError::TooFewPoints { min: 1, got: 0 });
            }
            if edge_weight <= 0.0 {
                return Err(GeneratorError::NonPositive {
                    name: "edge_weight",
                    value: edge_weight,
                });
            }
            Ok(Generated::Matrix(path_metric(&vec![
                edge_weight;
                nodes - 1
            ])))
        }
        GeneratorSpec::Cycle {
            nodes,
            circumference,
        } => {
            check_cap(nodes, max_points)?;
            gen_cycle(nodes, circumference).map(Generated::Matrix)
        }
        GeneratorSpec::CircleGeodesic { nodes, radius } => {
            check_cap(nodes, max_points)?;
            if radius <= 0.0 {
                return Err(GeneratorError::NonPositive {
                    name: "radius",
                    value: radius,
                });
            }
            gen_cycle(nodes, 2.0 * std::f64::consts::PI * radius).map(Generated::Matrix)
        }
        GeneratorSpec::LpGrid {
            side,
            dim,
            spacing,
            p,
        } => gen_lp_grid(side, dim, spacing, p, max_points).map(Generated::Cloud),
        GeneratorSpec::EuclideanSample {
            count,
            dim,
            seed,
            box_size,
        } => {
            check_cap(count, max_points)?;
            gen_euclidean_sample(count, dim, seed, box_size).map(Generated::Cloud)
        }
    }
}

fn check_cap(size: usize, cap: usize) -> Result<(), GeneratorError> {
    if size > cap {
        Err(GeneratorError::TooManyPoints { size, cap })
    } else {
        Ok(())
    }
}

fn draw_weights(
    count: usize,
    rng: &mut ChaCha8Rng,
    (min, max): (f64, f64),
    dyadic: bool,
) -> Result<Vec<f64>, GeneratorError> {
    if !(min > 0.0 && max >= min && max.is_finite()) {
        return Err(GeneratorError::EmptyWeightRange { min, max });
    }
    if dyadic {
        let lo = (min * DYADIC_DENOMINATOR).ceil() as u64;
        let hi = (max * DYADIC_DENOMINATOR).floor() as u64;
        if lo > hi || lo == 0 {
            return Err(GeneratorError::EmptyWeightRange { min, max });
        }
        Ok((0..count)
            .map(|_| rng.random_range(lo..=hi) as f64 / DYADIC_DENOMINATOR)
            .collect())
    } else {
        Ok((0..count).map(|_| rng.random_range(min..=max)).collect())
    }
}

/// Shortest-path metric of a uniformly random labeled tree on `nodes`
/// vertices (uniform Prüfer sequence) with edge weights drawn from `range`.
pub fn gen_weighted_tree(
    nodes: usize,
    seed: u64,
    range: (f64, f64),
    dyadic: bool,
) -> Result<DistanceMatrix, GeneratorError> {
    if nodes == 0 {
        return Err(GeneratorError::TooFewPoints { min: 1, got: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = random_tree_edges(nodes, &mut rng);
    let weights = draw_weights(edges.len(), &mut rng, range, dyadic)?;
    Ok(tree_metric(nodes, &edges, &weights))
}

/// Uniform labeled tree via Prüfer decoding. Returns `nodes - 1` edges.
fn random_tree_edges(nodes: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    match nodes {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        n => {
            let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
            let mut degree = vec![1usize; n];
            for &v in &seq {
                degree[v] += 1;
            }
            let mut edges = Vec::with_capacity(n - 1);
            // Smallest-leaf-first decoding; a pointer plus a "current leaf"
            // walk keeps it O(n log n)-free and deterministic.
            let mut ptr = 0;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            let mut leaf = ptr;
            for &v in &seq {
                edges.push((leaf, v));
                degree[v] -= 1;
                if degree[v] == 1 && v < ptr {
                    leaf = v;
                } else {
                    ptr += 1;
                    while degree[ptr] != 1 {
                        ptr += 1;
                    }
                    leaf = ptr;
                }
            }
            edges.push((leaf, n - 1));
            edges
        }
    }
}

/// Shortest-path metric of a weighted tree given by its edge list.
pub fn tree_metric(nodes: usize, edges: &[(usize, usize)], weights: &[f64]) -> DistanceMatrix {
    assert_eq!(edges.len(), weights.len());
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes];
    for (&(u, v), &w) in edges.iter().zip(weights) {
        adj[u].push((v, w));
        adj[v].push((u, w));
    }
    for nbrs in &mut adj {
        nbrs.sort_by_key(|&(v, _)| v);
    }
    let mut d = vec![0.0; nodes * nodes];
    let mut stack = Vec::with_capacity(nodes);
    let mut seen = vec![false; nodes];
    for root in 0..nodes {
        seen.iter_mut().for_each(|s| *s = false);
        seen[root] = true;
        stack.push((root, 0.0));
        while let Some((u, du)) = stack.pop() {
            d[root * nodes + u] = du;
            for &(v, w) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, du + w));
                }
            }
        }
    }
    DistanceMatrix::from_parts(nodes, d, None)
}

/// Star tree: point 0 is the center, point `i + 1` hangs at `weights[i]`.
pub fn star_metric(weights: &[f64]) -> DistanceMatrix {
    let edges: Vec<(usize, usize)> = (0..weights.len()).map(|i| (0, i + 1)).collect();
    tree_metric(weights.len() + 1, &edges, weights)
}

/// Path metric: consecutive points joined by the given edge weights.
pub fn path_metric(weights: &[f64]) -> DistanceMatrix {
    let edges: Vec<(usize, usize)> = (0..weights.len()).map(|i| (i, i + 1)).collect();
    tree_metric(weights.len() + 1, &edges, weights)
}

/// Arc-length metric on `nodes` equally spaced points of a circle.
pub fn gen_cycle(nodes: usize, circumference: f64) -> Result<DistanceMatrix, GeneratorError> {
    if nodes < 3 {
        return Err(GeneratorError::TooFewPoints { min: 3, got: nodes });
    }
    if circumference <= 0.0 {
        return Err(GeneratorError::NonPositive {
            name: "circumference",
            value: circumference,
        });
    }
    let step = circumference / nodes as f64;
    let mut d = vec![0.0; nodes * nodes];
    for i in 0..nodes {
        for j in (i + 1)..nodes {
            let k = (j - i).min(nodes - (j - i));
            let v = k as f64 * step;
            d[i * nodes + j] = v;
            d[j * nodes + i] = v;
        }
    }
    Ok(DistanceMatrix::from_parts(nodes, d, None))
}

/// Integer lattice of `side^dim` points scaled by `spacing`, as a cloud with
/// metric exponent `p`. Coordinates vary fastest in the last axis.
pub fn gen_lp_grid(
    side: usize,
    dim: usize,
    spacing: f64,
    p: MetricExponent,
    max_points: usize,
) -> Result<PointCloud, GeneratorError> {
    if side < 2 {
        return Err(GeneratorError::TooFewPoints { min: 2, got: side });
    }
    if !(1..=3).contains(&dim) {
        return Err(GeneratorError::BadGridDim(dim));
    }
    if spacing <= 0.0 {
        return Err(GeneratorError::NonPositive {
            name: "spacing",
            value: spacing,
        });
    }
    let size = side.pow(dim as u32);
    check_cap(size, max_points)?;
    let mut rows = Vec::with_capacity(size);
    let mut idx = vec![0usize; dim];
    loop {
        rows.push(idx.iter().map(|&i| i as f64 * spacing).collect());
        let mut axis = dim;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < side {
                break;
            }
            idx[axis] = 0;
        }
        if idx.iter().all(|&i| i == 0) {
            break;
        }
    }
    Ok(PointCloud::new(rows, p).expect("lattice coordinates are finite"))
}

/// Uniform i.i.d. sample in `[0, box_size]^dim` under the Euclidean metric.
pub fn gen_euclidean_sample(
    count: usize,
    dim: usize,
    seed: u64,
    box_size: f64,
) -> Result<PointCloud, GeneratorError> {
    if count == 0 {
        return Err(GeneratorError::TooFewPoints { min: 1, got: 0 });
    }
    if box_size <= 0.0 {
        return Err(GeneratorError::NonPositive {
            name: "box_size",
            value: box_size,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(0.0..box_size)).collect())
        .collect();
    Ok(PointCloud::new(rows, MetricExponent::Two).expect("sampled coordinates are finite"))
}
