//! Nerve complexes of distance-ball families with witnesses inside the
//! space, Helly-defect enumeration, and mod-2 Betti numbers.
//!
//! A simplex is stored exactly when some point of the space lies in every
//! member ball (up to the construction slack). Witnessed membership is
//! monotone under taking subsets, so the complex is downward closed by
//! construction and can be enumerated by extending stored simplices.

use serde::Serialize;
use thiserror::Error;

use crate::curvature::{gromov_products, BallSystem};
use crate::metric::DistanceMatrix;

/// Default dimension cap: triples and quadruple Helly gaps live in
/// dimensions at most 3.
pub const DEFAULT_DIM_CAP: usize = 3;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum NerveError {
    #[error("ball radius for vertex {vertex} must be positive, got {radius}")]
    NonPositiveRadius { vertex: usize, radius: f64 },
    #[error("center index {index} out of range for {n} points")]
    CenterOutOfRange { index: usize, n: usize },
    #[error("radii count {got} does not match point count {expected}")]
    RadiiCountMismatch { got: usize, expected: usize },
    #[error("dimension cap must be at least 1, got {0}")]
    DimCapTooSmall(usize),
    #[error("requested dimension {dim} exceeds the stored cap {cap}")]
    DimensionBeyondCap { dim: usize, cap: usize },
    #[error("triple {0:?} is degenerate (vanishing Gromov radius)")]
    DegenerateTriple([usize; 3]),
}

/// Dense bitset over point indices.
#[derive(Clone, Debug, PartialEq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn zeros(len: usize) -> Self {
        BitSet {
            words: vec![0; len.div_ceil(64)],
        }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    fn and(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    fn first_set(&self) -> Option<usize> {
        for (w, &word) in self.words.iter().enumerate() {
            if word != 0 {
                return Some(w * 64 + word.trailing_zeros() as usize);
            }
        }
        None
    }
}

/// The nerve of a finite ball family, together with one witness point per
/// stored simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct NerveComplex {
    balls: Vec<(usize, f64)>,
    /// `simplices[d]` lists the d-simplices as sorted vertex tuples, in
    /// lexicographic order.
    simplices: Vec<Vec<Vec<usize>>>,
    /// Witness point per simplex, parallel to `simplices`.
    witnesses: Vec<Vec<usize>>,
    dim_cap: usize,
}

impl NerveComplex {
    /// Nerve of an explicit ball family; witnesses range over the whole
    /// space. `tau_rel` is the membership slack relative to the diameter.
    pub fn build_system(
        d: &DistanceMatrix,
        balls: &[(usize, f64)],
        dim_cap: usize,
        tau_rel: f64,
    ) -> Result<Self, NerveError> {
        if dim_cap < 1 {
            return Err(NerveError::DimCapTooSmall(dim_cap));
        }
        for (v, &(c, r)) in balls.iter().enumerate() {
            if c >= d.n() {
                return Err(NerveError::CenterOutOfRange { index: c, n: d.n() });
            }
            if !r.is_finite() || r <= 0.0 {
                return Err(NerveError::NonPositiveRadius {
                    vertex: v,
                    radius: r,
                });
            }
        }
        let slack = tau_rel * d.diameter();
        let m = balls.len();
        let member_sets: Vec<BitSet> = balls
            .iter()
            .map(|&(c, r)| {
                let mut bits = BitSet::zeros(d.n());
                for x in 0..d.n() {
                    if d.dist(c, x) <= r + slack {
                        bits.set(x);
                    }
                }
                bits
            })
            .collect();

        let mut simplices: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut witnesses: Vec<Vec<usize>> = Vec::new();

        // Dimension 0: every vertex, witnessed by its own center.
        simplices.push((0..m).map(|v| vec![v]).collect());
        witnesses.push(balls.iter().map(|&(c, _)| c).collect());
        let mut frontier: Vec<(Vec<usize>, BitSet)> =
            (0..m).map(|v| (vec![v], member_sets[v].clone())).collect();

        for _dim in 1..=dim_cap {
            let mut next_frontier: Vec<(Vec<usize>, BitSet)> = Vec::new();
            let mut level_simplices = Vec::new();
            let mut level_witnesses = Vec::new();
            for (simplex, bits) in &frontier {
                let start = simplex.last().unwrap() + 1;
                for v in start..m {
                    let joint = bits.and(&member_sets[v]);
                    if let Some(witness) = joint.first_set() {
                        let mut extended = simplex.clone();
                        extended.push(v);
                        level_simplices.push(extended.clone());
                        level_witnesses.push(witness);
                        next_frontier.push((extended, joint));
                    }
                }
            }
            if level_simplices.is_empty() {
                break;
            }
            simplices.push(level_simplices);
            witnesses.push(level_witnesses);
            frontier = next_frontier;
        }

        Ok(NerveComplex {
            balls: balls.to_vec(),
            simplices,
            witnesses,
            dim_cap,
        })
    }

    /// Nerve of the per-point cover: one ball around every point of the
    /// space, with the given radii.
    pub fn build_cover(
        d: &DistanceMatrix,
        radii: &[f64],
        dim_cap: usize,
        tau_rel: f64,
    ) -> Result<Self, NerveError> {
        if radii.len() != d.n() {
            return Err(NerveError::RadiiCountMismatch {
                got: radii.len(),
                expected: d.n(),
            });
        }
        let balls: Vec<(usize, f64)> = radii.iter().cloned().enumerate().collect();
        Self::build_system(d, &balls, dim_cap, tau_rel)
    }

    pub fn vertex_count(&self) -> usize {
        self.balls.len()
    }

    pub fn balls(&self) -> &[(usize, f64)] {
        &self.balls
    }

    pub fn dim_cap(&self) -> usize {
        self.dim_cap
    }

    /// Highest dimension with any stored simplex.
    pub fn top_dimension(&self) -> usize {
        self.simplices.len() - 1
    }

    /// The d-simplices in lexicographic order; empty above the top dimension.
    pub fn simplices(&self, dim: usize) -> &[Vec<usize>] {
        self.simplices.get(dim).map_or(&[], |v| v.as_slice())
    }

    /// Witness point of the `idx`-th d-simplex.
    pub fn witness(&self, dim: usize, idx: usize) -> usize {
        self.witnesses[dim][idx]
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        if simplex.is_empty() {
            return false;
        }
        let dim = simplex.len() - 1;
        self.simplices.get(dim).is_some_and(|level| {
            level
                .binary_search_by(|s| s.as_slice().cmp(simplex))
                .is_ok()
        })
    }

    /// Number of simplices per dimension.
    pub fn simplex_counts(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    /// Alternating sum of simplex counts.
    pub fn euler_characteristic(&self) -> i64 {
        self.simplex_counts()
            .iter()
            .enumerate()
            .map(|(d, &c)| if d % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Serializable view of the complex.
    pub fn export(&self, betti: Option<Vec<usize>>) -> NerveExport {
        NerveExport {
            vertices: self.balls.iter().map(|&(c, _)| c).collect(),
            radii: self.balls.iter().map(|&(_, r)| r).collect(),
            dim_cap: self.dim_cap,
            simplices: self.simplices.clone(),
            witnesses: self.witnesses.clone(),
            simplex_counts: self.simplex_counts(),
            betti,
        }
    }
}

/// JSON-facing view: vertices, radii, simplices by dimension, witnesses and
/// optional Betti numbers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NerveExport {
    pub vertices: Vec<usize>,
    pub radii: Vec<f64>,
    pub dim_cap: usize,
    pub simplices: Vec<Vec<Vec<usize>>>,
    pub witnesses: Vec<Vec<usize>>,
    pub simplex_counts: Vec<usize>,
    pub betti: Option<Vec<usize>>,
}

/// A subset whose proper maximal faces are all witnessed while the subset
/// itself is not: the failure of the boundary-facets-imply-simplex property.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HellyDefect {
    pub subset: Vec<usize>,
}

impl HellyDefect {
    pub fn size(&self) -> usize {
        self.subset.len()
    }
}

/// Enumerates all defective subsets of size 3 to `k_max`. Every candidate is
/// generated once, as `parent + v` where `parent` is the candidate minus its
/// largest element; the parent must itself be stored, which every defect's
/// facet is by definition.
pub fn helly_defects(nerve: &NerveComplex, k_max: usize) -> Result<Vec<HellyDefect>, NerveError> {
    if k_max > nerve.dim_cap + 1 {
        return Err(NerveError::DimensionBeyondCap {
            dim: k_max.saturating_sub(1),
            cap: nerve.dim_cap,
        });
    }
    let m = nerve.vertex_count();
    let mut out = Vec::new();
    for k in 3..=k_max {
        let parents = nerve.simplices(k - 2);
        for parent in parents {
            let start = parent.last().unwrap() + 1;
            'candidates: for v in start..m {
                let mut candidate = parent.clone();
                candidate.push(v);
                if nerve.contains(&candidate) {
                    continue;
                }
                // All facets other than the parent must be stored too.
                for drop in 0..candidate.len() - 1 {
                    let mut facet = candidate.clone();
                    facet.remove(drop);
                    if !nerve.contains(&facet) {
                        continue 'candidates;
                    }
                }
                out.push(HellyDefect { subset: candidate });
            }
        }
    }
    Ok(out)
}

/// Rank of a boundary matrix over the two-element field via column
/// elimination on bit-packed columns.
fn boundary_rank(rows: &[Vec<usize>], cols: &[Vec<usize>]) -> usize {
    if rows.is_empty() || cols.is_empty() {
        return 0;
    }
    let row_index = |facet: &[usize]| -> usize {
        rows.binary_search_by(|s| s.as_slice().cmp(facet))
            .expect("facet of a stored simplex must be stored")
    };
    let words = rows.len().div_ceil(64);
    let mut pivots: Vec<Option<Vec<u64>>> = vec![None; rows.len()];
    let mut rank = 0;
    for col_simplex in cols {
        let mut col = vec![0u64; words];
        for drop in 0..col_simplex.len() {
            let mut facet = col_simplex.clone();
            facet.remove(drop);
            let r = row_index(&facet);
            col[r / 64] ^= 1u64 << (r % 64);
        }
        let leading_bit = |col: &[u64]| {
            col.iter()
                .enumerate()
                .find_map(|(w, &word)| (word != 0).then(|| w * 64 + word.trailing_zeros() as usize))
        };
        while let Some(lead) = leading_bit(&col) {
            match &pivots[lead] {
                Some(p) => {
                    for (c, p) in col.iter_mut().zip(p) {
                        *c ^= p;
                    }
                }
                None => {
                    pivots[lead] = Some(col);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

/// Mod-2 Betti numbers `B_0 .. B_max_dim` of the stored complex.
///
/// `B_q = dim ker boundary_q - rank boundary_{q+1}`. At `q = dim_cap` the
/// `(q+1)`-boundary is taken over the stored simplices only, so the top rank
/// reflects the capped complex.
pub fn betti_mod2(nerve: &NerveComplex, max_dim: usize) -> Result<Vec<usize>, NerveError> {
    if max_dim > nerve.dim_cap {
        return Err(NerveError::DimensionBeyondCap {
            dim: max_dim,
            cap: nerve.dim_cap,
        });
    }
    // rank of boundary_q for q = 1 ..= max_dim + 1
    let mut ranks = vec![0usize; max_dim + 2];
    for (q, rank) in ranks.iter_mut().enumerate().skip(1) {
        *rank = boundary_rank(nerve.simplices(q - 1), nerve.simplices(q));
    }
    Ok((0..=max_dim)
        .map(|q| nerve.simplices(q).len() - ranks[q] - ranks[q + 1])
        .collect())
}

/// The 3-vertex nerve of a triple under its Gromov radii inflated by
/// `factor`. The edge set appears at factor 1; the full triangle appears
/// exactly when the factor reaches the triple's discrete rho.
pub fn gromov_radii_nerve(
    d: &DistanceMatrix,
    triple: [usize; 3],
    factor: f64,
    tau_rel: f64,
) -> Result<NerveComplex, NerveError> {
    let [i, j, k] = triple;
    let radii = gromov_products(d, i, j, k).map_err(|_| NerveError::DegenerateTriple(triple))?;
    if radii.min() <= 1e-12 * d.diameter() {
        return Err(NerveError::DegenerateTriple(triple));
    }
    let system = BallSystem::new(
        d,
        vec![
            (i, radii.r1 * factor),
            (j, radii.r2 * factor),
            (k, radii.r3 * factor),
        ],
        tau_rel.max(1e-9),
    )
    .map_err(|_| NerveError::DegenerateTriple(triple))?;
    NerveComplex::build_system(d, system.members(), 2, tau_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_cycle, star_metric};

    fn bare_triple() -> DistanceMatrix {
        DistanceMatrix::from_rows(vec![
            vec![0.0, 2.0, 2.0],
            vec![2.0, 0.0, 2.0],
            vec![2.0, 2.0, 0.0],
        ])
        .unwrap()
    }

    /// Three mutually distant points plus a common center at distance 1.
    fn triple_with_center() -> DistanceMatrix {
        DistanceMatrix::from_rows(vec![
            vec![0.0, 2.0, 2.0, 1.0],
            vec![2.0, 0.0, 2.0, 1.0],
            vec![2.0, 2.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn bare_triple_has_no_edges() {
        let m = bare_triple();
        let nerve = NerveComplex::build_cover(&m, &[1.0; 3], 2, 1e-9).unwrap();
        assert_eq!(nerve.simplex_counts(), vec![3]);
    }

    #[test]
    fn center_fills_the_tetrahedron() {
        let m = triple_with_center();
        let nerve = NerveComplex::build_cover(&m, &[1.0; 4], 3, 1e-9).unwrap();
        assert_eq!(nerve.simplex_counts(), vec![4, 6, 4, 1]);
        // The triangle of the three outer balls is witnessed by the center.
        let level2 = nerve.simplices(2);
        let idx = level2.iter().position(|s| s == &vec![0, 1, 2]).unwrap();
        assert_eq!(nerve.witness(2, idx), 3);
    }

    #[test]
    fn six_cycle_nerve_shape() {
        // Unit radii on the 6-cycle witness consecutive pairs at distance 2
        // through their midpoint, so the complex is the triangulated ring
        // with 12 edges and 6 triangles.
        let c = gen_cycle(6, 6.0).unwrap();
        let nerve = NerveComplex::build_cover(&c, &[1.0; 6], 3, 1e-9).unwrap();
        assert_eq!(nerve.simplex_counts(), vec![6, 12, 6]);
        assert!(nerve.contains(&[0, 1]));
        assert!(nerve.contains(&[0, 2]));
        assert!(!nerve.contains(&[0, 3]));
        assert!(nerve.contains(&[0, 1, 2]));
        assert!(!nerve.contains(&[0, 2, 4]));
        assert_eq!(betti_mod2(&nerve, 2).unwrap(), vec![1, 1, 0]);
    }

    #[test]
    fn six_cycle_antipodal_free_triples_are_helly_defects() {
        let c = gen_cycle(6, 6.0).unwrap();
        let nerve = NerveComplex::build_cover(&c, &[1.0; 6], 3, 1e-9).unwrap();
        let defects = helly_defects(&nerve, 3).unwrap();
        let subsets: Vec<&[usize]> = defects.iter().map(|d| d.subset.as_slice()).collect();
        assert_eq!(subsets, vec![&[0, 2, 4][..], &[1, 3, 5][..]]);
    }

    #[test]
    fn center_fixture_has_no_defects() {
        let nerve = NerveComplex::build_cover(&triple_with_center(), &[1.0; 4], 3, 1e-9).unwrap();
        assert!(helly_defects(&nerve, 4).unwrap().is_empty());
    }

    #[test]
    fn midpoint_fixture_has_exactly_one_defect() {
        // Three mutually distant points with the midpoints of each pair
        // present but no common center; balls sit on the three outer points
        // only, witnesses range over all six points.
        let m = DistanceMatrix::from_rows(vec![
            vec![0.0, 2.0, 2.0, 1.0, 1.0, 3.0],
            vec![2.0, 0.0, 2.0, 1.0, 3.0, 1.0],
            vec![2.0, 2.0, 0.0, 3.0, 1.0, 1.0],
            vec![1.0, 1.0, 3.0, 0.0, 2.0, 2.0],
            vec![1.0, 3.0, 1.0, 2.0, 0.0, 2.0],
            vec![3.0, 1.0, 1.0, 2.0, 2.0, 0.0],
        ])
        .unwrap();
        let balls = [(0usize, 1.0), (1, 1.0), (2, 1.0)];
        let nerve = NerveComplex::build_system(&m, &balls, 2, 1e-9).unwrap();
        assert_eq!(nerve.simplex_counts(), vec![3, 3]);
        let defects = helly_defects(&nerve, 3).unwrap();
        assert_eq!(defects.len(), 1);
        assert_eq!(defects[0].subset, vec![0, 1, 2]);
        assert_eq!(betti_mod2(&nerve, 1).unwrap(), vec![1, 1]);
    }

    #[test]
    fn betti_counts_components() {
        // Two far-apart stars with radii covering each star only.
        let a = star_metric(&[1.0, 1.0]);
        let mut rows = vec![vec![0.0; 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                rows[i][j] = a.dist(i, j);
                rows[i + 3][j + 3] = a.dist(i, j);
            }
        }
        for i in 0..3 {
            for j in 3..6 {
                rows[i][j] = 100.0;
                rows[j][i] = 100.0;
            }
        }
        let m = DistanceMatrix::from_rows(rows).unwrap();
        let nerve = NerveComplex::build_cover(&m, &[1.5; 6], 3, 1e-9).unwrap();
        let betti = betti_mod2(&nerve, 2).unwrap();
        assert_eq!(betti[0], 2);
        assert_eq!(betti[1], 0);
    }

    #[test]
    fn monotone_in_radii() {
        let c = gen_cycle(8, 8.0).unwrap();
        let small = NerveComplex::build_cover(&c, &[1.0; 8], 3, 1e-9).unwrap();
        let large = NerveComplex::build_cover(&c, &[2.0; 8], 3, 1e-9).unwrap();
        for dim in 0..=small.top_dimension() {
            for s in small.simplices(dim) {
                assert!(large.contains(s), "simplex {s:?} vanished after inflation");
            }
        }
    }

    #[test]
    fn gromov_radii_nerve_on_star_and_bare_triple() {
        let star = star_metric(&[1.0, 2.0, 3.0]);
        let full = gromov_radii_nerve(&star, [1, 2, 3], 1.0, 1e-9).unwrap();
        assert_eq!(full.simplex_counts(), vec![3, 3, 1]);

        let m = bare_triple();
        let vertices_only = gromov_radii_nerve(&m, [0, 1, 2], 1.0, 1e-9).unwrap();
        assert_eq!(vertices_only.simplex_counts(), vec![3]);
        let filled = gromov_radii_nerve(&m, [0, 1, 2], 2.0, 1e-9).unwrap();
        assert_eq!(filled.simplex_counts(), vec![3, 3, 1]);

        let p = crate::generators::path_metric(&[1.0, 1.0]);
        assert!(matches!(
            gromov_radii_nerve(&p, [0, 1, 2], 1.0, 1e-9),
            Err(NerveError::DegenerateTriple(_))
        ));
    }

    #[test]
    fn complex_is_downward_closed() {
        let c = gen_cycle(9, 9.0).unwrap();
        let nerve = NerveComplex::build_cover(&c, &[1.5; 9], 3, 1e-9).unwrap();
        for dim in 1..=nerve.top_dimension() {
            for s in nerve.simplices(dim) {
                for drop in 0..s.len() {
                    let mut facet = s.clone();
                    facet.remove(drop);
                    assert!(nerve.contains(&facet), "facet {facet:?} of {s:?} missing");
                }
            }
        }
    }

    #[test]
    fn euler_characteristic_matches_betti_sum() {
        let c = gen_cycle(6, 6.0).unwrap();
        let nerve = NerveComplex::build_cover(&c, &[1.0; 6], 3, 1e-9).unwrap();
        let betti = betti_mod2(&nerve, 2).unwrap();
        let chi: i64 = betti
            .iter()
            .enumerate()
            .map(|(q, &b)| if q % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum();
        assert_eq!(chi, nerve.euler_characteristic());
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = bare_triple();
        assert!(matches!(
            NerveComplex::build_cover(&m, &[1.0, -1.0, 1.0], 2, 1e-9),
            Err(NerveError::NonPositiveRadius { vertex: 1, .. })
        ));
        assert!(matches!(
            NerveComplex::build_cover(&m, &[1.0; 2], 2, 1e-9),
            Err(NerveError::RadiiCountMismatch { .. })
        ));
        let nerve = NerveComplex::build_cover(&m, &[1.0; 3], 2, 1e-9).unwrap();
        assert!(matches!(
            helly_defects(&nerve, 4),
            Err(NerveError::DimensionBeyondCap { .. })
        ));
        assert!(matches!(
            betti_mod2(&nerve, 3),
            Err(NerveError::DimensionBeyondCap { .. })
        ));
    }
}
