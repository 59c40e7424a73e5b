//! Planar comparison triangles and the exact weighted minimax
//! `min over x in R^2 of max_i ||x - p_i|| / r_i`.
//!
//! The optimum of a max of three convex cones has at least two active
//! constraints, so it is either a two-ball balance point on a segment or the
//! three-active equal-ratio point. Both families admit closed forms, which
//! keeps the computation exact up to rounding and makes the 2/sqrt(3) bound
//! checkable at machine precision.

use thiserror::Error;

/// Lower acceptance edge for the squared-ratio parameter `t`.
const T_MIN: f64 = 1.0 - 1e-12;
/// Upper acceptance edge: `t = rho^2` never exceeds 4/3 for Gromov radii.
const T_MAX: f64 = 4.0 / 3.0 + 1e-9;
/// Relative feasibility slack for candidate checks.
const FEAS_TOL: f64 = 1e-9;

/// A planar triangle in canonical placement realizing three side lengths:
/// `p1` at the origin, `p2` on the nonnegative x-axis, `p3` in the closed
/// upper half-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTriangle {
    p: [[f64; 2]; 3],
    /// Side lengths in the order `[d12, d13, d23]`.
    sides: [f64; 3],
}

impl ComparisonTriangle {
    pub fn points(&self) -> &[[f64; 2]; 3] {
        &self.p
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        self.p[i]
    }

    /// Side lengths as `[d12, d13, d23]`.
    pub fn sides(&self) -> [f64; 3] {
        self.sides
    }

    /// Side length between vertices `i` and `j`.
    pub fn side_between(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        match (lo, hi) {
            (0, 1) => self.sides[0],
            (0, 2) => self.sides[1],
            (1, 2) => self.sides[2],
            _ => panic!("side_between needs two distinct vertices in 0..3"),
        }
    }
}

/// Result of the planar minimax.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimaxResult {
    /// The optimal value, at least 1 for Gromov radii.
    pub rho_bar: f64,
    /// A minimizer in the triangle's frame.
    pub center: [f64; 2],
    /// Vertices whose ratio is tight at the optimum (at least two for
    /// nondegenerate triangles).
    pub active_set: Vec<usize>,
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ComparisonError {
    #[error("sides must be finite and nonnegative, got ({0}, {1}, {2})")]
    BadSides(f64, f64, f64),
    #[error("triangle inequality violated beyond tolerance by sides ({0}, {1}, {2})")]
    TriangleViolated(f64, f64, f64),
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MinimaxError {
    #[error("radii must be finite, got {0:?}")]
    BadRadii([f64; 3]),
    #[error("no feasible minimax candidate; inputs are numerically inconsistent")]
    NoFeasibleCandidate,
}

/// Places the triangle with sides `d12, d13, d23` canonically. `tol` is an
/// absolute slack on the triangle inequality; colinear inputs land `p3`
/// exactly on the axis.
pub fn build_comparison(
    d12: f64,
    d13: f64,
    d23: f64,
    tol: f64,
) -> Result<ComparisonTriangle, ComparisonError> {
    let bad = |v: f64| !v.is_finite() || v < 0.0;
    if bad(d12) || bad(d13) || bad(d23) {
        return Err(ComparisonError::BadSides(d12, d13, d23));
    }
    if d12 > d13 + d23 + tol || d13 > d12 + d23 + tol || d23 > d12 + d13 + tol {
        return Err(ComparisonError::TriangleViolated(d12, d13, d23));
    }
    let p1 = [0.0, 0.0];
    let p2 = [d12, 0.0];
    let p3 = if d12 == 0.0 {
        [d13, 0.0]
    } else {
        let x = (d12 * d12 + d13 * d13 - d23 * d23) / (2.0 * d12);
        let y2 = d13 * d13 - x * x;
        [x, if y2 > 0.0 { y2.sqrt() } else { 0.0 }]
    };
    Ok(ComparisonTriangle {
        p: [p1, p2, p3],
        sides: [d12, d13, d23],
    })
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Squared distance from vertex `k` to the point dividing the segment from
/// `a` to `b` at arc fractions `r_a : r_b`, purely from side lengths
/// (Stewart's relation). Frame-free, so permutations of the input triple
/// cannot perturb it.
fn cevian_dist_sq(s_ab: f64, s_ak: f64, s_bk: f64, r_a: f64, r_b: f64) -> f64 {
    let denom = r_a + r_b;
    let seg = s_ab / denom;
    (s_ak * s_ak * r_b + s_bk * s_bk * r_a) / denom - r_a * r_b * seg * seg
}

enum Winner {
    /// Balance point on the segment between the two original vertex indices.
    Pair(usize, usize),
    /// Equal-ratio point with squared value `t`.
    ThreeActive(f64),
}

/// Solves `min_x max_i ||x - p_i|| / radii[i]` exactly by enumerating the
/// two- and three-active candidates.
///
/// Radii are expected to be the Gromov radii of the triangle's side lengths;
/// a nonpositive radius takes the degenerate branch (value 1 at that vertex).
pub fn rho_bar(tri: &ComparisonTriangle, radii: [f64; 3]) -> Result<MinimaxResult, MinimaxError> {
    if radii.iter().any(|r| !r.is_finite()) {
        return Err(MinimaxError::BadRadii(radii));
    }
    if radii.iter().any(|&r| r <= 0.0) {
        let k = (0..3)
            .min_by(|&a, &b| radii[a].partial_cmp(&radii[b]).unwrap())
            .unwrap();
        return Ok(degenerate_result(tri, k));
    }

    // Canonical vertex order, sorted by (radius, opposite side) descending.
    // The value computation below only sees sorted (radius, side) data, so it
    // is bit-identical under any relabeling of the input triple.
    let opp = |i: usize| match i {
        0 => tri.sides[2],
        1 => tri.sides[1],
        _ => tri.sides[0],
    };
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        (radii[b], opp(b))
            .partial_cmp(&(radii[a], opp(a)))
            .unwrap()
            .then(a.cmp(&b))
    });
    // Exact power-of-two prescale: keeps all squared quantities in range and
    // makes power-of-two rescalings of the input bit-transparent.
    let scale_exp = tri
        .sides
        .iter()
        .chain(radii.iter())
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        .log2()
        .round() as i32;
    let prescale = (2.0_f64).powi(-scale_exp);
    let r = [
        radii[order[0]] * prescale,
        radii[order[1]] * prescale,
        radii[order[2]] * prescale,
    ];
    let s01 = tri.side_between(order[0], order[1]) * prescale;
    let s02 = tri.side_between(order[0], order[2]) * prescale;
    let s12 = tri.side_between(order[1], order[2]) * prescale;
    let slot_sides = |a: usize, b: usize| match (a, b) {
        (0, 1) => s01,
        (0, 2) => s02,
        _ => s12,
    };

    let mut best_value = f64::INFINITY;
    let mut winner = None;

    // Two-active candidates: the balance point on each segment, feasible when
    // the third ball (inflated by the candidate value) reaches it.
    for &(a, b) in &[(0usize, 1usize), (0, 2), (1, 2)] {
        let k = 3 - a - b;
        let s_ab = slot_sides(a, b);
        let mut v = s_ab / (r[a] + r[b]);
        if (v - 1.0).abs() <= 1e-12 {
            v = 1.0;
        }
        let d2 = cevian_dist_sq(
            s_ab,
            slot_sides(a.min(k), a.max(k)),
            slot_sides(b.min(k), b.max(k)),
            r[a],
            r[b],
        );
        let d = if d2 > 0.0 { d2.sqrt() } else { 0.0 };
        if d <= v * r[k] + FEAS_TOL * r[k] && v < best_value {
            best_value = v;
            winner = Some(Winner::Pair(order[a], order[b]));
        }
    }

    // Three-active candidate: the squared value t solves a quadratic obtained
    // by eliminating x from ||x - q_i||^2 = t r_i^2 in the canonical frame.
    // Difference-of-squares forms keep close subtractions exact (Sterbenz),
    // and the triangle height comes from the stable area formula rather than
    // the cancellation-prone sqrt(s02^2 - qx^2).
    let qx = if s01 == 0.0 {
        f64::NAN
    } else {
        (s01 * s01 + (s02 - s12) * (s02 + s12)) / (2.0 * s01)
    };
    let qy = if s01 > 0.0 {
        2.0 * stable_triangle_area(s01, s02, s12) / s01
    } else {
        0.0
    };
    if s01 > 0.0 && qy > 0.0 {
        let x0 = 0.5 * s01;
        let x1 = -((r[1] - r[0]) * (r[1] + r[0])) / (2.0 * s01);
        let y0 = (s12 * s12 + (s02 - s01) * (s02 + s01)) / (4.0 * qy);
        let y1 = ((r[0] - r[2]) * (r[0] + r[2]) - 2.0 * qx * x1) / (2.0 * qy);
        let a_coef = x1 * x1 + y1 * y1;
        let b_coef = 2.0 * (x0 * x1 + y0 * y1) - r[0] * r[0];
        let c_coef = x0 * x0 + y0 * y0;
        for t in quadratic_roots(a_coef, b_coef, c_coef) {
            let t = if (t - 1.0).abs() <= 1e-12 { 1.0 } else { t };
            if (T_MIN..=T_MAX).contains(&t) {
                let v = t.sqrt();
                if v < best_value {
                    best_value = v;
                    winner = Some(Winner::ThreeActive(t));
                }
            }
        }
    }

    let winner = winner.ok_or(MinimaxError::NoFeasibleCandidate)?;
    let center = match winner {
        Winner::Pair(i, j) => {
            let pi = tri.p[i];
            let pj = tri.p[j];
            let f = radii[i] / (radii[i] + radii[j]);
            [pi[0] + f * (pj[0] - pi[0]), pi[1] + f * (pj[1] - pi[1])]
        }
        Winner::ThreeActive(t) => match solve_equal_ratio_point(tri, radii, t) {
            Some(c) => c,
            None => return Ok(degenerate_result(tri, min_radius_index(radii))),
        },
    };

    let rho_bar = best_value;
    let tol = FEAS_TOL * rho_bar.max(1.0);
    let active_set = (0..3)
        .filter(|&i| dist(center, tri.p[i]) / radii[i] >= rho_bar - tol)
        .collect();
    Ok(MinimaxResult {
        rho_bar,
        center,
        active_set,
    })
}

/// Numerically stable triangle area from side lengths (Kahan's ordering of
/// the Heron factors). Returns 0 for colinear side triples.
fn stable_triangle_area(s1: f64, s2: f64, s3: f64) -> f64 {
    let mut s = [s1, s2, s3];
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let [a, b, c] = s;
    let term = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if term > 0.0 {
        0.25 * term.sqrt()
    } else {
        0.0
    }
}

fn min_radius_index(radii: [f64; 3]) -> usize {
    (0..3)
        .min_by(|&a, &b| radii[a].partial_cmp(&radii[b]).unwrap())
        .unwrap()
}

fn degenerate_result(tri: &ComparisonTriangle, k: usize) -> MinimaxResult {
    MinimaxResult {
        rho_bar: 1.0,
        center: tri.p[k],
        active_set: (0..3).filter(|&i| i != k).collect(),
    }
}

/// Real roots of `a t^2 + b t + c = 0`; `a = 0` falls through to the linear
/// case. Tiny negative discriminants (cancellation noise) are clamped to a
/// double root.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc >= -1e-12 * b * b {
            disc = 0.0;
        } else {
            return Vec::new();
        }
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Solves the two linear equations obtained from pairwise differences of
/// `||x - p_i||^2 = t r_i^2` in the triangle's own frame.
fn solve_equal_ratio_point(tri: &ComparisonTriangle, radii: [f64; 3], t: f64) -> Option<[f64; 2]> {
    let [p1, p2, p3] = tri.p;
    let norm2 = |p: [f64; 2]| p[0] * p[0] + p[1] * p[1];
    let a11 = 2.0 * (p2[0] - p1[0]);
    let a12 = 2.0 * (p2[1] - p1[1]);
    let a21 = 2.0 * (p3[0] - p1[0]);
    let a22 = 2.0 * (p3[1] - p1[1]);
    let b1 = norm2(p2) - norm2(p1) - t * (radii[1] * radii[1] - radii[0] * radii[0]);
    let b2 = norm2(p3) - norm2(p1) - t * (radii[2] * radii[2] - radii[0] * radii[0]);
    let det = a11 * a22 - a12 * a21;
    if det == 0.0 {
        return None;
    }
    Some([(b1 * a22 - b2 * a12) / det, (a11 * b2 - a21 * b1) / det])
}

/// Grid oracle for [`rho_bar`]: scans the triangle's bounding box at
/// `grid_step`, then refines once around the argmin with `grid_step / 100`.
/// Always an upper bound on the true minimax value.
pub fn rho_bar_bruteforce(tri: &ComparisonTriangle, radii: [f64; 3], grid_step: f64) -> f64 {
    assert!(grid_step > 0.0, "grid step must be positive");
    let objective = |x: f64, y: f64| {
        (0..3)
            .map(|i| dist([x, y], tri.p[i]) / radii[i])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let xs: Vec<f64> = tri.p.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = tri.p.iter().map(|p| p[1]).collect();
    let min_of = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_of = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let scan = |x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, step: f64| {
        let nx = ((x_hi - x_lo) / step).ceil() as usize;
        let ny = ((y_hi - y_lo) / step).ceil() as usize;
        let mut best = (f64::INFINITY, x_lo, y_lo);
        for iy in 0..=ny {
            let y = y_lo + iy as f64 * step;
            for ix in 0..=nx {
                let x = x_lo + ix as f64 * step;
                let v = objective(x, y);
                if v < best.0 {
                    best = (v, x, y);
                }
            }
        }
        best
    };

    let coarse = scan(
        min_of(&xs),
        max_of(&xs),
        min_of(&ys),
        max_of(&ys),
        grid_step,
    );
    let w = 3.0 * grid_step;
    let fine = scan(
        coarse.1 - w,
        coarse.1 + w,
        coarse.2 - w,
        coarse.2 + w,
        grid_step / 100.0,
    );
    coarse.0.min(fine.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_OVER_SQRT3: f64 = 1.1547005383792515;

    #[test]
    fn placement_of_3_4_5_is_right_angled() {
        let tri = build_comparison(3.0, 4.0, 5.0, 1e-12).unwrap();
        assert_eq!(tri.point(0), [0.0, 0.0]);
        assert_eq!(tri.point(1), [3.0, 0.0]);
        assert_eq!(tri.point(2), [0.0, 4.0]);
    }

    #[test]
    fn placement_of_colinear_sides_is_on_axis() {
        let tri = build_comparison(2.0, 1.0, 1.0, 1e-12).unwrap();
        assert_eq!(tri.point(2), [1.0, 0.0]);
    }

    #[test]
    fn placement_of_equilateral() {
        let tri = build_comparison(1.0, 1.0, 1.0, 1e-12).unwrap();
        let p3 = tri.point(2);
        assert!((p3[0] - 0.5).abs() < 1e-15);
        assert!((p3[1] - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn violated_triangle_is_rejected() {
        assert!(matches!(
            build_comparison(5.0, 1.0, 1.0, 1e-9),
            Err(ComparisonError::TriangleViolated(..))
        ));
    }

    #[test]
    fn equilateral_hits_the_plane_expansion_constant() {
        let tri = build_comparison(1.0, 1.0, 1.0, 1e-12).unwrap();
        let res = rho_bar(&tri, [0.5, 0.5, 0.5]).unwrap();
        assert!((res.rho_bar - TWO_OVER_SQRT3).abs() < 1e-9);
        assert_eq!(res.active_set, vec![0, 1, 2]);
        // Circumcenter of the canonical equilateral triangle.
        assert!((res.center[0] - 0.5).abs() < 1e-12);
        assert!((res.center[1] - 0.5 / 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_radii_take_the_middle_point() {
        let tri = build_comparison(2.0, 1.0, 1.0, 1e-12).unwrap();
        let res = rho_bar(&tri, [1.0, 1.0, 0.0]).unwrap();
        assert_eq!(res.rho_bar, 1.0);
        assert_eq!(res.center, [1.0, 0.0]);
        assert_eq!(res.active_set, vec![0, 1]);
    }

    #[test]
    fn value_is_invariant_under_relabeling_bit_for_bit() {
        // Sides of a scalene triangle and its Gromov radii.
        let sides = [(3.0, 4.0, 5.0), (2.0, 2.5, 3.2), (1.0, 1.9, 2.5)];
        for &(a, b, c) in &sides {
            let radii = [0.5 * (a + b - c), 0.5 * (a + c - b), 0.5 * (b + c - a)];
            let base = rho_bar(&build_comparison(a, b, c, 1e-9).unwrap(), radii)
                .unwrap()
                .rho_bar;
            // Swap vertices 2 and 3: sides (d12,d13,d23) -> (d13,d12,d23).
            let swapped = rho_bar(
                &build_comparison(b, a, c, 1e-9).unwrap(),
                [radii[0], radii[2], radii[1]],
            )
            .unwrap()
            .rho_bar;
            assert_eq!(base.to_bits(), swapped.to_bits());
            // Rotate vertices 1 -> 2 -> 3 -> 1.
            let rotated = rho_bar(
                &build_comparison(c, a, b, 1e-9).unwrap(),
                [radii[1], radii[2], radii[0]],
            )
            .unwrap()
            .rho_bar;
            assert_eq!(base.to_bits(), rotated.to_bits());
        }
    }

    #[test]
    fn active_ratios_match_the_value() {
        let tri = build_comparison(3.0, 4.0, 5.0, 1e-12).unwrap();
        let res = rho_bar(&tri, [1.0, 2.0, 3.0]).unwrap();
        assert!(res.active_set.len() >= 2);
        let radii = [1.0, 2.0, 3.0];
        for &i in &res.active_set {
            let ratio = dist(res.center, tri.point(i)) / radii[i];
            assert!((ratio - res.rho_bar).abs() <= 1e-9 * res.rho_bar.max(1.0));
        }
    }

    #[test]
    fn bruteforce_agrees_on_fixed_triangles() {
        for &(a, b, c) in &[(1.0, 1.0, 1.0), (3.0, 4.0, 5.0), (2.0, 2.5, 3.2)] {
            let radii = [0.5 * (a + b - c), 0.5 * (a + c - b), 0.5 * (b + c - a)];
            let tri = build_comparison(a, b, c, 1e-12).unwrap();
            let exact = rho_bar(&tri, radii).unwrap().rho_bar;
            let grid = rho_bar_bruteforce(&tri, radii, 1e-3);
            assert!(
                (exact - grid).abs() < 1e-5,
                "sides ({a},{b},{c}): exact {exact} vs grid {grid}"
            );
            assert!(
                grid >= exact - 1e-12,
                "grid value must upper-bound the optimum"
            );
        }
    }

    #[test]
    fn bruteforce_equilateral_matches_the_plane_constant() {
        let tri = build_comparison(1.0, 1.0, 1.0, 1e-12).unwrap();
        let grid = rho_bar_bruteforce(&tri, [0.5, 0.5, 0.5], 1e-3);
        assert!((grid - TWO_OVER_SQRT3).abs() < 1e-4);
    }

    #[test]
    fn nearly_degenerate_triangle_stays_close_to_one() {
        // One vertex close to the segment between the others.
        let tri = build_comparison(2.0, 1.001, 1.001, 1e-9).unwrap();
        let radii = [1.0, 1.0, 0.001];
        let res = rho_bar(&tri, radii).unwrap();
        assert!(res.rho_bar >= 1.0);
        assert!(res.rho_bar < 1.1, "rho_bar = {}", res.rho_bar);
    }
}
