//! Ball-intersection curvature diagnostics for finite metric spaces.
//!
//! Everything starts from a validated [`metric::DistanceMatrix`]. From there:
//!
//! - [`curvature`] computes Gromov products, the discrete rho functional
//!   (the minimal uniform inflation under which a ball family meets inside
//!   the space), tripod and quadruple defects, per-triple verdicts against
//!   the planar comparison, and expansion-constant lower bounds;
//! - [`euclid`] solves the planar comparison minimax in closed form;
//! - [`hyperbolicity`] measures the four-point delta;
//! - [`nerve`] builds witnessed nerve complexes of ball families, lists
//!   Helly defects and computes mod-2 Betti numbers;
//! - [`generators`] produces seeded reference spaces (trees, grids, cycles,
//!   Euclidean samples) with known behavior under all of the above.
//!
//! Witnesses always live inside the finite space itself. For samples of
//! continuum spaces this undercounts intersections, so reports derived from
//! these diagnostics are necessary-condition checks, never certificates.

pub mod curvature;
pub mod euclid;
pub mod generators;
pub mod hyperbolicity;
pub mod io;
pub mod metric;
pub mod nerve;
pub mod numeric;

pub use curvature::{
    expansion_constant_estimate, gromov_products, quad_inequality_defect, rho_discrete, rho_family,
    rho_pair, scan_triples, tripod_defect, BallSystem, GromovRadii, ScanConfig, TripleReport,
    TripleRho, Verdict,
};
pub use euclid::{
    build_comparison, rho_bar, rho_bar_bruteforce, ComparisonTriangle, MinimaxResult,
};
pub use generators::{generate, GeneratorSpec};
pub use hyperbolicity::{delta_normalized, four_point_delta, DeltaConfig, DeltaReport};
pub use metric::{
    kuratowski_embed, lp_distance_matrix, product_l1, product_linf, validate_metric,
    validate_pseudometric, DistanceMatrix, MetricExponent, PointCloud,
};
pub use nerve::{betti_mod2, gromov_radii_nerve, helly_defects, NerveComplex};
