//! Inner radii of non-overlapping domains attached to n-radial point systems.
//!
//! The crate evaluates the sharp upper bound for the product
//! `r(B_0, 0)^γ · ∏ r(B_k, a_k)` over disjoint domains `B_k ∋ a_k`, solves the
//! auxiliary extremal problem `∏ F(α_k) → max` on the simplex `∑ α_k = 2`,
//! and certifies the inequality numerically:
//!
//! * [`system`]: n-radial systems, `χ`, the `L^(γ)` normalizer;
//! * [`moebius`]: fractional-linear maps;
//! * [`geometry`] and [`domain`]: polygonal and analytic marked domains;
//! * [`radii`]: closed-form inner radii and a walk-on-spheres estimator;
//! * [`separating`]: sector power maps, symmetrized images and the
//!   composition inequalities they satisfy;
//! * [`bounds`]: `F`, `Φ`, `H`, `t₀` and the closed-form bounds;
//! * [`optimizer`]: the simplex problem and the randomized certification harness;
//! * [`quad_diff`]: the extremal quadratic differential, its trajectories and
//!   circular domains;
//! * [`svg`]: deterministic trajectory plots.

pub mod bounds;
pub mod domain;
pub mod error;
pub mod geometry;
pub mod moebius;
pub mod optimizer;
pub mod quad_diff;
pub mod radii;
pub mod selfcheck;
pub mod separating;
pub mod svg;
pub mod system;

pub use num_complex::Complex64;

pub use bounds::{
    big_f, corollary1_bound, corollary2_bound, corollary3_bound, corollary4_bound, find_t0,
    h_func, j_functional, log_big_f, phi, theorem1_bound, Gamma,
};
pub use domain::{DomainGeometry, Region};
pub use error::{Error, Result};
pub use geometry::Polygon;
pub use moebius::MoebiusMap;
pub use optimizer::{
    exclusion_check, maximize_product_f, random_disk_config, verify_inequality, BoundReport,
    ExclusionVerdict, SimplexPoint,
};
pub use quad_diff::{critical_points, extremal_config, q_value, trace_trajectories, QdParams};
pub use radii::{inner_radius, inner_radius_analytic, inner_radius_wos, y3, RadiusEstimate, WosConfig};
pub use separating::{check_composition_bounds, normalize_triple, transform_domain, SectorMap};
pub use system::{chi, l_gamma, normalize_system, RadialSystem};
