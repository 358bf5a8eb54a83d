//! The concrete cones: the max half-line, convex bodies under Minkowski
//! addition, functions under argument rescaling, and finite sets under union.

mod functions;
mod grid;
mod hull;
mod max;
mod polytope;
mod union;

pub use functions::{
    correlation_holds, functions_cone, weighted_distance, weighted_inner, weighted_norm_sq, FunctionSampler,
    FunctionsCone, GridFunction, TabulationGrid, FUNCTIONS_FLAGS,
};
pub use grid::{DirectionGrid, DEFAULT_CIRCLE_DIRECTIONS, DEFAULT_SPHERE_DIRECTIONS};
pub use hull::{hull_2d, hull_3d, orientation, HULL3_TOL};
pub use max::{max_cone, MaxCone, MaxSampler, MAX_FLAGS};
pub use polytope::*;
pub use union::{set_hausdorff, union_cone, FinitePointSet, PointSetSampler, UnionCone, UNION_FLAGS};
