//! Convex cones with homogeneous metrics, regularly varying random elements
//! in them, and a Monte Carlo laboratory for large deviations of their
//! heavy-tailed partial sums.

pub mod cone;
pub mod cones;
pub mod lab;
pub mod numeric;
pub mod regvar;
pub mod rng;
pub mod stats;

pub use cone::{
    axiom_suite, direction, event_member, norm, AxiomReport, AxiomStatus, ClaimsOverride, Cone, ConeError, ConeFlags,
    DirectionPredicate, PolarEvent,
};
