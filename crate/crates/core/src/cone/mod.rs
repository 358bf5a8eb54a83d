//! The convex-cone contract: a commutative semigroup with an action of the
//! positive reals, metrized by a homogeneous metric.
//!
//! Concrete cones live in [`crate::cones`]. Everything here is written against
//! the [`Cone`] trait only.

mod axioms;
mod event;

pub use axioms::{axiom_suite, AxiomEntry, AxiomReport, AxiomStatus, Counterexample, ElementSampler};
pub use event::{DirectionPredicate, PolarEvent};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Default tolerance for metric equality of cone elements.
pub const TOL: f64 = 1e-9;

/// Elements with norm at or below this are treated as the origin.
pub const ZERO_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    #[error("element has (near) zero norm {norm:e}; its direction is undefined")]
    ZeroNorm { norm: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("cone `{cone}` cannot evaluate direction predicate `{predicate}`")]
    PredicateUnsupported { cone: String, predicate: String },
    #[error("declared axiom `{axiom}` fails: {witness}")]
    AxiomViolation { axiom: String, witness: String },
    #[error("cone `{cone}` has no additive isometric embedding")]
    NotEmbeddable { cone: String },
}

/// Axioms a cone claims to satisfy. Claims are validated by
/// [`axiom_suite`], never inferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeFlags {
    pub pointed: bool,
    pub sub_invariant: bool,
    pub invariant: bool,
    pub second_distributive: bool,
    /// `x + neutral = x`. Every cone in the usual sense claims this; the
    /// union cone with `{0}` as its neutral element does not.
    pub neutral_identity: bool,
}

/// Partial override of [`ConeFlags`], as read from a config file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimsOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_invariant: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariant: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_distributive: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neutral_identity: Option<bool>,
}

impl ConeFlags {
    pub fn apply(mut self, o: &ClaimsOverride) -> Self {
        if let Some(v) = o.pointed {
            self.pointed = v;
        }
        if let Some(v) = o.sub_invariant {
            self.sub_invariant = v;
        }
        if let Some(v) = o.invariant {
            self.invariant = v;
        }
        if let Some(v) = o.second_distributive {
            self.second_distributive = v;
        }
        if let Some(v) = o.neutral_identity {
            self.neutral_identity = v;
        }
        self
    }
}

/// A convex cone with a homogeneous metric.
///
/// Implementations must be pure: the same inputs always give the same
/// outputs and no method mutates shared state.
pub trait Cone: Send + Sync {
    type Element: Clone + fmt::Debug + Send + Sync + Serialize;

    fn name(&self) -> &'static str;

    fn add(&self, x: &Self::Element, y: &Self::Element) -> Self::Element;

    /// Action of the positive reals; `a > 0`.
    fn scale(&self, a: f64, x: &Self::Element) -> Self::Element;

    fn neutral(&self) -> Self::Element;

    fn origin(&self) -> Self::Element;

    fn distance(&self, x: &Self::Element, y: &Self::Element) -> f64;

    fn flags(&self) -> ConeFlags;

    /// Evaluates `pred` on an element already known to have unit norm.
    fn test_direction(&self, pred: &DirectionPredicate, unit: &Self::Element) -> Result<bool, ConeError>;

    /// `d(x, 0)`. Implementations may override with a cheaper formula.
    fn norm(&self, x: &Self::Element) -> f64 {
        self.distance(x, &self.origin())
    }

    /// Evaluates `pred` on the direction of `x`, given its norm.
    ///
    /// The default materializes the direction; cones whose predicates are
    /// positively homogeneous override this to skip the rescaling.
    fn test_direction_of(
        &self,
        pred: &DirectionPredicate,
        x: &Self::Element,
        norm: f64,
    ) -> Result<bool, ConeError> {
        if matches!(pred, DirectionPredicate::FullSphere) {
            return Ok(true);
        }
        self.test_direction(pred, &self.scale(1.0 / norm, x))
    }

    /// Checks once, ahead of a run, that `pred` can be evaluated here.
    fn check_predicate(&self, pred: &DirectionPredicate) -> Result<(), ConeError>;

    /// Sum of a nonempty slice. Equivalent to a left fold of [`Cone::add`];
    /// cones override it with a faster bulk algorithm.
    fn sum(&self, items: &[Self::Element]) -> Self::Element {
        let (first, rest) = items.split_first().expect("sum of an empty list");
        rest.iter().fold(first.clone(), |acc, x| self.add(&acc, x))
    }
}

/// `‖x‖ = d(x, 0)`.
pub fn norm<C: Cone>(cone: &C, x: &C::Element) -> f64 {
    cone.norm(x)
}

/// `‖x‖⁻¹ · x`, the projection of `x` onto the unit sphere.
pub fn direction<C: Cone>(cone: &C, x: &C::Element) -> Result<C::Element, ConeError> {
    let n = cone.norm(x);
    if !(n > ZERO_NORM) {
        return Err(ConeError::ZeroNorm { norm: n });
    }
    Ok(cone.scale(1.0 / n, x))
}

/// Whether `x ∈ λU` for the polar event `U`, i.e. `‖x‖ > λr` and the
/// direction of `x` lies in `B`.
pub fn event_member<C: Cone>(
    cone: &C,
    x: &C::Element,
    event: &PolarEvent,
    lambda: f64,
) -> Result<bool, ConeError> {
    debug_assert!(lambda > 0.0);
    let n = cone.norm(x);
    if !(n > lambda * event.r) || !(n > ZERO_NORM) {
        return Ok(false);
    }
    cone.test_direction_of(&event.direction, x, n)
}

/// Equality of reals up to `tol`, relative once magnitudes exceed 1.
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Equality of cone elements: `d(x, y)` within `tol`, relative once the
/// norms exceed 1.
pub fn metric_eq<C: Cone>(cone: &C, x: &C::Element, y: &C::Element, tol: f64) -> bool {
    let scale = 1f64.max(cone.norm(x)).max(cone.norm(y));
    cone.distance(x, y) <= tol * scale
}
