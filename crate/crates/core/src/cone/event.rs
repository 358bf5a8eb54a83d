use serde::{Deserialize, Serialize};

use super::ConeError;
use crate::cones::GridFunction;

/// A set of directions on the unit sphere of a cone.
///
/// Each variant is meaningful for a particular family of cones; a cone
/// rejects the variants it cannot evaluate with
/// [`ConeError::PredicateUnsupported`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DirectionPredicate {
    /// The whole sphere.
    FullSphere,
    /// Convex bodies (and point sets): `h_x(u0) ≥ c` for the unit direction `u0`.
    SupportThreshold { u0: Vec<f64>, c: f64 },
    /// Max cone: the sphere is the single point `1`, so this holds iff `1 ≥ c`.
    CoordinateThreshold { c: f64 },
    /// Functions cone: `⟨x, template⟩ / ‖template‖ ≥ θ` in the weighted
    /// `L2(x dx)` inner product.
    CorrelationThreshold { template: GridFunction, theta: f64 },
}

impl DirectionPredicate {
    pub fn label(&self) -> &'static str {
        match self {
            DirectionPredicate::FullSphere => "full_sphere",
            DirectionPredicate::SupportThreshold { .. } => "support_threshold",
            DirectionPredicate::CoordinateThreshold { .. } => "coordinate_threshold",
            DirectionPredicate::CorrelationThreshold { .. } => "correlation_threshold",
        }
    }

    pub(crate) fn unsupported(&self, cone: &str) -> ConeError {
        ConeError::PredicateUnsupported {
            cone: cone.to_string(),
            predicate: self.label().to_string(),
        }
    }
}

/// `U = {x : ‖x‖ > r, direction(x) ∈ B}`, bounded away from the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarEvent {
    pub r: f64,
    #[serde(default = "full_sphere")]
    pub direction: DirectionPredicate,
}

fn full_sphere() -> DirectionPredicate {
    DirectionPredicate::FullSphere
}

impl PolarEvent {
    pub fn new(r: f64, direction: DirectionPredicate) -> Result<Self, ConeError> {
        let e = Self { r, direction };
        e.validate()?;
        Ok(e)
    }

    pub fn full(r: f64) -> Result<Self, ConeError> {
        Self::new(r, DirectionPredicate::FullSphere)
    }

    pub fn validate(&self) -> Result<(), ConeError> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(ConeError::InvalidElement(format!(
                "event radius must be positive and finite, got {}",
                self.r
            )));
        }
        Ok(())
    }

    /// The same event with radius `k·r`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            r: self.r * k,
            direction: self.direction.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_must_be_positive() {
        assert!(PolarEvent::full(0.0).is_err());
        assert!(PolarEvent::full(-1.0).is_err());
        assert!(PolarEvent::full(f64::NAN).is_err());
        assert!(PolarEvent::full(0.5).is_ok());
    }

    #[test]
    fn json_shape() {
        let e: PolarEvent = serde_json::from_str(
            r#"{"r": 2.0, "direction": {"kind": "support_threshold", "u0": [1.0, 0.0], "c": 0.9}}"#,
        )
        .unwrap();
        assert_eq!(
            e.direction,
            DirectionPredicate::SupportThreshold { u0: vec![1.0, 0.0], c: 0.9 }
        );
        let full: PolarEvent = serde_json::from_str(r#"{"r": 1.0}"#).unwrap();
        assert_eq!(full.direction, DirectionPredicate::FullSphere);
    }
}
