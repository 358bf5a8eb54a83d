//! `[0, ∞)` with `x + y = max(x, y)`, ordinary scaling and `d(x, y) = |x − y|`.

use rand::{Rng, RngCore};

use crate::cone::{ClaimsOverride, Cone, ConeError, ConeFlags, DirectionPredicate, ElementSampler};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxCone {
    flags: ConeFlags,
}

pub const MAX_FLAGS: ConeFlags = ConeFlags {
    pointed: true,
    sub_invariant: true,
    invariant: false,
    second_distributive: false,
    neutral_identity: true,
};

impl Default for MaxCone {
    fn default() -> Self {
        Self { flags: MAX_FLAGS }
    }
}

impl MaxCone {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_claims(claims: &ClaimsOverride) -> Self {
        Self {
            flags: MAX_FLAGS.apply(claims),
        }
    }
}

/// The max cone.
pub fn max_cone() -> MaxCone {
    MaxCone::new()
}

impl Cone for MaxCone {
    type Element = f64;

    fn name(&self) -> &'static str {
        "max"
    }

    fn add(&self, x: &f64, y: &f64) -> f64 {
        x.max(*y)
    }

    fn scale(&self, a: f64, x: &f64) -> f64 {
        a * x
    }

    fn neutral(&self) -> f64 {
        0.0
    }

    fn origin(&self) -> f64 {
        0.0
    }

    fn distance(&self, x: &f64, y: &f64) -> f64 {
        (x - y).abs()
    }

    fn flags(&self) -> ConeFlags {
        self.flags
    }

    fn norm(&self, x: &f64) -> f64 {
        x.abs()
    }

    fn test_direction(&self, pred: &DirectionPredicate, unit: &f64) -> Result<bool, ConeError> {
        match pred {
            DirectionPredicate::FullSphere => Ok(true),
            DirectionPredicate::CoordinateThreshold { c } => Ok(*unit >= *c),
            other => Err(other.unsupported(self.name())),
        }
    }

    fn test_direction_of(&self, pred: &DirectionPredicate, _x: &f64, _norm: f64) -> Result<bool, ConeError> {
        self.test_direction(pred, &1.0)
    }

    fn check_predicate(&self, pred: &DirectionPredicate) -> Result<(), ConeError> {
        self.test_direction(pred, &1.0).map(|_| ())
    }

    fn sum(&self, items: &[f64]) -> f64 {
        items.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Exponential draws with mean 5, plus fixed probes exposing the
/// second-distributivity and invariance failures.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxSampler;

impl ElementSampler<f64> for MaxSampler {
    fn element(&self, rng: &mut dyn RngCore) -> f64 {
        -5.0 * (1.0 - rng.random::<f64>()).ln()
    }

    fn probes(&self) -> Vec<f64> {
        // x = 1 with a = b = 1: (a+b)x = 2 but ax + bx = 1.
        // x = 1, y = 3, h = 2: |max(1,2) − max(3,2)| = 1 ≠ 2.
        vec![1.0, 3.0, 2.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{axiom_suite, direction, event_member, AxiomStatus, PolarEvent};

    #[test]
    fn operations() {
        let c = max_cone();
        assert_eq!(c.add(&3.0, &5.0), 5.0);
        assert_eq!(c.scale(2.0, &3.0), 6.0);
        assert_eq!(c.norm(&3.5), 3.5);
        assert_eq!(direction(&c, &5.0).unwrap(), 1.0);
        assert!(matches!(direction(&c, &0.0), Err(ConeError::ZeroNorm { .. })));
        // sub-invariance instance: d(max(10, 1), 10) = 0 ≤ ‖1‖
        assert_eq!(c.distance(&c.add(&10.0, &1.0), &10.0), 0.0);
    }

    #[test]
    fn membership_is_strict() {
        let c = max_cone();
        let u = PolarEvent::full(2.0).unwrap();
        assert!(event_member(&c, &10.0, &u, 1.0).unwrap());
        assert!(!event_member(&c, &10.0, &u, 5.0).unwrap());
        assert!(!event_member(&c, &0.0, &u, 1.0).unwrap());
    }

    #[test]
    fn second_distributivity_counterexample() {
        let r = axiom_suite(&max_cone(), &MaxSampler, 200, 1e-9, 3);
        assert!(r.all_declared_pass(), "{r:#?}");
        let e = r.entry("second_distributivity").unwrap();
        assert!(!e.declared);
        assert_eq!(e.status, AxiomStatus::Fail);
        let cx = e.counterexample.as_ref().unwrap();
        assert_eq!((cx.lhs, cx.rhs), (2.0, 1.0));
        assert_eq!(cx.scalars, vec![1.0, 1.0]);
    }

    #[test]
    fn claimed_invariance_is_rejected() {
        let c = MaxCone::with_claims(&ClaimsOverride {
            invariant: Some(true),
            ..Default::default()
        });
        let r = axiom_suite(&c, &MaxSampler, 50, 1e-9, 1);
        let err = r.into_result().unwrap_err();
        assert!(matches!(err, ConeError::AxiomViolation { ref axiom, .. } if axiom == "invariance"));
    }
}
