//! Nonempty finite subsets of `R^d` with union as addition, pointwise
//! scaling and the Hausdorff metric. The neutral element `{0}` does not act
//! as an identity, and the metric is not sub-invariant.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::cone::{ClaimsOverride, Cone, ConeError, ConeFlags, DirectionPredicate, ElementSampler};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct FinitePointSet {
    points: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for FinitePointSet {
    type Error = ConeError;

    fn try_from(points: Vec<Vec<f64>>) -> Result<Self, ConeError> {
        FinitePointSet::new(points)
    }
}

impl From<FinitePointSet> for Vec<Vec<f64>> {
    fn from(s: FinitePointSet) -> Self {
        s.points
    }
}

impl FinitePointSet {
    pub fn new(mut points: Vec<Vec<f64>>) -> Result<Self, ConeError> {
        let Some(dim) = points.first().map(Vec::len) else {
            return Err(ConeError::InvalidElement("point set must be nonempty".into()));
        };
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(ConeError::InvalidElement("points must share a positive dimension".into()));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(ConeError::InvalidElement("non-finite coordinate".into()));
        }
        canonicalize(&mut points);
        Ok(Self { points })
    }

    /// `{x}` on the real line.
    pub fn singleton(x: f64) -> Self {
        Self { points: vec![vec![x]] }
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            points: vec![vec![0.0; dim]],
        }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

fn canonicalize(points: &mut Vec<Vec<f64>>) {
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points.dedup();
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn directed(a: &FinitePointSet, b: &FinitePointSet) -> f64 {
    a.points
        .iter()
        .map(|p| b.points.iter().map(|q| euclid(p, q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Exact Hausdorff distance between finite sets.
pub fn set_hausdorff(a: &FinitePointSet, b: &FinitePointSet) -> f64 {
    directed(a, b).max(directed(b, a))
}

pub const UNION_FLAGS: ConeFlags = ConeFlags {
    pointed: true,
    sub_invariant: false,
    invariant: false,
    second_distributive: false,
    neutral_identity: false,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnionCone {
    dim: usize,
    flags: ConeFlags,
}

impl UnionCone {
    pub fn new(dim: usize) -> Self {
        Self { dim, flags: UNION_FLAGS }
    }

    pub fn with_claims(mut self, claims: &ClaimsOverride) -> Self {
        self.flags = self.flags.apply(claims);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl Default for UnionCone {
    fn default() -> Self {
        Self::new(1)
    }
}

/// The union cone of finite subsets of the real line.
pub fn union_cone() -> UnionCone {
    UnionCone::default()
}

impl Cone for UnionCone {
    type Element = FinitePointSet;

    fn name(&self) -> &'static str {
        "union"
    }

    fn add(&self, x: &FinitePointSet, y: &FinitePointSet) -> FinitePointSet {
        let mut points = x.points.clone();
        points.extend(y.points.iter().cloned());
        canonicalize(&mut points);
        FinitePointSet { points }
    }

    fn scale(&self, a: f64, x: &FinitePointSet) -> FinitePointSet {
        let mut points: Vec<Vec<f64>> = x.points.iter().map(|p| p.iter().map(|c| a * c).collect()).collect();
        canonicalize(&mut points);
        FinitePointSet { points }
    }

    fn neutral(&self) -> FinitePointSet {
        FinitePointSet::origin(self.dim)
    }

    fn origin(&self) -> FinitePointSet {
        FinitePointSet::origin(self.dim)
    }

    fn distance(&self, x: &FinitePointSet, y: &FinitePointSet) -> f64 {
        set_hausdorff(x, y)
    }

    fn flags(&self) -> ConeFlags {
        self.flags
    }

    fn test_direction(&self, pred: &DirectionPredicate, _unit: &FinitePointSet) -> Result<bool, ConeError> {
        match pred {
            DirectionPredicate::FullSphere => Ok(true),
            other => Err(other.unsupported(self.name())),
        }
    }

    fn check_predicate(&self, pred: &DirectionPredicate) -> Result<(), ConeError> {
        match pred {
            DirectionPredicate::FullSphere => Ok(()),
            other => Err(other.unsupported(self.name())),
        }
    }

    fn sum(&self, items: &[FinitePointSet]) -> FinitePointSet {
        let mut points: Vec<Vec<f64>> = items.iter().flat_map(|s| s.points.iter().cloned()).collect();
        canonicalize(&mut points);
        FinitePointSet { points }
    }
}

/// One to four points with coordinates in `[-10, 10]`.
#[derive(Debug, Clone, Copy)]
pub struct PointSetSampler {
    pub dim: usize,
}

impl Default for PointSetSampler {
    fn default() -> Self {
        Self { dim: 1 }
    }
}

impl ElementSampler<FinitePointSet> for PointSetSampler {
    fn element(&self, rng: &mut dyn RngCore) -> FinitePointSet {
        let k = rng.random_range(1..=4);
        let points = (0..k)
            .map(|_| (0..self.dim).map(|_| rng.random_range(-10.0..10.0)).collect())
            .collect();
        FinitePointSet::new(points).expect("valid by construction")
    }

    fn probes(&self) -> Vec<FinitePointSet> {
        // x = {10}, y = {1}: d(x ∪ y, x) = 9 > ‖y‖ = 1. With h = {5},
        // d(x ∪ h, y ∪ h) = 5 while d(x, y) = 9.
        if self.dim != 1 {
            return vec![];
        }
        vec![
            FinitePointSet::singleton(10.0),
            FinitePointSet::singleton(1.0),
            FinitePointSet::singleton(5.0),
        ]
    }
}
