//! Additive isometric embeddings of invariant cones into function spaces.
//!
//! Convex bodies embed through their support functions, tabulated on the
//! cone's direction grid; the functions cone is already a subset of
//! `L2(x dx)`. The max and union cones do not embed.

use std::fmt::Debug;

use serde::Serialize;

use crate::cone::{Cone, ConeError, DirectionPredicate, ElementSampler};
use crate::cones::{
    support_function, weighted_norm_sq, ConvexBodiesCone, FinitePointSet, FunctionSampler, FunctionsCone,
    GridFunction, MaxCone, MaxSampler, PointSetSampler, Polytope, PolytopeSampler, UnionCone,
};
use crate::regvar::{RegVarSpec, SpectralCone};

/// A cone with an additive isometric embedding `I` into a normed space.
pub trait Embeddable: Cone {
    /// Points of the ambient space.
    type Vector: Clone + Debug + Send + Sync + Serialize;

    fn embed(&self, x: &Self::Element) -> Result<Self::Vector, ConeError>;

    fn vector_norm(&self, v: &Self::Vector) -> f64;

    /// Linear scaling in the ambient space (not the cone's action).
    fn vector_scale(&self, a: f64, v: &Self::Vector) -> Self::Vector;

    /// Length of the coordinate vector used to average embedded draws.
    fn coordinate_len(&self) -> Result<usize, ConeError>;

    /// Adds the coordinates of `I(x)` and their squares into the buffers.
    fn accumulate(&self, x: &Self::Element, sum: &mut [f64], sum_sq: &mut [f64]);

    fn from_coordinates(&self, coords: Vec<f64>) -> Self::Vector;

    /// Reads a vector given either as a cone element or as raw coordinates.
    fn parse_vector(&self, value: &serde_json::Value) -> Result<Self::Vector, ConeError>;

    /// `I(x) − a` with its norm.
    fn embedded_difference(&self, x: &Self::Element, a: &Self::Vector) -> Result<(Self::Vector, f64), ConeError>;

    /// `(‖I(x) − a‖, whether I(x) − a lies in the event)`, where the event is
    /// `‖g‖ > threshold` with the direction of `g` in `pred`.
    fn shifted_test(
        &self,
        x: &Self::Element,
        a: &Self::Vector,
        pred: &DirectionPredicate,
        threshold: f64,
    ) -> Result<(f64, bool), ConeError>;
}

/// Everything the Monte Carlo lab needs from a cone.
pub trait LabCone: SpectralCone + Embeddable {
    /// Random elements and probes for the axiom suite.
    fn sampler(&self) -> Box<dyn ElementSampler<Self::Element> + Send + Sync>;

    /// `P(S_n ∈ λU)` in closed form, when available.
    fn exact_prob(&self, spec: &RegVarSpec, pred: &DirectionPredicate, r: f64, n: u64, lambda: f64) -> Option<f64> {
        let _ = (spec, pred, r, n, lambda);
        None
    }

    /// The `level` quantile of `‖S_n‖`, when known in closed form.
    fn exact_norm_quantile(&self, spec: &RegVarSpec, n: u64, level: f64) -> Option<f64> {
        let _ = (spec, n, level);
        None
    }

    /// A bound on `(n q σ − P(S_n ∈ λU)) / P(S_n ∈ λU)` with `q = P(ζ > λr)`,
    /// when one is known.
    fn single_jump_gap_bound(&self, n: u64, q: f64) -> Option<f64> {
        let _ = (n, q);
        None
    }
}

fn not_embeddable(name: &str) -> ConeError {
    ConeError::NotEmbeddable { cone: name.to_string() }
}

fn parse_error(e: serde_json::Error) -> ConeError {
    ConeError::InvalidElement(format!("embedded vector: {e}"))
}

macro_rules! no_embedding {
    ($cone:ty) => {
        impl Embeddable for $cone {
            type Vector = ();

            fn embed(&self, _: &Self::Element) -> Result<(), ConeError> {
                Err(not_embeddable(self.name()))
            }

            fn vector_norm(&self, _: &()) -> f64 {
                f64::NAN
            }

            fn vector_scale(&self, _: f64, _: &()) {}

            fn coordinate_len(&self) -> Result<usize, ConeError> {
                Err(not_embeddable(self.name()))
            }

            fn accumulate(&self, _: &Self::Element, _: &mut [f64], _: &mut [f64]) {
                unreachable!("cone `{}` has no embedding", self.name())
            }

            fn from_coordinates(&self, _: Vec<f64>) {}

            fn parse_vector(&self, _: &serde_json::Value) -> Result<(), ConeError> {
                Err(not_embeddable(self.name()))
            }

            fn embedded_difference(&self, _: &Self::Element, _: &()) -> Result<((), f64), ConeError> {
                Err(not_embeddable(self.name()))
            }

            fn shifted_test(
                &self,
                _: &Self::Element,
                _: &(),
                _: &DirectionPredicate,
                _: f64,
            ) -> Result<(f64, bool), ConeError> {
                Err(not_embeddable(self.name()))
            }
        }
    };
}

no_embedding!(MaxCone);
no_embedding!(UnionCone);

impl LabCone for MaxCone {
    fn sampler(&self) -> Box<dyn ElementSampler<f64> + Send + Sync> {
        Box::new(MaxSampler)
    }

    /// `S_n = max ξ_i`, so `P(S_n > λr) = 1 − (1 − q)^n` with `q = P(ζ > λr)`.
    fn exact_prob(&self, spec: &RegVarSpec, pred: &DirectionPredicate, r: f64, n: u64, lambda: f64) -> Option<f64> {
        let full = match pred {
            DirectionPredicate::FullSphere => true,
            DirectionPredicate::CoordinateThreshold { c } => *c <= 1.0,
            _ => return None,
        };
        Some(if full { exact_max_cone_prob(spec, r, n, lambda) } else { 0.0 })
    }

    /// `P(max ζ_i ≤ x) = (1 − P(ζ > x))^n`.
    fn exact_norm_quantile(&self, spec: &RegVarSpec, n: u64, level: f64) -> Option<f64> {
        let tail = -(level.ln() / n as f64).exp_m1();
        Some(spec.inverse_tail(tail))
    }

    /// Bonferroni: `nq(1 − b) ≤ 1 − (1 − q)^n ≤ nq` with `b = (n − 1)q/2`,
    /// so the gap is at most `b/(1 − b)` while `b < 1`.
    fn single_jump_gap_bound(&self, n: u64, q: f64) -> Option<f64> {
        let b = (n as f64 - 1.0) * q / 2.0;
        (b < 1.0).then(|| b / (1.0 - b))
    }
}

/// `1 − (1 − q)^n` for `q = P(ζ > λr)`, computed without cancellation.
pub fn exact_max_cone_prob(spec: &RegVarSpec, r: f64, n: u64, lambda: f64) -> f64 {
    let q = spec.tail_prob(lambda * r);
    -(n as f64 * (-q).ln_1p()).exp_m1()
}

impl LabCone for UnionCone {
    fn sampler(&self) -> Box<dyn ElementSampler<FinitePointSet> + Send + Sync> {
        Box::new(PointSetSampler { dim: self.dim() })
    }
}

impl Embeddable for ConvexBodiesCone {
    /// Support values on the cone's direction grid.
    type Vector = Vec<f64>;

    fn embed(&self, x: &Polytope) -> Result<Vec<f64>, ConeError> {
        if x.dim() != self.dim() {
            return Err(ConeError::DimensionMismatch { left: self.dim(), right: x.dim() });
        }
        Ok(self.support_values(x))
    }

    fn vector_norm(&self, v: &Vec<f64>) -> f64 {
        self.values_norm(v)
    }

    fn vector_scale(&self, a: f64, v: &Vec<f64>) -> Vec<f64> {
        v.iter().map(|x| a * x).collect()
    }

    fn coordinate_len(&self) -> Result<usize, ConeError> {
        Ok(self.grid().len())
    }

    fn accumulate(&self, x: &Polytope, sum: &mut [f64], sum_sq: &mut [f64]) {
        for ((h, s), q) in self.support_values(x).into_iter().zip(sum).zip(sum_sq) {
            *s += h;
            *q += h * h;
        }
    }

    fn from_coordinates(&self, coords: Vec<f64>) -> Vec<f64> {
        coords
    }

    fn parse_vector(&self, value: &serde_json::Value) -> Result<Vec<f64>, ConeError> {
        if value.is_object() {
            let p: Polytope = serde_json::from_value(value.clone()).map_err(parse_error)?;
            return self.embed(&p);
        }
        let v: Vec<f64> = serde_json::from_value(value.clone()).map_err(parse_error)?;
        if v.len() != self.grid().len() {
            return Err(ConeError::DimensionMismatch { left: self.grid().len(), right: v.len() });
        }
        Ok(v)
    }

    fn embedded_difference(&self, x: &Polytope, a: &Vec<f64>) -> Result<(Vec<f64>, f64), ConeError> {
        if a.len() != self.grid().len() {
            return Err(ConeError::DimensionMismatch { left: self.grid().len(), right: a.len() });
        }
        let g: Vec<f64> = self.embed(x)?.iter().zip(a).map(|(h, m)| h - m).collect();
        let norm = self.values_norm(&g);
        Ok((g, norm))
    }

    fn shifted_test(
        &self,
        x: &Polytope,
        a: &Vec<f64>,
        pred: &DirectionPredicate,
        threshold: f64,
    ) -> Result<(f64, bool), ConeError> {
        let (_, norm) = self.embedded_difference(x, a)?;
        if !(norm > threshold) {
            return Ok((norm, false));
        }
        let hit = match pred {
            DirectionPredicate::FullSphere => true,
            DirectionPredicate::SupportThreshold { u0, c } => {
                self.check_predicate(pred)?;
                let mut u = [0.0; 3];
                u[..u0.len()].copy_from_slice(u0);
                let m = a[self.grid().nearest(&u)];
                (support_function(x, u0) - m) / norm >= *c
            }
            other => {
                self.check_predicate(other)?;
                unreachable!()
            }
        };
        Ok((norm, hit))
    }
}

impl LabCone for ConvexBodiesCone {
    fn sampler(&self) -> Box<dyn ElementSampler<Polytope> + Send + Sync> {
        Box::new(PolytopeSampler { dim: self.dim() })
    }
}

impl Embeddable for FunctionsCone {
    /// A piecewise-linear element of `L2(x dx)`, possibly signed.
    type Vector = GridFunction;

    fn embed(&self, x: &GridFunction) -> Result<GridFunction, ConeError> {
        Ok(x.clone())
    }

    fn vector_norm(&self, v: &GridFunction) -> f64 {
        weighted_norm_sq(v).sqrt()
    }

    fn vector_scale(&self, a: f64, v: &GridFunction) -> GridFunction {
        v.multiplied(a)
    }

    fn coordinate_len(&self) -> Result<usize, ConeError> {
        Ok(self.tabulation().len())
    }

    fn accumulate(&self, x: &GridFunction, sum: &mut [f64], sum_sq: &mut [f64]) {
        let tab = self.tabulation();
        let (knots, values) = (x.knots(), x.values());
        let end = tab.partition_point(|&t| t < x.support_end());
        let mut j = 0;
        for i in 0..end {
            let t = tab[i];
            while j + 1 < knots.len() && knots[j + 1] <= t {
                j += 1;
            }
            let v = if j + 1 < knots.len() {
                let w = (t - knots[j]) / (knots[j + 1] - knots[j]);
                values[j] + w * (values[j + 1] - values[j])
            } else {
                values[j]
            };
            sum[i] += v;
            sum_sq[i] += v * v;
        }
    }

    fn from_coordinates(&self, mut coords: Vec<f64>) -> GridFunction {
        if let Some(last) = coords.last_mut() {
            *last = 0.0;
        }
        GridFunction::new(self.tabulation().to_vec(), coords).expect("tabulation knots are valid")
    }

    fn parse_vector(&self, value: &serde_json::Value) -> Result<GridFunction, ConeError> {
        if value.is_object() {
            return serde_json::from_value(value.clone()).map_err(parse_error);
        }
        let v: Vec<f64> = serde_json::from_value(value.clone()).map_err(parse_error)?;
        if v.len() != self.tabulation().len() {
            return Err(ConeError::DimensionMismatch { left: self.tabulation().len(), right: v.len() });
        }
        GridFunction::new(self.tabulation().to_vec(), v)
    }

    fn embedded_difference(&self, x: &GridFunction, a: &GridFunction) -> Result<(GridFunction, f64), ConeError> {
        let g = x.minus(a);
        let norm = weighted_norm_sq(&g).max(0.0).sqrt();
        Ok((g, norm))
    }

    fn shifted_test(
        &self,
        x: &GridFunction,
        a: &GridFunction,
        pred: &DirectionPredicate,
        threshold: f64,
    ) -> Result<(f64, bool), ConeError> {
        let (g, norm) = self.embedded_difference(x, a)?;
        if !(norm > threshold) {
            return Ok((norm, false));
        }
        // The argument-rescaling action extends to signed functions, so the
        // cone's own direction test applies to g unchanged.
        Ok((norm, self.test_direction_of(pred, &g, norm)?))
    }
}

impl LabCone for FunctionsCone {
    fn sampler(&self) -> Box<dyn ElementSampler<GridFunction> + Send + Sync> {
        Box::new(FunctionSampler)
    }
}
