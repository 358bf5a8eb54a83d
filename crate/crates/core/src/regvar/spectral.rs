//! Spectral (direction) samplers and the law of `ξ = ζ·η`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{RegVarError, RegVarSpec};
use crate::cone::{direction, Cone, DirectionPredicate, PolarEvent};
use crate::cones::{ConvexBodiesCone, FinitePointSet, FunctionsCone, GridFunction, MaxCone, Polytope, PolytopeMetric, UnionCone};
use crate::rng::{Purpose, StreamKey};
use crate::stats::{wilson, Proportion};

/// Largest accepted deviation of `‖η‖` from 1.
pub const SPECTRAL_NORM_TOL: f64 = 1e-6;

/// Named spectral sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum SpectralPreset {
    /// A fixed unit-norm element; omit it for the cone's canonical choice.
    PointMassDirection {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        element: Option<serde_json::Value>,
    },
    /// Segment from the origin in a uniformly random direction.
    RotatedSegment,
    /// Hull of three points drawn uniformly from the unit disk (or ball).
    RandomTriangle,
    /// Hat function with peak at a center drawn uniformly from
    /// `[center − center_spread, center + center_spread]`.
    HatFunction {
        #[serde(default = "one")]
        center: f64,
        #[serde(default = "half")]
        half_width: f64,
        #[serde(default)]
        center_spread: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

impl Default for SpectralPreset {
    fn default() -> Self {
        SpectralPreset::PointMassDirection { element: None }
    }
}

impl SpectralPreset {
    pub fn name(&self) -> &'static str {
        match self {
            SpectralPreset::PointMassDirection { .. } => "point-mass-direction",
            SpectralPreset::RotatedSegment => "rotated-segment",
            SpectralPreset::RandomTriangle => "random-triangle",
            SpectralPreset::HatFunction { .. } => "hat-function",
        }
    }
}

type Draw<E> = Arc<dyn Fn(&mut dyn RngCore) -> E + Send + Sync>;

/// A sampler of unit-norm directions.
#[derive(Clone)]
pub enum Spectral<E> {
    Fixed(E),
    Random(Draw<E>),
}

impl<E: Clone> Spectral<E> {
    pub fn draw(&self, rng: &mut dyn RngCore) -> E {
        match self {
            Spectral::Fixed(e) => e.clone(),
            Spectral::Random(f) => f(rng),
        }
    }
}

impl<E: std::fmt::Debug> std::fmt::Debug for Spectral<E> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Spectral::Fixed(e) => f.debug_tuple("Fixed").field(e).finish(),
            Spectral::Random(_) => f.write_str("Random(..)"),
        }
    }
}

fn unavailable(preset: &SpectralPreset, cone: &str) -> RegVarError {
    RegVarError::InvalidSpec(format!("spectral preset `{}` is not available on cone `{cone}`", preset.name()))
}

fn fixed_element<C: Cone>(cone: &C, e: C::Element) -> Result<Spectral<C::Element>, RegVarError> {
    let n = cone.norm(&e);
    if (n - 1.0).abs() > SPECTRAL_NORM_TOL {
        return Err(RegVarError::SpectralNormViolation { norm: n });
    }
    Ok(Spectral::Fixed(e))
}

fn parse_element<T: serde::de::DeserializeOwned>(v: &serde_json::Value) -> Result<T, RegVarError> {
    serde_json::from_value(v.clone()).map_err(|e| RegVarError::InvalidSpec(format!("spectral element: {e}")))
}

/// Cones that know how to realize spectral presets.
pub trait SpectralCone: Cone + Clone + 'static {
    fn spectral(&self, preset: &SpectralPreset) -> Result<Spectral<Self::Element>, RegVarError>;

    /// `σ(B)` in closed form, when known for this preset.
    fn analytic_sigma(&self, preset: &SpectralPreset, pred: &DirectionPredicate) -> Option<f64> {
        let _ = preset;
        matches!(pred, DirectionPredicate::FullSphere).then_some(1.0)
    }
}

impl SpectralCone for MaxCone {
    fn spectral(&self, preset: &SpectralPreset) -> Result<Spectral<f64>, RegVarError> {
        match preset {
            SpectralPreset::PointMassDirection { element } => {
                let e = element.as_ref().map(parse_element::<f64>).transpose()?.unwrap_or(1.0);
                fixed_element(self, e)
            }
            other => Err(unavailable(other, self.name())),
        }
    }

    fn analytic_sigma(&self, _preset: &SpectralPreset, pred: &DirectionPredicate) -> Option<f64> {
        // The unit sphere is the single point 1.
        self.test_direction(pred, &1.0).ok().map(|b| if b { 1.0 } else { 0.0 })
    }
}

fn random_unit(dim: usize, rng: &mut dyn RngCore) -> [f64; 3] {
    if dim == 2 {
        let t = rng.random_range(0.0..2.0 * PI);
        [t.cos(), t.sin(), 0.0]
    } else {
        let z: f64 = rng.random_range(-1.0..1.0);
        let t = rng.random_range(0.0..2.0 * PI);
        let rho = (1.0 - z * z).max(0.0).sqrt();
        [rho * t.cos(), rho * t.sin(), z]
    }
}

fn random_in_ball(dim: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if p.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            return p;
        }
    }
}

impl SpectralCone for ConvexBodiesCone {
    fn spectral(&self, preset: &SpectralPreset) -> Result<Spectral<Polytope>, RegVarError> {
        let dim = self.dim();
        match preset {
            SpectralPreset::PointMassDirection { element: Some(v) } => {
                let p: Polytope = parse_element(v)?;
                if p.dim() != dim {
                    return Err(RegVarError::InvalidSpec(format!(
                        "spectral element has dimension {}, cone has {dim}",
                        p.dim()
                    )));
                }
                fixed_element(self, p)
            }
            SpectralPreset::PointMassDirection { element: None } => {
                let mut end = vec![0.0; dim];
                end[0] = 1.0;
                let seg = Polytope::segment_from_origin(&end);
                fixed_element(self, direction(self, &seg)?)
            }
            SpectralPreset::RotatedSegment => {
                let cone = self.clone();
                Ok(Spectral::Random(Arc::new(move |rng| {
                    let u = random_unit(dim, rng);
                    let seg = Polytope::segment_from_origin(&u[..dim]);
                    normalized(&cone, seg)
                })))
            }
            SpectralPreset::RandomTriangle => {
                let cone = self.clone();
                Ok(Spectral::Random(Arc::new(move |rng| loop {
                    let pts: Vec<Vec<f64>> = (0..3).map(|_| random_in_ball(dim, rng)).collect();
                    let tri = Polytope::new(pts).expect("finite");
                    if cone.norm(&tri) > 1e-9 {
                        return normalized(&cone, tri);
                    }
                })))
            }
            other => Err(unavailable(other, self.name())),
        }
    }

    fn analytic_sigma(&self, preset: &SpectralPreset, pred: &DirectionPredicate) -> Option<f64> {
        match (preset, pred) {
            (_, DirectionPredicate::FullSphere) => Some(1.0),
            (SpectralPreset::RotatedSegment, DirectionPredicate::SupportThreshold { c, .. })
                if matches!(self.metric(), PolytopeMetric::Hausdorff) =>
            {
                // Unit segment [0, v]: h(u0) = max(0, ⟨v, u0⟩).
                if *c <= 0.0 {
                    return Some(1.0);
                }
                if *c > 1.0 {
                    return Some(0.0);
                }
                Some(match self.dim() {
                    2 => c.acos() / PI,
                    _ => (1.0 - c) / 2.0,
                })
            }
            (SpectralPreset::PointMassDirection { .. }, _) => {
                let Spectral::Fixed(e) = self.spectral(preset).ok()? else {
                    return None;
                };
                self.test_direction(pred, &e).ok().map(|b| if b { 1.0 } else { 0.0 })
            }
            _ => None,
        }
    }
}

fn normalized<C: Cone>(cone: &C, x: C::Element) -> C::Element {
    let n = cone.norm(&x);
    cone.scale(1.0 / n, &x)
}

impl SpectralCone for FunctionsCone {
    fn spectral(&self, preset: &SpectralPreset) -> Result<Spectral<GridFunction>, RegVarError> {
        match preset {
            SpectralPreset::PointMassDirection { element: Some(v) } => fixed_element(self, parse_element(v)?),
            SpectralPreset::PointMassDirection { element: None } => {
                fixed_element(self, direction(self, &GridFunction::hat(1.0, 1.0)?)?)
            }
            &SpectralPreset::HatFunction {
                center,
                half_width,
                center_spread,
            } => {
                if !(center_spread >= 0.0 && center - center_spread >= half_width && half_width > 0.0) {
                    return Err(RegVarError::InvalidSpec(format!(
                        "hat-function needs 0 < half_width <= center - center_spread, got center {center}, \
                         half_width {half_width}, center_spread {center_spread}"
                    )));
                }
                let cone = self.clone();
                if center_spread == 0.0 {
                    return fixed_element(self, normalized(&cone, GridFunction::hat(center, half_width)?));
                }
                Ok(Spectral::Random(Arc::new(move |rng| {
                    let c = rng.random_range(center - center_spread..=center + center_spread);
                    normalized(&cone, GridFunction::hat(c, half_width).expect("validated"))
                })))
            }
            other => Err(unavailable(other, self.name())),
        }
    }

    fn analytic_sigma(&self, preset: &SpectralPreset, pred: &DirectionPredicate) -> Option<f64> {
        match (pred, self.spectral(preset).ok()?) {
            (DirectionPredicate::FullSphere, _) => Some(1.0),
            (_, Spectral::Fixed(e)) => self.test_direction(pred, &e).ok().map(|b| if b { 1.0 } else { 0.0 }),
            _ => None,
        }
    }
}

impl SpectralCone for UnionCone {
    fn spectral(&self, preset: &SpectralPreset) -> Result<Spectral<FinitePointSet>, RegVarError> {
        match preset {
            SpectralPreset::PointMassDirection { element } => {
                let e = match element {
                    Some(v) => parse_element(v)?,
                    None => {
                        let mut p = vec![0.0; self.dim()];
                        p[0] = 1.0;
                        FinitePointSet::new(vec![p])?
                    }
                };
                fixed_element(self, e)
            }
            other => Err(unavailable(other, self.name())),
        }
    }
}

/// The law of `ξ = ζ·η` on a given cone.
#[derive(Clone)]
pub struct ElementLaw<C: SpectralCone> {
    cone: C,
    spec: RegVarSpec,
    spectral: Spectral<C::Element>,
}

impl<C: SpectralCone> ElementLaw<C> {
    pub fn new(cone: C, spec: RegVarSpec) -> Result<Self, RegVarError> {
        spec.validate()?;
        let spectral = cone.spectral(&spec.spectral)?;
        Ok(Self { cone, spec, spectral })
    }

    pub fn cone(&self) -> &C {
        &self.cone
    }

    pub fn spec(&self) -> &RegVarSpec {
        &self.spec
    }

    pub fn spectral(&self) -> &Spectral<C::Element> {
        &self.spectral
    }

    /// One direction draw, checked to have unit norm.
    pub fn draw_direction(&self, rng: &mut dyn RngCore) -> Result<C::Element, RegVarError> {
        let eta = self.spectral.draw(rng);
        if let Spectral::Random(_) = self.spectral {
            let n = self.cone.norm(&eta);
            if (n - 1.0).abs() > SPECTRAL_NORM_TOL {
                return Err(RegVarError::SpectralNormViolation { norm: n });
            }
        }
        Ok(eta)
    }

    /// `ξ = ζ·η`, returned with `ζ = ‖ξ‖`. The radius is drawn first.
    pub fn sample(&self, rng: &mut dyn RngCore) -> Result<(C::Element, f64), RegVarError> {
        let zeta = self.spec.draw_radial(rng);
        let eta = self.draw_direction(rng)?;
        Ok((self.cone.scale(zeta, &eta), zeta))
    }

    /// `P(ξ ∈ λU)` for a single term, when `σ(B)` is known.
    pub fn single_term_prob(&self, event: &PolarEvent, lambda: f64, sigma_b: f64) -> f64 {
        sigma_b * self.spec.tail_prob(lambda * event.r)
    }
}

/// Monte Carlo estimate of `σ(B)` from `draws` spectral samples, with its
/// Wilson interval. Deterministic for a given seed.
pub fn sigma_estimate<C: SpectralCone>(
    law: &ElementLaw<C>,
    pred: &DirectionPredicate,
    draws: u64,
    seed: u64,
) -> Result<Proportion, RegVarError> {
    assert!(draws >= 1);
    let cone = law.cone();
    cone.check_predicate(pred)?;
    if matches!(pred, DirectionPredicate::FullSphere) {
        return Ok(wilson(draws, draws));
    }
    let key = StreamKey::new(seed, Purpose::Spectral, 0);
    const CHUNK: u64 = 4096;
    let chunks = draws.div_ceil(CHUNK);
    let hits = (0..chunks)
        .into_par_iter()
        .map(|ch| -> Result<u64, RegVarError> {
            let mut rng = key.replicate(ch);
            let mut k = 0u64;
            for _ in (ch * CHUNK)..((ch + 1) * CHUNK).min(draws) {
                let eta = law.draw_direction(&mut rng)?;
                k += u64::from(cone.test_direction(pred, &eta)?);
            }
            Ok(k)
        })
        .collect::<Result<Vec<u64>, _>>()?
        .into_iter()
        .sum();
    Ok(wilson(hits, draws))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{convex_bodies_cone, functions_cone, max_cone, union_cone};

    fn spec(alpha: f64, preset: SpectralPreset) -> RegVarSpec {
        RegVarSpec::pareto(alpha, 1.0, preset).unwrap()
    }

    #[test]
    fn max_cone_element_is_radius() {
        let law = ElementLaw::new(max_cone(), spec(1.5, SpectralPreset::default())).unwrap();
        let mut rng = StreamKey::new(1, Purpose::Auxiliary, 0).replicate(0);
        for _ in 0..100 {
            let (x, z) = law.sample(&mut rng).unwrap();
            assert_eq!(x, z);
        }
    }

    #[test]
    fn norms_equal_radius() {
        let mut rng = StreamKey::new(2, Purpose::Auxiliary, 0).replicate(0);
        let hat = SpectralPreset::HatFunction {
            center: 1.0,
            half_width: 0.5,
            center_spread: 0.3,
        };
        let law = ElementLaw::new(functions_cone(), spec(2.5, hat)).unwrap();
        for _ in 0..1000 {
            let (x, z) = law.sample(&mut rng).unwrap();
            assert!((law.cone().norm(&x) - z).abs() <= 1e-9 * z);
        }
        for metric in [PolytopeMetric::Hausdorff, PolytopeMetric::Lp { p: 2.0 }] {
            for preset in [SpectralPreset::RotatedSegment, SpectralPreset::RandomTriangle] {
                let law = ElementLaw::new(convex_bodies_cone(2, metric).unwrap(), spec(1.5, preset)).unwrap();
                for _ in 0..200 {
                    let (x, z) = law.sample(&mut rng).unwrap();
                    assert!((law.cone().norm(&x) - z).abs() <= 1e-9 * z);
                    let d = direction(law.cone(), &x).unwrap();
                    let eta = law.cone().scale(1.0 / z, &x);
                    assert!(law.cone().distance(&d, &eta) <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn presets_rejected_on_wrong_cone() {
        assert!(ElementLaw::new(max_cone(), spec(1.5, SpectralPreset::RotatedSegment)).is_err());
        let bad = SpectralPreset::PointMassDirection {
            element: Some(serde_json::json!(2.0)),
        };
        assert!(matches!(
            ElementLaw::new(max_cone(), spec(1.5, bad)),
            Err(RegVarError::SpectralNormViolation { .. })
        ));
        assert!(ElementLaw::new(union_cone(), spec(1.5, SpectralPreset::default())).is_ok());
    }

    #[test]
    fn sigma_trivial_cases() {
        let law = ElementLaw::new(
            convex_bodies_cone(2, PolytopeMetric::Hausdorff).unwrap(),
            spec(1.5, SpectralPreset::RotatedSegment),
        )
        .unwrap();
        let p = sigma_estimate(&law, &DirectionPredicate::FullSphere, 1000, 3).unwrap();
        assert_eq!(p.estimate, 1.0);
        let never = DirectionPredicate::SupportThreshold {
            u0: vec![1.0, 0.0],
            c: 1.5,
        };
        assert_eq!(sigma_estimate(&law, &never, 1000, 3).unwrap().estimate, 0.0);
    }

    #[test]
    fn sigma_coverage_of_angular_mass() {
        let law = ElementLaw::new(
            convex_bodies_cone(2, PolytopeMetric::Hausdorff).unwrap(),
            spec(1.5, SpectralPreset::RotatedSegment),
        )
        .unwrap();
        let pred = DirectionPredicate::SupportThreshold {
            u0: vec![0.0, 1.0],
            c: 0.5,
        };
        let truth = 1.0 / 3.0; // acos(1/2)/π
        assert_eq!(law.cone().analytic_sigma(&law.spec().spectral, &pred), Some(c_acos(0.5)));
        let covered = (0..100)
            .filter(|s| sigma_estimate(&law, &pred, 20_000, *s).unwrap().contains(truth))
            .count();
        assert!(covered >= 93, "{covered}/100");
    }

    fn c_acos(c: f64) -> f64 {
        c.acos() / PI
    }

    #[test]
    fn sigma_is_thread_count_independent() {
        let law = ElementLaw::new(
            convex_bodies_cone(2, PolytopeMetric::Hausdorff).unwrap(),
            spec(1.5, SpectralPreset::RandomTriangle),
        )
        .unwrap();
        let pred = DirectionPredicate::SupportThreshold {
            u0: vec![1.0, 0.0],
            c: 0.3,
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sigma_estimate(&law, &pred, 50_000, 8).unwrap());
        let b = four.install(|| sigma_estimate(&law, &pred, 50_000, 8).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn preset_serde() {
        let p: SpectralPreset = serde_json::from_str(r#"{"preset": "hat-function", "center_spread": 0.2}"#).unwrap();
        assert_eq!(
            p,
            SpectralPreset::HatFunction {
                center: 1.0,
                half_width: 0.5,
                center_spread: 0.2
            }
        );
        let p: SpectralPreset = serde_json::from_str(r#"{"preset": "rotated-segment"}"#).unwrap();
        assert_eq!(p, SpectralPreset::RotatedSegment);
    }
}
