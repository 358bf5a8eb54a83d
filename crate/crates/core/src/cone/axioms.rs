//! Randomized verification of the cone axioms.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{Cone, ConeError};
use crate::rng::{Purpose, StreamKey};

/// Source of test elements for [`axiom_suite`].
pub trait ElementSampler<E> {
    fn element(&self, rng: &mut dyn RngCore) -> E;

    /// Fixed elements used (in order, cycling) for the first trial, before
    /// any random draw. The first trial also uses the scalars `a = b = 1`.
    fn probes(&self) -> Vec<E> {
        Vec::new()
    }
}

impl<E, T: ElementSampler<E> + ?Sized> ElementSampler<E> for Box<T> {
    fn element(&self, rng: &mut dyn RngCore) -> E {
        (**self).element(rng)
    }

    fn probes(&self) -> Vec<E> {
        (**self).probes()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub elements: Vec<serde_json::Value>,
    pub scalars: Vec<f64>,
    /// Left- and right-hand sides of the violated relation.
    pub lhs: f64,
    pub rhs: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomEntry {
    pub axiom: String,
    /// Whether the cone's contract (or one of its flags) claims this axiom.
    pub declared: bool,
    pub status: AxiomStatus,
    pub checked: u64,
    pub failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub cone: String,
    pub trials: u64,
    pub tol: f64,
    pub entries: Vec<AxiomEntry>,
}

impl AxiomReport {
    pub fn entry(&self, axiom: &str) -> Option<&AxiomEntry> {
        self.entries.iter().find(|e| e.axiom == axiom)
    }

    pub fn declared_failures(&self) -> impl Iterator<Item = &AxiomEntry> {
        self.entries
            .iter()
            .filter(|e| e.declared && e.status == AxiomStatus::Fail)
    }

    pub fn all_declared_pass(&self) -> bool {
        self.declared_failures().next().is_none()
    }

    /// Turns the first failing declared axiom into an error.
    pub fn into_result(self) -> Result<Self, ConeError> {
        if let Some(e) = self.declared_failures().next() {
            let witness = e
                .counterexample
                .as_ref()
                .map(|c| c.detail.clone())
                .unwrap_or_default();
            return Err(ConeError::AxiomViolation {
                axiom: e.axiom.clone(),
                witness,
            });
        }
        Ok(self)
    }
}

pub const METRIC_IDENTITY: &str = "metric_identity";
pub const METRIC_SYMMETRY: &str = "metric_symmetry";
pub const TRIANGLE_INEQUALITY: &str = "triangle_inequality";
pub const HOMOGENEITY: &str = "homogeneity";
pub const SCALING_ACTION: &str = "scaling_action";
pub const FIRST_DISTRIBUTIVITY: &str = "first_distributivity";
pub const COMMUTATIVITY: &str = "commutativity";
pub const ASSOCIATIVITY: &str = "associativity";
pub const NEUTRAL_IDENTITY: &str = "neutral_identity";
pub const POINTEDNESS: &str = "pointedness";
pub const SUB_INVARIANCE: &str = "sub_invariance";
pub const NORM_SUBADDITIVITY: &str = "norm_subadditivity";
pub const INVARIANCE: &str = "invariance";
pub const SECOND_DISTRIBUTIVITY: &str = "second_distributivity";

struct Tally {
    entries: Vec<AxiomEntry>,
}

impl Tally {
    fn new(f: super::ConeFlags) -> Self {
        let declared = [
            (METRIC_IDENTITY, true),
            (METRIC_SYMMETRY, true),
            (TRIANGLE_INEQUALITY, true),
            (HOMOGENEITY, true),
            (SCALING_ACTION, true),
            (FIRST_DISTRIBUTIVITY, true),
            (COMMUTATIVITY, true),
            (ASSOCIATIVITY, true),
            (NEUTRAL_IDENTITY, f.neutral_identity),
            (POINTEDNESS, f.pointed),
            (SUB_INVARIANCE, f.sub_invariant),
            (NORM_SUBADDITIVITY, f.sub_invariant),
            (INVARIANCE, f.invariant),
            (SECOND_DISTRIBUTIVITY, f.second_distributive),
        ];
        let entries = declared
            .into_iter()
            .map(|(axiom, declared)| AxiomEntry {
                axiom: axiom.to_string(),
                declared,
                status: AxiomStatus::Pass,
                checked: 0,
                failures: 0,
                counterexample: None,
            })
            .collect();
        Self { entries }
    }

    #[allow(clippy::too_many_arguments)]
    fn record<E: Serialize>(
        &mut self,
        axiom: &str,
        ok: bool,
        elements: &[&E],
        scalars: &[f64],
        lhs: f64,
        rhs: f64,
        relation: &str,
    ) {
        let e = self
            .entries
            .iter_mut()
            .find(|e| e.axiom == axiom)
            .expect("unknown axiom");
        e.checked += 1;
        if ok {
            return;
        }
        e.failures += 1;
        e.status = AxiomStatus::Fail;
        if e.counterexample.is_none() {
            e.counterexample = Some(Counterexample {
                elements: elements
                    .iter()
                    .map(|x| serde_json::to_value(x).unwrap_or(serde_json::Value::Null))
                    .collect(),
                scalars: scalars.to_vec(),
                lhs,
                rhs,
                detail: format!("{relation}: lhs = {lhs}, rhs = {rhs}"),
            });
        }
    }
}

/// Checks the cone axioms on `trials` sampled configurations `(x, y, z, a, b)`.
///
/// Always-required axioms: metric identity, symmetry and triangle
/// inequality; homogeneity; the action law `a(bx) = (ab)x`; first
/// distributivity; commutativity and associativity. Neutral identity,
/// pointedness, sub-invariance (with norm subadditivity), invariance and
/// second distributivity are checked always but are *declared* only when the
/// matching flag is claimed. Use [`AxiomReport::into_result`] to turn a
/// declared failure into [`ConeError::AxiomViolation`].
pub fn axiom_suite<C, S>(cone: &C, sampler: &S, trials: u64, tol: f64, seed: u64) -> AxiomReport
where
    C: Cone,
    S: ElementSampler<C::Element>,
{
    assert!(trials >= 1, "axiom suite needs at least one trial");
    let key = StreamKey::new(seed, Purpose::Auxiliary, 0);
    let probes = sampler.probes();
    let mut tally = Tally::new(cone.flags());
    let origin = cone.origin();
    let neutral = cone.neutral();

    for t in 0..trials {
        let mut rng = key.replicate(t);
        let (x, y, z, a, b) = if t == 0 && !probes.is_empty() {
            let p = |i: usize| probes[i % probes.len()].clone();
            (p(0), p(1), p(2), 1.0, 1.0)
        } else {
            let x = sampler.element(&mut rng);
            let y = sampler.element(&mut rng);
            let z = sampler.element(&mut rng);
            (x, y, z, log_uniform(&mut rng), log_uniform(&mut rng))
        };
        check_one(cone, &mut tally, &x, &y, &z, a, b, tol, &origin, &neutral);
    }

    AxiomReport {
        cone: cone.name().to_string(),
        trials,
        tol,
        entries: tally.entries,
    }
}

fn log_uniform(rng: &mut dyn RngCore) -> f64 {
    // a ∈ [1/16, 16]
    (rng.random_range(-4.0f64..4.0)).exp2()
}

#[allow(clippy::too_many_arguments)]
fn check_one<C: Cone>(
    cone: &C,
    tally: &mut Tally,
    x: &C::Element,
    y: &C::Element,
    z: &C::Element,
    a: f64,
    b: f64,
    tol: f64,
    origin: &C::Element,
    neutral: &C::Element,
) {
    let d = |u: &C::Element, v: &C::Element| cone.distance(u, v);
    let nx = cone.norm(x);
    let ny = cone.norm(y);
    let nz = cone.norm(z);
    let mag = 1.0 + nx.max(ny).max(nz);

    // Metric axioms.
    let dxx = d(x, x);
    tally.record(METRIC_IDENTITY, dxx <= tol * mag, &[x], &[], dxx, 0.0, "d(x,x) = 0");
    let (dxy, dyx) = (d(x, y), d(y, x));
    tally.record(
        METRIC_SYMMETRY,
        dxy >= 0.0 && (dxy - dyx).abs() <= tol * mag,
        &[x, y],
        &[],
        dxy,
        dyx,
        "d(x,y) = d(y,x)",
    );
    let (dxz, dyz) = (d(x, z), d(y, z));
    tally.record(
        TRIANGLE_INEQUALITY,
        dxz <= dxy + dyz + tol * mag,
        &[x, y, z],
        &[],
        dxz,
        dxy + dyz,
        "d(x,z) <= d(x,y) + d(y,z)",
    );

    // Homogeneity.
    let (ax, ay) = (cone.scale(a, x), cone.scale(a, y));
    let lhs = d(&ax, &ay);
    tally.record(
        HOMOGENEITY,
        (lhs - a * dxy).abs() <= tol * (1.0 + a * dxy),
        &[x, y],
        &[a],
        lhs,
        a * dxy,
        "d(a x, a y) = a d(x,y)",
    );

    // Action law.
    let abx = cone.scale(a, &cone.scale(b, x));
    let ab_x = cone.scale(a * b, x);
    let dev = d(&abx, &ab_x);
    tally.record(
        SCALING_ACTION,
        dev <= tol * (1.0 + a * b * nx),
        &[x],
        &[a, b],
        dev,
        0.0,
        "d(a(b x), (ab) x) = 0",
    );

    // First distributivity.
    let xy = cone.add(x, y);
    let a_xy = cone.scale(a, &xy);
    let ax_ay = cone.add(&ax, &ay);
    let dev = d(&a_xy, &ax_ay);
    tally.record(
        FIRST_DISTRIBUTIVITY,
        dev <= tol * (1.0 + a * (nx + ny)),
        &[x, y],
        &[a],
        dev,
        0.0,
        "d(a(x+y), a x + a y) = 0",
    );

    // Semigroup laws.
    let yx = cone.add(y, x);
    let dev = d(&xy, &yx);
    tally.record(COMMUTATIVITY, dev <= tol * mag, &[x, y], &[], dev, 0.0, "d(x+y, y+x) = 0");
    let left = cone.add(&xy, z);
    let right = cone.add(x, &cone.add(y, z));
    let dev = d(&left, &right);
    tally.record(
        ASSOCIATIVITY,
        dev <= tol * mag,
        &[x, y, z],
        &[],
        dev,
        0.0,
        "d((x+y)+z, x+(y+z)) = 0",
    );
    let xe = cone.add(x, neutral);
    let dev = d(&xe, x);
    tally.record(NEUTRAL_IDENTITY, dev <= tol * mag, &[x], &[], dev, 0.0, "d(x+e, x) = 0");

    // Pointedness along a = 2^-k, k = 0..=20.
    if nx > super::ZERO_NORM {
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        let mut last = 0.0;
        for k in 0..=20 {
            let s = cone.scale((-(k as f64)).exp2(), x);
            last = d(&s, origin);
            monotone &= last <= prev + tol * mag;
            prev = last;
        }
        tally.record(
            POINTEDNESS,
            monotone && last < 1e-6 * nx,
            &[x],
            &[(-20f64).exp2()],
            last,
            1e-6 * nx,
            "d(2^-20 x, 0) < 1e-6 ‖x‖, nonincreasing along 2^-k",
        );
    }

    // Sub-invariance with h = y, and the norm subadditivity it implies.
    let lhs = d(&xy, x);
    tally.record(
        SUB_INVARIANCE,
        lhs <= ny + tol * mag,
        &[x, y],
        &[],
        lhs,
        ny,
        "d(x+h, x) <= ‖h‖",
    );
    let nxy = cone.norm(&xy);
    tally.record(
        NORM_SUBADDITIVITY,
        nxy <= nx + ny + tol * mag,
        &[x, y],
        &[],
        nxy,
        nx + ny,
        "‖x+y‖ <= ‖x‖ + ‖y‖",
    );

    // Invariance with h = z.
    let lhs = d(&cone.add(x, z), &cone.add(y, z));
    tally.record(
        INVARIANCE,
        (lhs - dxy).abs() <= tol * mag,
        &[x, y, z],
        &[],
        lhs,
        dxy,
        "d(x+h, y+h) = d(x,y)",
    );

    // Second distributivity.
    let apb = cone.scale(a + b, x);
    let sum = cone.add(&ax, &cone.scale(b, x));
    let dev = d(&apb, &sum);
    tally.record(
        SECOND_DISTRIBUTIVITY,
        dev <= tol * (1.0 + (a + b) * nx),
        &[x],
        &[a, b],
        cone.norm(&apb),
        cone.norm(&sum),
        "(a+b) x = a x + b x",
    );
}
