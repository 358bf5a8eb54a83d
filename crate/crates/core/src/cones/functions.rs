//! Continuous functions on `[0, ∞)` with pointwise addition, argument
//! rescaling `(a·f)(x) = f(x/a)` and the metric
//! `d(f, g) = (∫₀^∞ x (f − g)² dx)^{1/2}`.
//!
//! Elements are compactly supported piecewise-linear functions, so sums
//! stay in the class and every metric integral has a closed form.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::cone::{ClaimsOverride, Cone, ConeError, ConeFlags, DirectionPredicate, ElementSampler};

/// A piecewise-linear function through `(knots[i], values[i])`, zero beyond
/// the last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFunctionRepr", into = "GridFunctionRepr")]
pub struct GridFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFunctionRepr {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<GridFunctionRepr> for GridFunction {
    type Error = ConeError;

    fn try_from(r: GridFunctionRepr) -> Result<Self, ConeError> {
        GridFunction::new(r.knots, r.values)
    }
}

impl From<GridFunction> for GridFunctionRepr {
    fn from(f: GridFunction) -> Self {
        GridFunctionRepr {
            knots: f.knots,
            values: f.values,
        }
    }
}

impl GridFunction {
    /// Validates: knots strictly increasing from 0, finite, one value per
    /// knot, and a zero last value (continuity at the end of the support).
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self, ConeError> {
        let bad = |m: &str| Err(ConeError::InvalidElement(format!("grid function: {m}")));
        if knots.is_empty() {
            return bad("needs at least one knot");
        }
        if knots.len() != values.len() {
            return bad("knots and values differ in length");
        }
        if knots[0] != 0.0 {
            return bad("first knot must be 0");
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return bad("non-finite entry");
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return bad("knots must be strictly increasing");
        }
        if *values.last().unwrap() != 0.0 {
            return bad("last value must be 0");
        }
        Ok(Self { knots, values })
    }

    pub fn zero() -> Self {
        Self {
            knots: vec![0.0],
            values: vec![0.0],
        }
    }

    /// Hat rising from 0 at `center − half_width` to 1 at `center` and back
    /// to 0 at `center + half_width`; requires `0 < half_width ≤ center`.
    pub fn hat(center: f64, half_width: f64) -> Result<Self, ConeError> {
        if !(half_width > 0.0 && half_width <= center) {
            return Err(ConeError::InvalidElement(format!(
                "hat needs 0 < half_width <= center, got center {center}, half_width {half_width}"
            )));
        }
        let lo = center - half_width;
        if lo == 0.0 {
            Self::new(vec![0.0, center, center + half_width], vec![0.0, 1.0, 0.0])
        } else {
            Self::new(vec![0.0, lo, center, center + half_width], vec![0.0, 0.0, 1.0, 0.0])
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// End of the support.
    pub fn support_end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 || x >= self.support_end() {
            return 0.0;
        }
        let i = self.knots.partition_point(|k| *k <= x) - 1;
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let t = (x - x0) / (x1 - x0);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    /// `(a·f)(x) = f(x/a)`: knots stretch by `a`, values are unchanged.
    pub fn rescaled(&self, a: f64) -> Self {
        Self {
            knots: self.knots.iter().map(|k| a * k).collect(),
            values: self.values.clone(),
        }
    }

    /// Ordinary vector-space scaling `x ↦ c f(x)`.
    pub fn multiplied(&self, c: f64) -> Self {
        Self {
            knots: self.knots.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Pointwise `f + g` on the merged knot set.
    pub fn plus(&self, g: &GridFunction) -> Self {
        self.combine(g, |a, b| a + b)
    }

    /// Pointwise `f − g` on the merged knot set.
    pub fn minus(&self, g: &GridFunction) -> Self {
        self.combine(g, |a, b| a - b)
    }

    fn combine(&self, g: &GridFunction, op: impl Fn(f64, f64) -> f64) -> Self {
        let mut knots = Vec::with_capacity(self.knots.len() + g.knots.len());
        let mut values = Vec::with_capacity(knots.capacity());
        let (mut i, mut j) = (0, 0);
        while i < self.knots.len() || j < g.knots.len() {
            let x = match (self.knots.get(i), g.knots.get(j)) {
                (Some(a), Some(b)) => a.min(*b),
                (Some(a), None) => *a,
                (None, Some(b)) => *b,
                (None, None) => unreachable!(),
            };
            let fv = value_at_cursor(self, &mut i, x);
            let gv = value_at_cursor(g, &mut j, x);
            knots.push(x);
            values.push(op(fv, gv));
        }
        Self { knots, values }
    }

    /// `Σ fᵢ` over many functions in `O(K log K)` for `K` total knots.
    ///
    /// Each function is written as its value at 0 plus hinges
    /// `cₖ (x − xₖ)₊`; the hinges of all terms are merged by position and the
    /// sum is rebuilt by accumulating slopes.
    pub fn sum_many(items: &[GridFunction]) -> Self {
        let mut hinges: Vec<(f64, f64)> = Vec::new();
        let mut v0 = 0.0;
        for f in items {
            v0 += f.values[0];
            let mut prev_slope = 0.0;
            for k in 0..f.knots.len() - 1 {
                let slope = (f.values[k + 1] - f.values[k]) / (f.knots[k + 1] - f.knots[k]);
                hinges.push((f.knots[k], slope - prev_slope));
                prev_slope = slope;
            }
            hinges.push((f.support_end(), -prev_slope));
        }
        hinges.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut knots = vec![0.0];
        let mut values = vec![v0];
        let mut slope = 0.0;
        let mut x = 0.0;
        let mut v = v0;
        let mut idx = 0;
        while idx < hinges.len() {
            let pos = hinges[idx].0;
            if pos > x {
                v += slope * (pos - x);
                x = pos;
                knots.push(x);
                values.push(v);
            }
            while idx < hinges.len() && hinges[idx].0 == pos {
                slope += hinges[idx].1;
                idx += 1;
            }
        }
        *values.last_mut().unwrap() = 0.0;
        Self { knots, values }
    }
}

/// Value of `f` at `x` during a left-to-right sweep, where `*cursor` is the
/// first knot of `f` not yet passed. Advances the cursor past `x` if `x` is a
/// knot.
fn value_at_cursor(f: &GridFunction, cursor: &mut usize, x: f64) -> f64 {
    let i = *cursor;
    if i < f.knots.len() && f.knots[i] == x {
        *cursor += 1;
        return f.values[i];
    }
    if i == 0 || i == f.knots.len() {
        return 0.0;
    }
    let (x0, x1) = (f.knots[i - 1], f.knots[i]);
    let t = (x - x0) / (x1 - x0);
    f.values[i - 1] + t * (f.values[i] - f.values[i - 1])
}

/// `∫ x f(x) g(x) dx` over one segment `[x0, x0 + h]` on which `f` goes
/// linearly from `f0` to `f0 + df` and `g` from `g0` to `g0 + dg`.
fn segment_inner(x0: f64, h: f64, f0: f64, df: f64, g0: f64, dg: f64) -> f64 {
    let a = f0 * g0;
    let b = f0 * dg + g0 * df;
    let c = df * dg;
    h * (x0 * a + (x0 * b + h * a) / 2.0 + (x0 * c + h * b) / 3.0 + h * c / 4.0)
}

/// `⟨f, g⟩ = ∫₀^∞ x f(x) g(x) dx`, exact, in one sweep over both knot lists.
pub fn weighted_inner(f: &GridFunction, g: &GridFunction) -> f64 {
    let end = f.support_end().min(g.support_end());
    let (mut i, mut j) = (0, 0);
    let (mut px, mut pf, mut pg) = (0.0, f.values[0], g.values[0]);
    i += 1;
    j += 1;
    let mut total = 0.0;
    while px < end {
        let x = match (f.knots.get(i), g.knots.get(j)) {
            (Some(a), Some(b)) => a.min(*b),
            (Some(a), None) => *a,
            (None, Some(b)) => *b,
            (None, None) => break,
        };
        let x = x.min(end);
        let fv = value_at_cursor(f, &mut i, x);
        let gv = value_at_cursor(g, &mut j, x);
        total += segment_inner(px, x - px, pf, fv - pf, pg, gv - pg);
        (px, pf, pg) = (x, fv, gv);
    }
    total
}

/// `‖f‖² = ∫₀^∞ x f(x)² dx`, exact.
pub fn weighted_norm_sq(f: &GridFunction) -> f64 {
    f.knots
        .windows(2)
        .zip(f.values.windows(2))
        .map(|(k, v)| segment_inner(k[0], k[1] - k[0], v[0], v[1] - v[0], v[0], v[1] - v[0]))
        .sum::<f64>()
        .max(0.0)
}

/// `d(f, g)`, computed on the pointwise difference.
pub fn weighted_distance(f: &GridFunction, g: &GridFunction) -> f64 {
    weighted_norm_sq(&f.minus(g)).sqrt()
}

pub const FUNCTIONS_FLAGS: ConeFlags = ConeFlags {
    pointed: true,
    sub_invariant: true,
    invariant: true,
    // (a+b)·f = f(·/(a+b)) differs from f(·/a) + f(·/b).
    second_distributive: false,
    neutral_identity: true,
};

/// Grid on which embedded draws of the functions cone are averaged: uniform
/// steps up to `uniform_max`, then `geometric_points` geometrically spaced
/// knots up to `max` (where the average is cut to zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulationGrid {
    pub step: f64,
    pub uniform_max: f64,
    pub max: f64,
    pub geometric_points: usize,
}

impl Default for TabulationGrid {
    fn default() -> Self {
        Self {
            step: 0.01,
            uniform_max: 8.0,
            max: 1e4,
            geometric_points: 300,
        }
    }
}

impl TabulationGrid {
    pub fn knots(&self) -> Result<Vec<f64>, ConeError> {
        let ok = self.step > 0.0
            && self.uniform_max > self.step
            && self.max > self.uniform_max
            && self.geometric_points >= 1
            && self.max.is_finite();
        if !ok {
            return Err(ConeError::InvalidElement(format!("invalid tabulation grid {self:?}")));
        }
        let n = (self.uniform_max / self.step).round() as usize;
        let mut knots: Vec<f64> = (0..=n).map(|i| i as f64 * self.step).collect();
        let last = *knots.last().unwrap();
        let ratio = (self.max / last).powf(1.0 / self.geometric_points as f64);
        for i in 1..=self.geometric_points {
            knots.push(last * ratio.powi(i as i32));
        }
        *knots.last_mut().unwrap() = self.max;
        Ok(knots)
    }
}

#[derive(Debug, Clone)]
pub struct FunctionsCone {
    flags: ConeFlags,
    tabulation: Vec<f64>,
}

impl Default for FunctionsCone {
    fn default() -> Self {
        Self {
            flags: FUNCTIONS_FLAGS,
            tabulation: TabulationGrid::default().knots().expect("default grid"),
        }
    }
}

impl FunctionsCone {
    pub fn new(tabulation: &TabulationGrid) -> Result<Self, ConeError> {
        Ok(Self {
            flags: FUNCTIONS_FLAGS,
            tabulation: tabulation.knots()?,
        })
    }

    pub fn with_claims(mut self, claims: &ClaimsOverride) -> Self {
        self.flags = self.flags.apply(claims);
        self
    }

    /// Knots used to tabulate averages of embedded elements.
    pub fn tabulation(&self) -> &[f64] {
        &self.tabulation
    }

    fn correlation(&self, template: &GridFunction, x: &GridFunction, norm: f64) -> Result<f64, ConeError> {
        let tn = weighted_norm_sq(template).sqrt();
        if !(tn > 0.0) {
            return Err(ConeError::InvalidElement("correlation template has zero norm".into()));
        }
        Ok(weighted_inner(x, template) / (tn * norm))
    }
}

/// The functions cone with the default tabulation grid.
pub fn functions_cone() -> FunctionsCone {
    FunctionsCone::default()
}

impl Cone for FunctionsCone {
    type Element = GridFunction;

    fn name(&self) -> &'static str {
        "functions"
    }

    fn add(&self, x: &GridFunction, y: &GridFunction) -> GridFunction {
        x.plus(y)
    }

    fn scale(&self, a: f64, x: &GridFunction) -> GridFunction {
        x.rescaled(a)
    }

    fn neutral(&self) -> GridFunction {
        GridFunction::zero()
    }

    fn origin(&self) -> GridFunction {
        GridFunction::zero()
    }

    fn distance(&self, x: &GridFunction, y: &GridFunction) -> f64 {
        weighted_distance(x, y)
    }

    fn flags(&self) -> ConeFlags {
        self.flags
    }

    fn norm(&self, x: &GridFunction) -> f64 {
        weighted_norm_sq(x).sqrt()
    }

    fn test_direction(&self, pred: &DirectionPredicate, unit: &GridFunction) -> Result<bool, ConeError> {
        self.test_direction_of(pred, unit, 1.0)
    }

    fn test_direction_of(&self, pred: &DirectionPredicate, x: &GridFunction, norm: f64) -> Result<bool, ConeError> {
        match pred {
            DirectionPredicate::FullSphere => Ok(true),
            DirectionPredicate::CorrelationThreshold { template, theta } => {
                // The direction of x is x(·‖x‖); with y = ‖x‖ t,
                // ⟨x(‖x‖ ·), g⟩ = ‖x‖⁻² ⟨x, g(· /‖x‖)⟩.
                let stretched = template.rescaled(norm);
                let tn = weighted_norm_sq(template).sqrt();
                if !(tn > 0.0) {
                    return Err(ConeError::InvalidElement("correlation template has zero norm".into()));
                }
                Ok(weighted_inner(x, &stretched) / (norm * norm * tn) >= *theta)
            }
            other => Err(other.unsupported(self.name())),
        }
    }

    fn check_predicate(&self, pred: &DirectionPredicate) -> Result<(), ConeError> {
        match pred {
            DirectionPredicate::FullSphere => Ok(()),
            DirectionPredicate::CorrelationThreshold { template, .. } => {
                self.correlation(template, template, weighted_norm_sq(template).sqrt())
                    .map(|_| ())
            }
            other => Err(other.unsupported(self.name())),
        }
    }

    fn sum(&self, items: &[GridFunction]) -> GridFunction {
        GridFunction::sum_many(items)
    }
}

/// Embedded-vector form of the correlation test: `⟨g, template⟩ /
/// (‖g‖ ‖template‖) ≥ θ`, with `g` an element of `L2(x dx)` rather than of the
/// cone (so no argument rescaling is involved).
pub fn correlation_holds(g: &GridFunction, g_norm: f64, template: &GridFunction, theta: f64) -> bool {
    let tn = weighted_norm_sq(template).sqrt();
    tn > 0.0 && weighted_inner(g, template) / (g_norm * tn) >= theta
}

/// Random grid functions with 1–5 interior knots and values in `[-1, 1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FunctionSampler;

impl ElementSampler<GridFunction> for FunctionSampler {
    fn element(&self, rng: &mut dyn RngCore) -> GridFunction {
        let k = rng.random_range(1..=5);
        let mut knots = vec![0.0];
        let mut values = vec![rng.random_range(-1.0..1.0)];
        for _ in 0..k {
            let next = knots.last().unwrap() + rng.random_range(0.05..2.0);
            knots.push(next);
            values.push(rng.random_range(-1.0..1.0));
        }
        knots.push(knots.last().unwrap() + rng.random_range(0.05..2.0));
        values.push(0.0);
        GridFunction::new(knots, values).expect("valid by construction")
    }
}
