//! Convex polytopes in `R²` and `R³` under Minkowski addition.
//!
//! Convex bodies are represented by polytopes so that Minkowski sums and
//! support functions are exact. Planar polytopes keep their vertices in
//! counter-clockwise order; spatial ones keep an unordered vertex set.

use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::grid::DirectionGrid;
use super::hull::{hull_2d, hull_3d, orientation};
use crate::cone::{ClaimsOverride, Cone, ConeError, ConeFlags, DirectionPredicate, ElementSampler};

type P3 = [f64; 3];

/// A nonempty convex polytope, stored as its extreme points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeRepr", into = "PolytopeRepr")]
pub struct Polytope {
    dim: usize,
    // For dim = 2 the third coordinate is zero.
    vertices: Vec<P3>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeRepr {
    vertices: Vec<Vec<f64>>,
}

impl TryFrom<PolytopeRepr> for Polytope {
    type Error = ConeError;

    fn try_from(r: PolytopeRepr) -> Result<Self, ConeError> {
        Polytope::new(r.vertices)
    }
}

impl From<Polytope> for PolytopeRepr {
    fn from(p: Polytope) -> Self {
        PolytopeRepr {
            vertices: p
                .vertices
                .iter()
                .map(|v| v[..p.dim].to_vec())
                .collect(),
        }
    }
}

impl Polytope {
    /// Convex hull of the given points, each of length 2 or 3.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, ConeError> {
        let dim = points
            .first()
            .ok_or_else(|| ConeError::InvalidElement("polytope needs at least one point".into()))?
            .len();
        if dim != 2 && dim != 3 {
            return Err(ConeError::InvalidElement(format!(
                "polytopes live in R^2 or R^3, got a point of length {dim}"
            )));
        }
        let mut pts = Vec::with_capacity(points.len());
        for p in &points {
            if p.len() != dim {
                return Err(ConeError::DimensionMismatch { left: dim, right: p.len() });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(ConeError::InvalidElement("non-finite polytope coordinate".into()));
            }
            pts.push([p[0], p[1], if dim == 3 { p[2] } else { 0.0 }]);
        }
        Ok(Self::from_points(dim, pts))
    }

    pub fn from_points_2d(points: &[[f64; 2]]) -> Self {
        assert!(!points.is_empty());
        Self::hull_of_2d(points.to_vec())
    }

    pub fn from_points_3d(points: &[[f64; 3]]) -> Self {
        assert!(!points.is_empty());
        Self::from_points(3, points.to_vec())
    }

    /// The singleton `{0}`, both neutral element and origin of the cone.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            vertices: vec![[0.0; 3]],
        }
    }

    /// Segment from the origin to `end`.
    pub fn segment_from_origin(end: &[f64]) -> Self {
        let mut pts = vec![vec![0.0; end.len()], end.to_vec()];
        if end.iter().all(|c| *c == 0.0) {
            pts.pop();
        }
        Self::new(pts).expect("valid segment")
    }

    fn from_points(dim: usize, pts: Vec<P3>) -> Self {
        if dim == 2 {
            Self::hull_of_2d(pts.iter().map(|p| [p[0], p[1]]).collect())
        } else {
            Self {
                dim,
                vertices: hull_3d(&pts),
            }
        }
    }

    fn hull_of_2d(pts: Vec<[f64; 2]>) -> Self {
        Self {
            dim: 2,
            vertices: hull_2d(pts).into_iter().map(|p| [p[0], p[1], 0.0]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.vertices.iter().map(move |v| &v[..self.dim])
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| [a * v[0], a * v[1], a * v[2]])
                .collect(),
        }
    }

    /// Largest Euclidean norm of a vertex, i.e. `d_H(P, {0})`.
    pub fn radius(&self) -> f64 {
        self.vertices.iter().map(|v| dot(*v, *v)).fold(0.0, f64::max).sqrt()
    }
}

fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn as_p3(u: &[f64]) -> P3 {
    [u[0], u[1], if u.len() > 2 { u[2] } else { 0.0 }]
}

/// `h_P(u) = max_v ⟨v, u⟩`.
pub fn support_function(p: &Polytope, u: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), p.dim);
    let u = as_p3(u);
    support_p3(p, u)
}

fn support_p3(p: &Polytope, u: P3) -> f64 {
    p.vertices
        .iter()
        .map(|v| dot(*v, u))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Support function sampled on every direction of `grid`.
pub fn support_on_grid(p: &Polytope, grid: &DirectionGrid) -> Vec<f64> {
    grid.directions().iter().map(|u| support_p3(p, *u)).collect()
}

/// `P + Q = {p + q}`, reduced to its extreme points.
pub fn polytope_minkowski_sum(p: &Polytope, q: &Polytope) -> Result<Polytope, ConeError> {
    if p.dim != q.dim {
        return Err(ConeError::DimensionMismatch { left: p.dim, right: q.dim });
    }
    Ok(minkowski_sum_all(&[p, q]))
}

/// Minkowski sum of many polytopes of one dimension.
///
/// In the plane all edge vectors are merged by angle in one pass, so the
/// cost is `O(E log E)` in the total number of edges; in space the sum is
/// folded pairwise through the hull.
pub(crate) fn minkowski_sum_all(items: &[&Polytope]) -> Polytope {
    let dim = items[0].dim;
    if dim == 3 {
        let mut acc = items[0].clone();
        for q in &items[1..] {
            let mut pts = Vec::with_capacity(acc.vertices.len() * q.vertices.len());
            for a in &acc.vertices {
                for b in &q.vertices {
                    pts.push([a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
                }
            }
            acc = Polytope {
                dim: 3,
                vertices: hull_3d(&pts),
            };
        }
        return acc;
    }

    let mut start = [0.0f64; 2];
    let mut edges: Vec<[f64; 2]> = Vec::new();
    for p in items {
        let v = &p.vertices;
        let low = lowest(v);
        start[0] += v[low][0];
        start[1] += v[low][1];
        if v.len() >= 2 {
            for i in 0..v.len() {
                let a = v[i];
                let b = v[(i + 1) % v.len()];
                edges.push([b[0] - a[0], b[1] - a[1]]);
            }
        }
    }
    edges.sort_by(|a, b| angle_order(*a, *b));
    let mut pts = Vec::with_capacity(edges.len() + 1);
    let mut cur = start;
    pts.push(cur);
    for e in &edges {
        cur = [cur[0] + e[0], cur[1] + e[1]];
        pts.push(cur);
    }
    Polytope::hull_of_2d(pts)
}

/// Index of the vertex with the smallest `y`, ties broken by smallest `x`.
fn lowest(v: &[P3]) -> usize {
    let mut best = 0;
    for (i, p) in v.iter().enumerate() {
        let b = v[best];
        if p[1] < b[1] || (p[1] == b[1] && p[0] < b[0]) {
            best = i;
        }
    }
    best
}

/// Orders edge vectors by polar angle in `[0, 2π)`.
fn angle_order(a: [f64; 2], b: [f64; 2]) -> std::cmp::Ordering {
    let half = |v: [f64; 2]| if v[1] > 0.0 || (v[1] == 0.0 && v[0] > 0.0) { 0 } else { 1 };
    half(a).cmp(&half(b)).then_with(|| {
        let o = orientation([0.0, 0.0], a, b);
        // a before b when b is counter-clockwise of a.
        0.0f64.total_cmp(&o)
    })
}

/// Distance from a point to a planar polytope (zero inside).
fn point_polygon_distance(p: [f64; 2], poly: &Polytope) -> f64 {
    let v: Vec<[f64; 2]> = poly.vertices.iter().map(|v| [v[0], v[1]]).collect();
    match v.len() {
        1 => ((p[0] - v[0][0]).powi(2) + (p[1] - v[0][1]).powi(2)).sqrt(),
        2 => point_segment_distance(p, v[0], v[1]),
        k => {
            let inside = (0..k).all(|i| orientation(v[i], v[(i + 1) % k], p) >= 0.0);
            if inside {
                return 0.0;
            }
            (0..k)
                .map(|i| point_segment_distance(p, v[i], v[(i + 1) % k]))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

/// Hausdorff distance. Exact in the plane (the farthest point of either
/// polytope from the other is a vertex); in space, the sup of
/// `|h_P − h_Q|` over `grid`, which underestimates by at most
/// `R · grid.covering_angle()` for `R` the larger radius.
pub fn hausdorff_distance(p: &Polytope, q: &Polytope, grid: Option<&DirectionGrid>) -> Result<f64, ConeError> {
    if p.dim != q.dim {
        return Err(ConeError::DimensionMismatch { left: p.dim, right: q.dim });
    }
    if p.dim == 2 {
        Ok(hausdorff_2d(p, q))
    } else {
        let owned;
        let grid = match grid {
            Some(g) => g,
            None => {
                owned = DirectionGrid::sphere(super::grid::DEFAULT_SPHERE_DIRECTIONS);
                &owned
            }
        };
        Ok(sup_support_gap(p, q, grid))
    }
}

fn hausdorff_2d(p: &Polytope, q: &Polytope) -> f64 {
    let one_sided = |a: &Polytope, b: &Polytope| {
        a.vertices
            .iter()
            .map(|v| point_polygon_distance([v[0], v[1]], b))
            .fold(0.0, f64::max)
    };
    one_sided(p, q).max(one_sided(q, p))
}

/// `max_i |h_P(u_i) − h_Q(u_i)|` over the grid directions.
pub fn sup_support_gap(p: &Polytope, q: &Polytope, grid: &DirectionGrid) -> f64 {
    grid.directions()
        .iter()
        .map(|u| (support_p3(p, *u) - support_p3(q, *u)).abs())
        .fold(0.0, f64::max)
}

/// `(Σ_i w_i |h_P(u_i) − h_Q(u_i)|^p)^{1/p}` on a weighted direction grid.
pub fn lp_support_distance(p: &Polytope, q: &Polytope, power: f64, grid: &DirectionGrid) -> Result<f64, ConeError> {
    if p.dim != q.dim {
        return Err(ConeError::DimensionMismatch { left: p.dim, right: q.dim });
    }
    if p.dim != grid.dim() {
        return Err(ConeError::DimensionMismatch { left: p.dim, right: grid.dim() });
    }
    let s: f64 = grid
        .directions()
        .iter()
        .zip(grid.weights())
        .map(|(u, w)| w * (support_p3(p, *u) - support_p3(q, *u)).abs().powf(power))
        .sum();
    Ok(s.powf(1.0 / power))
}

/// Weighted `L_p` norm of a tabulated function on `grid`.
pub(crate) fn grid_lp_norm(values: &[f64], power: f64, grid: &DirectionGrid) -> f64 {
    values
        .iter()
        .zip(grid.weights())
        .map(|(v, w)| w * v.abs().powf(power))
        .sum::<f64>()
        .powf(1.0 / power)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolytopeMetric {
    Hausdorff,
    Lp { p: f64 },
}

pub const CONVEX_BODIES_FLAGS: ConeFlags = ConeFlags {
    pointed: true,
    sub_invariant: true,
    invariant: true,
    second_distributive: true,
    neutral_identity: true,
};

/// Nonempty convex polytopes with Minkowski addition, vertex scaling and
/// either the Hausdorff metric or an `L_p` distance of support functions.
#[derive(Debug, Clone)]
pub struct ConvexBodiesCone {
    dim: usize,
    metric: PolytopeMetric,
    grid: Arc<DirectionGrid>,
    flags: ConeFlags,
}

impl ConvexBodiesCone {
    /// `grid_size` sets the direction grid used by the `L_p` metric, the
    /// spatial Hausdorff approximation and the support-function embedding.
    pub fn new(dim: usize, metric: PolytopeMetric, grid_size: Option<usize>) -> Result<Self, ConeError> {
        if dim != 2 && dim != 3 {
            return Err(ConeError::InvalidElement(format!("convex bodies cone needs dim 2 or 3, got {dim}")));
        }
        if let PolytopeMetric::Lp { p } = metric {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(ConeError::InvalidElement(format!("L_p metric needs finite p ≥ 1, got {p}")));
            }
        }
        Ok(Self {
            dim,
            metric,
            grid: Arc::new(DirectionGrid::for_dim(dim, grid_size)),
            flags: CONVEX_BODIES_FLAGS,
        })
    }

    pub fn with_claims(mut self, claims: &ClaimsOverride) -> Self {
        self.flags = self.flags.apply(claims);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> PolytopeMetric {
        self.metric
    }

    pub fn grid(&self) -> &DirectionGrid {
        &self.grid
    }

    fn unit_direction(&self, u0: &[f64]) -> Result<P3, ConeError> {
        if u0.len() != self.dim {
            return Err(ConeError::DimensionMismatch { left: self.dim, right: u0.len() });
        }
        let len = u0.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (len - 1.0).abs() > 1e-9 {
            return Err(ConeError::InvalidElement(format!("u0 must be a unit vector, |u0| = {len}")));
        }
        Ok(as_p3(u0))
    }

    /// Support values of `x` on the cone's direction grid.
    pub fn support_values(&self, x: &Polytope) -> Vec<f64> {
        support_on_grid(x, &self.grid)
    }

    /// Norm of a tabulated support function in the metric's function space:
    /// the sup norm for Hausdorff, the weighted `L_p` norm otherwise.
    pub fn values_norm(&self, values: &[f64]) -> f64 {
        match self.metric {
            PolytopeMetric::Hausdorff => values.iter().fold(0.0, |m, v| m.max(v.abs())),
            PolytopeMetric::Lp { p } => grid_lp_norm(values, p, &self.grid),
        }
    }
}

/// The cone of convex bodies in `R^dim`.
pub fn convex_bodies_cone(dim: usize, metric: PolytopeMetric) -> Result<ConvexBodiesCone, ConeError> {
    ConvexBodiesCone::new(dim, metric, None)
}

impl Cone for ConvexBodiesCone {
    type Element = Polytope;

    fn name(&self) -> &'static str {
        match self.metric {
            PolytopeMetric::Hausdorff => "convex_bodies/hausdorff",
            PolytopeMetric::Lp { .. } => "convex_bodies/lp",
        }
    }

    fn add(&self, x: &Polytope, y: &Polytope) -> Polytope {
        minkowski_sum_all(&[x, y])
    }

    fn scale(&self, a: f64, x: &Polytope) -> Polytope {
        x.scaled(a)
    }

    fn neutral(&self) -> Polytope {
        Polytope::zero(self.dim)
    }

    fn origin(&self) -> Polytope {
        Polytope::zero(self.dim)
    }

    fn distance(&self, x: &Polytope, y: &Polytope) -> f64 {
        match self.metric {
            PolytopeMetric::Hausdorff if self.dim == 2 => hausdorff_2d(x, y),
            PolytopeMetric::Hausdorff => sup_support_gap(x, y, &self.grid),
            PolytopeMetric::Lp { p } => lp_support_distance(x, y, p, &self.grid).expect("dimensions checked"),
        }
    }

    fn flags(&self) -> ConeFlags {
        self.flags
    }

    fn norm(&self, x: &Polytope) -> f64 {
        match self.metric {
            PolytopeMetric::Hausdorff => x.radius(),
            PolytopeMetric::Lp { p } => grid_lp_norm(&self.support_values(x), p, &self.grid),
        }
    }

    fn test_direction(&self, pred: &DirectionPredicate, unit: &Polytope) -> Result<bool, ConeError> {
        self.test_direction_of(pred, unit, 1.0)
    }

    fn test_direction_of(&self, pred: &DirectionPredicate, x: &Polytope, norm: f64) -> Result<bool, ConeError> {
        match pred {
            DirectionPredicate::FullSphere => Ok(true),
            DirectionPredicate::SupportThreshold { u0, c } => {
                let u = self.unit_direction(u0)?;
                // h is positively homogeneous: h_{x/‖x‖}(u) = h_x(u)/‖x‖.
                Ok(support_p3(x, u) / norm >= *c)
            }
            other => Err(other.unsupported(self.name())),
        }
    }

    fn check_predicate(&self, pred: &DirectionPredicate) -> Result<(), ConeError> {
        match pred {
            DirectionPredicate::FullSphere => Ok(()),
            DirectionPredicate::SupportThreshold { u0, .. } => self.unit_direction(u0).map(|_| ()),
            other => Err(other.unsupported(self.name())),
        }
    }

    fn sum(&self, items: &[Polytope]) -> Polytope {
        let refs: Vec<&Polytope> = items.iter().collect();
        minkowski_sum_all(&refs)
    }
}

/// Random polytopes: hulls of 1–7 uniform points in a box of random size.
#[derive(Debug, Clone, Copy)]
pub struct PolytopeSampler {
    pub dim: usize,
}

impl ElementSampler<Polytope> for PolytopeSampler {
    fn element(&self, rng: &mut dyn RngCore) -> Polytope {
        let k = rng.random_range(1..=7);
        let size = rng.random_range(-1.0f64..2.0).exp2();
        let center: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pts: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                (0..self.dim)
                    .map(|j| center[j] + size * rng.random_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        Polytope::new(pts).expect("finite points")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{axiom_suite, direction, event_member, AxiomStatus, PolarEvent};
    use crate::rng::{Purpose, StreamKey};
    use std::f64::consts::PI;

    fn square() -> Polytope {
        Polytope::from_points_2d(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    fn regular_ngon(n: usize, r: f64) -> Polytope {
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        Polytope::from_points_2d(&pts)
    }

    // Test-only oracle: Hausdorff distance between densely sampled boundaries.
    fn sampled_hausdorff(p: &Polytope, q: &Polytope, per_edge: usize) -> f64 {
        let sample = |x: &Polytope| -> Vec<[f64; 2]> {
            let v: Vec<[f64; 2]> = x.vertices.iter().map(|v| [v[0], v[1]]).collect();
            let mut out = Vec::new();
            for i in 0..v.len() {
                let a = v[i];
                let b = v[(i + 1) % v.len()];
                for k in 0..per_edge {
                    let t = k as f64 / per_edge as f64;
                    out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                }
            }
            out
        };
        let (sp, sq) = (sample(p), sample(q));
        let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let one = |a: &[[f64; 2]], b: &[[f64; 2]], poly_b: &Polytope| {
            a.iter()
                .map(|x| {
                    if point_polygon_distance(*x, poly_b) == 0.0 {
                        0.0
                    } else {
                        b.iter().map(|y| d(*x, *y)).fold(f64::INFINITY, f64::min)
                    }
                })
                .fold(0.0, f64::max)
        };
        one(&sp, &sq, q).max(one(&sq, &sp, p))
    }

    #[test]
    fn unit_square_norm_and_hausdorff() {
        let cone = convex_bodies_cone(2, PolytopeMetric::Hausdorff).unwrap();
        let sq = square();
        assert!((cone.norm(&sq) - 2f64.sqrt()).abs() < 1e-15);
        let zero = Polytope::zero(2);
        assert!((hausdorff_distance(&sq, &zero, None).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((sampled_hausdorff(&sq, &zero, 50) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(hausdorff_distance(&sq, &sq, None).unwrap(), 0.0);
        let big = sq.scaled(2.0);
        let exact = hausdorff_distance(&sq, &big, None).unwrap();
        assert!((exact - 2f64.sqrt()).abs() < 1e-15);
        assert!((sampled_hausdorff(&sq, &big, 200) - exact).abs() < 1e-9);
    }

    #[test]
    fn support_function_examples() {
        let sq = square();
        assert_eq!(support_function(&sq, &[1.0, 0.0]), 1.0);
        let s = -1.0 / 2f64.sqrt();
        assert_eq!(support_function(&sq, &[s, s]), 0.0);
        let g = regular_ngon(20, 3.0);
        for k in 0..100 {
            let t = 0.0731 * k as f64;
            let h = support_function(&g, &[t.cos(), t.sin()]);
            assert!(h >= 3.0 * (PI / 20.0).cos() - 1e-12 && h <= 3.0 + 1e-12);
        }
    }

    #[test]
    fn minkowski_examples() {
        let zero = Polytope::zero(2);
        let sq = square();
        assert_eq!(polytope_minkowski_sum(&zero, &sq).unwrap(), sq);
        let a = Polytope::from_points_2d(&[[0.0, 0.0], [1.0, 0.0]]);
        let b = Polytope::from_points_2d(&[[0.0, 0.0], [0.0, 1.0]]);
        let s = polytope_minkowski_sum(&a, &b).unwrap();
        // Brute force: hull of pairwise vertex sums.
        let brute = Polytope::from_points_2d(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]);
        assert_eq!(s, brute);
        assert_eq!(s.num_vertices(), 4);
        let three = Polytope::from_points_3d(&[[0.0; 3], [1.0, 0.0, 0.0]]);
        assert!(matches!(
            polytope_minkowski_sum(&a, &three),
            Err(ConeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn minkowski_support_additivity_random() {
        let key = StreamKey::new(7, Purpose::Auxiliary, 0);
        for dim in [2, 3] {
            let sampler = PolytopeSampler { dim };
            for t in 0..100 {
                let mut rng = key.replicate(t);
                let p = sampler.element(&mut rng);
                let q = sampler.element(&mut rng);
                let s = polytope_minkowski_sum(&p, &q).unwrap();
                let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let len = u.iter().map(|c| c * c).sum::<f64>().sqrt();
                let u: Vec<f64> = u.iter().map(|c| c / len).collect();
                let lhs = support_function(&s, &u);
                let rhs = support_function(&p, &u) + support_function(&q, &u);
                assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()), "dim {dim}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn many_segments_sum_matches_pairwise_fold() {
        let key = StreamKey::new(3, Purpose::Auxiliary, 0);
        let mut rng = key.replicate(0);
        let segs: Vec<Polytope> = (0..30)
            .map(|_| {
                let t: f64 = rng.random_range(0.0..2.0 * PI);
                let l: f64 = rng.random_range(0.1..3.0);
                Polytope::segment_from_origin(&[l * t.cos(), l * t.sin()])
            })
            .collect();
        let cone = convex_bodies_cone(2, PolytopeMetric::Hausdorff).unwrap();
        let bulk = cone.sum(&segs);
        let folded = segs[1..].iter().fold(segs[0].clone(), |acc, s| cone.add(&acc, s));
        assert!(cone.distance(&bulk, &folded) < 1e-12);
    }

    #[test]
    fn hausdorff_matches_grid_sup_within_resolution() {
        let key = StreamKey::new(11, Purpose::Auxiliary, 0);
        let grid = DirectionGrid::circle(720);
        let sampler = PolytopeSampler { dim: 2 };
        for t in 0..200 {
            let mut rng = key.replicate(t);
            let p = sampler.element(&mut rng);
            let q = sampler.element(&mut rng);
            let exact = hausdorff_distance(&p, &q, None).unwrap();
            let approx = sup_support_gap(&p, &q, &grid);
            let r = p.radius().max(q.radius());
            let bound = 2.0 * r * grid.covering_angle();
            assert!(approx <= exact + 1e-12, "{approx} > {exact}");
            assert!(exact - approx <= bound, "gap {} > {bound}", exact - approx);
        }
    }

    #[test]
    fn lp_distance_of_point_pair() {
        // h_{(c,0)}(θ) = c cos θ, so d_2 = c (∫ cos²θ dθ)^{1/2} = c √π.
        let c = 1.7;
        let p = Polytope::zero(2);
        let q = Polytope::from_points_2d(&[[c, 0.0]]);
        // Independent oracle: midpoint rule on a much finer circle.
        let n = 200_000;
        let oracle: f64 = (0..n)
            .map(|i| {
                let t = 2.0 * PI * (i as f64 + 0.5) / n as f64;
                (c * t.cos()).powi(2) * 2.0 * PI / n as f64
            })
            .sum::<f64>()
            .sqrt();
        assert!((oracle - c * PI.sqrt()).abs() < 1e-9);
        let grid = DirectionGrid::circle(256);
        let d = lp_support_distance(&p, &q, 2.0, &grid).unwrap();
        assert!((d - c * PI.sqrt()).abs() < 1e-12, "{d}");
        assert_eq!(lp_support_distance(&q, &q, 2.0, &grid).unwrap(), 0.0);
    }

    #[test]
    fn lp_homogeneity_random() {
        let key = StreamKey::new(5, Purpose::Auxiliary, 0);
        let grid = DirectionGrid::circle(128);
        let sampler = PolytopeSampler { dim: 2 };
        for t in 0..50 {
            let mut rng = key.replicate(t);
            let p = sampler.element(&mut rng);
            let q = sampler.element(&mut rng);
            let a: f64 = rng.random_range(0.1..10.0);
            let d = lp_support_distance(&p, &q, 3.0, &grid).unwrap();
            let da = lp_support_distance(&p.scaled(a), &q.scaled(a), 3.0, &grid).unwrap();
            assert!((da - a * d).abs() <= 1e-9 * (1.0 + a * d));
        }
    }

    #[test]
    fn direction_and_membership() {
        let cone = convex_bodies_cone(2, PolytopeMetric::Hausdorff).unwrap();
        let seg = Polytope::from_points_2d(&[[0.0, 0.0], [2.0, 0.0]]);
        let d = direction(&cone, &seg).unwrap();
        assert!((cone.norm(&d) - 1.0).abs() < 1e-12);
        assert_eq!(d, Polytope::from_points_2d(&[[0.0, 0.0], [1.0, 0.0]]));
        assert!(matches!(direction(&cone, &Polytope::zero(2)), Err(ConeError::ZeroNorm { .. })));

        let disk = regular_ngon(20, 3.0);
        let ev = PolarEvent::new(
            2.0,
            DirectionPredicate::SupportThreshold { u0: vec![1.0, 0.0], c: 0.9 },
        )
        .unwrap();
        assert!((cone.norm(&disk) - 3.0).abs() < 1e-12);
        assert!(event_member(&cone, &disk, &ev, 1.0).unwrap());
        assert!(!event_member(&cone, &disk, &ev, 1.6).unwrap());
        let bad = DirectionPredicate::SupportThreshold { u0: vec![2.0, 0.0], c: 0.5 };
        assert!(cone.check_predicate(&bad).is_err());
        assert!(cone
            .check_predicate(&DirectionPredicate::CoordinateThreshold { c: 0.5 })
            .is_err());
    }

    #[test]
    fn axiom_suite_both_metrics_pass() {
        for metric in [PolytopeMetric::Hausdorff, PolytopeMetric::Lp { p: 2.0 }] {
            let cone = ConvexBodiesCone::new(2, metric, Some(256)).unwrap();
            let r = axiom_suite(&cone, &PolytopeSampler { dim: 2 }, 200, 1e-9, 9);
            assert!(r.all_declared_pass(), "{r:#?}");
            assert!(r.entries.iter().all(|e| e.status == AxiomStatus::Pass));
        }
    }

    #[test]
    fn axiom_suite_in_space() {
        let cone = ConvexBodiesCone::new(3, PolytopeMetric::Lp { p: 2.0 }, Some(642)).unwrap();
        let r = axiom_suite(&cone, &PolytopeSampler { dim: 3 }, 60, 1e-9, 2);
        assert!(r.all_declared_pass(), "{r:#?}");
    }

    #[test]
    fn serde_roundtrip() {
        let sq = square();
        let s = serde_json::to_string(&sq).unwrap();
        assert_eq!(s, r#"{"vertices":[[0.0,0.0],[1.0,0.0],[1.0,1.0],[0.0,1.0]]}"#);
        let back: Polytope = serde_json::from_str(&s).unwrap();
        assert_eq!(back, sq);
        assert!(serde_json::from_str::<Polytope>(r#"{"vertices":[]}"#).is_err());
    }
}
