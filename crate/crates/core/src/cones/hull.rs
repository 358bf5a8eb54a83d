//! Convex hulls reduced to their extreme points.

use robust::{orient2d, Coord};

/// Relative tolerance of the three-dimensional hull.
pub const HULL3_TOL: f64 = 1e-12;

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    orient2d(
        Coord { x: a[0], y: a[1] },
        Coord { x: b[0], y: b[1] },
        Coord { x: c[0], y: c[1] },
    )
}

/// Sign of the turn `a → b → c`: positive for counter-clockwise, exact.
pub fn orientation(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    orient(a, b, c)
}

/// Extreme points of a planar point set in counter-clockwise order, with
/// collinear and duplicate points removed (Andrew's monotone chain on an
/// exact orientation predicate).
///
/// One point comes back for a degenerate single-point set and two for a
/// segment.
pub fn hull_2d(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() == 2 && hull[0] == hull[1] {
        hull.pop();
    }
    hull
}

type P3 = [f64; 3];

fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: P3, b: P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: P3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy)]
struct Face {
    v: [usize; 3],
    normal: P3,
    offset: f64,
}

impl Face {
    fn new(pts: &[P3], v: [usize; 3]) -> Self {
        let n = cross(sub(pts[v[1]], pts[v[0]]), sub(pts[v[2]], pts[v[0]]));
        let len = norm(n);
        let normal = if len > 0.0 { [n[0] / len, n[1] / len, n[2] / len] } else { [0.0; 3] };
        Face {
            v,
            normal,
            offset: dot(normal, pts[v[0]]),
        }
    }

    fn height(&self, p: P3) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

/// Extreme points of a point set in `R³`, up to a relative tolerance of
/// [`HULL3_TOL`] (points within that distance of the hull boundary, or of
/// each other, are dropped). Degenerate inputs fall back to a segment or a
/// planar hull.
pub fn hull_3d(input: &[P3]) -> Vec<P3> {
    let mut pts: Vec<P3> = input.to_vec();
    pts.sort_by(|a, b| {
        a[0].total_cmp(&b[0])
            .then(a[1].total_cmp(&b[1]))
            .then(a[2].total_cmp(&b[2]))
    });
    pts.dedup();
    if pts.len() <= 1 {
        return pts;
    }
    let scale = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, c| m.max(c.abs()))
        .max(f64::MIN_POSITIVE);
    let eps = HULL3_TOL * scale;

    // Initial simplex.
    let i0 = 0;
    let i1 = farthest(&pts, |p| norm(sub(p, pts[i0])));
    if norm(sub(pts[i1], pts[i0])) <= eps {
        return vec![pts[i0]];
    }
    let axis = sub(pts[i1], pts[i0]);
    let i2 = farthest(&pts, |p| norm(cross(axis, sub(p, pts[i0]))) / norm(axis));
    if norm(cross(axis, sub(pts[i2], pts[i0]))) / norm(axis) <= eps {
        // Collinear: the two extremes along the axis.
        let lo = extreme(&pts, |p| -dot(axis, p));
        let hi = extreme(&pts, |p| dot(axis, p));
        return vec![pts[lo], pts[hi]];
    }
    let plane = Face::new(&pts, [i0, i1, i2]);
    let i3 = farthest(&pts, |p| plane.height(p).abs());
    if plane.height(pts[i3]).abs() <= eps {
        return planar_hull(&pts, plane.normal, pts[i0]);
    }

    let centroid = {
        let s = [pts[i0], pts[i1], pts[i2], pts[i3]]
            .iter()
            .fold([0.0; 3], |a, p| [a[0] + p[0], a[1] + p[1], a[2] + p[2]]);
        [s[0] / 4.0, s[1] / 4.0, s[2] / 4.0]
    };
    let mut faces: Vec<Face> = Vec::new();
    for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let mut f = Face::new(&pts, tri);
        if f.height(centroid) > 0.0 {
            f = Face::new(&pts, [tri[0], tri[2], tri[1]]);
        }
        faces.push(f);
    }

    for (i, &p) in pts.iter().enumerate() {
        if i == i0 || i == i1 || i == i2 || i == i3 {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| f.height(p) > eps).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for k in 0..3 {
                edges.push((f.v[k], f.v[(k + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .filter(|&(a, b)| !edges.contains(&(b, a)))
            .collect();
        let mut kept: Vec<Face> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| *f)
            .collect();
        for (a, b) in horizon {
            kept.push(Face::new(&pts, [a, b, i]));
        }
        faces = kept;
    }

    let mut used: Vec<usize> = faces.iter().flat_map(|f| f.v).collect();
    used.sort_unstable();
    used.dedup();
    used.into_iter().map(|i| pts[i]).collect()
}

fn farthest(pts: &[P3], key: impl Fn(P3) -> f64) -> usize {
    extreme(pts, key)
}

fn extreme(pts: &[P3], key: impl Fn(P3) -> f64) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &p) in pts.iter().enumerate() {
        let v = key(p);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    best
}

fn planar_hull(pts: &[P3], normal: P3, origin: P3) -> Vec<P3> {
    // Orthonormal basis of the plane.
    let seed = if normal[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = {
        let c = cross(normal, seed);
        let l = norm(c);
        [c[0] / l, c[1] / l, c[2] / l]
    };
    let e2 = cross(normal, e1);
    let projected: Vec<[f64; 2]> = pts
        .iter()
        .map(|&p| {
            let d = sub(p, origin);
            [dot(d, e1), dot(d, e2)]
        })
        .collect();
    let hull = hull_2d(projected.clone());
    hull.iter()
        .map(|h| {
            let i = projected.iter().position(|q| q == h).expect("hull point comes from input");
            pts[i]
        })
        .collect()
}
