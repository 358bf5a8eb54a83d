//! Direction grids on the unit circle and sphere, with quadrature weights
//! summing to the sphere's area.

use std::f64::consts::PI;

/// Default number of directions on the 2-sphere (an icosphere-sized grid).
pub const DEFAULT_SPHERE_DIRECTIONS: usize = 2562;
/// Default number of directions on the circle.
pub const DEFAULT_CIRCLE_DIRECTIONS: usize = 720;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrid {
    dim: usize,
    dirs: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl DirectionGrid {
    /// `n` equally spaced angles `2πi/n` starting at `(1, 0)`, each weighted
    /// `2π/n`. Exact for trigonometric polynomials of degree below `n`.
    pub fn circle(n: usize) -> Self {
        assert!(n >= 3, "circle grid needs at least 3 directions");
        let dirs = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        Self {
            dim: 2,
            dirs,
            weights: vec![2.0 * PI / n as f64; n],
        }
    }

    /// Fibonacci lattice of `n` quasi-uniform points, each weighted `4π/n`.
    pub fn sphere(n: usize) -> Self {
        assert!(n >= 4, "sphere grid needs at least 4 directions");
        let golden = PI * (3.0 - 5f64.sqrt());
        let dirs = (0..n)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * i as f64;
                [rho * phi.cos(), rho * phi.sin(), z]
            })
            .collect();
        Self {
            dim: 3,
            dirs,
            weights: vec![4.0 * PI / n as f64; n],
        }
    }

    pub fn for_dim(dim: usize, n: Option<usize>) -> Self {
        match dim {
            2 => Self::circle(n.unwrap_or(DEFAULT_CIRCLE_DIRECTIONS)),
            3 => Self::sphere(n.unwrap_or(DEFAULT_SPHERE_DIRECTIONS)),
            _ => panic!("direction grids exist for dimensions 2 and 3 only"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn directions(&self) -> &[[f64; 3]] {
        &self.dirs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest angular gap from any unit vector to its nearest grid
    /// direction (exact on the circle, a Fibonacci-lattice estimate on the
    /// sphere).
    pub fn covering_angle(&self) -> f64 {
        match self.dim {
            2 => PI / self.len() as f64,
            _ => 2.0 * (4.0 * PI / self.len() as f64).sqrt(),
        }
    }

    /// Index of the grid direction closest to `u`.
    pub fn nearest(&self, u: &[f64; 3]) -> usize {
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, d) in self.dirs.iter().enumerate() {
            let dot = d[0] * u[0] + d[1] * u[1] + d[2] * u[2];
            if dot > best_dot {
                best_dot = dot;
                best = i;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_area() {
        assert!((DirectionGrid::circle(360).total_weight() - 2.0 * PI).abs() < 1e-12);
        assert!((DirectionGrid::sphere(2562).total_weight() - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn sphere_points_are_unit() {
        for d in DirectionGrid::sphere(500).directions() {
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_quadrature_of_low_degree_polynomials() {
        // ∫ z² dS = 4π/3 and ∫ x dS = 0 on the unit sphere.
        let g = DirectionGrid::sphere(DEFAULT_SPHERE_DIRECTIONS);
        let z2: f64 = g.directions().iter().zip(g.weights()).map(|(d, w)| w * d[2] * d[2]).sum();
        let x: f64 = g.directions().iter().zip(g.weights()).map(|(d, w)| w * d[0]).sum();
        assert!((z2 - 4.0 * PI / 3.0).abs() < 1e-3);
        assert!(x.abs() < 1e-3);
    }

    #[test]
    fn nearest_direction() {
        let g = DirectionGrid::circle(4);
        assert_eq!(g.nearest(&[0.1, 1.0, 0.0]), 1);
        assert_eq!(g.nearest(&[1.0, 0.0, 0.0]), 0);
    }
}
