//! Fixtures shared by the benchmarks.

use conelab::cones::{FunctionSampler, GridFunction, Polytope, PolytopeSampler};
use conelab::rng::{Purpose, StreamKey};
use conelab::cone::ElementSampler;

/// `count` random polytopes in dimension `dim`.
pub fn polytopes(dim: usize, count: usize, seed: u64) -> Vec<Polytope> {
    let mut rng = StreamKey::new(seed, Purpose::Auxiliary, 0).replicate(0);
    let sampler = PolytopeSampler { dim };
    (0..count).map(|_| sampler.element(&mut rng)).collect()
}

/// `count` random piecewise-linear functions.
pub fn functions(count: usize, seed: u64) -> Vec<GridFunction> {
    let mut rng = StreamKey::new(seed, Purpose::Auxiliary, 1).replicate(0);
    (0..count).map(|_| FunctionSampler.element(&mut rng)).collect()
}
