//! Replicated partial sums and event-probability estimates.
//!
//! Replicate `i` of size `n` always draws from the stream
//! `StreamKey::new(seed, purpose, n).replicate(i)`, and per-replicate results
//! are combined either as integer counts or in replicate order, so every
//! number produced here is independent of the worker-thread count.

use rand::Rng;
use rayon::prelude::*;

use super::embed::LabCone;
use super::LabError;
use crate::cone::{event_member, PolarEvent};
use crate::regvar::ElementLaw;
use crate::rng::{Purpose, StreamKey};
use crate::stats::{wilson, Proportion};

/// Replicates handed to one rayon task.
const CHUNK: u64 = 1024;

/// The centering sequence, in embedded coordinates: `I(A_n) = n · mean`.
#[derive(Debug, Clone)]
pub enum Centering<V> {
    Zero,
    Embedded { mean: V },
}

/// A replicate of `S_n` with the total radius `Σ ζ_i` of its terms.
pub struct Replicate<'a, E> {
    pub sum: E,
    pub radius_total: f64,
    pub terms: &'a [E],
}

fn draw_sum<C: LabCone>(
    law: &ElementLaw<C>,
    n: u64,
    key: &StreamKey,
    index: u64,
    buf: &mut Vec<C::Element>,
) -> Result<(C::Element, f64), LabError> {
    let mut rng = key.replicate(index);
    buf.clear();
    let mut radius_total = 0.0;
    for _ in 0..n {
        let (x, zeta) = law.sample(&mut rng)?;
        radius_total += zeta;
        buf.push(x);
    }
    Ok((law.cone().sum(buf), radius_total))
}

/// Applies `f` to replicates `0..count` of `S_n` and returns the results in
/// replicate order.
pub fn replicate_map<C, T, F>(
    law: &ElementLaw<C>,
    n: u64,
    count: u64,
    seed: u64,
    purpose: Purpose,
    f: F,
) -> Result<Vec<T>, LabError>
where
    C: LabCone,
    T: Send,
    F: Fn(Replicate<'_, C::Element>) -> Result<T, LabError> + Sync,
{
    assert!(n >= 1, "partial sums need at least one term");
    let key = StreamKey::new(seed, purpose, n);
    let chunks = count.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut buf = Vec::with_capacity(n as usize);
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(count);
            let mut out = Vec::with_capacity((hi - lo) as usize);
            for i in lo..hi {
                let (sum, radius_total) = draw_sum(law, n, &key, i, &mut buf)?;
                out.push(f(Replicate { sum, radius_total, terms: &buf })?);
            }
            Ok(out)
        })
        .collect::<Result<_, LabError>>()?;
    Ok(per_chunk.into_iter().flatten().collect())
}

/// Counts replicates for which `f` holds.
pub fn replicate_count<C, F>(
    law: &ElementLaw<C>,
    n: u64,
    count: u64,
    seed: u64,
    purpose: Purpose,
    f: F,
) -> Result<u64, LabError>
where
    C: LabCone,
    F: Fn(Replicate<'_, C::Element>) -> Result<bool, LabError> + Sync,
{
    let key = StreamKey::new(seed, purpose, n);
    let chunks = count.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut buf = Vec::with_capacity(n as usize);
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(count);
            let mut hits = 0u64;
            for i in lo..hi {
                let (sum, radius_total) = draw_sum(law, n, &key, i, &mut buf)?;
                hits += u64::from(f(Replicate { sum, radius_total, terms: &buf })?);
            }
            Ok(hits)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Whether `S_n ∈ λU + A_n`.
pub fn shifted_member<C: LabCone>(
    cone: &C,
    s: &C::Element,
    event: &PolarEvent,
    lambda: f64,
    n: u64,
    centering: &Centering<C::Vector>,
) -> Result<bool, LabError> {
    match centering {
        Centering::Zero => Ok(event_member(cone, s, event, lambda)?),
        Centering::Embedded { mean } => {
            let a = cone.vector_scale(n as f64, mean);
            Ok(cone.shifted_test(s, &a, &event.direction, lambda * event.r)?.1)
        }
    }
}

/// `d(S_n, A_n)`, through the embedding when centered.
pub fn centering_distance<C: LabCone>(
    cone: &C,
    s: &C::Element,
    a_n: Option<&C::Vector>,
) -> Result<f64, LabError> {
    match a_n {
        None => Ok(cone.distance(s, &cone.neutral())),
        Some(a) => Ok(cone
            .shifted_test(s, a, &crate::cone::DirectionPredicate::FullSphere, f64::INFINITY)?
            .0),
    }
}

/// Monte Carlo estimate of `P(S_n ∈ λU + A_n)` from `trials` replicates.
pub fn estimate_event_prob<C: LabCone>(
    law: &ElementLaw<C>,
    event: &PolarEvent,
    centering: &Centering<C::Vector>,
    n: u64,
    lambda: f64,
    trials: u64,
    seed: u64,
) -> Result<Proportion, LabError> {
    let cone = law.cone();
    cone.check_predicate(&event.direction)?;
    let a_n = match centering {
        Centering::Zero => None,
        Centering::Embedded { mean } => Some(cone.vector_scale(n as f64, mean)),
    };
    let threshold = lambda * event.r;
    let hits = replicate_count(law, n, trials, seed, Purpose::Estimate, |rep| match &a_n {
        None => Ok(event_member(cone, &rep.sum, event, lambda)?),
        Some(a) => Ok(cone.shifted_test(&rep.sum, a, &event.direction, threshold)?.1),
    })?;
    Ok(wilson(hits, trials))
}

/// Monte Carlo average of `I(ξ)` over `samples` draws, returned as
/// coordinates together with the norm of their pointwise standard errors.
pub fn embedded_mean<C: LabCone>(law: &ElementLaw<C>, samples: u64, seed: u64) -> Result<(C::Vector, f64), LabError> {
    let cone = law.cone();
    let len = cone.coordinate_len()?;
    let key = StreamKey::new(seed, Purpose::Centering, 0);
    const MEAN_CHUNK: u64 = 8192;
    let chunks = samples.div_ceil(MEAN_CHUNK);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = key.replicate(c);
            let (mut s, mut q) = (vec![0.0; len], vec![0.0; len]);
            for _ in (c * MEAN_CHUNK)..((c + 1) * MEAN_CHUNK).min(samples) {
                let (x, _) = law.sample(&mut rng)?;
                cone.accumulate(&x, &mut s, &mut q);
            }
            Ok((s, q))
        })
        .collect::<Result<_, LabError>>()?;
    let (mut sum, mut sum_sq) = (vec![0.0; len], vec![0.0; len]);
    for (s, q) in parts {
        for i in 0..len {
            sum[i] += s[i];
            sum_sq[i] += q[i];
        }
    }
    let m = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let se: Vec<f64> = sum_sq
        .iter()
        .zip(&mean)
        .map(|(q, mu)| {
            let var = if samples > 1 { (q / m - mu * mu).max(0.0) * m / (m - 1.0) } else { 0.0 };
            (var / m).sqrt()
        })
        .collect();
    let se_norm = cone.vector_norm(&cone.from_coordinates(se));
    Ok((cone.from_coordinates(mean), se_norm))
}

/// Coverage of the Wilson interval for Bernoulli(`p`) estimates: the number
/// of `repetitions` experiments of `trials` draws each whose interval
/// contains `p`.
pub fn bernoulli_coverage(p: f64, trials: u64, repetitions: u64, seed: u64) -> (u64, Vec<Proportion>) {
    assert!((0.0..=1.0).contains(&p));
    let runs: Vec<Proportion> = (0..repetitions)
        .map(|rep| {
            let key = StreamKey::new(seed, Purpose::Auxiliary, rep);
            let chunks = trials.div_ceil(65_536);
            let hits: u64 = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = key.replicate(c);
                    let k = ((c + 1) * 65_536).min(trials) - c * 65_536;
                    (0..k).filter(|_| rng.random::<f64>() < p).count() as u64
                })
                .sum();
            wilson(hits, trials)
        })
        .collect();
    (runs.iter().filter(|r| r.contains(p)).count() as u64, runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{Cone, DirectionPredicate};
    use crate::cones::{convex_bodies_cone, functions_cone, max_cone, PolytopeMetric};
    use crate::lab::embed::exact_max_cone_prob;
    use crate::regvar::{RegVarSpec, SpectralPreset};

    fn spec(alpha: f64, preset: SpectralPreset) -> RegVarSpec {
        RegVarSpec::pareto(alpha, 1.0, preset).unwrap()
    }

    #[test]
    fn max_cone_estimate_covers_exact_value() {
        let s = spec(1.5, SpectralPreset::default());
        let law = ElementLaw::new(max_cone(), s.clone()).unwrap();
        let event = PolarEvent::new(1.0, DirectionPredicate::FullSphere).unwrap();
        let (n, lambda) = (10, 10.0);
        let p = estimate_event_prob(&law, &event, &Centering::Zero, n, lambda, 200_000, 3).unwrap();
        let exact = exact_max_cone_prob(&s, 1.0, n, lambda);
        let half = (p.hi - p.lo) / 2.0;
        assert!((p.estimate - exact).abs() < 2.0 * half, "{p:?} vs {exact}");
    }

    #[test]
    fn thread_count_does_not_change_counts() {
        let law = ElementLaw::new(
            convex_bodies_cone(2, PolytopeMetric::Hausdorff).unwrap(),
            spec(1.5, SpectralPreset::RotatedSegment),
        )
        .unwrap();
        let event = PolarEvent::new(
            1.0,
            DirectionPredicate::SupportThreshold { u0: vec![1.0, 0.0], c: 0.5 },
        )
        .unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_event_prob(&law, &event, &Centering::Zero, 5, 8.0, 5000, 11).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn replicate_map_preserves_order_and_bound() {
        let law = ElementLaw::new(functions_cone(), spec(2.5, SpectralPreset::HatFunction {
            center: 1.0,
            half_width: 0.5,
            center_spread: 0.2,
        }))
        .unwrap();
        let cone = law.cone().clone();
        let norms = replicate_map(&law, 4, 2500, 5, Purpose::NormQuantile, |rep| {
            Ok((cone.norm(&rep.sum), rep.radius_total))
        })
        .unwrap();
        assert_eq!(norms.len(), 2500);
        assert!(norms.iter().all(|(s, t)| *s <= t + 1e-9));
        let again = replicate_map(&law, 4, 3, 5, Purpose::NormQuantile, |rep| Ok(cone.norm(&rep.sum))).unwrap();
        for (a, b) in again.iter().zip(&norms) {
            assert_eq!(*a, b.0);
        }
    }

    #[test]
    fn polytope_embedded_mean_is_flat() {
        // E h_ξ(u) = E ζ · E max(0, cos θ) = 1.5 / π for α = 3, t_min = 1.
        let law = ElementLaw::new(
            convex_bodies_cone(2, PolytopeMetric::Hausdorff).unwrap(),
            spec(3.0, SpectralPreset::RotatedSegment),
        )
        .unwrap();
        let (mean, se) = embedded_mean(&law, 200_000, 1).unwrap();
        let expect = 1.5 / std::f64::consts::PI;
        for v in &mean {
            assert!((v - expect).abs() < 0.02, "{v} vs {expect}");
        }
        assert!(se > 0.0 && se < 0.01);
    }

    #[test]
    fn bernoulli_coverage_counts_intervals() {
        let (covered, runs) = bernoulli_coverage(0.1, 10_000, 20, 4);
        assert_eq!(runs.len(), 20);
        assert!(covered >= 15);
        assert!(runs.iter().all(|r| r.trials == 10_000));
    }
}
