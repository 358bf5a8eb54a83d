use conelab::cones::{convex_bodies_cone, functions_cone, max_cone, PolytopeMetric};
use conelab::lab::{
    build_and_run, centering_distance, embedded_mean, estimate_event_prob, exact_max_cone_prob, Centering,
    Embeddable, ExperimentConfig, RunOptions, TheoremReport,
};
use conelab::regvar::{ElementLaw, RegVarSpec, SpectralPreset};
use conelab::rng::{Purpose, StreamKey};
use conelab::{Cone, DirectionPredicate, PolarEvent};

const MAX_EXACT: &str = r#"{
    "cone": {"kind": "max"},
    "spec": {"alpha": 1.5, "t_min": 1.0},
    "event": {"r": 1.0},
    "sigma_b": 1.0,
    "schedule": {"kind": "power", "exponent": 1.4},
    "n_grid": [100, 1000, 10000],
    "trials": 1,
    "regime": "theorem1",
    "method": "exact"
}"#;

const POLYTOPE_MC: &str = r#"{
    "cone": {"kind": "convex_bodies", "dim": 2},
    "spec": {"alpha": 1.5, "t_min": 1.0, "spectral": {"preset": "rotated-segment"}},
    "event": {"r": 1.0, "direction": {"kind": "support_threshold", "u0": [1.0, 0.0], "c": 0.5}},
    "sigma_b": "analytic",
    "schedule": {"kind": "power", "exponent": 1.2, "coeff": 2.0},
    "n_grid": [10, 20],
    "trials": 20000,
    "seed": 3,
    "regime": "theorem1"
}"#;

fn run(json: &str) -> TheoremReport {
    build_and_run(json, &RunOptions { threads: None, allow_thin: true }).unwrap()
}

fn pareto(alpha: f64) -> RegVarSpec {
    RegVarSpec::pareto(alpha, 1.0, SpectralPreset::default()).unwrap()
}

#[test]
fn gamma_n_normalizes_the_tail() {
    let r = run(MAX_EXACT);
    for row in &r.rows {
        // P(ζ > t) = t^{-1.5} for t ≥ 1.
        let lambda = (row.n as f64).powf(1.4);
        assert!((row.lambda_n / lambda - 1.0).abs() < 1e-14);
        let product = row.gamma_n * row.n as f64 * lambda.powf(-1.5);
        assert!((product - 1.0).abs() < 1e-12, "n = {}: {product}", row.n);
    }
}

#[test]
fn tail_measure_scales_with_radius() {
    let one = run(MAX_EXACT);
    let two = run(&MAX_EXACT.replace(r#""r": 1.0"#, r#""r": 2.0"#));
    assert!((two.mu_u / one.mu_u - 2f64.powf(-1.5)).abs() < 1e-14);
    let p = run(POLYTOPE_MC);
    let p2 = run(&POLYTOPE_MC.replace(r#""r": 1.0"#, r#""r": 2.0"#));
    assert!((p2.mu_u / p.mu_u - 2f64.powf(-1.5)).abs() < 1e-14);
}

#[test]
fn scaling_radius_against_schedule_leaves_ratios_unchanged() {
    // (r, λ_n) → (2r, λ_n/2) keeps λ_n r, and γ_n and μ(U) both pick up 2^{-α}.
    let base = run(POLYTOPE_MC);
    let scaled = run(&POLYTOPE_MC.replace(r#""r": 1.0"#, r#""r": 2.0"#).replace(r#""coeff": 2.0"#, r#""coeff": 1.0"#));
    for (a, b) in base.rows.iter().zip(&scaled.rows) {
        assert_eq!(a.p_hat, b.p_hat);
        assert!((a.ratio / b.ratio - 1.0).abs() < 1e-12);
        assert!((a.single_jump_ref / b.single_jump_ref - 1.0).abs() < 1e-12);
    }
    assert_eq!(base.verdict.pass, scaled.verdict.pass);
}

#[test]
fn uncentered_theorem2_matches_theorem1() {
    let t1 = r#"{
        "cone": {"kind": "functions"},
        "spec": {"alpha": 2.5, "t_min": 0.1, "spectral": {"preset": "hat-function", "center": 1.0, "half_width": 0.5}},
        "event": {"r": 0.3},
        "schedule": {"kind": "power", "exponent": 1.1},
        "n_grid": [10, 20],
        "trials": 20000,
        "seed": 8,
        "regime": "theorem1"
    }"#;
    let t2 = t1.replace("theorem1", "theorem2");
    let (a, b) = (run(t1), run(&t2));
    assert_eq!(a.rows, b.rows);
    assert!(b.centering_diagnostic.is_some());
}

#[test]
fn exact_max_probability_example() {
    // 1 − (1 − 10^{-3})^{50} = 1 − e^{50 ln 0.999}.
    let p = exact_max_cone_prob(&pareto(1.5), 1.0, 50, 100.0);
    assert!((p - 0.0487944).abs() < 5e-8, "{p}");
    assert!((p - (1.0 - 0.999f64.powi(50))).abs() < 1e-15);
    let law = ElementLaw::new(max_cone(), pareto(1.5)).unwrap();
    let event = PolarEvent::new(1.0, DirectionPredicate::FullSphere).unwrap();
    let mc = estimate_event_prob(&law, &event, &Centering::Zero, 50, 100.0, 1_000_000, 11).unwrap();
    assert!(mc.contains(p), "{mc:?}");
}

#[test]
fn max_cone_intervals_cover_the_exact_probability() {
    let law = ElementLaw::new(max_cone(), pareto(1.5)).unwrap();
    let event = PolarEvent::new(1.0, DirectionPredicate::FullSphere).unwrap();
    let (n, lambda) = (10, 10.0);
    let exact = 1.0 - (1.0 - 10f64.powf(-1.5)).powi(10);
    let covered = (0..100)
        .filter(|&seed| {
            estimate_event_prob(&law, &event, &Centering::Zero, n, lambda, 2000, seed).unwrap().contains(exact)
        })
        .count();
    assert!(covered >= 93, "{covered} of 100");
}

#[test]
fn independent_mean_estimates_agree() {
    let spec = RegVarSpec::pareto(2.5, 0.1, SpectralPreset::HatFunction { center: 1.0, half_width: 0.5, center_spread: 0.0 }).unwrap();
    let law = ElementLaw::new(functions_cone(), spec).unwrap();
    let (m1, se1) = embedded_mean(&law, 20_000, 1).unwrap();
    let (m2, se2) = embedded_mean(&law, 20_000, 2).unwrap();
    let cone = law.cone();
    let gap = cone.vector_norm(&m1.minus(&m2));
    assert!(gap > 0.0 && gap < 3.0 * (se1 * se1 + se2 * se2).sqrt(), "gap {gap}, se {se1} {se2}");
    assert_eq!(embedded_mean(&law, 20_000, 1).unwrap().0, m1);
}

#[test]
fn centered_distance_is_linear_in_n() {
    let cone = convex_bodies_cone(2, PolytopeMetric::Hausdorff).unwrap();
    let law = ElementLaw::new(cone.clone(), RegVarSpec::pareto(2.5, 1.0, SpectralPreset::RandomTriangle).unwrap()).unwrap();
    let (mean, _) = embedded_mean(&law, 4096, 5).unwrap();
    let mut rng = StreamKey::new(9, Purpose::Auxiliary, 0).replicate(0);
    for n in [1u64, 3, 10] {
        let mut s = cone.neutral();
        for _ in 0..n {
            s = cone.add(&s, &law.sample(&mut rng).unwrap().0);
        }
        let a_n = cone.vector_scale(n as f64, &mean);
        for (x, m) in a_n.iter().zip(&mean) {
            assert!((x - n as f64 * m).abs() <= 1e-12 * x.abs().max(1.0));
        }
        // The Hausdorff distance is the sup-norm of the support difference.
        let support = cone.embed(&s).unwrap();
        let direct = support.iter().zip(&a_n).map(|(h, a)| (h - a).abs()).fold(0.0, f64::max);
        let d = centering_distance(&cone, &s, Some(&a_n)).unwrap();
        assert!((d - direct).abs() <= 1e-9 * direct.max(1.0), "n = {n}: {d} vs {direct}");
    }
}

#[test]
fn config_round_trips_through_json() {
    let cfg = ExperimentConfig::from_json(POLYTOPE_MC).unwrap();
    let again = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(cfg, again);
}

#[test]
fn interval_width_follows_the_square_root_law() {
    let law = ElementLaw::new(max_cone(), pareto(1.5)).unwrap();
    let event = PolarEvent::new(1.0, DirectionPredicate::FullSphere).unwrap();
    let width = |trials| {
        estimate_event_prob(&law, &event, &Centering::Zero, 10, 10.0, trials, 21).unwrap().width()
    };
    let (w1, w2, w4) = (width(50_000), width(100_000), width(200_000));
    assert!((w2 / w1 * 2f64.sqrt() - 1.0).abs() < 0.1, "{w1} {w2}");
    assert!((w4 / w1 * 2.0 - 1.0).abs() < 0.1, "{w1} {w4}");
}
