use fatune::benchmarks::{make_problem, PenaltyConfig};
use fatune::firefly::{self, FaConfig, StepScale};
use fatune::sampling::{ParameterSample, RandomStream};
use proptest::prelude::*;

fn params(theta: f64, beta: f64, gamma: f64) -> ParameterSample {
    ParameterSample { theta, beta, gamma }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn history_is_monotone_and_bounded(
        name in prop::sample::select(vec!["sphere", "rosenbrock", "ackley", "trid", "spring", "truss"]),
        theta in 0.9f64..1.0,
        beta in 0.0f64..1.0,
        gamma in 0.0f64..10.0,
        normalized: bool,
        seed: u64,
    ) {
        let problem = make_problem(name, None).unwrap();
        let mut config = FaConfig::new(8, 30, params(theta, beta, gamma), seed);
        if normalized {
            config.step_scale = StepScale::Normalized;
        }
        let out = firefly::optimize(&problem, &config, PenaltyConfig::default()).unwrap();
        prop_assert_eq!(out.history.len(), 31);
        prop_assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(out.best_value, *out.history.last().unwrap());
        prop_assert!(problem.in_bounds(&out.best_point));
        prop_assert_eq!(out.evaluations, 8 * 31);
        prop_assert_eq!(problem.penalized(&out.best_point, PenaltyConfig::default()).unwrap(), out.best_value);
    }
}

#[test]
fn alpha_decays_geometrically() {
    let problem = make_problem("ackley", Some(3)).unwrap();
    let config = FaConfig::new(5, 200, params(0.97, 0.5, 1.0), 4);
    let penalty = PenaltyConfig::default();
    let mut stream = RandomStream::new(config.seed);
    let mut state = firefly::init_population(&problem, &config, penalty, &mut stream).unwrap();
    for t in 0..200 {
        let expected = config.alpha0 * 0.97f64.powi(t);
        assert!((state.alpha() - expected).abs() <= 1e-12 * expected, "t = {t}");
        firefly::step(&mut state, &problem, &config, penalty, &mut stream);
        assert!(state.positions().all(|x| problem.in_bounds(x)));
    }
}

#[test]
fn no_attraction_no_noise_is_a_fixed_point() {
    for scale in [StepScale::Literal, StepScale::Normalized] {
        let problem = make_problem("rosenbrock", Some(4)).unwrap();
        let mut config = FaConfig::new(6, 1, params(0.95, 0.0, 1.0), 11);
        config.alpha0 = 0.0;
        config.step_scale = scale;
        let penalty = PenaltyConfig::default();
        let mut stream = RandomStream::new(config.seed);
        let mut state = firefly::init_population(&problem, &config, penalty, &mut stream).unwrap();
        let before: Vec<Vec<f64>> = state.positions().map(<[f64]>::to_vec).collect();
        for _ in 0..20 {
            firefly::step(&mut state, &problem, &config, penalty, &mut stream);
        }
        let after: Vec<Vec<f64>> = state.positions().map(<[f64]>::to_vec).collect();
        assert_eq!(before, after, "{scale:?}");
    }
}

#[test]
fn same_seed_same_run() {
    let problem = make_problem("spring", None).unwrap();
    let config = FaConfig::new(10, 40, params(0.95, 0.7, 2.0), 99);
    let a = firefly::optimize(&problem, &config, PenaltyConfig::default()).unwrap();
    let b = firefly::optimize(&problem, &config, PenaltyConfig::default()).unwrap();
    assert_eq!(a, b);
}

// Reference runs with population 20, α0 = 1, θ = 0.97, β = 1, γ = 1 in
// normalized coordinates.
#[test]
fn normalized_runs_reach_targets() {
    let run = |name: &str, iterations: usize, seed: u64| {
        let problem = make_problem(name, None).unwrap();
        let mut config = FaConfig::new(20, iterations, params(0.97, 1.0, 1.0), seed);
        config.step_scale = StepScale::Normalized;
        firefly::optimize(&problem, &config, PenaltyConfig::default()).unwrap()
    };
    for seed in 1..=3 {
        let sphere = run("sphere", 1000, seed);
        assert!(sphere.best_value < 1e-6, "sphere seed {seed}: {}", sphere.best_value);
        let trid = run("trid", 500, seed);
        assert!((trid.best_value + 16.0).abs() < 1e-3, "trid seed {seed}: {}", trid.best_value);
    }
}
