use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use shepherd::controllers::extract_params;
use shepherd::evaluation::trial_counts;
use shepherd::expr::GrowMethod;
use shepherd::rng::rng_from_seed;
use shepherd::sim::{dog_repulsion_force, sheep_cluster_force, spawn};
use shepherd::*;

fn random_tree(seed: u64, budget: usize, arity: usize) -> ExprTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let method = if seed.is_multiple_of(2) {
        GrowMethod::Full
    } else {
        GrowMethod::Grow
    };
    ExprTree::random(budget, arity, method, &mut rng)
}

fn point() -> impl Strategy<Value = Vec2> {
    (0.0..100.0f64, 0.0..100.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

proptest! {
    #[test]
    fn sexp_round_trips(seed in any::<u64>(), budget in 0usize..=8) {
        let labels = TerminalSet::SingleDog4.labels();
        let tree = random_tree(seed, budget, 4);
        prop_assert_eq!(parse_tree(&tree.to_sexp(), labels, 10).unwrap(), tree.clone());
        prop_assert_eq!(parse_tree(&tree.to_sexp_with(labels), labels, 10).unwrap(), tree);
    }

    #[test]
    fn cluster_force_is_antisymmetric(a in point(), b in point()) {
        let cfg = SimConfig::default();
        prop_assume!(a.distance(b) > 1e-6);
        let ab = sheep_cluster_force(a, b, &cfg);
        let ba = sheep_cluster_force(b, a, &cfg);
        prop_assert_eq!(ab, -ba);
    }

    #[test]
    fn dog_force_points_away_from_dog(sheep in point(), dog in point()) {
        let cfg = SimConfig::default();
        let r = sheep.distance(dog);
        prop_assume!(r > 1e-6);
        let f = dog_repulsion_force(sheep, dog, &cfg);
        if r >= cfg.d_d {
            prop_assert!(f.norm() < 1e-12);
        } else {
            let dot = (f.x * (sheep.x - dog.x) + f.y * (sheep.y - dog.y)) / r;
            prop_assert!(dot >= 0.0);
            prop_assert!((dot - f.norm()).abs() <= 1e-9 * f.norm().max(1.0));
        }
    }

    #[test]
    fn evolved_forces_are_always_finite(seed in any::<u64>(), budget in 0usize..=9, world in any::<u64>()) {
        let cfg = SimConfig { n_dogs: 3, ..SimConfig::default() };
        let geometry = cfg.geometry();
        let mut rng = rng_from_seed(world);
        let state = spawn(&cfg, &geometry, &mut rng);
        for terminals in [TerminalSet::SingleDog4, TerminalSet::MultiDog12] {
            let tree = random_tree(seed, budget, terminals.arity());
            let c = Controller::Evolved { tree, terminals };
            for dog in 0..3 {
                let f = c.dog_force(&state, dog, &cfg, &geometry, &mut rng);
                prop_assert!(f.is_finite(), "{f:?}");
                let params = extract_params(&state, dog, &cfg, &geometry, terminals);
                prop_assert_eq!(params.len(), terminals.arity());
                prop_assert!(params.iter().all(|v| v.is_finite() && v.abs() <= 2.0 * cfg.field_size));
            }
        }
    }
}

#[test]
fn overflowing_program_force_is_sanitized() {
    let labels = TerminalSet::SingleDog4.labels();
    let tree = parse_tree(
        "(pair (* 1e300 (* 1e300 dog-x)) (- (* 1e300 1e300) (* 1e300 1e300)))",
        labels,
        10,
    )
    .unwrap();
    let c = Controller::Evolved {
        tree,
        terminals: TerminalSet::SingleDog4,
    };
    let cfg = SimConfig::default();
    let geometry = cfg.geometry();
    let mut rng = rng_from_seed(3);
    let state = spawn(&cfg, &geometry, &mut rng);
    assert_eq!(c.dog_force(&state, 0, &cfg, &geometry, &mut rng), Vec2::ZERO);
}

#[test]
fn trial_split_matches_single_pass() {
    let cfg = SimConfig::default();
    let whole = trial_counts(&Controller::SimpleDog, &cfg, 0..40, 11);
    let mut parts = trial_counts(&Controller::SimpleDog, &cfg, 0..13, 11);
    parts.extend(trial_counts(&Controller::SimpleDog, &cfg, 13..40, 11));
    assert_eq!(whole, parts);

    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = serial.install(|| evaluate_trials(&Controller::RandDog, &cfg, 40, 5));
    let b = wide.install(|| evaluate_trials(&Controller::RandDog, &cfg, 40, 5));
    assert_eq!(a, b);
}

#[test]
fn default_preset_is_plain_evaluation() {
    let cfg = SimConfig::default();
    let reports = run_scenarios(
        &Controller::SimpleDog,
        &cfg,
        &[Scenario::Default, Scenario::FewSheep],
        30,
        8,
    );
    assert_eq!(
        reports[0].1,
        evaluate_trials(&Controller::SimpleDog, &cfg, 30, Scenario::Default.trial_master_seed(8))
    );
    assert_eq!(reports[1].1.n_sheep, 5);
    assert_eq!(reports[1].1.histogram.len(), 6);
}

#[test]
fn std_error_halves_with_four_times_the_trials() {
    let cfg = SimConfig::default();
    let small = evaluate_trials(&Controller::SimpleDog, &cfg, 500, 21);
    let large = evaluate_trials(&Controller::SimpleDog, &cfg, 2000, 22);
    let ratio = small.std_error / large.std_error;
    assert!((ratio - 2.0).abs() <= 0.1, "ratio {ratio}");
}
