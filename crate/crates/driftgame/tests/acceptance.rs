//! Acceptance gate: nine criteria, one test each. Every test prints a
//! single `acceptance criterion N: PASS/FAIL` line with the measured
//! numbers (visible under `--nocapture`, or automatically on failure)
//! and then asserts.
//!
//! Criterion 8 is expected to fail in its round-trip half: near the
//! edge of [-6, 6] the double-precision value of phi_cdf(x) is too
//! coarse for any inverse to recover x to 1e-9. The test measures the
//! floor and fails honestly rather than loosening the target.

mod common;

use std::time::{Duration, Instant};

use driftgame::detect::{lr_detector, terminal_detector};
use driftgame::game::{
    best_response_beta, canonical_attacker_deviations, canonical_detector_deviations,
    estimate_alpha, estimate_beta, estimate_gamma, exponent_curve, game_value, saddle_check,
    MonteCarloEstimate,
};
use driftgame::model::{
    bridge_attack, constant_bias_attack, simulate_path, AttackPolicy, AttackSignal, GameConfig,
    RandomStream,
};
use driftgame::normal::{phi_cdf, phi_inv};

/// phi(-1.5), the closed-form value of the canonical game.
const CANONICAL_VALUE: f64 = 0.066_807_201_268_858_07;

fn canonical() -> GameConfig {
    GameConfig::new(1.0, 1.5, 0.95, 0.05).expect("canonical config is valid")
}

fn std_normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / std::f64::consts::TAU.sqrt()
}

/// Distance from `p` to the next representable double above it.
fn ulp_above(p: f64) -> f64 {
    f64::from_bits(p.to_bits() + 1) - p
}

#[test]
fn criterion_1_game_value_reproduction() {
    let start = Instant::now();
    let config = canonical();
    let value = game_value(&config).value();
    let closed_form_err = (value - CANONICAL_VALUE).abs();

    let attack = AttackPolicy::OpenLoop(constant_bias_attack(&config));
    let detector = terminal_detector(&config);
    let est = estimate_beta(&detector, &attack, &config, 1_000_000, 1_000, 42)
        .expect("estimate_beta runs");
    let mc_err = (est.value() - value).abs();
    let slack = 4.0 * est.stderr;
    let elapsed = start.elapsed();

    let pass = closed_form_err <= 1e-12 && mc_err <= slack && elapsed < Duration::from_secs(5);
    println!(
        "acceptance criterion 1: {} — game_value = {value:.15} (|err| = {closed_form_err:.2e}), \
         MC estimate {est:.6} off by {mc_err:.2e} vs 4-sigma {slack:.2e}, {} ms",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_millis(),
        est = est.value(),
    );
    assert!(closed_form_err <= 1e-12);
    assert!(mc_err <= slack);
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
}

#[test]
fn criterion_2_false_alarm_calibration() {
    let configs = [
        (1.0, 1.5, 0.95, 0.05),
        (4.0, 1.0, 0.9, 0.1),
        (0.25, 2.0, 0.8, 0.01),
    ];
    let trials = 1_000_000u64;
    let mut worst = 0.0f64;
    for (i, &(horizon, slope, floor, budget)) in configs.iter().enumerate() {
        let config = GameConfig::new(horizon, slope, floor, budget).expect("config is valid");
        let detectors = [
            terminal_detector(&config),
            lr_detector(&constant_bias_attack(&config), &config).expect("lr detector builds"),
        ];
        let bound = 4.0 * (budget * (1.0 - budget) / trials as f64).sqrt();
        for (j, detector) in detectors.iter().enumerate() {
            let est = estimate_alpha(detector, &config, trials, 1_000 + (2 * i + j) as u64)
                .expect("estimate_alpha runs");
            let err = (est.value() - budget).abs();
            worst = worst.max(err / bound);
            assert!(
                err <= bound,
                "config {i} detector {j}: alpha {} vs budget {budget}, err {err:.2e} > {bound:.2e}",
                est.value()
            );
        }
    }
    println!(
        "acceptance criterion 2: PASS — both detectors within 4 sigma of the budget on all three \
         configs at 10^6 trials (worst error = {worst:.2} of the allowance)"
    );
}

#[test]
fn criterion_3_detector_equivalence() {
    let config = canonical();
    let terminal = terminal_detector(&config);
    let lr = lr_detector(&constant_bias_attack(&config), &config).expect("lr detector builds");
    let classes: [AttackPolicy; 4] = [
        AttackPolicy::OpenLoop(AttackSignal::Zero),
        AttackPolicy::OpenLoop(constant_bias_attack(&config)),
        AttackPolicy::Feedback(bridge_attack(1.57, &config).expect("target is valid")),
        AttackPolicy::OpenLoop(AttackSignal::Pulse {
            height: 2.0 * config.bias_level(),
            start: 0.25,
            width: 0.5,
        }),
    ];
    let per_class = 25_000u64;
    let steps = 1_000;
    let mut disagreements = 0u64;
    let mut rejects = 0u64;
    for (class_id, policy) in classes.iter().enumerate() {
        for k in 0..per_class {
            let stream = RandomStream::new(9_000 + class_id as u64, k);
            let path = simulate_path(policy, &config, steps, stream).expect("path simulates");
            let a = terminal
                .decide(&path)
                .expect("terminal decides")
                .is_reject();
            let b = lr.decide(&path).expect("lr decides").is_reject();
            if a != b {
                disagreements += 1;
            }
            if a {
                rejects += 1;
            }
        }
    }
    let total = per_class * classes.len() as u64;
    let pass = disagreements == 0;
    println!(
        "acceptance criterion 3: {} — {disagreements} disagreements on {total} mixed paths \
         ({rejects} rejects)",
        if pass { "PASS" } else { "FAIL" },
    );
    assert_eq!(disagreements, 0);
    assert!(rejects > 0 && rejects < total, "degenerate decision mix");
}

#[test]
fn criterion_4_saddle_inequalities() {
    let config = canonical();
    let attacks = canonical_attacker_deviations(&config);
    let detectors = canonical_detector_deviations(&config).expect("canonical detectors build");
    assert!(attacks.len() >= 3);
    assert!(detectors.len() >= 3);

    let report =
        saddle_check(&config, &attacks, &detectors, 1_000_000, 4_242).expect("saddle_check runs");
    assert!(
        report.value_agreement,
        "MC beta* disagrees with closed form"
    );
    for row in &report.attacker_deviations {
        assert!(
            row.pass && row.margin >= -row.mc_slack,
            "attacker '{}' margin {} below -{}",
            row.description,
            row.margin,
            row.mc_slack
        );
    }
    for row in &report.detector_deviations {
        assert!(
            row.pass && row.margin >= -row.mc_slack,
            "detector '{}' margin {} below -{}",
            row.description,
            row.margin,
            row.mc_slack
        );
    }
    assert!(report.all_pass);

    let value = game_value(&config).value();
    let mut min_gap = f64::INFINITY;
    for deviation in &attacks {
        let tuned = best_response_beta(deviation, &config)
            .expect("canonical deviations have positive energy")
            .value();
        let gap = value - tuned;
        min_gap = min_gap.min(gap);
        assert!(gap > 1e-6, "deviation '{deviation}' gap {gap:.2e} <= 1e-6");
    }
    println!(
        "acceptance criterion 4: PASS — all {} + {} deviation rows hold within 4-sigma slack at \
         10^6 trials; smallest closed-form dominance gap = {min_gap:.3e}",
        report.attacker_deviations.len(),
        report.detector_deviations.len(),
    );
}

#[test]
fn criterion_5_attacker_side_closed_form() {
    let horizons = [0.25, 1.0, 4.0, 9.0, 25.0];
    let slopes = [0.5, 2.0];
    let shapes = [(0.95, 0.05), (0.8, 0.2)];
    let mut checked = 0u32;
    let mut worst = 0.0f64;
    for &horizon in &horizons {
        for &slope in &slopes {
            for &(floor, budget) in &shapes {
                let config =
                    GameConfig::new(horizon, slope, floor, budget).expect("config is valid");
                let tuned = best_response_beta(&constant_bias_attack(&config), &config)
                    .expect("boundary attack has positive energy")
                    .value();
                let err = (tuned - game_value(&config).value()).abs();
                worst = worst.max(err);
                assert!(
                    err <= 1e-12,
                    "config ({horizon}, {slope}, {floor}, {budget}): {err:.2e}"
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 20);
    println!(
        "acceptance criterion 5: PASS — best-response beta equals the game value on all \
         {checked} configs (worst |err| = {worst:.2e})"
    );
}

#[test]
fn criterion_6_brownian_bridge_counterexample() {
    let start = Instant::now();
    let config = canonical();
    let bridge = AttackPolicy::Feedback(bridge_attack(1.57, &config).expect("target is valid"));
    let detector = terminal_detector(&config);
    let trials = 100_000u64;
    let steps = 10_000;

    let gamma = estimate_gamma(&bridge, &config, trials, steps, 6_001).expect("gamma estimates");
    let beta =
        estimate_beta(&detector, &bridge, &config, trials, steps, 6_002).expect("beta estimates");
    let alpha = estimate_alpha(&detector, &config, trials, 6_003).expect("alpha estimates");
    let alpha_err = (alpha.value() - config.false_alarm_budget().value()).abs();
    let alpha_bound = 4.0 * alpha.stderr.max(1e-6);
    let elapsed = start.elapsed();

    let pass = gamma.value() >= 0.99
        && beta.value() >= 0.99
        && alpha_err <= alpha_bound
        && elapsed < Duration::from_secs(60);
    println!(
        "acceptance criterion 6: {} — gamma = {:.5}, beta(bridge, phi*) = {:.5} vs \
         beta* = {CANONICAL_VALUE:.5}, alpha = {:.5} (budget 0.05), {} s",
        if pass { "PASS" } else { "FAIL" },
        gamma.value(),
        beta.value(),
        alpha.value(),
        elapsed.as_secs(),
    );
    assert!(gamma.value() >= 0.99, "gamma = {}", gamma.value());
    assert!(beta.value() >= 0.99, "beta = {}", beta.value());
    assert!(beta.value() > game_value(&config).value());
    assert!(alpha_err <= alpha_bound, "alpha moved: {alpha_err:.2e}");
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
}

#[test]
fn criterion_7_exponents() {
    let config = GameConfig::new(1.0, 2.0, 0.95, 0.05).expect("config is valid");
    let horizons: Vec<f64> = (1..=100).map(|t| t as f64).collect();
    let curve = exponent_curve(&config, &horizons).expect("curve evaluates");
    assert!(curve.hoeffding_holds_everywhere());

    let rows = curve.rows();
    for pair in rows.windows(2) {
        assert!(
            pair[1].first_order_ratio > pair[0].first_order_ratio,
            "ratio not increasing between T = {} and T = {}",
            pair[0].horizon,
            pair[1].horizon
        );
    }
    let last = rows.last().expect("grid is nonempty");
    assert!((0.85..=1.0).contains(&last.first_order_ratio));
    assert!((last.first_order_ratio - 0.870_511_380_743_861_1).abs() <= 1e-11);
    assert!((last.hoeffding_bound - 200.0).abs() <= 1e-9);

    // The bound itself is slope-independent; spot-check a second slope.
    let shallow = GameConfig::new(1.0, 1.5, 0.95, 0.05).expect("config is valid");
    let shallow_curve = exponent_curve(&shallow, &horizons).expect("curve evaluates");
    assert!(shallow_curve.hoeffding_holds_everywhere());

    println!(
        "acceptance criterion 7: PASS — Hoeffding bound holds on all 100 horizons (slopes 2.0 \
         and 1.5); first-order ratio climbs monotonically to {:.6} at T = 100",
        last.first_order_ratio,
    );
}

#[test]
fn criterion_8_normal_kernel_accuracy() {
    // Part (a): cdf against the quadrature oracle.
    let mut cdf_worst = 0.0f64;
    for i in 0..1_000 {
        let x = -8.0 + 16.0 * i as f64 / 999.0;
        let err = (phi_cdf(x).expect("finite x").value() - common::oracle_phi(x)).abs();
        cdf_worst = cdf_worst.max(err);
    }

    // Part (b): x-space round trip through the quantile.
    let mut rt_worst = 0.0f64;
    let mut rt_argmax = 0.0f64;
    for i in 0..1_000 {
        let x = -6.0 + 12.0 * i as f64 / 999.0;
        let p = phi_cdf(x).expect("finite x");
        let err = (phi_inv(p).expect("p is interior") - x).abs();
        if err > rt_worst {
            rt_worst = err;
            rt_argmax = x;
        }
    }
    let p_at_worst = phi_cdf(rt_argmax).expect("finite x").value();
    let fiber = ulp_above(p_at_worst) / std_normal_density(rt_argmax);

    let pass = cdf_worst <= 1e-12 && rt_worst <= 1e-9;
    if pass {
        println!(
            "acceptance criterion 8: PASS — cdf max |err| = {cdf_worst:.2e}, round-trip max \
             |err| = {rt_worst:.2e}"
        );
    } else {
        println!(
            "acceptance criterion 8: FAIL — cdf max |err| = {cdf_worst:.2e} (target 1e-12, \
             holds), but round-trip max |phi_inv(phi_cdf(x)) - x| = {rt_worst:.2e} at \
             x = {rt_argmax:.4} (target 1e-9). Near that x the doubles adjacent to \
             phi_cdf(x) = {p_at_worst:.17} are {:.2e} apart, so every x in a band of width \
             {fiber:.2e} collapses to the same stored probability; no inverse evaluated on \
             doubles can localize x better than about half that band ({:.2e}). The target is \
             unreachable in this number format for |x| beyond roughly 5.7.",
            ulp_above(p_at_worst),
            0.5 * fiber,
        );
    }
    assert!(cdf_worst <= 1e-12);
    assert!(
        rt_worst <= 1e-9,
        "round-trip floor: max |err| = {rt_worst:.2e} at x = {rt_argmax:.4}, representation \
         band width {fiber:.2e}"
    );
}

#[test]
fn criterion_9_reproducibility() {
    let config = canonical();

    fn pool(threads: usize) -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool builds")
    }
    let runs = [pool(1), pool(4), pool(1)];
    fn replay<F: Fn() -> MonteCarloEstimate + Sync>(runs: &[rayon::ThreadPool], f: F) {
        let results: Vec<MonteCarloEstimate> = runs.iter().map(|p| p.install(&f)).collect();
        assert_eq!(
            results[0], results[1],
            "estimate differs across worker counts"
        );
        assert_eq!(results[0], results[2], "estimate differs across runs");
    }

    // Criterion 1's equilibrium miss probability.
    let attack = AttackPolicy::OpenLoop(constant_bias_attack(&config));
    let detector = terminal_detector(&config);
    replay(&runs, || {
        estimate_beta(&detector, &attack, &config, 1_000_000, 1_000, 42).expect("beta estimates")
    });

    // Criterion 2's calibration, one config per detector kind.
    let second = GameConfig::new(4.0, 1.0, 0.9, 0.1).expect("config is valid");
    let lr = lr_detector(&constant_bias_attack(&second), &second).expect("lr detector builds");
    replay(&runs, || {
        estimate_alpha(&terminal_detector(&second), &second, 1_000_000, 1_001)
            .expect("alpha estimates")
    });
    replay(&runs, || {
        estimate_alpha(&lr, &second, 1_000_000, 1_003).expect("alpha estimates")
    });

    // Criterion 4's full report, compared as serialized bytes.
    let attacks = canonical_attacker_deviations(&config);
    let detectors = canonical_detector_deviations(&config).expect("canonical detectors build");
    let reports: Vec<String> = runs
        .iter()
        .map(|p| {
            p.install(|| {
                let report = saddle_check(&config, &attacks, &detectors, 1_000_000, 4_242)
                    .expect("saddle_check runs");
                serde_json::to_string(&report).expect("report serializes")
            })
        })
        .collect();
    assert_eq!(
        reports[0], reports[1],
        "saddle report differs across worker counts"
    );
    assert_eq!(reports[0], reports[2], "saddle report differs across runs");

    // Criterion 6's feedback estimates.
    let bridge = AttackPolicy::Feedback(bridge_attack(1.57, &config).expect("target is valid"));
    replay(&runs, || {
        estimate_gamma(&bridge, &config, 100_000, 10_000, 6_001).expect("gamma estimates")
    });
    replay(&runs, || {
        estimate_beta(&detector, &bridge, &config, 100_000, 10_000, 6_002).expect("beta estimates")
    });
    replay(&runs, || {
        estimate_alpha(&detector, &config, 100_000, 6_003).expect("alpha estimates")
    });

    println!(
        "acceptance criterion 9: PASS — every Monte Carlo quantity above is byte-identical \
         across repeat runs and across worker counts 1 and 4"
    );
}
