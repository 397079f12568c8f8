//! Acceptance suite: every shipped claim runs here at its stated tolerance
//! and prints one pass line. Criterion 12 (byte-identical CLI reruns) lives
//! in the CLI crate's acceptance tests.

mod common;

use common::{
    cliffs_delta_oracle, normal_sample, random_p_values, wilcoxon_enumeration_oracle,
    ANALYTIC_POWER, T_TEST_FIXTURES,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use zne_lab::drift::{illusion_report, run_scenario as run_drift, severity};
use zne_lab::scenario;
use zne_lab::stats::{
    benjamini_hochberg, bonferroni, bootstrap_power, cliffs_delta, kish_neff, log_log_slope,
    paired_t_test, wilcoxon_signed_rank, PairedSample,
};
use zne_lab::sweep::{run_config_at, run_sweep, ConfigPoint, OutcomeClass, SweepOutput};
use zne_lab::zne::{
    extrapolate, variance_amplification_bound, ExtrapolationMethod, FoldingStrategy,
    ScaleFactorSet, ZnePoint,
};

fn sweep_output() -> &'static SweepOutput {
    static OUT: OnceLock<SweepOutput> = OnceLock::new();
    OUT.get_or_init(|| {
        run_sweep(&scenario::khan_sweep(), scenario::DEFAULT_MASTER_SEED)
            .expect("shipped sweep must run")
    })
}

fn cells<'a>(out: &'a SweepOutput, preset: &str) -> Vec<&'a zne_lab::sweep::ConfigResult> {
    out.results.iter().filter(|r| r.config.noise_preset == preset).collect()
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[test]
fn criterion_01_variance_bound_exactness() {
    let coarse = ScaleFactorSet::new(vec![1.0, 3.0, 5.0]).unwrap();
    let fine = ScaleFactorSet::new(vec![1.0, 1.1, 1.25, 1.5]).unwrap();
    let b_coarse = variance_amplification_bound(&coarse);
    let b_fine = variance_amplification_bound(&fine);
    assert!((b_coarse - 3.5).abs() < 1e-12, "bound(1,3,5) = {b_coarse}");
    assert!((b_fine - 681.0).abs() / 681.0 < 1e-6, "bound(fine) = {b_fine}");
    let ratio = b_fine / b_coarse;
    assert!((194.0..=195.0).contains(&ratio), "ratio = {ratio}");
    println!(
        "[PASS] criterion 01 variance-bound exactness: 3.5 vs {b_fine:.6} (ratio {ratio:.4})"
    );
}

#[test]
fn criterion_02_richardson_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC2);
    let mut worst = 0.0f64;
    for k in 2..=4usize {
        for _ in 0..100 {
            // random strictly increasing factors in [1, 6]
            let mut factors = Vec::with_capacity(k);
            let mut x = 1.0 + rng.random_range(0.0..0.3);
            for _ in 0..k {
                factors.push(x);
                x += rng.random_range(0.2..1.5);
            }
            let degree = rng.random_range(0..k); // <= K-1
            let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
            let poly = |lambda: f64| -> f64 {
                coeffs.iter().enumerate().map(|(i, c)| c * lambda.powi(i as i32)).sum()
            };
            let points: Vec<ZnePoint> = factors
                .iter()
                .map(|&l| ZnePoint { lambda: l, estimate: poly(l), std_error: 0.0 })
                .collect();
            let ex = extrapolate(&points, ExtrapolationMethod::Richardson).unwrap();
            worst = worst.max((ex.value - poly(0.0)).abs());
        }
    }
    assert!(worst < 1e-9, "worst extrapolation error {worst}");
    println!("[PASS] criterion 02 richardson exactness: worst error {worst:.3e} over 300 signals");
}

#[test]
fn criterion_03_negative_control() {
    let out = sweep_output();
    let baselines: Vec<_> = cells(out, "ideal")
        .into_iter()
        .filter(|r| r.config.swept.is_none())
        .collect();
    assert_eq!(baselines.len(), 3);
    for r in &baselines {
        let d = r.effects.as_ref().expect("non-degenerate").cohens_d;
        assert_eq!(
            r.class_raw,
            OutcomeClass::SignificantlyWorse,
            "ideal TC{} not significantly worse",
            r.config.trotter_depth
        );
        assert!(
            (-3.0..=-0.2).contains(&d),
            "ideal TC{}: d = {d} outside [-3, -0.2]",
            r.config.trotter_depth
        );
    }
    let ds: Vec<f64> =
        baselines.iter().map(|r| r.effects.as_ref().unwrap().cohens_d).collect();
    println!("[PASS] criterion 03 negative control: ideal baselines worse, d = {ds:.3?}");
}

#[test]
fn criterion_04_noise_floor_control() {
    let out = sweep_output();
    let floor = cells(out, "noise-floor");
    assert_eq!(floor.len(), 33);
    let ns = floor
        .iter()
        .filter(|r| r.class_raw == OutcomeClass::NotSignificant)
        .count();
    assert!(3 * ns >= 2 * floor.len(), "only {ns}/33 noise-floor cells not significant");
    let mut ds: Vec<f64> =
        floor.iter().filter_map(|r| r.effects.as_ref().map(|e| e.cohens_d)).collect();
    let med = median(&mut ds);
    assert!(med.abs() <= 0.3, "noise-floor median d = {med}");
    println!("[PASS] criterion 04 noise-floor control: {ns}/33 NS, median d = {med:.3}");
}

#[test]
fn criterion_05_depolarising_improvement() {
    let out = sweep_output();
    let kyoto = cells(out, "kyoto-depolarising");
    assert_eq!(kyoto.len(), 33);
    let better = kyoto
        .iter()
        .filter(|r| r.class_raw == OutcomeClass::SignificantlyBetter)
        .count();
    assert!(3 * better >= 2 * kyoto.len(), "only {better}/33 kyoto cells improved");
    let mut ds: Vec<f64> =
        kyoto.iter().filter_map(|r| r.effects.as_ref().map(|e| e.cohens_d)).collect();
    let med = median(&mut ds);
    assert!(med > 1.0, "kyoto median d = {med}");
    println!(
        "[PASS] criterion 05 depolarising improvement: {better}/33 better, median d = {med:.3}"
    );
}

#[test]
fn criterion_06_shot_scaling() {
    let noise = scenario::shot_scaling_noise();
    let mut ds = Vec::new();
    for &shots in &scenario::SHOT_SCALING_GRID {
        let config = ConfigPoint {
            noise_preset: "strong-depolarising".into(),
            trotter_depth: scenario::SHOT_SCALING_DEPTH,
            n_shots: shots,
            n_reps: scenario::DEFAULT_REPS,
            folding: FoldingStrategy::LocalFoldLeft,
            extrapolation: ExtrapolationMethod::Richardson,
            scale_factors: scenario::default_scale_factors(),
            swept: None,
            variant_label: "default".into(),
        };
        let r = run_config_at(
            &config,
            config.n_reps,
            scenario::DEFAULT_MASTER_SEED,
            Some(&noise),
            0.0,
            scenario::DEFAULT_ALPHA,
        )
        .unwrap();
        ds.push(r.effects.expect("non-degenerate").cohens_d);
    }
    assert!(ds.iter().all(|d| *d > 0.0), "effect not resolved at some shot count: {ds:?}");
    let shots_f: Vec<f64> = scenario::SHOT_SCALING_GRID.iter().map(|&s| s as f64).collect();
    let slope = log_log_slope(&shots_f, &ds).unwrap();
    assert!(
        (0.35..=0.65).contains(&slope),
        "log d vs log shots slope {slope} outside 0.5 +/- 0.15 (d = {ds:?})"
    );
    println!("[PASS] criterion 06 shot scaling: slope {slope:.3}, d = {ds:.2?}");
}

#[test]
fn criterion_07_bootstrap_power() {
    let alpha = 0.05;
    let mut worst_gap = 0.0f64;
    for d_true in [0.5, 1.0] {
        let base =
            PairedSample::new(normal_sample(d_true, 100_000, 0xB007 + d_true as u64)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x70B0);
        let curve = bootstrap_power(&base, &[5, 10, 20, 30], alpha, 1000, &mut rng).unwrap();
        for p in &curve.points {
            let analytic = ANALYTIC_POWER
                .iter()
                .find(|(d, n, _)| *d == d_true && *n == p.n_reps)
                .map(|(_, _, pw)| *pw)
                .expect("fixture present");
            let gap = (p.power - analytic).abs();
            worst_gap = worst_gap.max(gap);
            assert!(
                gap <= 0.05,
                "d = {d_true}, n = {}: bootstrap {} vs analytic {analytic}",
                p.n_reps,
                p.power
            );
        }
        for w in curve.points.windows(2) {
            assert!(
                w[1].power >= w[0].power - 0.03,
                "power not monotone: {:?} -> {:?}",
                w[0],
                w[1]
            );
        }
    }
    // calibrated moderate effect: 80% power within 20 repetitions
    let base = PairedSample::new(normal_sample(0.7, 100_000, 0xB0DE)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x70B1);
    let grid = [2, 5, 10, 15, 20, 25, 30, 40, 50];
    let curve = bootstrap_power(&base, &grid, alpha, 1000, &mut rng).unwrap();
    let smallest = curve.smallest_n_reaching(0.8).expect("curve reaches 0.8");
    assert!(smallest <= 20, "moderate effect needs n = {smallest} for 80% power");
    println!(
        "[PASS] criterion 07 bootstrap power: worst |boot - analytic| = {worst_gap:.3}, \
         80% power at n = {smallest}"
    );
}

#[test]
fn criterion_08_kish_neff() {
    assert_eq!(kish_neff(30, 0.0), 30.0);
    assert_eq!(kish_neff(30, 1.0), 1.0);
    let v = kish_neff(30, 0.54);
    assert!((v - 1.80).abs() <= 0.01, "kish(30, 0.54) = {v}");
    println!("[PASS] criterion 08 kish/icc: n_eff(30, 0.54) = {v:.4}");
}

#[test]
fn criterion_09_drift_illusion() {
    let weekend = run_drift(&scenario::drift_weekend(), scenario::DEFAULT_MASTER_SEED).unwrap();
    let sev = severity(&weekend).unwrap();
    assert!(sev.eta_squared >= 0.5, "weekend eta^2 = {}", sev.eta_squared);
    assert!(sev.r1 >= 0.7, "weekend r1 = {}", sev.r1);
    let report = illusion_report(&weekend, scenario::DEFAULT_ALPHA).unwrap();
    let ratio = report.illusion_ratio.expect("weekend effects stay positive");
    assert!(ratio >= 3.0, "illusion ratio = {ratio}");

    let control = scenario::drift_constant_control();
    let mut quiet = 0;
    for k in 0..20 {
        let r = run_drift(&control, scenario::DEFAULT_MASTER_SEED + k).unwrap();
        let s = severity(&r).unwrap();
        if s.eta_squared < 0.1 && s.r1.abs() < 0.3 {
            quiet += 1;
        }
    }
    assert!(quiet >= 18, "only {quiet}/20 constant-control runs inside the null band");
    println!(
        "[PASS] criterion 09 drift illusion: eta^2 {:.3}, r1 {:.3}, ratio {ratio:.2}, \
         control quiet {quiet}/20",
        sev.eta_squared, sev.r1
    );
}

#[test]
fn criterion_10_statistical_oracles() {
    // t-test against the frozen high-precision reference
    for (sample, _, _, p_want) in T_TEST_FIXTURES {
        let s = PairedSample::new(sample.to_vec()).unwrap();
        let r = paired_t_test(&s).unwrap();
        assert!((r.p_value - p_want).abs() < 1e-9, "t oracle gap on {sample:?}");
    }
    // Wilcoxon against full sign enumeration
    let mut rng = ChaCha8Rng::seed_from_u64(0x0CA1);
    let mut checked = 0;
    while checked < 200 {
        let n = rng.random_range(2..=10);
        let deltas: Vec<f64> =
            (0..n).map(|_| rng.random_range(-4i32..=4) as f64 * 0.25).collect();
        let sample = PairedSample::new(deltas.clone()).unwrap();
        match (wilcoxon_signed_rank(&sample), wilcoxon_enumeration_oracle(&deltas)) {
            (Ok(r), Some((w, p))) => {
                assert_eq!(r.statistic, w);
                assert!((r.p_value - p).abs() < 1e-12, "wilcoxon gap on {deltas:?}");
                checked += 1;
            }
            (Err(_), None) => {}
            (got, want) => panic!("wilcoxon disagreement on {deltas:?}: {got:?} vs {want:?}"),
        }
    }
    // Cliff's delta against brute force
    for seed in 0..1000u64 {
        let mut r = ChaCha8Rng::seed_from_u64(0xC11F + seed);
        let n = r.random_range(2..=50);
        let deltas: Vec<f64> = (0..n)
            .map(|_| if r.random_range(0..6) == 0 { 0.0 } else { r.random_range(-1.0..1.0) })
            .collect();
        let s = PairedSample::new(deltas.clone()).unwrap();
        assert_eq!(cliffs_delta(&s), cliffs_delta_oracle(&deltas));
    }
    // Bonferroni rejections nest inside Benjamini-Hochberg rejections
    for seed in 0..1000u64 {
        let ps = random_p_values(1 + (seed as usize % 50), 0xB40 + seed);
        let bonf = bonferroni(&ps);
        let bh = benjamini_hochberg(&ps);
        for (b, h) in bonf.iter().zip(&bh) {
            if *b <= 0.05 {
                assert!(*h <= 0.05, "nesting violated");
            }
        }
    }
    println!("[PASS] criterion 10 statistical oracles: t/wilcoxon/cliffs/corrections all match");
}

#[test]
fn criterion_11_multiplicity_robustness() {
    let out = sweep_output();
    let significant: Vec<_> = out
        .results
        .iter()
        .filter(|r| {
            matches!(
                r.class_raw,
                OutcomeClass::SignificantlyBetter | OutcomeClass::SignificantlyWorse
            )
        })
        .collect();
    let flips = significant
        .iter()
        .filter(|r| r.class_bonferroni.expect("corrected") != r.class_raw)
        .count();
    assert!(
        10 * flips <= significant.len(),
        "{flips} flips out of {} significant cells exceeds 10%",
        significant.len()
    );
    println!(
        "[PASS] criterion 11 multiplicity robustness: {flips}/{} significant cells flip \
         under Bonferroni",
        significant.len()
    );
}
