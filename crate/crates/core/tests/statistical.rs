//! Monte Carlo checks with fixed seeds. Tolerances are a few standard errors
//! unless a value is pinned from a previous run of the same seeds.

use rayon::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};

use shaky_ladder::analysts::{
    majority_attack, majority_attack_direct, run_random_analyst, shifted_majority_attack,
    DirectAttackInstance, Selection,
};
use shaky_ladder::audit::{faithfulness_audit, theorem_ub_ratio, Leaderboard};
use shaky_ladder::experiments::{
    default_k_grid, run_vary_noise, run_vary_queries, ExperimentConfig, ExperimentKind,
};
use shaky_ladder::mechanisms::{
    shaky_params, Ladder, LadderConfig, NoisyEmpiricalOracle, OracleKind, Rounding, ShakyLadder,
};
use shaky_ladder::model::{
    make_random_label_sample, model_from_predictions, BinaryVector, LossVector, SubmittedModel,
    Trace,
};
use shaky_ladder::noise::{binomial_exceedance, derive_seed, Gaussian, Laplace, Rng};

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v[((v.len() - 1) as f64 * q).round() as usize]
}

#[test]
fn label_fraction_at_one_million() {
    for seed in [0, 1, 2] {
        let s = make_random_label_sample(1_000_000, seed).unwrap();
        let frac = s.labels().count_ones() as f64 / 1e6;
        assert!((frac - 0.5).abs() <= 0.002, "seed {seed}: {frac}");
    }
}

#[test]
fn random_predictions_score_near_half() {
    let s = make_random_label_sample(10_000, 3).unwrap();
    let mut rng = Rng::new(4);
    for _ in 0..20 {
        let m = model_from_predictions(&BinaryVector::random(10_000, &mut rng), &s).unwrap();
        assert!((m.loss().mean() - 0.5).abs() <= 0.015);
    }
}

#[test]
fn gaussian_moments() {
    let g = Gaussian::new(1.0).unwrap();
    let mut rng = Rng::new(11);
    let xs: Vec<f64> = (0..1_000_000).map(|_| g.sample(&mut rng)).collect();
    let m = mean(&xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    assert!(m.abs() <= 0.004, "mean {m}");
    assert!((var - 1.0).abs() <= 0.02, "variance {var}");
    assert!(Gaussian::new(3.0 / 100.0).is_ok());
}

#[test]
fn laplace_tails() {
    let draws = 1_000_000;
    for (i, scale) in [0.01, 1.0].into_iter().enumerate() {
        let lap = Laplace::new(scale).unwrap();
        let mut rng = Rng::new(100 + i as u64);
        let xs: Vec<f64> = (0..draws).map(|_| lap.sample(&mut rng)).collect();
        for t in [0.5f64, 1.0, 2.0, 3.0] {
            let p = (-t).exp();
            let hits = xs.iter().filter(|x| x.abs() > t * scale).count() as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            let limit = if scale == 1.0 && t == 2.0 { 3.0 } else { 4.0 };
            assert!(
                (hits - p).abs() <= limit * se,
                "scale {scale}, t {t}: {hits} vs {p} (se {se})"
            );
        }
    }
}

/// Independent check of the exact tail against statrs' binomial CDF.
#[test]
fn binomial_exceedance_matches_statrs() {
    for m in [1u64, 2, 3, 11, 100, 101, 1001, 4001] {
        for p in [0.01, 0.3, 0.5, 0.55, 0.7, 0.99] {
            let oracle = 1.0 - Binomial::new(p, m).unwrap().cdf(m / 2);
            let ours = binomial_exceedance(m, p).unwrap();
            assert!(
                (ours - oracle).abs() <= 1e-10,
                "m {m}, p {p}: {ours} vs {oracle}"
            );
        }
    }
    assert_eq!(binomial_exceedance(1, 0.5).unwrap(), 0.5);
    assert!((binomial_exceedance(2, 0.5).unwrap() - 0.25).abs() < 1e-15);
    let v = binomial_exceedance(101, 0.55).unwrap();
    assert!(v >= 0.5 + 0.3 * 101f64.sqrt() * 0.05, "{v}");
}

#[test]
fn noisy_oracle_is_centred() {
    let n = 10_000;
    let stddev = 3.0 / 100.0;
    let mut board = Leaderboard::new(Box::new(
        NoisyEmpiricalOracle::new(n, 10_000, stddev, 5).unwrap(),
    ));
    let model = SubmittedModel::new(LossVector::constant(n, 0.37).unwrap(), 0.5).unwrap();
    let releases: Vec<f64> = (0..10_000).map(|_| board.submit(&model).unwrap()).collect();
    assert!((mean(&releases) - 0.37).abs() <= 4.0 * stddev / 100.0);
}

/// Mean over 100 reps at `n = 10^4, k = 500` for seeds `0..100`, recorded
/// from the first run.
const DIRECT_K500_MEAN: f64 = 4.2943500000000007e-1;

#[test]
fn direct_attack_bias_at_k_500() {
    let (n, k) = (10_000, 500);
    let errors: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            majority_attack_direct(n, k, None, seed)
                .unwrap()
                .final_error
        })
        .collect();
    let m = mean(&errors);
    eprintln!("direct k=500 mean final error {m:.17e}");
    assert!(m < 0.5 - 0.5 * (k as f64 / n as f64).sqrt() * 0.2);
    assert!(
        (m - DIRECT_K500_MEAN).abs() < 1e-12,
        "pinned {DIRECT_K500_MEAN}, got {m}"
    );
}

/// With no queries the majority is the all-(+1) vector, label bit 0.
#[test]
fn zero_queries_predict_all_ones() {
    let inst = DirectAttackInstance::generate(1000, 0, &mut Rng::new(1)).unwrap();
    let ones = inst.hidden().count_ones() as f64 / 1000.0;
    assert_eq!(inst.run(0.0).final_error, ones);
    assert!((ones - 0.5).abs() < 0.06);

    let sample = make_random_label_sample(1000, 2).unwrap();
    let board = OracleKind::Empirical.leaderboard(1000, 1).unwrap();
    let (report, _) = majority_attack(board, &sample, 0, Selection::Theorem, 3).unwrap();
    assert_eq!(report.selected_count, 0);
    assert_eq!(
        report.final_error,
        sample.labels().count_ones() as f64 / 1000.0
    );
}

fn empirical_theorem_attack(n: usize, k: usize, seed: u64) -> f64 {
    let sample = make_random_label_sample(n, derive_seed(seed, &[1])).unwrap();
    let board = OracleKind::Empirical.leaderboard(n, k + 1).unwrap();
    let (report, _) = majority_attack(
        board,
        &sample,
        k,
        Selection::Theorem,
        derive_seed(seed, &[3]),
    )
    .unwrap();
    report.final_error
}

/// Largest `c` with `R_S <= 1/2 - c sqrt(k/n)` in a third of the reps at
/// `n = 10^4, k = 500`, seeds `0..100`, recorded from the first run.
const THEOREM_MODE_CONSTANT: f64 = 0.14668605932398618;

#[test]
fn theorem_attack_against_the_exact_oracle() {
    let (n, k) = (10_000, 500);
    let scale = (k as f64 / n as f64).sqrt();
    let errors: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|seed| empirical_theorem_attack(n, k, seed))
        .collect();
    let third = quantile(&errors, 1.0 / 3.0);
    let constant = (0.5 - third) / scale;
    eprintln!(
        "theorem mode vs exact oracle: mean {:.4}, constant {constant:.17e}",
        mean(&errors)
    );
    let hits = errors
        .iter()
        .filter(|&&e| e <= 0.5 - constant * scale)
        .count();
    assert!(hits >= 34, "{hits}");
    assert!(constant > 0.1, "{constant}");
    assert!(
        (constant - THEOREM_MODE_CONSTANT).abs() < 1e-12,
        "pinned {THEOREM_MODE_CONSTANT}, got {constant}"
    );
}

fn shaky_random_analyst(n: usize, k: usize, seed: u64) -> Trace {
    let params = shaky_params(n, k, 0.1).unwrap();
    let mut board = Leaderboard::new(Box::new(ShakyLadder::new(params, derive_seed(seed, &[2]))));
    let sample = make_random_label_sample(n, derive_seed(seed, &[1])).unwrap();
    let mut rng = Rng::new(derive_seed(seed, &[3]));
    run_random_analyst(&mut board, &sample, k, &mut rng).unwrap();
    board.into_trace()
}

/// 95th percentile over seeds `0..200`, recorded from the first run.
const UB_RATIO_P95: f64 = 4.5729725786452216;

#[test]
fn theorem_ub_ratio_regression_and_rate() {
    let (n, k) = (10_000, 1000);
    let params = shaky_params(n, k, 0.1).unwrap();
    let ratios: Vec<f64> = (0..200u64)
        .into_par_iter()
        .map(|seed| theorem_ub_ratio(&shaky_random_analyst(n, k, seed), &params).unwrap())
        .collect();
    assert!(ratios.iter().all(|&r| r >= 0.0));
    let p95 = quantile(&ratios, 0.95);
    eprintln!("theorem_ub_ratio p95 {p95:.17e}");
    assert!(
        (p95 - UB_RATIO_P95).abs() < 1e-12,
        "pinned {UB_RATIO_P95}, got {p95}"
    );

    let params2 = shaky_params(2 * n, k, 0.1).unwrap();
    let ratios2: Vec<f64> = (0..200u64)
        .into_par_iter()
        .map(|seed| theorem_ub_ratio(&shaky_random_analyst(2 * n, k, seed), &params2).unwrap())
        .collect();
    let (m1, m2) = (quantile(&ratios, 0.5), quantile(&ratios2, 0.5));
    eprintln!("median ratio n={n}: {m1:.4}, n={}: {m2:.4}", 2 * n);
    assert!(m2 <= m1, "median ratio grew from {m1} to {m2}");
}

#[test]
fn shaky_ladder_is_not_faithful() {
    let (n, k) = (10_000, 1000);
    let params = shaky_params(n, k + 1, 0.1).unwrap();
    let counts: Vec<(usize, usize)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let sample = make_random_label_sample(n, derive_seed(seed, &[1])).unwrap();
            let board =
                Leaderboard::new(Box::new(ShakyLadder::new(params, derive_seed(seed, &[2]))));
            let (_, trace) = majority_attack(
                board,
                &sample,
                k,
                Selection::Theorem,
                derive_seed(seed, &[3]),
            )
            .unwrap();
            let audit = faithfulness_audit(&trace, n);
            let updates = trace.records().iter().filter(|r| r.updated).count();
            (audit.violations, updates)
        })
        .collect();
    let violations: usize = counts.iter().map(|c| c.0).sum();
    let updates: usize = counts.iter().map(|c| c.1).sum();
    eprintln!("shaky faithfulness: {violations} violations over {updates} updates");
    assert!(violations > 0);
}

#[test]
fn shifted_attack_feedback() {
    let (n, k) = (10_000, 100);
    let alpha = 1.0 / (3.0 * (k + 1) as f64);
    let offsets = shaky_ladder::reduction::offsets_per_query(alpha);
    let pairs: Vec<(usize, usize)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let sample = make_random_label_sample(n, derive_seed(seed, &[1])).unwrap();
            let ladder = |budget| {
                let config = LadderConfig::new(alpha / 2.0, Rounding::None).unwrap();
                Leaderboard::new(Box::new(Ladder::new(n, config, budget)))
            };
            let attack_seed = derive_seed(seed, &[3]);
            let (plain, _) =
                majority_attack(ladder(k + 1), &sample, k, Selection::Direct, attack_seed).unwrap();
            let (shifted, _) = shifted_majority_attack(
                ladder((k + 1) * offsets),
                &sample,
                k,
                alpha,
                Selection::Direct,
                attack_seed,
            )
            .unwrap();
            (plain.feedback_received, shifted.feedback_received)
        })
        .collect();
    for (plain, shifted) in &pairs {
        assert!(shifted >= plain, "plain {plain}, shifted {shifted}");
    }

    let sample = make_random_label_sample(n, 9).unwrap();
    let board = OracleKind::PopulationMin
        .leaderboard(n, (k + 1) * offsets)
        .unwrap();
    let (report, _) =
        shifted_majority_attack(board, &sample, k, alpha, Selection::Direct, 10).unwrap();
    assert_eq!(report.feedback_received, k);
}

#[test]
fn shifted_attack_against_shaky_ladder_stays_near_half() {
    let (n, k) = (10_000, 200);
    let alpha = 1.0 / (3.0 * (k + 1) as f64);
    let budget = (k + 1) * shaky_ladder::reduction::offsets_per_query(alpha);
    let params = shaky_params(n, budget, 0.1).unwrap();
    let errors: Vec<f64> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let sample = make_random_label_sample(n, derive_seed(seed, &[1])).unwrap();
            let board =
                Leaderboard::new(Box::new(ShakyLadder::new(params, derive_seed(seed, &[2]))));
            let (report, _) = shifted_majority_attack(
                board,
                &sample,
                k,
                alpha,
                Selection::Direct,
                derive_seed(seed, &[3]),
            )
            .unwrap();
            report.final_error
        })
        .collect();
    let m = mean(&errors);
    assert!((m - 0.5).abs() <= 0.01, "mean final error {m}");
}

#[test]
fn no_noise_error_falls_with_k() {
    let mut c = ExperimentConfig::new(ExperimentKind::VaryQueries, 10_000, default_k_grid());
    c.noise_grid = vec![0.0];
    c.seed = 21;
    let table = run_vary_queries(&c).unwrap();
    assert_eq!(table.rows.len(), 10);
    let means: Vec<f64> = table.rows.iter().map(|r| r.mean_error).collect();
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}

#[test]
fn vary_noise_is_monotone_within_a_paired_error() {
    let mut c = ExperimentConfig::new(ExperimentKind::VaryNoise, 10_000, vec![100, 500, 1000]);
    c.seed = 22;
    let table = run_vary_noise(&c).unwrap();
    let levels = c.noise_grid.len();
    for &k in &c.k_grid {
        for j in 0..levels - 1 {
            let lo = table.cell(k, j);
            let hi = table.cell(k, j + 1);
            let d: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(a, b)| b.final_error - a.final_error)
                .collect();
            let md = mean(&d);
            let sd =
                (d.iter().map(|x| (x - md).powi(2)).sum::<f64>() / (d.len() - 1) as f64).sqrt();
            let se = sd / (d.len() as f64).sqrt();
            assert!(md >= -se, "k {k}, level {j}: mean difference {md}, se {se}");
        }
    }
}
