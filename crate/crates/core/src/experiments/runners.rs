use rayon::prelude::*;

use super::{
    mean_and_std, ExperimentConfig, ExperimentKind, MechanismKind, RepResult, ResultTable,
    SummaryRow,
};
use crate::analysts::{majority_attack, shifted_majority_attack, DirectAttackInstance};
use crate::audit::{envelope_check, leaderboard_error, update_count, Leaderboard};
use crate::error::{Error, Result};
use crate::mechanisms::{
    shaky_params, Ladder, LadderConfig, OracleKind, ParameterFreeLadder, Rounding, ShakyLadder,
};
use crate::model::{make_random_label_sample, BinaryVector, LossVector, Trace};
use crate::noise::{derive_seed, Rng};
use crate::reduction::{offsets_per_query, run_estimator_session, session_query_limit, Query};

/// Seed of repetition `rep` in the cell for `k`. Independent of the noise
/// level, so every noise level of a cell reuses the same draws.
pub fn rep_seed(config: &ExperimentConfig, k: usize, rep: usize) -> u64 {
    derive_seed(
        config.seed,
        &[
            config.experiment.seed_tag(),
            config.n as u64,
            k as u64,
            rep as u64,
        ],
    )
}

/// Leaderboard for `config.mechanism` with the given budget. A noisy
/// mechanism at multiplier 0 is the exact empirical oracle.
pub fn build_board(
    config: &ExperimentConfig,
    budget: usize,
    noise_multiplier: f64,
    seed: u64,
) -> Result<Leaderboard> {
    let n = config.n;
    Ok(match config.mechanism {
        MechanismKind::Shaky => Leaderboard::new(Box::new(ShakyLadder::new(
            shaky_params(n, budget, config.beta)?,
            seed,
        ))),
        MechanismKind::Ladder => Leaderboard::new(Box::new(Ladder::new(
            n,
            LadderConfig::new(config.eta(), Rounding::None)?,
            budget,
        ))),
        MechanismKind::PfLadder => Leaderboard::new(Box::new(ParameterFreeLadder::new(n, budget))),
        MechanismKind::Empirical => OracleKind::Empirical.leaderboard(n, budget)?,
        MechanismKind::Noisy if noise_multiplier == 0.0 => {
            OracleKind::Empirical.leaderboard(n, budget)?
        }
        MechanismKind::Noisy => OracleKind::NoisyEmpirical {
            stddev: noise_multiplier / (n as f64).sqrt(),
            seed,
        }
        .leaderboard(n, budget)?,
        MechanismKind::PopulationMin => OracleKind::PopulationMin.leaderboard(n, budget)?,
    })
}

fn noise_grid(config: &ExperimentConfig) -> Vec<f64> {
    match config.experiment {
        ExperimentKind::VaryQueries | ExperimentKind::VaryNoise => config.noise_grid.clone(),
        _ if config.mechanism == MechanismKind::Noisy => config.noise_grid.clone(),
        _ => vec![0.0],
    }
}

fn check_mechanism(config: &ExperimentConfig) -> Result<()> {
    let m = config.mechanism;
    let ok = match config.experiment {
        ExperimentKind::VaryQueries | ExperimentKind::VaryNoise => {
            matches!(m, MechanismKind::Noisy | MechanismKind::Empirical)
        }
        ExperimentKind::Envelope => m == MechanismKind::Shaky,
        ExperimentKind::ReductionOracle | ExperimentKind::AttackVsMechanism => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "mechanism '{m}' is not available for experiment '{}'",
            config.experiment
        )))
    }
}

fn with_trace_stats(mut r: RepResult, trace: &Trace) -> Result<RepResult> {
    r.lberr = Some(leaderboard_error(trace)?);
    r.updates = Some(update_count(trace));
    r.max_noise = Some(trace.max_noise_magnitude());
    Ok(r)
}

fn run_direct(
    config: &ExperimentConfig,
    grid: &[f64],
    k: usize,
    rep: usize,
) -> Result<Vec<RepResult>> {
    let mut rng = Rng::new(rep_seed(config, k, rep));
    let instance = DirectAttackInstance::generate(config.n, k, &mut rng)?;
    let scale = 1.0 / (config.n as f64).sqrt();
    Ok(grid
        .iter()
        .enumerate()
        .map(|(j, &mult)| RepResult {
            k,
            noise_index: j,
            rep,
            final_error: instance.run(mult * scale).final_error,
            lberr: None,
            updates: None,
            max_noise: None,
        })
        .collect())
}

fn run_attack(
    config: &ExperimentConfig,
    grid: &[f64],
    k: usize,
    rep: usize,
) -> Result<Vec<RepResult>> {
    let seed = rep_seed(config, k, rep);
    let sample = make_random_label_sample(config.n, derive_seed(seed, &[1]))?;
    let mut out = Vec::with_capacity(grid.len());
    for (j, &mult) in grid.iter().enumerate() {
        let mech_seed = derive_seed(seed, &[2]);
        let analyst_seed = derive_seed(seed, &[3]);
        let (report, trace) = match config.alpha {
            None => {
                let board = build_board(config, k + 1, mult, mech_seed)?;
                majority_attack(board, &sample, k, config.selection, analyst_seed)?
            }
            Some(alpha) => {
                let budget = (k + 1) * offsets_per_query(alpha);
                let board = build_board(config, budget, mult, mech_seed)?;
                shifted_majority_attack(board, &sample, k, alpha, config.selection, analyst_seed)?
            }
        };
        let mut r = with_trace_stats(
            RepResult {
                k,
                noise_index: j,
                rep,
                final_error: report.final_error,
                lberr: None,
                updates: None,
                max_noise: None,
            },
            &trace,
        )?;
        if config.experiment == ExperimentKind::Envelope {
            let params = *trace
                .params()
                .ok_or_else(|| Error::invalid("envelope needs mechanism parameters"))?;
            let eval = envelope_check(&trace, &params)?;
            r.lberr = Some(eval.lberr);
            r.updates = Some(eval.update_count);
            r.max_noise = Some(eval.max_noise);
        }
        out.push(r);
    }
    Ok(out)
}

/// Mean absolute answer error of one estimator session with `k` queries.
fn run_reduction(
    config: &ExperimentConfig,
    grid: &[f64],
    k: usize,
    rep: usize,
) -> Result<Vec<RepResult>> {
    let alpha = config.alpha.unwrap_or(1.0 / (3.0 * k as f64));
    if k > session_query_limit(alpha) {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the {} queries allowed at alpha = {alpha}",
            session_query_limit(alpha)
        )));
    }
    let seed = rep_seed(config, k, rep);
    let mut out = Vec::with_capacity(grid.len());
    for (j, &mult) in grid.iter().enumerate() {
        let mut rng = Rng::new(derive_seed(seed, &[3]));
        let queries = (0..k)
            .map(|_| {
                let p = (1.0 - 2.0 * alpha) * rng.uniform();
                let bits = BinaryVector::from_bits((0..config.n).map(|_| rng.bernoulli(p)));
                Query::new(LossVector::from_mistakes(bits)?, p)
            })
            .collect::<Result<Vec<_>>>()?;
        let board = build_board(
            config,
            k * offsets_per_query(alpha),
            mult,
            derive_seed(seed, &[2]),
        )?;
        let (log, board) = run_estimator_session(board, &queries, alpha)?;
        let err = log
            .answers
            .iter()
            .zip(&queries)
            .map(|(a, q)| (a.value - q.population_mean()).abs())
            .sum::<f64>()
            / k as f64;
        out.push(with_trace_stats(
            RepResult {
                k,
                noise_index: j,
                rep,
                final_error: err,
                lberr: None,
                updates: None,
                max_noise: None,
            },
            board.trace(),
        )?);
    }
    Ok(out)
}

/// Runs the configured experiment.
pub fn run(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    check_mechanism(config)?;
    let grid = noise_grid(config);
    let tasks: Vec<(usize, usize)> = config
        .k_grid
        .iter()
        .flat_map(|&k| (0..config.reps).map(move |rep| (k, rep)))
        .collect();
    let task = |&(k, rep): &(usize, usize)| -> Result<Vec<RepResult>> {
        match config.experiment {
            ExperimentKind::VaryQueries | ExperimentKind::VaryNoise => {
                run_direct(config, &grid, k, rep)
            }
            ExperimentKind::Envelope | ExperimentKind::AttackVsMechanism => {
                run_attack(config, &grid, k, rep)
            }
            ExperimentKind::ReductionOracle => run_reduction(config, &grid, k, rep),
        }
    };
    let nested: Vec<Vec<RepResult>> = if config.parallel {
        tasks.par_iter().map(task).collect::<Result<_>>()?
    } else {
        tasks.iter().map(task).collect::<Result<_>>()?
    };
    let mut reps: Vec<RepResult> = nested.into_iter().flatten().collect();

    // Cells in grid order; reps inside a cell by index.
    let k_pos = |k: usize| {
        config
            .k_grid
            .iter()
            .position(|&x| x == k)
            .unwrap_or(usize::MAX)
    };
    reps.sort_by_key(|r| (k_pos(r.k), r.noise_index, r.rep));
    reps.dedup_by_key(|r| (r.k, r.noise_index, r.rep));

    let label = match config.experiment {
        ExperimentKind::VaryQueries | ExperimentKind::VaryNoise => "noisy",
        _ => config.mechanism.name(),
    };
    let mut rows = Vec::new();
    for chunk in reps.chunk_by(|a, b| a.k == b.k && a.noise_index == b.noise_index) {
        let values: Vec<f64> = chunk
            .iter()
            .map(|r| match config.experiment {
                ExperimentKind::Envelope => r.lberr.unwrap_or(f64::NAN),
                _ => r.final_error,
            })
            .collect();
        let (mean, std) = mean_and_std(&values);
        rows.push(SummaryRow {
            experiment: config.experiment,
            mechanism: label.to_string(),
            n: config.n,
            k: chunk[0].k,
            noise_multiplier: grid[chunk[0].noise_index],
            rep_count: chunk.len(),
            mean_error: mean,
            std_error: std,
        });
    }
    Ok(ResultTable { rows, reps })
}

/// Direct majority attack for every `k` and noise multiplier, default noise
/// `{0, 1, 3}/sqrt(n)`.
pub fn run_vary_queries(config: &ExperimentConfig) -> Result<ResultTable> {
    let mut c = config.clone();
    c.experiment = ExperimentKind::VaryQueries;
    run(&c)
}

/// Direct majority attack over the noise grid, default
/// `{0, 0.5, 1, 2, 3, 4, 5}/sqrt(n)`.
pub fn run_vary_noise(config: &ExperimentConfig) -> Result<ResultTable> {
    let mut c = config.clone();
    c.experiment = ExperimentKind::VaryNoise;
    run(&c)
}
