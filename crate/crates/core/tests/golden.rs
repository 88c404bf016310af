//! Pinned outputs. Regenerate with `UPDATE_GOLDEN=1 cargo test --test golden`.

use std::fs;
use std::path::PathBuf;

use shaky_ladder::audit::Leaderboard;
use shaky_ladder::experiments::cli_main;
use shaky_ladder::mechanisms::{shaky_params, ShakyLadder};
use shaky_ladder::model::{LossVector, SubmittedModel};
use shaky_ladder::noise::{golden_lines, Laplace, Rng};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn updating() -> bool {
    std::env::var_os("UPDATE_GOLDEN").is_some()
}

fn check(name: &str, actual: &str) {
    let path = fixture(name);
    if updating() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}; run with UPDATE_GOLDEN=1", path.display()));
    assert!(
        expected == actual,
        "{} differs from the current output",
        path.display()
    );
}

#[test]
fn laplace_stream() {
    let laplace = Laplace::new(0.5).unwrap();
    let mut rng = Rng::new(42);
    let draws: Vec<f64> = (0..16).map(|_| laplace.sample(&mut rng)).collect();
    check("laplace_seed42.txt", &golden_lines(&draws));
}

/// Seed 7, n = 10^4, k = 100, beta = 0.1, against a fixed descending stream.
#[test]
fn shaky_trace() {
    let n = 10_000;
    let params = shaky_params(n, 100, 0.1).unwrap();
    let mut board = Leaderboard::new(Box::new(ShakyLadder::new(params, 7)));
    for t in 0..100 {
        let x = 0.6 - 0.005 * t as f64;
        let model = SubmittedModel::new(LossVector::constant(n, x).unwrap(), x).unwrap();
        board.submit(&model).unwrap();
    }
    check("shaky_seed7.csv", &board.trace().to_csv());
}

#[test]
fn vary_queries_small() {
    let path = fixture("vq_small.csv");
    let mut argv: Vec<String> = [
        "shaky-ladder",
        "--experiment",
        "vary-queries",
        "--n",
        "1000",
        "--k",
        "10,50",
        "--reps",
        "5",
        "--seed",
        "1",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    argv.push(if updating() { "--out" } else { "--golden" }.to_string());
    argv.push(path.display().to_string());
    assert_eq!(cli_main(argv), 0);
}
