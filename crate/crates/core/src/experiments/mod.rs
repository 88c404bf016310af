//! Monte Carlo experiment harness and its CSV output.

mod cli;
mod config;
mod runners;

pub use cli::cli_main;
pub use config::{default_k_grid, ExperimentConfig, ExperimentKind, MechanismKind};
pub use runners::{build_board, rep_seed, run, run_vary_noise, run_vary_queries};

use crate::csv::{format_float, format_opt, push_row};

pub const SUMMARY_CSV_HEADER: &str =
    "experiment,mechanism,n,k,noise_multiplier,rep_count,mean_error,std_error";

pub const PER_REP_CSV_COLUMNS: &str = "rep,final_error,lberr,updates_B,max_noise_L";

/// Outcome of one repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepResult {
    pub k: usize,
    pub noise_index: usize,
    pub rep: usize,
    pub final_error: f64,
    pub lberr: Option<f64>,
    pub updates: Option<usize>,
    pub max_noise: Option<f64>,
}

/// Aggregate over the repetitions of one `(k, noise)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: ExperimentKind,
    pub mechanism: String,
    pub n: usize,
    pub k: usize,
    pub noise_multiplier: f64,
    pub rep_count: usize,
    pub mean_error: f64,
    /// Sample standard deviation (`reps - 1` denominator); 0 for one rep.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<SummaryRow>,
    /// Per-repetition results, sorted by `(k, noise, rep)`.
    pub reps: Vec<RepResult>,
}

impl ResultTable {
    pub fn row(&self, k: usize, noise_multiplier: f64) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.k == k && r.noise_multiplier == noise_multiplier)
    }

    /// Per-rep results of the cell at `(k, noise_index)`.
    pub fn cell(&self, k: usize, noise_index: usize) -> Vec<&RepResult> {
        self.reps
            .iter()
            .filter(|r| r.k == k && r.noise_index == noise_index)
            .collect()
    }

    pub fn to_csv(&self, per_rep: bool) -> String {
        let mut out = String::from(SUMMARY_CSV_HEADER);
        if per_rep {
            out.push(',');
            out.push_str(PER_REP_CSV_COLUMNS);
        }
        out.push('\n');
        let mut reps = self.reps.iter().peekable();
        for row in &self.rows {
            let summary = [
                row.experiment.name().to_string(),
                row.mechanism.clone(),
                row.n.to_string(),
                row.k.to_string(),
                format_float(row.noise_multiplier),
                row.rep_count.to_string(),
                format_float(row.mean_error),
                format_float(row.std_error),
            ];
            if !per_rep {
                push_row(&mut out, summary);
                continue;
            }
            for _ in 0..row.rep_count {
                let r = reps.next().expect("every summary row owns its reps");
                let fields = summary.iter().cloned().chain([
                    r.rep.to_string(),
                    format_float(r.final_error),
                    format_opt(r.lberr),
                    r.updates.map(|b| b.to_string()).unwrap_or_default(),
                    format_opt(r.max_noise),
                ]);
                push_row(&mut out, fields);
            }
        }
        out
    }
}

/// Sample mean and sample standard deviation.
pub fn mean_and_std(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (m - 1.0)).sqrt())
}
