use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser};

use super::config::{default_k_grid, parse_key_values, parse_list};
use super::{run, ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GOLDEN_MISMATCH: i32 = 3;

/// Leaderboard simulations: majority attacks, noise sweeps, envelope audits.
#[derive(Debug, Parser, Default)]
#[command(name = "shaky-ladder", version)]
struct Args {
    /// vary-queries | vary-noise | envelope | reduction-oracle | attack-vs-mechanism
    #[arg(long)]
    experiment: Option<String>,
    /// Holdout size.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated list of query counts; defaults to 100,200,...,1000.
    #[arg(long)]
    k: Option<String>,
    /// Comma-separated noise levels in units of 1/sqrt(n).
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// shaky | ladder | pf-ladder | empirical | noisy | population-min
    #[arg(long)]
    mechanism: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    /// Ladder step; defaults to 1/sqrt(n).
    #[arg(long)]
    eta: Option<f64>,
    /// Reduction accuracy; turns attacks into shifted attacks.
    #[arg(long)]
    alpha: Option<f64>,
    /// direct | theorem
    #[arg(long)]
    selection: Option<String>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare the output with this file; exit 3 on any difference.
    #[arg(long)]
    golden: Option<PathBuf>,
    /// Emit one row per repetition.
    #[arg(long)]
    per_rep: bool,
    /// Run repetitions on one thread.
    #[arg(long)]
    serial: bool,
    /// key=value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Args {
    /// Fills fields not given on the command line from `key=value` pairs.
    fn merge_file(&mut self, pairs: Vec<(String, String)>) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::invalid(format!("config key '{key}': cannot parse '{v}'")))
        }
        for (key, v) in pairs {
            match key.as_str() {
                "experiment" => {
                    self.experiment.get_or_insert(v);
                }
                "n" => {
                    if self.n.is_none() {
                        self.n = Some(parse(&key, &v)?);
                    }
                }
                "k" => {
                    self.k.get_or_insert(v);
                }
                "noise" => {
                    self.noise.get_or_insert(v);
                }
                "reps" => {
                    if self.reps.is_none() {
                        self.reps = Some(parse(&key, &v)?);
                    }
                }
                "seed" => {
                    if self.seed.is_none() {
                        self.seed = Some(parse(&key, &v)?);
                    }
                }
                "mechanism" => {
                    self.mechanism.get_or_insert(v);
                }
                "beta" => {
                    if self.beta.is_none() {
                        self.beta = Some(parse(&key, &v)?);
                    }
                }
                "eta" => {
                    if self.eta.is_none() {
                        self.eta = Some(parse(&key, &v)?);
                    }
                }
                "alpha" => {
                    if self.alpha.is_none() {
                        self.alpha = Some(parse(&key, &v)?);
                    }
                }
                "selection" => {
                    self.selection.get_or_insert(v);
                }
                "out" => {
                    self.out.get_or_insert(PathBuf::from(v));
                }
                "golden" => {
                    self.golden.get_or_insert(PathBuf::from(v));
                }
                "per-rep" | "per_rep" => self.per_rep |= parse::<bool>(&key, &v)?,
                "serial" => self.serial |= parse::<bool>(&key, &v)?,
                other => return Err(Error::invalid(format!("unknown config key '{other}'"))),
            }
        }
        Ok(())
    }

    fn into_config(self) -> Result<ExperimentConfig> {
        let experiment: ExperimentKind = self
            .experiment
            .as_deref()
            .ok_or_else(|| Error::invalid("--experiment is required"))?
            .parse()?;
        let n = self.n.ok_or_else(|| Error::invalid("--n is required"))?;
        let k_grid = match self.k.as_deref() {
            Some(k) => parse_list(k)?,
            None => default_k_grid(),
        };
        let mut c = ExperimentConfig::new(experiment, n, k_grid);
        if let Some(noise) = &self.noise {
            c.noise_grid = parse_list(noise)?;
        }
        if let Some(reps) = self.reps {
            c.reps = reps;
        }
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if let Some(m) = &self.mechanism {
            c.mechanism = m.parse()?;
        }
        if let Some(beta) = self.beta {
            c.beta = beta;
        }
        c.eta = self.eta;
        c.alpha = self.alpha;
        if let Some(s) = &self.selection {
            c.selection = s.parse()?;
        }
        c.parallel = !self.serial;
        c.validate()?;
        Ok(c)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::ParameterRegime(_) | Error::BudgetExhausted { .. } => {
            EXIT_USAGE
        }
        Error::GoldenMismatch { .. } => EXIT_GOLDEN_MISMATCH,
        Error::Io { .. } => EXIT_IO,
    }
}

fn execute(mut args: Args) -> Result<()> {
    if let Some(path) = args.config.clone() {
        args.merge_file(parse_key_values(&read(&path)?)?)?;
    }
    let per_rep = args.per_rep;
    let out = args.out.clone();
    let golden = args.golden.clone();
    let config = args.into_config()?;
    let csv = run(&config)?.to_csv(per_rep);
    match &out {
        Some(path) => fs::write(path, &csv).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?,
        None if golden.is_none() => print!("{csv}"),
        None => {}
    }
    if let Some(path) = golden {
        if read(&path)? != csv {
            return Err(Error::GoldenMismatch { path });
        }
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the experiment and returns the
/// process exit code: 0 success, 1 I/O failure, 2 invalid arguments,
/// 3 golden-file mismatch.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(args) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {err}");
            let code = exit_code(&err);
            if code == EXIT_USAGE {
                eprintln!("{}", Args::command().render_usage());
            }
            code
        }
    }
}
