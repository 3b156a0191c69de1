//! Command-line front end: `run`, `sweep` and `validate` on TOML scenario files.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

pub mod config;
pub mod evaluate;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

pub use config::{ConfigError, ScenarioConfig, SweepPoint};
pub use evaluate::{evaluate, PointError, PointOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable setting the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "NMFLOW_THREADS";

const DEFAULT_OUT: &str = "nmflow-out";

#[derive(Debug, Parser)]
#[command(name = "nmflow", version, about = "Open-system dynamics and non-Markovianity measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the base scenario (sweep axes ignored).
    Run(CommonArgs),
    /// Evaluate the Cartesian grid of the sweep axes.
    Sweep(CommonArgs),
    /// Check the config and every sweep point without computing.
    Validate {
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    pub config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized checks (overrides `seed` in the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (overrides NMFLOW_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run(a) => match pool(&a) {
            Ok(p) => run(&a, &p),
            Err(code) => code,
        },
        Command::Sweep(a) => match pool(&a) {
            Ok(p) => sweep(&a, &p),
            Err(code) => code,
        },
        Command::Validate { config } => validate(&config),
    }
}

fn thread_count(explicit: Option<usize>) -> Result<usize, ConfigError> {
    if let Some(n) = explicit {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| ConfigError(format!("{THREADS_ENV} must be a positive integer (got {v:?})"))),
        Err(_) => Ok(0),
    }
}

fn pool(a: &CommonArgs) -> Result<rayon::ThreadPool, i32> {
    let threads = thread_count(a.threads).map_err(|e| {
        eprintln!("{e}");
        EXIT_CONFIG
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| {
        eprintln!("cannot start {threads} worker threads: {e}");
        EXIT_CONFIG
    })
}

fn load(a: &CommonArgs) -> Result<(ScenarioConfig, PathBuf, PathBuf), ConfigError> {
    let mut cfg = ScenarioConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let base = a.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let out = a.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&out).map_err(|e| ConfigError(format!("cannot create output directory {}: {e}", out.display())))?;
    Ok((cfg, base, out))
}

fn io_failure(e: std::io::Error) -> i32 {
    eprintln!("writing artifacts failed: {e}");
    EXIT_CONFIG
}

pub fn run(a: &CommonArgs, pool: &rayon::ThreadPool) -> i32 {
    let (cfg, base, out) = match load(a) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = pool.install(|| evaluate(&cfg, &base));
    let result = (|| -> std::io::Result<i32> {
        let correlations = cfg.correlations.is_some();
        let mut m = fs::File::create(out.join("measures.csv"))?;
        writeln!(m, "{}", output::measures_header(&[], correlations))?;
        writeln!(m, "{}", output::measures_row(&[], &outcome, correlations))?;
        match &outcome {
            Ok(o) => {
                output::write_trajectory(&out.join("trajectory.csv"), &o.trajectory)?;
                output::write_correlations(&out.join("correlations.csv"), o)?;
                fs::write(out.join("report.txt"), output::point_report(&cfg, o))?;
                Ok(EXIT_OK)
            }
            Err(e) => {
                eprintln!("{e}");
                fs::write(out.join("report.txt"), format!("error: {e}\n"))?;
                Ok(exit_code(e))
            }
        }
    })();
    result.unwrap_or_else(io_failure)
}

fn exit_code(e: &PointError) -> i32 {
    match e {
        PointError::Config(_) => EXIT_CONFIG,
        PointError::Numerical { .. } => EXIT_NUMERICAL,
    }
}

pub fn sweep(a: &CommonArgs, pool: &rayon::ThreadPool) -> i32 {
    let (cfg, base, out) = match load(a) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    let points = match cfg.expand() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    let names: Vec<String> = cfg.sweep.axes.iter().map(|x| x.parameter.clone()).collect();
    let correlations = cfg.correlations.is_some();
    let traj_dir = out.join("trajectories");
    let result = (|| -> std::io::Result<Vec<(usize, Result<PointOutcome, PointError>)>> {
        fs::create_dir_all(&traj_dir)?;
        let mut m = std::io::BufWriter::new(fs::File::create(out.join("measures.csv"))?);
        writeln!(m, "{}", output::measures_header(&names, correlations))?;
        m.flush()?;
        let (tx, rx) = mpsc::channel();
        let mut collected = Vec::with_capacity(points.len());
        let mut write_err = None;
        std::thread::scope(|scope| {
            scope.spawn(|| {
                pool.install(|| {
                    points.par_iter().for_each_with(tx, |tx, p| {
                        let _ = tx.send((p.index, evaluate(&p.config, &base)));
                    })
                })
            });
            // single writer: rows are emitted in grid order as soon as they are available
            let mut pending = std::collections::BTreeMap::new();
            let mut next = 0;
            for (idx, outcome) in rx {
                pending.insert(idx, outcome);
                while let Some(outcome) = pending.remove(&next) {
                    let p: &SweepPoint = &points[next];
                    let values: Vec<f64> = p.params.iter().map(|(_, v)| *v).collect();
                    let res = (|| -> std::io::Result<()> {
                        writeln!(m, "{}", output::measures_row(&values, &outcome, correlations))?;
                        m.flush()?;
                        if let Ok(o) = &outcome {
                            output::write_trajectory(&traj_dir.join(format!("point_{next:04}.csv")), &o.trajectory)?;
                            if o.correlations.is_some() {
                                output::write_correlations(&traj_dir.join(format!("correlations_{next:04}.csv")), o)?;
                            }
                        }
                        Ok(())
                    })();
                    if let Err(e) = res {
                        write_err.get_or_insert(e);
                    }
                    collected.push((next, outcome));
                    next += 1;
                }
            }
        });
        if let Some(e) = write_err {
            return Err(e);
        }
        fs::write(out.join("report.txt"), output::sweep_report(&points, &collected))?;
        Ok(collected)
    })();
    let collected = match result {
        Ok(c) => c,
        Err(e) => return io_failure(e),
    };
    let errors: Vec<&PointError> = collected.iter().filter_map(|(_, o)| o.as_ref().err()).collect();
    for (idx, o) in &collected {
        if let Err(e) = o {
            eprintln!("point {idx}: {e}");
        }
    }
    if errors.is_empty() {
        EXIT_OK
    } else if errors.iter().all(|e| matches!(e, PointError::Config(_))) {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

pub fn validate(path: &Path) -> i32 {
    let check = || -> Result<usize, ConfigError> {
        let cfg = ScenarioConfig::load(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let points = cfg.expand()?;
        for p in &points {
            p.config.model.build(&base).map_err(|e| ConfigError(format!("sweep point {}: {e}", p.index)))?;
            if let Some(c) = &p.config.correlations {
                c.build().map_err(|e| ConfigError(format!("sweep point {}: {e}", p.index)))?;
            }
        }
        Ok(points.len())
    };
    match check() {
        Ok(n) => {
            println!("{}: valid ({n} point{})", path.display(), if n == 1 { "" } else { "s" });
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{e}");
            EXIT_CONFIG
        }
    }
}
