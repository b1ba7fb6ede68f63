use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use kaf_core::analysis::{
    complexity_delta, empirical_mean_error_check, ComplexityReport, MeanErrorConfig, Verdict,
};
use kaf_core::experiments::{
    bench, emit_results, run_experiment, run_sweep, ExperimentConfig, Results, SweepConfig,
    SweepParam,
};
use kaf_core::filters::Variant;
use kaf_core::properties::run_property_suite;

#[derive(Parser)]
#[command(name = "kaf", version, about = "Kernel adaptive filtering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo convergence run; writes curves, a summary and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides master_seed from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Steady-state table over one swept parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// One of L, gamma, alpha, beta; replaces the config's [sweep] param.
        #[arg(long)]
        param: Option<SweepParam>,
        /// Comma-separated values, e.g. 0.01,0.04,0.1
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Randomized checks of the information potential and quantizer.
    Properties {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Operation counts and the mean-error convergence check.
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
    /// Median per-iteration timings of each configured filter.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Also write bench.csv and a manifest here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Analyze {
    /// θ operation counts for one variant, window length and codebook size.
    Complexity {
        #[arg(long)]
        variant: Variant,
        #[arg(long, short = 'l')]
        window: u64,
        /// Codebook size H.
        #[arg(long)]
        codebook: f64,
        /// Measured θ time in seconds, for the wall column.
        #[arg(long, default_value_t = 0.0)]
        theta_seconds: f64,
        #[arg(long, default_value_t = 1)]
        iterations: u64,
    },
    /// Weight-error mean recursion on an explicit-feature toy problem.
    MeanError {
        /// Feature dimension.
        #[arg(long, default_value_t = 4)]
        dim: usize,
        /// TOML file with MeanErrorConfig fields; omitted keys keep defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_file(path).with_context(|| format!("loading {}", path.display()))
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out, seed } => {
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let res = run_experiment(&cfg)?;
            for s in &res.series {
                println!(
                    "{:<12} steady_state_db={:.3} h_mean={:.2}",
                    s.label, s.steady_state_db, s.h_mean
                );
            }
            report_written(&emit_results(&Results::Experiment(res), &out)?);
        }
        Command::Sweep {
            config,
            out,
            param,
            values,
            seed,
        } => {
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            match (param, values, cfg.sweep.as_mut()) {
                (Some(param), Some(values), Some(sw)) => {
                    sw.param = param;
                    sw.values = values;
                }
                (Some(param), Some(values), None) => {
                    cfg.sweep = Some(SweepConfig {
                        param,
                        values,
                        scenarios: Vec::new(),
                    })
                }
                (None, None, Some(_)) => {}
                (None, None, None) => bail!("no [sweep] section in the config; pass --param and --values"),
                _ => bail!("--param and --values must be given together"),
            }
            let table = run_sweep(&cfg)?;
            for r in &table.rows {
                println!(
                    "scenario={} filter={} {}={} steady_state_db={:.3} h_mean={:.2}",
                    r.scenario, r.filter, table.param, r.value, r.steady_state_db, r.h_mean
                );
            }
            report_written(&emit_results(&Results::Sweep { config: cfg, table }, &out)?);
        }
        Command::Properties { seed } => {
            let checks = run_property_suite(seed)?;
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                bail!("{failed} of {} properties failed", checks.len());
            }
        }
        Command::Analyze { what } => analyze(what)?,
        Command::Bench { config, reps, out } => {
            let cfg = load(&config)?;
            let rows = bench(&cfg, reps)?;
            for r in &rows {
                print!(
                    "{:<12} L={} h_mean={:.2} wall_per_iter={:.3e} theta_per_iter={:.3e}",
                    r.label, r.window_len, r.h_mean, r.wall_per_iter, r.theta_per_iter
                );
                match &r.cost {
                    Some(c) => println!(" mults={} adds={} exps={}", c.mults, c.adds, c.exps),
                    None => println!(),
                }
            }
            if let Some(out) = out {
                report_written(&emit_results(&Results::Bench { config: cfg, rows }, &out)?);
            }
        }
    }
    Ok(())
}

fn analyze(what: Analyze) -> Result<()> {
    match what {
        Analyze::Complexity {
            variant,
            window,
            codebook,
            theta_seconds,
            iterations,
        } => {
            let Some(family) = variant.criterion() else {
                bail!("KRLS has no θ computation to count");
            };
            let theta = Duration::from_secs_f64(theta_seconds * iterations as f64);
            let report = ComplexityReport::new(variant, window, codebook, theta, iterations)?;
            print!("{report}");
            let h = (codebook.round() as u64).max(1);
            println!("saved_ops_vs_unquantized={}", complexity_delta(window, h, family));
        }
        Analyze::MeanError { dim, config, seed } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    toml::from_str::<MeanErrorConfig>(&text)
                        .with_context(|| format!("parsing {}", path.display()))?
                }
                None => MeanErrorConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = empirical_mean_error_check(dim, &cfg)?;
            print!("{report}");
            if report.verdict != Verdict::Pass {
                bail!("mean-error check did not pass: {}", report.verdict);
            }
        }
    }
    Ok(())
}
