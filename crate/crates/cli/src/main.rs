//! `netscore` command-line driver.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 invalid configuration,
//! 4 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netscore::exec::{configure_threads, ExecMode};
use netscore::experiments::{
    apply_overrides, compare_n, load_config, preset, read_trajectories, run_experiment, write_comparison,
    write_summary, ExperimentConfig, PRESETS,
};
use netscore::metrics::{aggregate, CrlbAggregation};
use netscore::{Error, Scenario};

#[derive(Parser)]
#[command(name = "netscore", version, about = "Credit scoring on dynamic homophily networks")]
struct Cli {
    /// Cap on worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single replication and write its outputs
    Simulate(RunArgs),
    /// Run all replications and write trajectories, summaries and bounds
    Montecarlo(RunArgs),
    /// Summarize an existing trajectory CSV
    Metrics {
        /// Trajectory CSV written by `simulate` or `montecarlo`
        #[arg(long)]
        input: PathBuf,
        /// Summary CSV to write
        #[arg(long)]
        out: PathBuf,
        /// How per-step CRLBs are combined: mean | harmonic
        #[arg(long, default_value = "mean")]
        crlb_aggregation: CrlbAggregation,
    },
    /// Compare error spread per score bin between two trajectory CSVs
    Compare {
        /// Baseline run (e.g. 50 clients)
        #[arg(long)]
        a: PathBuf,
        /// Run compared against the baseline (e.g. 100 clients)
        #[arg(long)]
        b: PathBuf,
        /// Time step to compare (default: last)
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 15.0)]
        score_cap: f64,
        #[arg(long, default_value_t = 1.0)]
        bin_width: f64,
        /// Comparison CSV to write
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in presets and their parameters
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (TOML key = value)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a named preset
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Override a config key, e.g. --set nu=0.8 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
    overrides: Vec<(String, String)>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, env = "NETSCORE_OUT", default_value = "results")]
    out: PathBuf,
    /// Run replications on one thread
    #[arg(long)]
    sequential: bool,
}

fn parse_override(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty key in `{s}`"));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

fn build_config(args: &RunArgs) -> netscore::Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => ExperimentConfig::default(),
    };
    apply_overrides(&mut cfg, &args.overrides)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exec_mode(sequential: bool) -> ExecMode {
    if sequential {
        ExecMode::Sequential
    } else {
        ExecMode::default()
    }
}

fn run(args: RunArgs, single: bool) -> netscore::Result<()> {
    let mut cfg = build_config(&args)?;
    if single {
        cfg.replications = 1;
    }
    let (run, manifest) = run_experiment(&cfg, &args.out, exec_mode(args.sequential))?;
    for (scenario, summary) in &run.summaries {
        let last = summary.slice(summary.horizon);
        let mse = last.iter().map(|r| r.mse).sum::<f64>() / last.len() as f64;
        eprintln!(
            "{scenario}: {} replications x {} clients, mean mse at t={} is {mse:.4}",
            summary.replications, summary.n_clients, summary.horizon
        );
    }
    for f in &manifest.files {
        println!("{}", args.out.join(f).display());
    }
    println!("{}", manifest.path.display());
    Ok(())
}

fn metrics(input: &Path, out: &Path, mode: CrlbAggregation) -> netscore::Result<()> {
    let trajs = read_trajectories(input)?;
    let scenario = trajs
        .first()
        .map(|t| t.scenario)
        .ok_or_else(|| Error::Config(format!("{}: no trajectories", input.display())))?;
    let summary = aggregate(&trajs, scenario, mode)?;
    for p in write_summary(out, &summary)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn compare(a: &Path, b: &Path, t: Option<usize>, cap: f64, width: f64, out: &Path) -> netscore::Result<()> {
    let (ta, tb) = (read_trajectories(a)?, read_trajectories(b)?);
    let t = t.or_else(|| ta.first().map(|tr| tr.horizon())).unwrap_or(0);
    let cmp = compare_n(&ta, &tb, t, cap, width, (4.0, 12.0))?;
    write_comparison(out, &cmp)?;
    println!(
        "t={t}: run b has the smaller error IQR in {:.1}% of middle bins",
        100.0 * cmp.fraction_b_smaller
    );
    println!("{}", out.display());
    Ok(())
}

fn presets() {
    for p in PRESETS {
        let cfg = p.config();
        let q = &cfg.params;
        println!("{}: {}", p.name, p.description);
        let rows = [
            ("n_clients", q.n_clients.to_string()),
            ("horizon", q.horizon.to_string()),
            ("replications", cfg.replications.to_string()),
            (
                "scenario",
                cfg.scenarios
                    .iter()
                    .map(Scenario::to_string)
                    .collect::<Vec<_>>()
                    .join(", "),
            ),
            ("a", q.a.at(0).to_string()),
            ("b", q.b.at(0).to_string()),
            ("q", q.q.at(0).to_string()),
            ("r", q.r.at(0).to_string()),
            ("nu", q.nu.to_string()),
            ("score_cap", q.score_cap.to_string()),
            ("initial_var", q.initial_var.to_string()),
            ("prior_mean", q.prior_mean().to_string()),
            ("population", "uniform".to_string()),
            ("seed", cfg.master_seed.to_string()),
        ];
        for (k, v) in rows {
            println!("  {k:<13} {v}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        configure_threads(n);
    }
    let result = match cli.command {
        Command::Simulate(args) => run(args, true),
        Command::Montecarlo(args) => run(args, false),
        Command::Metrics {
            input,
            out,
            crlb_aggregation,
        } => metrics(&input, &out, crlb_aggregation),
        Command::Compare {
            a,
            b,
            t,
            score_cap,
            bin_width,
            out,
        } => compare(&a, &b, t, score_cap, bin_width, &out),
        Command::Presets => {
            presets();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 4 } else { 3 })
        }
    }
}
