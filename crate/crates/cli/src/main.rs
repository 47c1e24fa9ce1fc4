//! Batch experiment front end: SNR sweeps from declarative spec files,
//! single-point evaluations, and the built-in verification suites.

mod output;
mod spec;

use anyhow::Context;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use relay_outage::{
    estimate_curve, estimate_outage, ProtocolKind, SelectionScheme, SimConfig, SnrParams,
    VerifyLevel,
};

use spec::Experiment;

/// Environment variable providing the default output directory.
const OUT_DIR_ENV: &str = "RELAY_OUTAGE_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "relay-outage",
    about = "Outage analysis and simulation for two-hop multicarrier relay selection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment in a TOML spec file and write curve files.
    Sweep {
        /// Path to the spec file (see README for the schema).
        spec_file: PathBuf,
        /// Output directory; falls back to $RELAY_OUTAGE_OUT_DIR, then ".".
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the trial count of every experiment.
        #[arg(long)]
        trials: Option<u64>,
        /// Override the seed of every experiment.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in verification suites.
    Verify {
        /// fast: oracles and algebraic identities; full: adds 1e7-trial
        /// Monte Carlo cross-checks.
        #[arg(long, default_value = "fast")]
        level: String,
    },
    /// Evaluate a single configuration at one SNR point.
    Point {
        #[arg(long = "M")]
        m: u32,
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        protocol: String,
        #[arg(long)]
        scheme: String,
        #[arg(long, default_value_t = 1.0)]
        mu1: f64,
        #[arg(long, default_value_t = 1.0)]
        mu2: f64,
        #[arg(long)]
        snr_db: f64,
        /// Mutual-information threshold in nats (s = 2 xi).
        #[arg(long)]
        xi: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep {
            spec_file,
            out_dir,
            trials,
            seed,
        } => run_sweep(&spec_file, out_dir, trials, seed),
        Command::Verify { level } => run_verify(&level),
        Command::Point {
            m,
            k,
            protocol,
            scheme,
            mu1,
            mu2,
            snr_db,
            xi,
            trials,
            seed,
        } => run_point(m, k, &protocol, &scheme, mu1, mu2, snr_db, xi, trials, seed),
    }
}

fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run_sweep(
    spec_file: &Path,
    out_dir: Option<PathBuf>,
    trials_override: Option<u64>,
    seed_override: Option<u64>,
) -> ExitCode {
    let experiments = match spec::load(spec_file) {
        Ok(experiments) => experiments,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    if experiments.is_empty() {
        eprintln!("spec contains no experiments; nothing to do");
        return ExitCode::SUCCESS;
    }

    let out_dir = resolve_out_dir(out_dir);
    if let Err(err) = std::fs::create_dir_all(&out_dir) {
        eprintln!("error: cannot create {}: {err}", out_dir.display());
        return ExitCode::from(2);
    }

    let mut summaries = Vec::new();
    let mut failures = 0usize;
    for mut exp in experiments {
        if let Some(t) = trials_override {
            exp.trials = t;
        }
        if let Some(s) = seed_override {
            exp.seed = s;
        }
        match run_experiment(&exp, &out_dir) {
            Ok(line) => summaries.push(line),
            Err(err) => {
                failures += 1;
                eprintln!("experiment {} failed: {err:#}", exp.name);
            }
        }
    }

    if !summaries.is_empty() {
        let path = out_dir.join("summary.csv");
        if let Err(err) = std::fs::write(&path, output::summary_csv(&summaries)) {
            eprintln!("error: cannot write {}: {err}", path.display());
            failures += 1;
        } else {
            println!("wrote {}", path.display());
        }
    }

    if failures > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn run_experiment(exp: &Experiment, out_dir: &Path) -> anyhow::Result<output::SummaryLine> {
    let snr = SnrParams::new(1.0, exp.mu1, exp.mu2)?;
    let cfg = SimConfig::new(
        exp.m,
        exp.k,
        exp.protocol,
        exp.scheme,
        snr,
        exp.threshold.s_threshold(),
        exp.trials,
        exp.seed,
    )?;
    let curve = estimate_curve(&cfg, &exp.grid_db)?;

    if exp.csv {
        let path = out_dir.join(format!("{}.csv", exp.name));
        std::fs::write(&path, output::to_csv(&curve))
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    if exp.json {
        let path = out_dir.join(format!("{}.json", exp.name));
        std::fs::write(&path, output::to_json(&curve))
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(output::summary_line(exp, &curve))
}

fn run_verify(level: &str) -> ExitCode {
    let level = match level.parse::<VerifyLevel>() {
        Ok(level) => level,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };
    let report = relay_outage::run_verify(level);
    for check in &report.checks {
        eprintln!(
            "{} {} ({:.2}s): {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.seconds,
            check.detail
        );
    }
    let json = serde_json::json!({
        "level": match report.level {
            VerifyLevel::Fast => "fast",
            VerifyLevel::Full => "full",
        },
        "passed": report.passed(),
        "checks": report.checks.iter().map(|c| {
            serde_json::json!({
                "name": c.name,
                "passed": c.passed,
                "detail": c.detail,
                "seconds": c.seconds,
            })
        }).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&json).expect("report serializes"));
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

#[allow(clippy::too_many_arguments)]
fn run_point(
    m: u32,
    k: u32,
    protocol: &str,
    scheme: &str,
    mu1: f64,
    mu2: f64,
    snr_db: f64,
    xi: f64,
    trials: u64,
    seed: u64,
) -> ExitCode {
    let result = (|| -> anyhow::Result<String> {
        let protocol: ProtocolKind = protocol.parse()?;
        let scheme: SelectionScheme = scheme.parse()?;
        let snr = SnrParams::new(relay_outage::db_to_linear(snr_db), mu1, mu2)?;
        let cfg = SimConfig::new(m, k, protocol, scheme, snr, 2.0 * xi, trials, seed)?;
        let curve = estimate_curve(&cfg, &[snr_db])?;
        let row = &output::rows(&curve)[0];
        // sanity: the one-point curve must agree with a direct estimate
        debug_assert_eq!(estimate_outage(&cfg).p_hat, row.mc_p_hat);
        Ok(serde_json::to_string_pretty(row).expect("row serializes"))
    })();
    match result {
        Ok(json) => {
            println!("{json}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
