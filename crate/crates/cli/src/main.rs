use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abcd_core::exec::configure_threads;
use abcd_core::experiments::{self, ExperimentConfig, ParamsSpec, VerifyOptions};
use abcd_core::integrator::simulate;
use abcd_core::{Execution, Summability};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "abcd",
    version,
    about = "abcd Boussinesq simulator and Littlewood-Paley toolkit"
)]
struct Cli {
    /// Worker threads for batch work (sweeps, audits).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Only print errors and the final verdict.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write energy.csv, events.jsonl and snapshots.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Parameter preset overriding the config.
        #[arg(long)]
        preset: Option<String>,
    },
    /// ε-scaling sweep; writes scaling.csv and one directory per run.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        preset: Option<String>,
    },
    /// Run an invariant suite: partition, blocks, leray, energy, commutator, conservation or all.
    Verify {
        suite: String,
        /// Directory for verify_<suite>.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Besov norm of every field in a snapshot file.
    Besov {
        file: PathBuf,
        #[arg(short, long, default_value_t = 1.0, allow_negative_numbers = true)]
        s: f64,
        /// Summability index in [1, inf].
        #[arg(short, long, default_value = "2", value_parser = parse_summability)]
        r: Summability,
        #[arg(long)]
        json: bool,
    },
    /// Summarize run directories into summary.csv and summary.html.
    Report { dir: PathBuf },
}

fn parse_summability(s: &str) -> Result<Summability, String> {
    let v = match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => f64::INFINITY,
        other => other.parse().map_err(|e| format!("{e}"))?,
    };
    Summability::new(v).map_err(|e| e.to_string())
}

fn load_config(path: Option<&Path>, preset: Option<String>) -> Result<ExperimentConfig> {
    let mut config = match path {
        Some(p) => ExperimentConfig::read(p).with_context(|| format!("reading config {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(name) = preset {
        config.params = ParamsSpec::Preset(name);
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        configure_threads(n);
    }
    let exec = Execution::default();
    let quiet = cli.quiet;
    match cli.command {
        Command::Run { config, out, preset } => {
            let config = load_config(config.as_deref(), preset)?;
            let run = config.run_config()?;
            let grid = run.grid.build()?;
            let initial = config.initial.build(&grid, run.seed)?;
            let result = simulate(&run, &initial)?;
            experiments::write_run(&out, &run, &result)?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            if !quiet {
                println!(
                    "{}: {} steps of dt = {:.6e}, Us(0) = {:.6e}, {} reports -> {}",
                    result.exit.label(),
                    result.steps_taken,
                    result.dt,
                    result.us0,
                    result.reports.len(),
                    out.display()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, out, preset } => {
            let config = load_config(config.as_deref(), preset)?;
            let spec = config.sweep_spec()?;
            let outcome = experiments::sweep_epsilon(&spec, exec)?;
            experiments::write_sweep(&out, &spec, &outcome)?;
            if !quiet {
                println!(
                    "{:>10} {:>6} {:>12} {:>12} {:>12}  exit",
                    "epsilon", "seed", "t_end", "T_exist", "eps*T"
                );
                for r in &outcome.table.rows {
                    let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
                    println!(
                        "{:>10} {:>6} {:>12.4} {:>12} {:>12}  {}",
                        r.epsilon,
                        r.seed,
                        r.t_end,
                        opt(r.t_exist),
                        opt(r.eps_t_exist),
                        r.exit
                    );
                }
            }
            match outcome.table.spread() {
                Some(s) => println!("eps*T_exist spread max/min = {s:.4}"),
                None => println!("all runs censored"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, out, seed } => {
            let opts = VerifyOptions {
                seed,
                ..VerifyOptions::default()
            };
            let reports = experiments::verify(&suite, &opts, exec)?;
            std::fs::create_dir_all(&out)?;
            let mut all = true;
            for rep in &reports {
                let path = out.join(format!("verify_{}.json", rep.suite));
                std::fs::write(&path, serde_json::to_string_pretty(rep)? + "\n")?;
                all &= rep.passed;
                if !quiet {
                    for c in &rep.checks {
                        let op = match c.comparison {
                            experiments::Comparison::AtMost => "<=",
                            experiments::Comparison::AtLeast => ">=",
                        };
                        let mark = if c.passed { "ok  " } else { "FAIL" };
                        println!(
                            "{mark} [{}] {}: {:.3e} {op} {:.1e}",
                            rep.suite, c.name, c.measured, c.tolerance
                        );
                    }
                }
                println!(
                    "{}: {} ({:.2}s)",
                    rep.suite,
                    if rep.passed { "pass" } else { "FAIL" },
                    rep.seconds
                );
            }
            Ok(if all { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Besov { file, s, r, json } => {
            let norms = experiments::besov_of_snapshot(&file, s, r)
                .with_context(|| format!("reading snapshot {}", file.display()))?;
            if json {
                println!("{}", serde_json::to_string(&norms)?);
            } else {
                for n in &norms {
                    println!("{} {:.17e}", n.field, n.norm);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { dir } => {
            let runs = experiments::report(&dir)?;
            if !quiet {
                for r in &runs {
                    println!(
                        "{}: {} at t = {:.4}, max Us = {:.6e}",
                        r.run, r.exit, r.t_final, r.us_max
                    );
                }
            }
            println!(
                "{} runs summarized in {}",
                runs.len(),
                dir.join("summary.html").display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
