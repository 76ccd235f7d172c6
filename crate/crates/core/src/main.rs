use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fht_bench::config::{parse_config, serialize_config};
use fht_bench::experiment::{best_r_summary, run_cell_trial, run_experiment, ExperimentConfig};
use fht_bench::report::{
    format_summary_table, read_results_csv, write_results, write_summary_csv, RunManifest, SUMMARY_FILE,
};
use fht_bench::{Error, Result, StoppingRule};

#[derive(Parser)]
#[command(
    name = "fht-bench",
    version,
    about = "Noisy OneMax / PMax resampling benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid and write results.csv, summary.csv and manifest.json.
    Run {
        /// TOML config, or a manifest.json from an earlier run. Defaults to the standard grid.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides master_seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads, 0 = one per core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Recompute the best-r summary from a results.csv.
    Summarize {
        #[arg(long)]
        results: PathBuf,
        /// Directory for summary.csv; only the table is printed when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a single trial of a run and print it as JSON.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        problem: String,
        #[arg(long)]
        algorithm: String,
        #[arg(long)]
        rule: String,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        trial: u64,
    },
    /// Print the fully resolved config as TOML.
    ShowConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    if path.extension().is_some_and(|e| e == "json") {
        return RunManifest::read(path)?.experiment_config();
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            cfg.validate()?;
            let started = std::time::Instant::now();
            let rows = run_experiment(&cfg, threads)?;
            let summaries = best_r_summary(&rows)?;
            let files = write_results(&rows, &summaries, &RunManifest::new(&cfg, threads), &out)?;
            eprintln!(
                "{} cells x {} trials in {:.1}s -> {}",
                rows.len(),
                cfg.trials,
                started.elapsed().as_secs_f64(),
                files.results.display()
            );
            print!("{}", format_summary_table(&summaries));
        }
        Command::Summarize { results, out } => {
            let rows = read_results_csv(&results)?;
            let summaries = best_r_summary(&rows)?;
            if let Some(dir) = out {
                fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                write_summary_csv(&summaries, &dir.join(SUMMARY_FILE))?;
            }
            print!("{}", format_summary_table(&summaries));
        }
        Command::Replay {
            manifest,
            problem,
            algorithm,
            rule,
            r,
            trial,
        } => {
            let cfg = RunManifest::read(&manifest)?.experiment_config()?;
            let rule: StoppingRule = rule.parse()?;
            let cell = cfg.find_cell(&problem, &algorithm, rule, r).ok_or_else(|| {
                Error::config(
                    "cell",
                    format!("no cell {problem}/{algorithm}/{rule}/r={r} in this run"),
                )
            })?;
            if trial >= cfg.trials {
                return Err(Error::config(
                    "trial",
                    format!("run has {} trials per cell", cfg.trials),
                ));
            }
            let result = run_cell_trial(&cfg, &cell, trial)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&result).expect("trial result serializes")
            );
        }
        Command::ShowConfig { config } => {
            print!("{}", serialize_config(&load_config(config.as_deref())?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } | Error::Data { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
