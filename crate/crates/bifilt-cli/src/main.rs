use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bifilt::complexity::{instrumented_count, mult_count, Variant};
use bifilt_cli::runner::run_scenario;
use bifilt_cli::scenario::{builtin, builtin_scenarios, ScenarioConfig};
use bifilt_cli::verify::{format_report, run_criteria, verify_exit_code};

/// Simulation and verification harness for complex bilinear filters.
#[derive(Parser)]
#[command(name = "bifilt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace CSV.
    Run {
        /// Scenario file (key = value TOML; see README for the schema).
        #[arg(long, conflicts_with = "scenario")]
        config: Option<PathBuf>,
        /// Builtin scenario name (see `list-scenarios`).
        #[arg(long)]
        scenario: Option<String>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List builtin scenarios.
    ListScenarios,
    /// Run the verification suite and print one line per criterion.
    Verify {
        /// Only run criteria whose id or name matches.
        #[arg(long)]
        filter: Option<String>,
        /// Base seed for all criteria.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Emit the per-step multiplication-count table as CSV.
    Complexity {
        #[arg(long)]
        lmax: usize,
        #[arg(long)]
        mmax: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            scenario,
            out,
            seed,
        } => {
            let mut cfg = load_scenario(config, scenario)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let output = run_scenario(&cfg)?;
            let file = fs::File::create(&out)?;
            output.write_csv(file)?;
            println!(
                "scenario '{}': {} runs, {} trace rows -> {}",
                output.name,
                output.runs,
                output.rows.len(),
                out.display()
            );
            for s in &output.summaries {
                println!(
                    "  {:<12} steady NM {:>8.2} dB   steady ISE {:>8.2} dB   diverged {}/{}",
                    s.filter, s.steady_nm_db, s.steady_ise_db, s.diverged_runs, output.runs
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListScenarios => {
            for s in builtin_scenarios() {
                println!(
                    "{:<20} kind={:<14?} L={:<3} M={:<2} horizon={:<6} runs={}",
                    s.name, s.kind, s.l, s.m, s.horizon, s.runs
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { filter, seed } => {
            let reports = run_criteria(seed, filter.as_deref());
            if reports.is_empty() {
                return Err("no criterion matches the filter".into());
            }
            print!("{}", format_report(&reports));
            Ok(ExitCode::from(verify_exit_code(&reports) as u8))
        }
        Command::Complexity { lmax, mmax, out } => {
            if lmax == 0 || mmax == 0 {
                return Err("lmax and mmax must be at least 1".into());
            }
            let file = fs::File::create(&out)?;
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(file);
            w.write_record([
                "variant",
                "l",
                "m",
                "mult_count",
                "instrumented_count",
                "big_o",
            ])?;
            for v in Variant::ALL {
                for l in 1..=lmax {
                    for m in 1..=mmax {
                        let c = mult_count(v, l, m);
                        w.write_record(&[
                            v.name().to_string(),
                            l.to_string(),
                            m.to_string(),
                            c.count.to_string(),
                            instrumented_count(v, l, m).to_string(),
                            c.big_o.to_string(),
                        ])?;
                    }
                }
            }
            w.flush()?;
            println!(
                "complexity grid (L <= {lmax}, M <= {mmax}) -> {}",
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_scenario(
    config: Option<PathBuf>,
    scenario: Option<String>,
) -> Result<ScenarioConfig, Box<dyn std::error::Error>> {
    match (config, scenario) {
        (Some(path), None) => {
            let text = fs::read_to_string(&path)?;
            Ok(ScenarioConfig::from_toml(&text)?)
        }
        (None, Some(name)) => {
            builtin(&name).ok_or_else(|| format!("unknown builtin scenario '{name}'").into())
        }
        _ => Err("exactly one of --config or --scenario is required".into()),
    }
}
