//! `hexlift`: train, evaluate, and compare cooperative-transport learners.
//!
//! Exit status is 0 on success, 1 on a user error (bad arguments, unreadable
//! or invalid config, missing or mismatched checkpoint), and 2 on an
//! internal fault.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hexlift::harness::{
    self, checks, load_config, run_eval, write_summary, write_trials, HarnessError, ResultsTable, SUMMARY_FILE,
    TRIALS_FILE,
};
use hexlift::nn::Checkpoint;
use hexlift::world::{sample_map, Difficulty};

#[derive(Parser)]
#[command(name = "hexlift", version, about = "Cooperative payload transport: training and benchmarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the configured method for one seed.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the first seed of the eval block.
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to <output.dir>/<method>/seed_<seed>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint under the config's protocol.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and evaluate all four methods, then write the results table and
    /// merged learning curves.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run invariant suites.
    Check(CheckArgs),
    /// Print a generated map.
    Map {
        #[arg(long)]
        seed: u64,
        /// empty, easy, medium, or hard
        #[arg(long)]
        difficulty: Difficulty,
    },
}

#[derive(Args)]
#[group(required = true, multiple = true)]
struct CheckArgs {
    #[arg(long)]
    physics: bool,
    #[arg(long)]
    gradients: bool,
    #[arg(long)]
    gae: bool,
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train { config, seed, out } => {
            let cfg = load_config(&config)?;
            let seed = seed.unwrap_or(cfg.eval.seeds[0]);
            let out = out.unwrap_or_else(|| cfg.output.dir.join(cfg.method.name()).join(format!("seed_{seed}")));
            let art = harness::train_method(&cfg, seed, &out)?;
            match art.curve.last() {
                Some(r) => println!(
                    "{} seed {seed}: {} iterations, {} env steps, last success rate {}",
                    cfg.method,
                    r.iteration,
                    r.env_steps,
                    r.success_rate.map_or("n/a".to_string(), |s| format!("{s:.3}"))
                ),
                None => println!("{} seed {seed}: no iterations run", cfg.method),
            }
            println!("checkpoint: {}", art.checkpoint_path.display());
        }
        Command::Eval { checkpoint, config, out } => {
            let cfg = load_config(&config)?;
            if !checkpoint.is_file() {
                return Err(HarnessError::Input(format!("checkpoint {} does not exist", checkpoint.display())));
            }
            let ck = Checkpoint::load(&checkpoint).map_err(|e| HarnessError::Input(format!("{}: {e}", checkpoint.display())))?;
            let (summary, trials) = run_eval(&ck, &cfg)?;
            let out = out.unwrap_or_else(|| cfg.output.dir.clone());
            std::fs::create_dir_all(&out).map_err(|e| HarnessError::io(&out, e))?;
            write_trials(&out.join(TRIALS_FILE), &trials)?;
            write_summary(&out.join(SUMMARY_FILE), std::slice::from_ref(&summary))?;
            print!("{}", ResultsTable::new(std::slice::from_ref(&summary)).to_text());
        }
        Command::Bench { config } => {
            let cfg = load_config(&config)?;
            let report = harness::bench(&cfg)?;
            print!("{}", report.table.to_text());
            println!("results written to {}", cfg.output.dir.display());
        }
        Command::Check(args) => {
            let mut results = Vec::new();
            if args.physics {
                results.extend(checks::physics_suite());
            }
            if args.gradients {
                results.extend(checks::gradient_suite());
            }
            if args.gae {
                results.extend(checks::gae_suite());
            }
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(HarnessError::Internal(format!("{failed} check(s) failed")));
            }
        }
        Command::Map { seed, difficulty } => {
            let grid = sample_map(seed, difficulty).map_err(|e| HarnessError::Internal(e.to_string()))?;
            print!("{}", grid.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
