use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shortlist::extractor::ExtractorError;
use shortlist::harness::{self, ExperimentConfig, Harness, HarnessError};
use shortlist::ratio::{parse_rational, render};

/// Exit status: verified / succeeded.
const EXIT_OK: u8 = 0;
/// Exit status: checked and failed, or any other error.
const EXIT_FAIL: u8 = 1;
/// Exit status: refused because the work exceeds the configured budget.
const EXIT_BUDGET: u8 = 2;

#[derive(Parser)]
#[command(name = "shortlist", version, about = "Desk-scale short-program list approximation lab")]
struct Cli {
    /// Flat key = value configuration file (defaults are used otherwise).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search, verify or audit extractor instances.
    Extractor {
        #[command(subcommand)]
        action: ExtractorCmd,
    },
    /// Machine definition and complexity tables.
    Machine {
        #[command(subcommand)]
        action: MachineCmd,
    },
    /// Build the rich-owner chain for one (n, δ).
    Build {
        #[command(subcommand)]
        action: BuildCmd,
    },
    /// Run the list generator, the promise algorithm or the exact profile.
    Run {
        #[command(subcommand)]
        action: RunCmd,
    },
    /// Write the calibration report for every configured (n, δ).
    Report,
}

#[derive(Subcommand)]
enum ExtractorCmd {
    Search {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value = "1")]
        seed: String,
        /// Fall back to a sampled audit of this many sources if exact
        /// verification is over budget.
        #[arg(long)]
        sampled: Option<u64>,
        /// Output file name inside the output directory.
        #[arg(long, default_value = "extractor.txt")]
        out: String,
    },
    Verify {
        file: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
    },
    Audit {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value = "1")]
        seed: String,
    },
}

#[derive(Subcommand)]
enum MachineCmd {
    Table {
        #[arg(long, default_value_t = 10)]
        n_max: u32,
    },
    Define,
}

#[derive(Subcommand)]
enum BuildCmd {
    Chain {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        delta: String,
    },
}

#[derive(Subcommand)]
enum RunCmd {
    List {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        delta: String,
        /// The target string in hex.
        #[arg(long)]
        x: String,
        /// The master seed in hex.
        #[arg(long)]
        seed: String,
    },
    Promise {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        delta: String,
        #[arg(long)]
        x: String,
        /// Supplied complexity (the true value unless deliberately wrong).
        #[arg(long)]
        c: Option<u32>,
        #[arg(long)]
        seed: String,
    },
    Profile {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        delta: String,
        /// Overhead threshold (defaults to the configured c*).
        #[arg(long)]
        c_star: Option<u32>,
        /// Also write one record per (x, seed) for this many leading seeds.
        #[arg(long)]
        records: Option<u64>,
        /// Render probabilities with decimals too.
        #[arg(long)]
        decimal: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let budget = matches!(e, HarnessError::Extractor(ExtractorError::BudgetExceeded { .. }));
            ExitCode::from(if budget { EXIT_BUDGET } else { EXIT_FAIL })
        }
    }
}

fn parse_seed(s: &str) -> Result<u64, HarnessError> {
    harness::parse_hex(s, 64)
}

fn dispatch(cli: Cli) -> Result<u8, HarnessError> {
    let config = ExperimentConfig::load(cli.config.as_deref())?;
    rayon::ThreadPoolBuilder::new().num_threads(config.workers.max(1)).build_global().ok();
    match cli.command {
        Command::Extractor { action } => extractor(config, action),
        Command::Machine { action } => {
            let h = Harness::new(config)?;
            let path = match action {
                MachineCmd::Table { n_max } => h.machine_table(n_max)?,
                MachineCmd::Define => h.machine_define()?,
            };
            println!("{}", path.display());
            Ok(EXIT_OK)
        }
        Command::Build { action: BuildCmd::Chain { n, delta } } => {
            let h = Harness::new(config)?;
            for p in h.build_chain(n, harness::parse_delta(&delta)?)? {
                println!("{}", p.display());
            }
            Ok(EXIT_OK)
        }
        Command::Run { action } => run(config, action),
        Command::Report => {
            let h = Harness::new(config)?;
            println!("{}", h.report()?.display());
            Ok(EXIT_OK)
        }
    }
}

fn extractor(config: ExperimentConfig, action: ExtractorCmd) -> Result<u8, HarnessError> {
    match action {
        ExtractorCmd::Search { n, k, eps, seed, sampled, out } => {
            let eps = parse_rational(&eps).ok_or_else(|| HarnessError::Argument(format!("bad eps {eps:?}")))?;
            let h = Harness::new(config)?;
            let e = h.extractor_search(n, k, eps, parse_seed(&seed)?, sampled)?;
            let path = h.write_extractor_file(&e, &out)?;
            println!("{} status={} d={} m={}", path.display(), e.status, e.d, e.m);
            Ok(if e.is_exact_verified() { EXIT_OK } else { EXIT_FAIL })
        }
        ExtractorCmd::Verify { file, budget } => {
            let (e, v) = harness::verify_file(&file, budget.unwrap_or(config.exact_budget))?;
            println!("worst={} eps={} sources={}", render(&v.worst), render(&e.epsilon), v.sources_checked);
            if v.verified {
                println!("verified");
                Ok(EXIT_OK)
            } else {
                println!("witness={}", v.witness);
                Ok(EXIT_FAIL)
            }
        }
        ExtractorCmd::Audit { file, trials, seed } => {
            let (e, a) = harness::audit_file(&file, trials, parse_seed(&seed)?)?;
            println!("trials={} worst={} eps={} witness={}", a.trials, render(&a.worst), render(&e.epsilon), a.witness);
            Ok(if a.worst < e.epsilon { EXIT_OK } else { EXIT_FAIL })
        }
    }
}

fn run(config: ExperimentConfig, action: RunCmd) -> Result<u8, HarnessError> {
    let h = Harness::new(config)?;
    match action {
        RunCmd::List { n, delta, x, seed } => {
            let path = h.run_list(n, harness::parse_hex(&x, n)?, harness::parse_delta(&delta)?, parse_seed(&seed)?)?;
            println!("{}", path.display());
            Ok(EXIT_OK)
        }
        RunCmd::Promise { n, delta, x, c, seed } => {
            let x = harness::parse_hex(&x, n)?;
            let c = c.unwrap_or_else(|| h.table().c(n, x));
            let (path, run) = h.run_promise(n, x, c, harness::parse_delta(&delta)?, parse_seed(&seed)?)?;
            println!("{} {}", path.display(), if run.promise_holds { "promise-holds" } else { "promise-violated" });
            Ok(EXIT_OK)
        }
        RunCmd::Profile { n, delta, c_star, records, decimal } => {
            let c_star = c_star.unwrap_or(h.config.c_star);
            let (path, summary) = h.run_profile(n, harness::parse_delta(&delta)?, c_star, records, decimal)?;
            println!("{} pass={}", path.display(), summary.pass() as u8);
            Ok(if summary.pass() { EXIT_OK } else { EXIT_FAIL })
        }
    }
}
