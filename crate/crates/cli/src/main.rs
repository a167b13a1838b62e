use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dplab::harness::{
    build_instance, emit_report, read_records, run_experiment, sweep, write_records, AccountChain, ExperimentConfig,
    InstanceSpec, ReportKind, XAxis,
};
use dplab::instances::write_instance;
use dplab::{Error, Result, SplittableRng};

#[derive(Parser)]
#[command(name = "dplab", version, about = "Private convex optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the configured instance and write it to a file.
    GenInstance {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every trial of a single config and write the CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to the config's `out`, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a grid, resuming from rows already in the output file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        parallel: usize,
    },
    /// Evaluate a privacy chain and print the budget after each step.
    Account {
        #[arg(long)]
        config: PathBuf,
    },
    /// Turn a results CSV into a canonical CSV or a log-log SVG.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Swept axis for an SVG scatter (d, alpha, rho, mbar, gamma); omit for CSV.
        #[arg(long)]
        x: Option<String>,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;
    Ok(config)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::GenInstance { config, seed, out } => {
            let config = load(&config, seed)?;
            if matches!(config.instance, InstanceSpec::File { .. }) {
                return Err(Error::config("gen-instance needs a sampled instance family"));
            }
            // same stream as trial 0 of `run`
            let mut rng = SplittableRng::new(config.seed, 0).split(1);
            let instance = build_instance(&config.instance, &mut rng)?;
            let mut w = BufWriter::new(File::create(&out)?);
            write_instance(&instance, &mut w)?;
            w.flush()?;
            log::info!("wrote {} instance to {}", instance.type_name(), out.display());
        }
        Command::Run { config, seed, out } => {
            let config = load(&config, seed)?;
            if config.sweep.is_some() {
                log::warn!("config has a [sweep] grid; running every point sequentially");
            }
            let records = run_experiment(&config)?;
            let failed = records.iter().filter(|r| r.is_error()).count();
            if failed > 0 {
                log::warn!("{failed} of {} trials recorded an error", records.len());
            }
            let mut w = open_out(out.as_deref().or(config.out.as_deref()))?;
            write_records(&records, &mut w)?;
            w.flush()?;
        }
        Command::Sweep {
            config,
            seed,
            out,
            parallel,
        } => {
            let config = load(&config, seed)?;
            let out = out
                .or_else(|| config.out.clone())
                .ok_or_else(|| Error::config("sweep needs --out or an `out` key"))?;
            let records = sweep(&config, &out, parallel)?;
            log::info!("{} rows in {}", records.len(), out.display());
        }
        Command::Account { config } => {
            let chain = AccountChain::load(&config)?;
            let budgets = chain.evaluate()?;
            let mut stdout = io::stdout().lock();
            for (i, b) in budgets.iter().enumerate() {
                writeln!(stdout, "{}\t{b}", i + 1)?;
            }
        }
        Command::Report { input, out, x } => {
            let records = read_records(File::open(&input)?)?;
            let kind = match x {
                Some(name) => ReportKind::SvgScatter(XAxis::parse(&name)?),
                None => ReportKind::Csv,
            };
            emit_report(&records, kind, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
