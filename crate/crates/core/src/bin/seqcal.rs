use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use seqcal::config::{Hypothesis, RunConfig, TestKind};
use seqcal::monitor::{cmd_monitor, cmd_simulate, cmd_test};
use seqcal::sim::{full_grid, PowerStudy, DEFAULT_SEED};

/// Sequential calibration tests for probabilistic forecasts.
#[derive(Parser)]
#[command(name = "seqcal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Power study over bias/dispersion errors; writes a CSV grid.
    Simulate(SimulateArgs),
    /// Evaluate a file of values with one test.
    Test(RunArgs),
    /// Stream e-process records for a file of values.
    Monitor(RunArgs),
}

#[derive(Args)]
struct Common {
    /// Hypothesis: cuf, duf[:m], st, st-mirror, quantile[:K]. Defaults per method.
    #[arg(long)]
    hypothesis: Option<Hypothesis>,
    /// Forecast lag h.
    #[arg(long, default_value_t = 1)]
    lag: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Override the warmup length of every strategy.
    #[arg(long)]
    warmup: Option<usize>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    method: TestKind,
    #[command(flatten)]
    common: Common,
    /// Input path; standard input when omitted or '-'.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Abort on the first malformed row instead of skipping it.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Comma-separated tests, e.g. beta,kernel,ks.
    #[arg(long, value_delimiter = ',', required = true)]
    method: Vec<TestKind>,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    reps: u64,
    /// 'full' (11 x 11), 'null', or cells like 0.5:0,0:-0.3 (epsilon:delta).
    #[arg(long, default_value = "full")]
    grid: String,
    #[arg(long, default_value_t = 360)]
    n: usize,
}

fn config(method: TestKind, c: &Common) -> Result<RunConfig> {
    let lag = if method.is_evalue() { c.lag } else { 1 };
    Ok(RunConfig::new(method, c.hypothesis)?.with_lag(lag)?.with_alpha(c.alpha)?.with_warmup(c.warmup))
}

fn parse_grid(spec: &str) -> Result<Vec<(f64, f64)>> {
    match spec {
        "full" => Ok(full_grid()),
        "null" => Ok(vec![(0.0, 0.0)]),
        cells => cells
            .split(',')
            .map(|cell| {
                let (e, d) = cell.split_once(':').with_context(|| format!("grid cell '{cell}' is not epsilon:delta"))?;
                Ok((e.trim().parse()?, d.trim().parse()?))
            })
            .collect(),
    }
}

fn open_input(path: &Option<PathBuf>) -> Result<Box<dyn BufRead>> {
    Ok(match path {
        Some(p) if p.as_os_str() != "-" => {
            Box::new(BufReader::new(File::open(p).with_context(|| format!("cannot open {}", p.display()))?))
        }
        _ => Box::new(io::stdin().lock()),
    })
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot write {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(a) => {
            let tests = a.method.iter().map(|&m| config(m, &a.common)).collect::<Result<Vec<_>>>()?;
            if a.reps == 0 {
                bail!("--reps must be at least 1");
            }
            let study = PowerStudy { tests, cells: parse_grid(&a.grid)?, n: a.n, reps: a.reps, seed: a.seed };
            let mut out = open_output(&a.common.output)?;
            cmd_simulate(&study, &mut out, io::stderr())?;
            out.flush()?;
        }
        Command::Test(a) => {
            let cfg = config(a.method, &a.common)?;
            let outcome = cmd_test(&cfg, open_input(&a.input)?, io::stderr(), a.strict)?;
            let mut out = open_output(&a.common.output)?;
            writeln!(out, "{}", outcome.line())?;
            out.flush()?;
            if let Some(e) = outcome.final_e {
                eprintln!("final e_t = {}", seqcal::format::fmt12(e));
            }
        }
        Command::Monitor(a) => {
            let cfg = config(a.method, &a.common)?;
            // Fail on configuration before touching the input.
            cfg.bettor()?;
            let input = open_input(&a.input)?;
            let mut out = open_output(&a.common.output)?;
            cmd_monitor(&cfg, input, &mut out, io::stderr(), a.strict)?;
        }
    }
    Ok(())
}
