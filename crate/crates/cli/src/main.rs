//! `bitsiege` command-line runner.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 verification failure,
//! 3 I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};

use bitsiege::attack::run_attack;
use bitsiege::fixtures::{build_victim, TrainSpec};
use bitsiege::harness::{report, run_id, run_sweep, verify, ExperimentConfig, SweepResult, TRACE_DIR};
use bitsiege::io;
use bitsiege::quant::BitWidth;
use bitsiege::{Dataset32, FloatModel32, QuantModel32};

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

const VICTIM_FILE: &str = "victim.bsm";
const TRAIN_FILE: &str = "train.bsd";
const TEST_FILE: &str = "test.bsd";

#[derive(Parser, Debug)]
#[command(name = "bitsiege", version, about = "Semi-black-box bit-flip attack simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate synthetic data and train a victim (victim.bsm, train.bsd, test.bsd).
    Train {
        /// Data/training spec (TOML with [data] and [train]); defaults to the desk setup.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Quantize a float model file.
    Quantize {
        #[arg(long)]
        model: PathBuf,
        /// Bit width: 4, 6 or 8.
        #[arg(long, default_value_t = 8)]
        bits: u8,
        /// Output qmodel file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a single attack; the config must describe exactly one run.
    Attack {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed_base: Option<u64>,
    },
    /// Run the Cartesian product of the config axes.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        seed_base: Option<u64>,
    },
    /// Rebuild results.csv, series.csv and summary.csv from a result directory.
    Report {
        /// Result directory (containing traces/).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in self checks.
    Verify,
}

#[derive(Debug)]
struct VerificationFailed(usize);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} verification check(s) failed", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<VerificationFailed>().is_some() {
        return 2;
    }
    for cause in e.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
        if let Some(bitsiege::Error::Io(_)) = cause.downcast_ref::<bitsiege::Error>() {
            return 3;
        }
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config, out } => cmd_train(config.as_deref(), &out),
        Command::Quantize { model, bits, out } => cmd_quantize(&model, bits, &out),
        Command::Attack { config, out, seed_base } => cmd_attack(&config, out, seed_base),
        Command::Sweep {
            config,
            out,
            jobs,
            seed_base,
        } => cmd_sweep(&config, out, jobs, seed_base),
        Command::Report { out } => cmd_report(&out),
        Command::Verify => cmd_verify(),
    }
}

fn cmd_train(config: Option<&Path>, out: &Path) -> Result<()> {
    let spec = match config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str::<TrainSpec>(&text).map_err(|e| anyhow!("{}: {}", p.display(), e.message()))?
        }
        None => TrainSpec::desk(),
    };
    let victim = build_victim(&spec)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    io::save_model(&victim.model, out.join(VICTIM_FILE))?;
    io::save_dataset(&victim.train, out.join(TRAIN_FILE))?;
    io::save_dataset(&victim.test, out.join(TEST_FILE))?;
    say!(
        "train accuracy {:.4}, test accuracy {:.4}",
        victim.model.accuracy(&victim.train)?,
        victim.model.accuracy(&victim.test)?
    );
    say!("wrote {}", out.join(VICTIM_FILE).display());
    Ok(())
}

fn cmd_quantize(model: &Path, bits: u8, out: &Path) -> Result<()> {
    let m: FloatModel32 = io::load_model(model).with_context(|| format!("loading {}", model.display()))?;
    let q = QuantModel32::quantize(&m, BitWidth::new(bits)?)?;
    io::save_qmodel(&q, out)?;
    say!("wrote {} ({} weight bits)", out.display(), q.total_weight_bits());
    Ok(())
}

fn load_config(path: &Path, seed_base: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(b) = seed_base {
        cfg.rebase_seeds(b);
    }
    Ok(cfg)
}

fn load_inputs(cfg: &ExperimentConfig) -> Result<(FloatModel32, Dataset32)> {
    let victim = io::load_model(&cfg.victim).with_context(|| format!("loading {}", cfg.victim.display()))?;
    let eval = io::load_dataset(&cfg.eval).with_context(|| format!("loading {}", cfg.eval.display()))?;
    Ok((victim, eval))
}

fn output_dir(cli: Option<PathBuf>, cfg: &ExperimentConfig) -> Result<PathBuf> {
    cli.or_else(|| cfg.out.clone())
        .ok_or_else(|| anyhow!("no output directory: pass --out or set `out` in the config"))
}

fn cmd_attack(config: &Path, out: Option<PathBuf>, seed_base: Option<u64>) -> Result<()> {
    let cfg = load_config(config, seed_base)?;
    let runs = cfg.runs();
    let [run] = runs[..] else {
        bail!(
            "attack needs a config with exactly one run, this one has {}; use sweep",
            runs.len()
        );
    };
    let out = output_dir(out, &cfg)?;
    let (victim, eval) = load_inputs(&cfg)?;
    let q = QuantModel32::quantize(&victim, BitWidth::new(run.bit_width)?)?;
    let trace = run_attack(
        &q,
        run.recovery_rate,
        run.seed,
        run.ranking,
        run.reconstruction,
        run.n_bf,
        &eval,
    )?;
    let dir = out.join(TRACE_DIR);
    fs::create_dir_all(&dir)?;
    let path = dir.join(format!("{}.trace", run_id(&trace.config)));
    fs::write(&path, trace.to_text())?;
    say!(
        "accuracy {:.4} -> {:.4} after {} flips; wrote {}",
        trace.accuracy[0],
        trace.accuracy.last().unwrap(),
        trace.flips.len(),
        path.display()
    );
    Ok(())
}

fn cmd_sweep(config: &Path, out: Option<PathBuf>, jobs: usize, seed_base: Option<u64>) -> Result<()> {
    if jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let cfg = load_config(config, seed_base)?;
    let out = output_dir(out, &cfg)?;
    let (victim, eval) = load_inputs(&cfg)?;
    let result = run_sweep(&cfg, &victim, &eval, jobs)?;
    result.write(&out)?;
    print_summary(&result);
    say!("{} runs written to {}", result.traces.len(), out.display());
    Ok(())
}

fn cmd_report(dir: &Path) -> Result<()> {
    let result = report(dir)?;
    print_summary(&result);
    Ok(())
}

fn print_summary(result: &SweepResult) {
    let _ = std::io::Write::write_all(&mut std::io::stdout(), result.summary_csv().as_bytes());
}

fn cmd_verify() -> Result<()> {
    let outcomes = verify::run_all();
    let failed = outcomes.iter().filter(|c| !c.passed).count();
    for c in &outcomes {
        say!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if failed > 0 {
        return Err(VerificationFailed(failed).into());
    }
    Ok(())
}
