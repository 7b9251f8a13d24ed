//! Command-line driver: lower bounds on Chvátal-Sankoff constants, a
//! specialized binary engine with an out-of-core mode, Monte-Carlo estimates
//! of the constants, and an embedded golden-value verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 capacity or I/O error.

mod record;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use cs_bounds::binary::{self, DiskConfig, RamConfig};
use cs_bounds::general::{self, RunConfig};
use cs_bounds::oracle;
use cs_bounds::store::{ElementWidth, StoreMode};
use cs_bounds::triplet::{IterationControl, StepInfo};
use cs_bounds::{Error, Params};

use record::{print_run, write_csv_row, RunRecord};

#[derive(Parser)]
#[command(name = "cs-bounds", version, about = "Lower bounds on Chvátal-Sankoff constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower-bound γ_{σ,d} with the general engine (RAM only).
    Bound(BoundArgs),
    /// Lower-bound γ_{2,2} with the specialized binary engine.
    BinaryBound(BinaryArgs),
    /// Monte-Carlo estimate of γ_{σ,d} from random strings.
    Estimate(EstimateArgs),
    /// Run the embedded golden-value suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct IterArgs {
    /// Fixed number of update steps (exact reproduction runs).
    #[arg(long)]
    iters: Option<u64>,
    /// Stop once the bound stops improving (default). The value caps the
    /// step count.
    #[arg(long, default_value_t = 100_000, conflicts_with = "iters")]
    converge: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Print one progress line per iteration to stderr.
    #[arg(long)]
    progress: bool,
    /// Append a CSV row (header written when the file is new).
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl IterArgs {
    fn control(&self) -> IterationControl {
        match self.iters {
            Some(n) => IterationControl::Fixed(n),
            None => IterationControl::Converge {
                min_gain: 1e-9,
                patience: 10,
                max_steps: self.converge,
            },
        }
    }

    fn threads(&self) -> usize {
        if self.threads == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            self.threads
        }
    }
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    sigma: u32,
    #[arg(long)]
    d: u32,
    #[arg(long)]
    ell: u32,
    /// RAM ceiling for the vectors (bytes, suffixes KiB/MiB/GiB accepted).
    #[arg(long, default_value = "2GiB", value_parser = parse_bytes)]
    memory_limit: u64,
    #[command(flatten)]
    iter: IterArgs,
}

#[derive(Args)]
struct BinaryArgs {
    /// String length parameter (1..=31).
    #[arg(long)]
    ell: u32,
    /// ram: all three generations in memory; disk: out-of-core sequential
    /// chunks under --dir.
    #[arg(long, default_value = "ram")]
    mode: String,
    /// Directory for the generation files and checkpoint (disk mode).
    #[arg(long)]
    dir: Option<PathBuf>,
    /// RAM budget for disk-mode chunks (suffixes KiB/MiB/GiB accepted).
    #[arg(long, default_value = "1GiB", value_parser = parse_bytes)]
    budget: u64,
    /// Stored element width in bytes: 8 (f64) or 4 (f32, disk mode only).
    #[arg(long, default_value_t = 8)]
    width: u64,
    /// Continue from the checkpoint in --dir.
    #[arg(long)]
    resume: bool,
    #[command(flatten)]
    iter: IterArgs,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    sigma: u32,
    #[arg(long)]
    d: u32,
    /// String length per sample.
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 200)]
    samples: u64,
    /// 64-bit seed; sample i draws from ChaCha8 stream i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Frontier cap for three or more strings. The result is then a
    /// certified lower-bound estimate rather than the exact-LCS mean.
    #[arg(long)]
    beam: Option<usize>,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest vector length attempted for general-engine fixtures.
    #[arg(long, default_value_t = 1 << 20)]
    max_states: u64,
    /// Largest binary string length checked.
    #[arg(long, default_value_t = 8)]
    max_ell: u32,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn parse_bytes(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let split = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    let (num, suffix) = s.split_at(split);
    let base: u64 = num.parse().map_err(|_| format!("bad size `{s}`"))?;
    let mult = match suffix.trim() {
        "" | "B" => 1,
        "KiB" | "K" => 1 << 10,
        "MiB" | "M" => 1 << 20,
        "GiB" | "G" => 1 << 30,
        "TiB" | "T" => 1 << 40,
        "KB" => 1_000,
        "MB" => 1_000_000,
        "GB" => 1_000_000_000,
        other => return Err(format!("unknown size suffix `{other}`")),
    };
    base.checked_mul(mult).ok_or_else(|| format!("size `{s}` overflows"))
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_) | Error::Config(_) => 2,
        Error::Capacity { .. } | Error::Io { .. } | Error::Metadata { .. } => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bound(args) => cmd_bound(args),
        Command::BinaryBound(args) => cmd_binary_bound(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn progress_printer(enabled: bool) -> impl FnMut(StepInfo) + Send {
    move |info: StepInfo| {
        if enabled {
            eprintln!(
                "iteration {:>6}  R {:.12}  E {:.12}  best bound {:.12}",
                info.step,
                info.growth,
                info.excess,
                2.0 * info.best_gap
            );
        }
    }
}

fn cmd_bound(args: BoundArgs) -> Result<u8, Error> {
    let params = Params::new(args.sigma, args.d, args.ell)?;
    let cfg = RunConfig {
        control: args.iter.control(),
        threads: args.iter.threads(),
        retain_u: false,
        memory_limit: args.memory_limit,
    };
    let start = Instant::now();
    let result = general::compute_triplet(&params, &cfg)?;
    let record = RunRecord {
        sigma: args.sigma,
        d: args.d,
        ell: args.ell,
        iterations: result.iterations_run,
        r: result.r,
        epsilon: result.epsilon,
        lower_bound: result.lower_bound,
        wall_seconds: start.elapsed().as_secs_f64(),
        threads: cfg.threads,
        mode: "ram".into(),
    };
    print_run(&record, result.best_iteration);
    if let Some(path) = &args.iter.csv {
        write_csv_row(path, &record)?;
    }
    Ok(0)
}

fn cmd_binary_bound(args: BinaryArgs) -> Result<u8, Error> {
    let control = args.iter.control();
    let threads = args.iter.threads();
    let mut progress = progress_printer(args.iter.progress);
    let start = Instant::now();
    let (result, mode) = match args.mode.as_str() {
        "ram" => {
            if args.width != 8 {
                return Err(Error::invalid("--width 4 requires --mode disk"));
            }
            let cfg = RamConfig {
                control,
                threads,
                retain_u: false,
                memory_limit: u64::MAX,
            };
            (
                binary::compute_triplet_ram_hooked(args.ell, &cfg, &mut progress, |_, _: &[f64]| {})?,
                "ram",
            )
        }
        "disk" => {
            let dir = args
                .dir
                .clone()
                .ok_or_else(|| Error::invalid("--mode disk requires --dir"))?;
            let cfg = DiskConfig {
                control,
                threads,
                dir,
                memory_budget: args.budget,
                width: ElementWidth::from_bytes(args.width)?,
                resume: args.resume,
                record_io: false,
                mode: StoreMode::Disk,
            };
            let (result, _) =
                binary::compute_triplet_disk_hooked(args.ell, &cfg, &mut progress, None)?;
            (result, "disk")
        }
        other => return Err(Error::invalid(format!("unknown mode `{other}`"))),
    };
    let record = RunRecord {
        sigma: 2,
        d: 2,
        ell: args.ell,
        iterations: result.iterations_run,
        r: result.r,
        epsilon: result.epsilon,
        lower_bound: result.lower_bound,
        wall_seconds: start.elapsed().as_secs_f64(),
        threads,
        mode: mode.into(),
    };
    print_run(&record, result.best_iteration);
    if let Some(path) = &args.iter.csv {
        write_csv_row(path, &record)?;
    }
    Ok(0)
}

fn cmd_estimate(args: EstimateArgs) -> Result<u8, Error> {
    let threads = if args.threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        args.threads
    };
    let est = cs_bounds::triplet::with_worker_pool(threads, || match args.beam {
        Some(beam) => {
            oracle::estimate_gamma_lower(args.sigma, args.d, args.n, args.samples, args.seed, beam)
        }
        None => oracle::estimate_gamma(args.sigma, args.d, args.n, args.samples, args.seed),
    })?;
    let kind = if args.beam.is_some() && args.d >= 3 {
        "lower-bound estimate (beam-limited LCS)"
    } else {
        "estimate (exact LCS per sample)"
    };
    println!(
        "gamma_{{{},{}}} {kind}: generator ChaCha8, seed {}, streams 0..{}",
        args.sigma, args.d, est.seed, est.samples
    );
    println!(
        "  n = {}, samples = {}, mean = {:.6}, stderr = {:.6}",
        est.n, est.samples, est.mean, est.stderr
    );
    println!(
        "  mean = {:.17}, stderr = {:.17}",
        est.mean, est.stderr
    );
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Error> {
    let opts = cs_bounds::verify::VerifyOptions {
        max_states: args.max_states,
        max_ell: args.max_ell,
        threads: if args.threads == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            args.threads
        },
    };
    let mut all_ok = true;
    let results = cs_bounds::verify::run_verify(&opts, &mut |r| {
        println!(
            "[{}] {:<38} {} ({:.2}s)",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail,
            r.seconds
        );
    });
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    if !failed.is_empty() {
        all_ok = false;
        println!("\n{} of {} checks failed:", failed.len(), results.len());
        for r in failed {
            println!("  {}: {}", r.name, r.detail);
        }
    } else {
        println!("\nall {} checks passed", results.len());
    }
    Ok(if all_ok { 0 } else { 1 })
}
