use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ookpolar_core::channel::{db_to_linear, h2, optimize_p};
use ookpolar_core::code::shaping_limit;
use ookpolar_core::construction::CodeParams;
use ookpolar_core::{CrcConfig, IndexClass};
use ookpolar_sim::config::SweepConfig;
use ookpolar_sim::harness::{fer_inversions, run_sweep};
use ookpolar_sim::rateloss::RateLossSweep;
use ookpolar_sim::spec_io::{read_spec, write_spec, StatsCache};
use ookpolar_sim::{construct, rateloss, rates, Error, Result};

/// Probabilistically shaped polar codes for on-off keying.
#[derive(Parser)]
#[command(name = "ookpolar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code spec from parameters.
    Construct(ConstructArgs),
    /// Uniform and optimized achievable-rate curves.
    Rates(RatesArgs),
    /// Rate loss of CCDM and polar matchers versus length.
    Rateloss(RatelossArgs),
    /// FER sweep described by a JSON config.
    Fer(FerArgs),
    /// Describe a code spec.
    Info {
        spec: PathBuf,
    },
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long = "len", short = 'N')]
    len: usize,
    #[arg(long, short = 'R')]
    rate: f64,
    /// Target ones-probability; optimized for the design SNR when omitted.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    design_snr_db: f64,
    #[arg(long = "dynamic", short = 'D', default_value_t = 0)]
    dynamic_len: usize,
    #[arg(long, default_value_t = 0)]
    crc_width: u32,
    #[arg(long, default_value_t = 2000)]
    source_trials: u64,
    #[arg(long, default_value_t = 10000)]
    channel_trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long, default_value_t = -15.0, allow_hyphen_values = true)]
    lo_db: f64,
    #[arg(long, default_value_t = 15.0, allow_hyphen_values = true)]
    hi_db: f64,
    #[arg(long, default_value_t = 0.25)]
    step_db: f64,
    /// Rate at which the SNR gap is reported.
    #[arg(long, default_value_t = 0.25)]
    gap_rate: f64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RatelossArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [64, 256, 1024, 4096])]
    lens: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    dm_rate: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [32])]
    list_sizes: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    frames: u64,
    /// Allowed excess of the mean ones-fraction over the target.
    #[arg(long, default_value_t = 0.0)]
    tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    source_trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FerArgs {
    #[arg(long, short)]
    config: PathBuf,
    /// CSV to append to; rows already present are skipped.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Construct(a) => cmd_construct(a),
        Command::Rates(a) => cmd_rates(a),
        Command::Rateloss(a) => cmd_rateloss(a),
        Command::Fer(a) => cmd_fer(a),
        Command::Info { spec } => cmd_info(&read_spec(&spec)?),
    }
}

fn cmd_construct(a: ConstructArgs) -> Result<()> {
    let p = match a.p {
        Some(p) => p,
        None => optimize_p(db_to_linear(a.design_snr_db))?.p,
    };
    let crc = CrcConfig::for_width(a.crc_width).map_err(|e| Error::Config(e.to_string()))?;
    let params = CodeParams {
        len: a.len,
        rate: a.rate,
        p,
        dynamic_len: a.dynamic_len,
        crc,
        design_snr_db: a.design_snr_db,
        seed: a.seed,
    };
    let cache = a.cache.map(StatsCache::new);
    let spec = construct::construct(&params, a.source_trials, a.channel_trials, cache.as_ref()).map_err(|e| match e {
        Error::Core(c) => Error::Config(c.to_string()),
        other => other,
    })?;
    write_spec(&a.out, &spec)?;
    cmd_info(&spec)
}

fn cmd_rates(a: RatesArgs) -> Result<()> {
    let points = rates::rate_curves(a.lo_db, a.hi_db, a.step_db)?;
    if let Some(out) = &a.out {
        rates::write_csv(out, &points)?;
    }
    let gap = rates::gap_at_rate(a.gap_rate)?;
    println!(
        "rate {}: uniform {:.3} dB, optimized {:.3} dB (p = {:.4}), gap {:.3} dB",
        gap.rate, gap.uniform_snr_db, gap.optimized_snr_db, gap.p_opt, gap.gap_db
    );
    Ok(())
}

fn cmd_rateloss(a: RatelossArgs) -> Result<()> {
    let sweep = RateLossSweep {
        lens: a.lens,
        dm_rate: a.dm_rate,
        list_sizes: a.list_sizes,
        frames: a.frames,
        tolerance: a.tolerance,
        source_trials: a.source_trials,
        seed: a.seed,
    };
    let points = rateloss::run(&sweep)?;
    for pt in &points {
        let d = pt.dynamic_len.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
        println!("N={:<6} {:<14} D={:<6} loss={:.5}", pt.len, pt.matcher.label(), d, pt.rate_loss);
    }
    if let Some(out) = &a.out {
        rateloss::write_csv(out, &points)?;
    }
    Ok(())
}

fn cmd_fer(a: FerArgs) -> Result<()> {
    let cfg = SweepConfig::load(&a.config)?;
    if let Some(n) = a.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let cache = a.cache.map(StatsCache::new);
    let records = run_sweep(&cfg, &a.out, cache.as_ref(), |r| {
        eprintln!(
            "snr {:>6} dB: {} / {} frame errors, fer {:.3e} ({:.1} s)",
            r.snr_db,
            r.frame_errors,
            r.frames,
            r.fer(),
            r.wall_time_s
        );
    })?;
    for (a, b) in fer_inversions(&records) {
        eprintln!("warning: FER rises between {a} dB and {b} dB");
    }
    Ok(())
}

fn cmd_info(spec: &ookpolar_core::CodeSpec) -> Result<()> {
    let count = |c: IndexClass| spec.classes.iter().filter(|&&k| k == c).count();
    println!("N = {} (n = {}), R = {}", spec.len, spec.n, spec.rate);
    println!(
        "information {} (payload {} + CRC {}), dynamic {}, frozen {}",
        count(IndexClass::Information),
        spec.payload_len(),
        spec.crc.width(),
        count(IndexClass::Dynamic),
        count(IndexClass::Frozen)
    );
    println!(
        "p = {:.4} (H2 = {:.4}), shaping limit D >= {}{}",
        spec.p,
        h2(spec.p),
        shaping_limit(spec.len, spec.p),
        if spec.below_shaping_limit { " (below)" } else { "" }
    );
    println!(
        "design SNR {} dB, seed {}, trials {} source / {} channel",
        spec.design_snr_db, spec.seed, spec.source_trials, spec.channel_trials
    );
    if spec.len <= 256 {
        println!("{}", spec.class_string());
    }
    Ok(())
}
