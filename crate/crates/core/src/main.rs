//! `kherd` command-line front end.
//!
//! Exit codes: 0 success, 2 validation error, 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kherd::herding::{select, Algorithm, AlphaChoice, BandwidthRule, SelectOptions};
use kherd::io::{self, timing, Format, SelectionRecord};
use kherd::kernel::{median_bandwidth, KernelContext, KernelSpec};
use kherd::oracle::exhaustive_min;
use kherd::synthbench::{self, BenchAlphaRule, BenchConfig, DistributionSpec};
use kherd::Error;

#[derive(Parser)]
#[command(
    name = "kherd",
    version,
    about = "Representative and diverse sample selection by kernel herding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select m samples from a dataset and write a selection record.
    Select(SelectArgs),
    /// Compare with- and without-replacement herding on synthetic data.
    Bench(BenchArgs),
    /// Generate a synthetic 2-D dataset.
    Synth(SynthArgs),
    /// Solve a small instance exactly and compare against the greedy pick.
    Oracle(OracleArgs),
    /// Render a selection over 2-D data as SVG.
    Viz(VizArgs),
    /// Time the selection loop across dataset sizes.
    Time(TimeArgs),
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, default_value = "gaussian", value_parser = ["gaussian", "laplacian", "polynomial"])]
    kernel: String,
    /// `median` or a positive number.
    #[arg(long, default_value = "median")]
    bandwidth: String,
    #[arg(long, default_value_t = 2)]
    degree: u32,
    #[arg(long, default_value_t = 1.0)]
    offset: f64,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = ["csv", "rdsb"])]
    format: Option<String>,
    #[arg(long)]
    m: usize,
    /// `auto` (1 − 1/√m), `ratio` (m/n) or a number in [0, 1].
    #[arg(long, default_value = "auto")]
    alpha: String,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value = "gkhr", value_parser = ["gkhr", "gkh", "random", "stratified", "kmeans"])]
    algorithm: String,
    #[arg(long)]
    gram_cache: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    /// Record whether the greedy finite-sample bound holds.
    #[arg(long)]
    check_bound: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "gmm1,gmm2,circle-annulus,uniform-square")]
    dist: Vec<String>,
    #[arg(long = "n", value_delimiter = ',', default_value = "1000,3000")]
    ns: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.1,0.2")]
    frac: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value = "ratio", value_parser = ["ratio", "auto"])]
    alpha_rule: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    /// Also write one CSV row per run.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    dist: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_parser = ["csv", "rdsb"])]
    format: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = ["csv", "rdsb"])]
    format: Option<String>,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value = "auto")]
    alpha: String,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Enumerate multisets instead of subsets.
    #[arg(long)]
    replacement: bool,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct VizArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = ["csv", "rdsb"])]
    format: Option<String>,
    #[arg(long)]
    selection: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 800)]
    width: u32,
    #[arg(long, default_value_t = 600)]
    height: u32,
}

#[derive(Args)]
struct TimeArgs {
    #[arg(long = "n", value_delimiter = ',', default_value = "2000,4000,8000")]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 400)]
    m: usize,
    #[arg(long, default_value = "uniform-square")]
    dist: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    runs: usize,
    /// Also write the table as JSON.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Error tagged with the flag it concerns.
struct CliError {
    flag: Option<&'static str>,
    err: Error,
}

impl CliError {
    fn code(&self) -> u8 {
        if self.err.is_io() {
            3
        } else {
            2
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError { flag: None, err }
    }
}

trait FlagContext<T> {
    fn flag(self, flag: &'static str) -> Result<T, CliError>;
}

impl<T> FlagContext<T> for Result<T, Error> {
    fn flag(self, flag: &'static str) -> Result<T, CliError> {
        self.map_err(|err| CliError { flag: Some(flag), err })
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn format_arg(f: &Option<String>) -> CliResult<Option<Format>> {
    f.as_deref().map(str::parse).transpose().flag("--format")
}

fn kernel_choice(k: &KernelArgs) -> CliResult<(KernelSpec, BandwidthRule)> {
    let bandwidth = match k.bandwidth.as_str() {
        "median" => BandwidthRule::Median,
        v => {
            let s: f64 = v
                .parse()
                .map_err(|_| Error::invalid(format!("expected 'median' or a number, got '{v}'")))
                .flag("--bandwidth")?;
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::invalid("bandwidth must be positive")).flag("--bandwidth");
            }
            BandwidthRule::Fixed(s)
        }
    };
    let sigma = match bandwidth {
        BandwidthRule::Fixed(s) => s,
        BandwidthRule::Median => 1.0,
    };
    let spec = match k.kernel.as_str() {
        "laplacian" => KernelSpec::Laplacian { sigma },
        "polynomial" => {
            log::warn!("the polynomial kernel is not characteristic; MMD is only a pseudo-metric under it");
            KernelSpec::Polynomial {
                degree: k.degree,
                offset: k.offset,
            }
        }
        _ => KernelSpec::Gaussian { sigma },
    };
    spec.validate().flag("--degree")?;
    Ok((spec, bandwidth))
}

fn write_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> CliResult {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    s.push('\n');
    io::write_atomic(path, s.as_bytes()).flag("--output")
}

fn cmd_select(a: SelectArgs) -> CliResult {
    let ds = io::load_dataset(&a.input, format_arg(&a.format)?).flag("--input")?;
    let alpha: AlphaChoice = a.alpha.parse().flag("--alpha")?;
    let algorithm: Algorithm = a.algorithm.parse().flag("--algorithm")?;
    let (kernel, bandwidth) = kernel_choice(&a.kernel)?;
    if a.m < 1 {
        return Err(Error::invalid("budget must be >= 1")).flag("--m");
    }
    if a.m > ds.n() && algorithm != Algorithm::Gkh {
        return Err(Error::BudgetExceedsGroundSet { m: a.m, n: ds.n() }).flag("--m");
    }
    let opts = SelectOptions {
        kernel,
        bandwidth,
        alpha,
        algorithm,
        gram_cache: a.gram_cache,
        seed: a.seed,
        ..SelectOptions::default()
    };
    let sel = select(ds, a.m, &opts).flag("--m")?;
    let record = SelectionRecord::from_selection(&sel, a.seed, a.check_bound)?;
    if let Some(false) = record.bound.satisfied {
        log::warn!(
            "bound not met: {} > {} (the bound assumes the low-budget regime)",
            record.final_alpha_mmd_sq,
            record.bound.rhs
        );
    }
    io::write_atomic(&a.output, record.to_json()?.as_bytes()).flag("--output")
}

fn cmd_bench(a: BenchArgs) -> CliResult {
    let distributions = a
        .dist
        .iter()
        .map(|d| DistributionSpec::from_name(d))
        .collect::<Result<Vec<_>, _>>()
        .flag("--dist")?;
    let config = BenchConfig {
        distributions,
        ns: a.ns,
        budget_fracs: a.frac,
        runs: a.runs,
        alpha_rule: if a.alpha_rule == "auto" {
            BenchAlphaRule::Auto
        } else {
            BenchAlphaRule::Ratio
        },
        seed: a.seed,
    };
    let report = synthbench::run_comparison(&config).flag("--frac")?;
    write_json(&a.output, &report)?;
    if let Some(p) = &a.csv {
        io::write_atomic(p, report.to_csv().as_bytes()).flag("--csv")?;
    }
    for c in &report.cells {
        println!(
            "{:<15} n={:<6} m={:<5} alpha={:.4} D mean={:+.4} std={:.4}",
            c.distribution.name(),
            c.n,
            c.m,
            c.alpha.value,
            c.d_mean,
            c.d_std
        );
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> CliResult {
    let spec = DistributionSpec::from_name(&a.dist).flag("--dist")?;
    let ds = synthbench::sample(&spec, a.n, a.seed).flag("--n")?;
    io::save_dataset(&a.output, &ds, format_arg(&a.format)?).flag("--output")
}

fn cmd_oracle(a: OracleArgs) -> CliResult {
    let ds = io::load_dataset(&a.input, format_arg(&a.format)?).flag("--input")?;
    let (kernel, bandwidth) = kernel_choice(&a.kernel)?;
    let kernel = match bandwidth {
        BandwidthRule::Median if kernel.sigma().is_some() => kernel.with_sigma(median_bandwidth(&ds).flag("--bandwidth")?),
        _ => kernel,
    };
    let alpha = a
        .alpha
        .parse::<AlphaChoice>()
        .flag("--alpha")?
        .resolve(a.m, ds.n())
        .flag("--alpha")?;
    let ctx = KernelContext::build(ds, kernel, true).flag("--input")?;
    let report = exhaustive_min(&ctx, a.m, alpha.value, a.replacement).flag("--m")?;
    write_json(&a.output, &report)
}

fn cmd_viz(a: VizArgs) -> CliResult {
    let ds = io::load_dataset(&a.input, format_arg(&a.format)?).flag("--input")?;
    let text = std::fs::read_to_string(&a.selection).map_err(|e| Error::Io {
        path: a.selection.clone(),
        source: e,
    })?;
    let record = SelectionRecord::from_json(&text).flag("--selection")?;
    let svg = io::svg::render(&ds, &record.indices, a.width, a.height).flag("--selection")?;
    io::write_atomic(&a.output, svg.as_bytes()).flag("--output")
}

fn cmd_time(a: TimeArgs) -> CliResult {
    let spec = DistributionSpec::from_name(&a.dist).flag("--dist")?;
    let table = timing::run_timing(&spec, &a.ns, a.m, a.seed, a.runs).flag("--n")?;
    print!("{}", table.render());
    if let Some(p) = &a.output {
        write_json(p, &table)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Select(a) => cmd_select(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Viz(a) => cmd_viz(a),
        Command::Time(a) => cmd_time(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.flag {
                Some(flag) => eprintln!("error: {flag}: {}", e.err),
                None => eprintln!("error: {}", e.err),
            }
            ExitCode::from(e.code())
        }
    }
}
