//! `gkpsim` command-line front end.
//!
//! Exit codes: 0 ok, 1 out of regime, 2 bad input, 3 I/O, 4 postselection
//! starvation.

// `!(x > 0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gkpsim::circuit::{explain_encoding, EncodedCd};
use gkpsim::optimizer::{
    asymptotic_logical_noise, optimal_squeezing, sweep_sigma, sweep_trotter, variance_curve, write_sweep_csv,
    DEFAULT_TOLERANCE,
};
use gkpsim::{
    builtin_cat_circuit, load_circuit, run_monte_carlo, CircuitSpec64, Error, ExecutionMode, Method, Postselection,
    RunOptions, SqueezingChoice, WignerGridSpec,
};

#[derive(Parser)]
#[command(name = "gkpsim", version, about = "GKP two-mode-squeezing noise reduction simulator")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "GKPSIM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal squeezing and logical noise for one per-step noise level.
    OptimalSqueeze(OptimalArgs),
    /// Optimal squeezing over a range of noise levels or Trotter counts.
    Sweep(SweepArgs),
    /// Residual standard deviation as a function of squeezing.
    VarianceCurve(CurveArgs),
    /// Monte Carlo simulation of a circuit.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Analytic,
    #[value(alias = "mc")]
    MonteCarlo,
}

#[derive(Args)]
struct MethodOpts {
    #[arg(long, value_enum, default_value = "analytic")]
    method: MethodArg,
    /// Draws per objective evaluation for the Monte Carlo method.
    #[arg(long, default_value_t = 1_000_000)]
    mc_trials: usize,
    #[arg(long)]
    seed: Option<u64>,
}

impl MethodOpts {
    fn resolve(&self) -> (Method, Option<u64>) {
        match self.method {
            MethodArg::Analytic => (Method::Analytic, None),
            MethodArg::MonteCarlo => {
                let seed = resolve_seed(self.seed);
                (
                    Method::MonteCarlo {
                        trials: self.mc_trials,
                        seed,
                    },
                    Some(seed),
                )
            }
        }
    }
}

#[derive(Args)]
struct OptimalArgs {
    /// Per-step noise standard deviation.
    #[arg(long, allow_negative_numbers = true)]
    sigma: f64,
    #[command(flatten)]
    method: MethodOpts,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// `lo:hi:log10[:points]` range of full-gate noise levels (N = 1).
    #[arg(long, conflicts_with = "trotter", required_unless_present = "trotter")]
    sigmas: Option<String>,
    /// Comma-separated Trotter counts at fixed `--sigma-p`.
    #[arg(long, value_delimiter = ',', requires = "sigma_p")]
    trotter: Option<Vec<usize>>,
    #[arg(long)]
    sigma_p: Option<f64>,
    #[command(flatten)]
    method: MethodOpts,
    /// CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 6.0)]
    s_max: f64,
    #[arg(long, default_value_t = 241)]
    points: usize,
    #[command(flatten)]
    method: MethodOpts,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Cat,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Physical,
    Logical,
}

#[derive(Clone, Copy, ValueEnum)]
enum PostselectionArg {
    Weighted,
    Sampled,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML circuit file.
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    circuit: Option<PathBuf>,
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
    /// Cat size for `--builtin cat`.
    #[arg(long, default_value_t = 4.0)]
    beta: f64,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Squeezing for logical mode: a number or `auto`.
    #[arg(long)]
    s: Option<String>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sigma_p: Option<f64>,
    #[arg(long)]
    trotter_n: Option<usize>,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long, value_enum, default_value = "weighted")]
    postselection: PostselectionArg,
    /// Write the Wigner function of the mean output state to this CSV.
    #[arg(long)]
    wigner: Option<PathBuf>,
    /// Half-width of the square Wigner grid.
    #[arg(long, default_value_t = 8.0)]
    wigner_extent: f64,
    #[arg(long, default_value_t = 161)]
    wigner_points: usize,
    /// Include the encoded physical CD amplitudes in the report.
    #[arg(long)]
    explain: bool,
    /// JSON destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> anyhow::Result<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct OptimalRecord {
    schema_version: u32,
    sigma: f64,
    s_star: f64,
    sigma_ln: f64,
    sigma_ln_asy: Option<f64>,
    method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn cmd_optimal(args: &OptimalArgs) -> anyhow::Result<()> {
    if !(args.sigma > 0.0 && args.sigma.is_finite()) {
        bail!(Error::InvalidParameter(format!("sigma must be a positive real, got {}", args.sigma)));
    }
    let (method, seed) = args.method.resolve();
    let opt = optimal_squeezing(args.sigma, method, DEFAULT_TOLERANCE)?;
    let asy = match asymptotic_logical_noise(args.sigma) {
        Ok(v) => Some(v),
        Err(Error::OutOfRegime(msg)) => {
            log::warn!("{msg}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let record = OptimalRecord {
        schema_version: 1,
        sigma: args.sigma,
        s_star: opt.s_star,
        sigma_ln: opt.sigma_ln,
        sigma_ln_asy: asy,
        method: method.name(),
        seed,
    };
    if args.json {
        return write_json(&record, None);
    }
    println!("sigma        {:e}", record.sigma);
    println!("s_star       {:.6}", record.s_star);
    println!("sigma_ln     {:e}", record.sigma_ln);
    match record.sigma_ln_asy {
        Some(v) => println!("sigma_ln_asy {v:e}"),
        None => println!("sigma_ln_asy n/a"),
    }
    if let Some(seed) = seed {
        println!("seed         {seed}");
    }
    Ok(())
}

/// Parse `lo:hi:log10[:points]` into log-spaced values.
fn parse_log_range(text: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::InvalidParameter(format!("expected lo:hi:log10[:points], got {text:?}"));
    if !(parts.len() == 3 || parts.len() == 4) || parts[2] != "log10" {
        bail!(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let points: usize = match parts.get(3) {
        Some(p) => p.parse().map_err(|_| bad())?,
        None => 10,
    };
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
        bail!(Error::InvalidParameter(format!("empty or invalid range {text:?}")));
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..points)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64))
        .collect())
}

fn cmd_sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let (method, _) = args.method.resolve();
    let rows = match (&args.sigmas, &args.trotter) {
        (Some(range), _) => sweep_sigma(&parse_log_range(range)?, method)?,
        (None, Some(ns)) => {
            let sigma_p = args.sigma_p.expect("clap enforces --sigma-p");
            if ns.is_empty() || ns.contains(&0) {
                bail!(Error::InvalidParameter("Trotter counts must be >= 1".into()));
            }
            sweep_trotter(sigma_p, ns, method)?
        }
        (None, None) => unreachable!("clap enforces one of --sigmas/--trotter"),
    };
    let mut out = open_output(args.out.as_deref())?;
    write_sweep_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_curve(args: &CurveArgs) -> anyhow::Result<()> {
    if args.points < 2 || !(args.s_max > 0.0) {
        bail!(Error::InvalidParameter("need points >= 2 and s_max > 0".into()));
    }
    let (method, _) = args.method.resolve();
    let grid: Vec<f64> = (0..args.points)
        .map(|i| args.s_max * i as f64 / (args.points - 1) as f64)
        .collect();
    let curve = variance_curve(args.sigma, &grid, method)?;
    let mut out = open_output(args.out.as_deref())?;
    writeln!(out, "s,sigma_ln")?;
    for (s, v) in curve {
        writeln!(out, "{s:e},{:e}", v.sqrt())?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SimulateRecord {
    source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(flatten)]
    summary: gkpsim::RunSummary64,
    #[serde(skip_serializing_if = "Option::is_none")]
    encoding: Option<Vec<EncodedCd>>,
}

fn build_circuit(args: &SimulateArgs) -> anyhow::Result<(CircuitSpec64, String)> {
    let (mut circuit, source) = match (&args.circuit, args.builtin) {
        (Some(path), _) => (load_circuit(path)?, path.display().to_string()),
        (None, Some(Builtin::Cat)) => (builtin_cat_circuit(args.beta)?, "builtin:cat".to_string()),
        (None, None) => unreachable!("clap enforces one of --circuit/--builtin"),
    };
    if let Some(sp) = args.sigma_p {
        if !(sp >= 0.0 && sp.is_finite()) {
            bail!(Error::InvalidParameter(format!("sigma_p must be >= 0, got {sp}")));
        }
        circuit = circuit.with_sigma_p(sp);
    }
    if let Some(n) = args.trotter_n {
        circuit = circuit.with_trotter_n(n);
    }
    if let Some(c) = args.cutoff {
        circuit = circuit.with_cutoff(c);
    }
    let choice = match args.s.as_deref() {
        None => None,
        Some("auto") => Some(SqueezingChoice::Auto),
        Some(text) => Some(SqueezingChoice::Fixed(text.parse::<f64>().map_err(|_| {
            Error::InvalidParameter(format!("--s must be a number or auto, got {text:?}"))
        })?)),
    };
    let current = match circuit.mode {
        ExecutionMode::Logical(c) => Some(c),
        ExecutionMode::Physical => None,
    };
    circuit.mode = match (args.mode, choice) {
        (Some(ModeArg::Physical), _) => ExecutionMode::Physical,
        (Some(ModeArg::Logical), c) => ExecutionMode::Logical(c.or(current).unwrap_or(SqueezingChoice::Auto)),
        (None, Some(c)) => ExecutionMode::Logical(c),
        (None, None) => circuit.mode,
    };
    Ok((circuit, source))
}

fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let (circuit, source) = build_circuit(args)?;
    let seed = resolve_seed(args.seed);
    let mut options = RunOptions::new(args.trials, seed).with_postselection(match args.postselection {
        PostselectionArg::Weighted => Postselection::Weighted,
        PostselectionArg::Sampled => Postselection::Sampled,
    });
    if args.wigner.is_some() {
        options = options.with_wigner(WignerGridSpec::square(args.wigner_extent, args.wigner_points));
    }
    let summary = run_monte_carlo(&circuit, &options)?;
    if let (Some(path), Some(grid)) = (&args.wigner, &summary.wigner) {
        let mut out = open_output(Some(path))?;
        grid.write_csv(&mut out)?;
        out.flush()?;
    }
    let encoding = args.explain.then(|| {
        let s = summary.s_used.unwrap_or(0.0);
        explain_encoding(&circuit, s)
    });
    let record = SimulateRecord {
        beta: args.builtin.map(|_| args.beta),
        source,
        summary,
        encoding,
    };
    write_json(&record, args.out.as_deref())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::OutOfRegime(_) => 1,
                Error::Io(_) => 3,
                Error::PostselectionStarvation { .. } => 4,
                _ => 2,
            };
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return 3;
        }
    }
    2
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::OptimalSqueeze(a) => cmd_optimal(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::VarianceCurve(a) => cmd_curve(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
