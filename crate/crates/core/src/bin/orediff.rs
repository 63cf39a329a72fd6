//! Command-line harness: scenario runs, randomized sweeps and bound evaluation.
//!
//! Exit status: 0 when every applicable bound holds, 1 on a bound violation,
//! 2 on a configuration or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use orediff::adaptive::{CoreParams, WindowLimit};
use orediff::analysis::{convergence_time, theorem2_bound, BoundInputs};
use orediff::scenario::{run_property_sweep, run_scenario, KbarSetting, Overrides, SweepConfig};
use orediff::signals::{NoiseFamily, SignalFamily};

#[derive(Parser)]
#[command(name = "orediff", version, about = "Robust exact differentiation benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and verify every estimator against its bound.
    Run(RunArgs),
    /// Verify the worst-case bound over many seeded random signals.
    Sweep(SweepArgs),
    /// Print the worst-case bound and the convergence time.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalArg {
    Scenario1,
    Scenario2,
    Random,
    Polynomial,
}

impl From<SignalArg> for SignalFamily {
    fn from(s: SignalArg) -> Self {
        match s {
            SignalArg::Scenario1 => SignalFamily::Scenario1,
            SignalArg::Scenario2 => SignalFamily::Scenario2,
            SignalArg::Random => SignalFamily::PiecewiseQuadraticRandom,
            SignalArg::Polynomial => SignalFamily::Polynomial,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Uniform,
    Square,
    Modulated,
    Zero,
}

impl From<NoiseArg> for NoiseFamily {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Uniform => NoiseFamily::UniformRandom,
            NoiseArg::Square => NoiseFamily::AdversarialSquareWave,
            NoiseArg::Modulated => NoiseFamily::PiecewiseConstantModulated,
            NoiseArg::Zero => NoiseFamily::Zero,
        }
    }
}

#[derive(Args)]
struct ParamArgs {
    /// Bound on the second derivative of the signal.
    #[arg(long = "L")]
    l: Option<f64>,
    /// Nominal noise amplitude used to size the window.
    #[arg(long = "Nbar")]
    nbar: Option<f64>,
    /// Sampling period in seconds.
    #[arg(long)]
    delta: Option<f64>,
    /// Output rate bound, must exceed L.
    #[arg(long)]
    gamma: Option<f64>,
    /// Window length in samples, or "inf".
    #[arg(long)]
    kbar: Option<KbarSetting>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    scenario: Option<u8>,
    #[arg(long, value_enum)]
    signal: Option<SignalArg>,
    #[arg(long, value_enum)]
    noise: Option<NoiseArg>,
    /// Noise amplitude; defaults to Nbar.
    #[arg(long = "N")]
    n: Option<f64>,
    #[arg(long = "R1")]
    r1: Option<f64>,
    /// Filter initialization index.
    #[arg(long)]
    k0: Option<u64>,
    /// Length of the run in seconds.
    #[arg(long)]
    horizon: Option<f64>,
    #[command(flatten)]
    params: ParamArgs,
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "OREDIFF_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Fixed noise amplitude for every run.
    #[arg(long = "N")]
    n: Option<f64>,
    #[arg(long)]
    k0: Option<u64>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, env = "OREDIFF_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long = "L", default_value_t = 1.0)]
    l: f64,
    #[arg(long = "N", default_value_t = 0.08)]
    n: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = 1.96)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    k0: u64,
    /// Bound on the initial derivative.
    #[arg(long = "R1", default_value_t = 1.0)]
    r1: f64,
    /// Window length; defaults to the smallest window whose capacity covers N.
    #[arg(long)]
    kbar: Option<KbarSetting>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Bounds(args) => bounds(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: RunArgs) -> orediff::Result<bool> {
    let flags = Overrides {
        scenario: args.scenario,
        signal: args.signal.map(Into::into),
        noise: args.noise.map(Into::into),
        l: args.params.l,
        nbar: args.params.nbar,
        n: args.n,
        r1: args.r1,
        delta: args.params.delta,
        gamma: args.params.gamma,
        k0: args.k0,
        kbar: args.params.kbar,
        horizon: args.horizon,
        seed: args.params.seed,
        out: args.out,
        ..Default::default()
    };
    let file = match &args.config {
        Some(path) => Overrides::from_toml_file(path)?,
        None => Overrides::default(),
    };
    let config = flags.over(file).resolve()?;
    let outcome = run_scenario(&config)?;
    for report in &outcome.reports {
        println!("{}", report.summary());
    }
    if let Some(a) = outcome.core_bound {
        println!(
            "per-sample bound: {} of {} steps violated (worst margin {:.3e})",
            a.violations, a.checked, a.worst_margin
        );
    }
    println!(
        "noise estimate: max {:.6} vs N = {} ({})",
        outcome.noise.max_estimate,
        config.noise_bound(),
        if outcome.noise.ok { "ok" } else { "exceeded" }
    );
    println!(
        "wrote {} and {}",
        outcome.trace_path.display(),
        outcome.plot_path.display()
    );
    Ok(!outcome.violated())
}

fn sweep(args: SweepArgs) -> orediff::Result<bool> {
    let defaults = SweepConfig::default();
    let p = &args.params;
    let cfg = SweepConfig {
        count: args.count,
        seed: p.seed.unwrap_or(defaults.seed),
        l: p.l.unwrap_or(defaults.l),
        delta: p.delta.unwrap_or(defaults.delta),
        gamma: p.gamma.unwrap_or(defaults.gamma),
        nbar: p.nbar.unwrap_or(defaults.nbar),
        kbar: p.kbar.unwrap_or(defaults.kbar),
        n: args.n,
        k0: args.k0,
        output_dir: Some(args.out.unwrap_or_else(|| PathBuf::from("out"))),
    };
    let summary = run_property_sweep(&cfg)?;
    let applicable = summary.applicable();
    println!(
        "{} runs, {} applicable, {} passed, {} not applicable",
        summary.runs.len(),
        applicable,
        summary.passed(),
        summary.runs.len() - applicable
    );
    if let Some(run) = summary.first_failure() {
        println!("first failing seed {}: {}", run.seed, run.report.summary());
        return Ok(false);
    }
    Ok(true)
}

fn bounds(args: BoundsArgs) -> orediff::Result<bool> {
    let kbar = match args.kbar {
        Some(KbarSetting::Samples(n)) => WindowLimit::Finite(n),
        Some(KbarSetting::Infinite) => WindowLimit::Infinite,
        None => WindowLimit::Finite(CoreParams::window_for_capacity(args.l, args.delta, args.n)?),
    };
    let inputs = BoundInputs {
        l: args.l,
        n: args.n,
        delta: args.delta,
        gamma: args.gamma,
        k0: args.k0,
        r1: args.r1,
        kbar,
    };
    let t = convergence_time(&inputs)?;
    println!("bound = {:.6}", theorem2_bound(args.l, args.n, args.delta));
    println!("T = {t:.4}");
    match kbar {
        WindowLimit::Finite(k) => println!(
            "kbar = {k}, Nbar = {:.6}{}",
            inputs.noise_capacity(),
            if inputs.within_capacity() { "" } else { " (N exceeds capacity: bound not applicable)" }
        ),
        WindowLimit::Infinite => println!("kbar = inf"),
    }
    Ok(true)
}
