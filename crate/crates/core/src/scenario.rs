//! Benchmark scenarios and randomized sweeps.
//!
//! Configuration is assembled in layers: built-in scenario defaults, then a
//! TOML file, then command-line flags. Each layer is an [`Overrides`] value
//! whose `Some` fields replace what the previous layer set.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptive::{CoreParams, WindowLimit, DEFAULT_HISTORY_CAP};
use crate::analysis::{
    audit_core_bound, audit_noise_estimate, convergence_time, verify_estimate, verify_run, BoundInputs,
    Criterion, ErrorReport, CoreBoundAudit, NoiseAudit,
};
use crate::baselines::{Red, RedParams};
use crate::differentiator::{DiffTrace, Differentiator};
use crate::error::{io_err, param, Error, Result};
use crate::filter::FilterParams;
use crate::plot::{error_plot_svg, Series};
use crate::signals::{
    generate, generate_scenario2, NoiseFamily, NoiseSpec, Precision, SampledSignal, SignalFamily,
    SignalSpec,
};

/// Window length setting: a sample count, or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KbarSetting {
    Samples(usize),
    #[serde(with = "infinite_str")]
    Infinite,
}

mod infinite_str {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("inf")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if matches!(s.as_str(), "inf" | "infinite") {
            Ok(())
        } else {
            Err(D::Error::custom(format!("expected a sample count or \"inf\", got {s:?}")))
        }
    }
}

impl FromStr for KbarSetting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "inf" | "infinite" => Ok(KbarSetting::Infinite),
            _ => s
                .parse()
                .map(KbarSetting::Samples)
                .map_err(|_| format!("expected a sample count or \"inf\", got {s:?}")),
        }
    }
}

/// Noise added to the signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseConfig {
    Family(NoiseSpec),
    /// Sawtooth at `0.1N̄`, `N̄`, `2N̄` on `t ≤ 20/3`, `(20/3, 40/3]`, `t > 40/3`.
    Banded,
}

/// Fully resolved description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub signal: SignalSpec,
    pub noise: NoiseConfig,
    /// Nominal noise amplitude `N̄` used to size the window.
    pub nbar: f64,
    pub delta: f64,
    pub gamma: f64,
    pub k0: u64,
    pub kbar: KbarSetting,
    /// Sample cap when `kbar` is infinite.
    pub history_cap: usize,
    /// `(λ1, λ2)` of each baseline.
    pub red: Vec<(f64, f64)>,
    pub horizon: f64,
    pub output_dir: PathBuf,
}

impl ScenarioConfig {
    /// The first benchmark with the default parameters.
    pub fn scenario1() -> Self {
        Self::preset(1, 0)
    }

    pub fn scenario2() -> Self {
        Self::preset(2, 0)
    }

    fn preset(scenario: u8, seed: u64) -> Self {
        let nbar = 0.08;
        let (signal, noise) = if scenario == 2 {
            (
                SignalSpec::new(SignalFamily::Scenario2, 1.0, 0.5, 0.5, seed),
                NoiseConfig::Banded,
            )
        } else {
            (
                SignalSpec::new(SignalFamily::Scenario1, 1.0, 0.0, 1.0, seed),
                NoiseConfig::Family(NoiseSpec::new(NoiseFamily::UniformRandom, nbar, seed)),
            )
        };
        Self {
            signal,
            noise,
            nbar,
            delta: 0.01,
            gamma: 1.96,
            k0: 0,
            kbar: KbarSetting::Samples(41),
            history_cap: DEFAULT_HISTORY_CAP,
            red: vec![(1.5, 1.1), (2.8, 1.96)],
            horizon: 20.0,
            output_dir: PathBuf::from("out"),
        }
    }

    /// Noise amplitude bound `N` the run is checked against.
    pub fn noise_bound(&self) -> f64 {
        match self.noise {
            NoiseConfig::Family(spec) => spec.n,
            NoiseConfig::Banded => self.nbar,
        }
    }

    pub fn window(&self) -> WindowLimit {
        match self.kbar {
            KbarSetting::Samples(n) => WindowLimit::Finite(n),
            KbarSetting::Infinite => WindowLimit::Infinite,
        }
    }

    pub fn core_params(&self) -> Result<CoreParams> {
        Ok(CoreParams::new(self.signal.l, self.delta, self.window())?.with_history_cap(self.history_cap))
    }

    pub fn filter_params(&self) -> Result<FilterParams> {
        FilterParams::paired(self.gamma, self.delta, self.k0, self.signal.l)
    }

    pub fn bound_inputs(&self, r1: f64) -> BoundInputs {
        BoundInputs {
            l: self.signal.l,
            n: self.noise_bound(),
            delta: self.delta,
            gamma: self.gamma,
            k0: self.k0,
            r1,
            kbar: self.window(),
        }
    }

    /// Checks the invariants that make a run meaningful. The horizon must
    /// cover twice the convergence time for the class bound `R₁`.
    pub fn validate(&self) -> Result<()> {
        self.core_params()?;
        self.filter_params()?;
        let t = convergence_time(&self.bound_inputs(self.signal.r1))?;
        if self.horizon < 2.0 * t {
            return Err(param(format!(
                "horizon {} s must be at least twice the convergence time {t:.4} s",
                self.horizon
            )));
        }
        if self.window() == WindowLimit::Infinite {
            let samples = (self.horizon / self.delta).ceil() + 1.0;
            if samples > self.history_cap as f64 {
                return Err(param(format!(
                    "an unbounded window over {samples} samples exceeds the history cap {}",
                    self.history_cap
                )));
            }
        }
        for &(l1, l2) in &self.red {
            RedParams::new(l1, l2, self.signal.l, self.delta)?;
        }
        Ok(())
    }

    pub fn generate_signal(&self) -> Result<SampledSignal> {
        match self.noise {
            NoiseConfig::Banded => {
                if self.signal.family != SignalFamily::Scenario2 {
                    return Err(param("banded noise belongs to the second scenario"));
                }
                generate_scenario2(self.delta, self.horizon, self.nbar, self.signal.seed)
            }
            NoiseConfig::Family(noise) => generate(&self.signal, &noise, self.delta, self.horizon),
        }
    }
}

/// Partial configuration; `None` leaves the lower layer untouched.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub scenario: Option<u8>,
    pub signal: Option<SignalFamily>,
    pub noise: Option<NoiseFamily>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    #[serde(rename = "Nbar")]
    pub nbar: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<f64>,
    #[serde(rename = "R0")]
    pub r0: Option<f64>,
    #[serde(rename = "R1")]
    pub r1: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub k0: Option<u64>,
    pub kbar: Option<KbarSetting>,
    pub history_cap: Option<usize>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub red: Option<Vec<(f64, f64)>>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// `self` on top of `lower`.
    pub fn over(self, lower: Overrides) -> Overrides {
        Overrides {
            scenario: self.scenario.or(lower.scenario),
            signal: self.signal.or(lower.signal),
            noise: self.noise.or(lower.noise),
            l: self.l.or(lower.l),
            nbar: self.nbar.or(lower.nbar),
            n: self.n.or(lower.n),
            r0: self.r0.or(lower.r0),
            r1: self.r1.or(lower.r1),
            delta: self.delta.or(lower.delta),
            gamma: self.gamma.or(lower.gamma),
            k0: self.k0.or(lower.k0),
            kbar: self.kbar.or(lower.kbar),
            history_cap: self.history_cap.or(lower.history_cap),
            horizon: self.horizon.or(lower.horizon),
            seed: self.seed.or(lower.seed),
            red: self.red.or(lower.red),
            out: self.out.or(lower.out),
        }
    }

    /// Resolves against the built-in defaults of the selected scenario.
    ///
    /// Unless given, `k̄` is the smallest window whose noise capacity covers
    /// `N̄`, and the noise amplitude `N` equals `N̄`.
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let scenario = self.scenario.unwrap_or(1);
        if !matches!(scenario, 1 | 2) {
            return Err(param(format!("unknown scenario {scenario}; expected 1 or 2")));
        }
        let seed = self.seed.unwrap_or(0);
        let mut cfg = ScenarioConfig::preset(scenario, seed);

        if let Some(family) = self.signal {
            cfg.signal.family = family;
            if matches!(family, SignalFamily::PiecewiseQuadraticRandom | SignalFamily::Polynomial) {
                cfg.signal.r0 = 1.0;
                cfg.signal.r1 = 1.0;
            }
            if family != SignalFamily::Scenario2 && cfg.noise == NoiseConfig::Banded {
                cfg.noise = NoiseConfig::Family(NoiseSpec::new(NoiseFamily::UniformRandom, cfg.nbar, seed));
            }
        }
        if let Some(l) = self.l {
            cfg.signal.l = l;
        }
        if let Some(r0) = self.r0 {
            cfg.signal.r0 = r0;
        }
        if let Some(r1) = self.r1 {
            cfg.signal.r1 = r1;
        }
        if let Some(nbar) = self.nbar {
            cfg.nbar = nbar;
        }
        if let Some(delta) = self.delta {
            cfg.delta = delta;
        }
        if let Some(gamma) = self.gamma {
            cfg.gamma = gamma;
        }
        if let Some(k0) = self.k0 {
            cfg.k0 = k0;
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        if let Some(cap) = self.history_cap {
            cfg.history_cap = cap;
        }
        if let Some(red) = &self.red {
            cfg.red = red.clone();
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }

        let noise_family = self.noise.or(match cfg.noise {
            NoiseConfig::Family(spec) => Some(spec.family),
            NoiseConfig::Banded => None,
        });
        if let Some(family) = noise_family {
            let n = self.n.unwrap_or(cfg.nbar);
            cfg.noise = NoiseConfig::Family(NoiseSpec::new(family, n, seed));
        } else if self.n.is_some() {
            return Err(param("the banded noise of scenario 2 is set through N̄, not N"));
        }

        cfg.kbar = match self.kbar {
            Some(k) => k,
            None => KbarSetting::Samples(CoreParams::window_for_capacity(cfg.signal.l, cfg.delta, cfg.nbar)?),
        };
        Ok(cfg)
    }
}

/// Everything a scenario run produced.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub signal: SampledSignal,
    pub trace: DiffTrace,
    pub red: Vec<Vec<f64>>,
    /// Proposed, unfiltered, then one per baseline.
    pub reports: Vec<ErrorReport>,
    pub core_bound: Option<CoreBoundAudit>,
    pub noise: NoiseAudit,
    pub trace_path: PathBuf,
    pub plot_path: PathBuf,
}

impl ScenarioOutcome {
    /// Any guaranteed, applicable check failed.
    pub fn violated(&self) -> bool {
        let core_bound_failed = self.core_bound.is_some_and(|a| a.violations > 0);
        let proposed_applicable = self.reports.first().is_some_and(ErrorReport::applicable);
        self.reports.iter().any(|r| r.guaranteed && r.violated())
            || (proposed_applicable && (core_bound_failed || !self.noise.ok))
    }
}

/// Runs the proposed differentiator, its unfiltered core and the baselines on
/// the configured signal, verifies each against its bound, and writes
/// `trace.csv`, one `report_<label>.csv` per estimator and `errors.svg`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome> {
    config.validate()?;
    let signal = config.generate_signal()?;
    let core = config.core_params()?;
    let trace = Differentiator::run(core, config.filter_params()?, &signal)?;

    let red: Vec<Vec<f64>> = config
        .red
        .iter()
        .map(|&(l1, l2)| {
            let mut red = Red::new(RedParams::new(l1, l2, config.signal.l, config.delta)?);
            Ok(signal.u.iter().map(|&u| red.step(u)).collect())
        })
        .collect::<Result<_>>()?;

    let df = signal.df.as_deref().expect("synthetic signals carry truth");
    let inputs = config.bound_inputs(df[0].abs());
    let mut reports = vec![verify_run(&signal, &trace, &inputs)?];
    reports.push(verify_estimate(
        "unfiltered",
        &signal,
        &trace.ys,
        &inputs,
        &Criterion::unfiltered(&inputs)?,
    )?);
    for (i, z1) in red.iter().enumerate() {
        reports.push(verify_estimate(
            &format!("red{}", i + 1),
            &signal,
            z1,
            &inputs,
            &Criterion::reference(&inputs)?,
        )?);
    }

    let n = config.noise_bound();
    let core_bound = if inputs.within_capacity() {
        Some(audit_core_bound(&signal, &trace, &core, n)?)
    } else {
        None
    };
    let noise = audit_noise_estimate(&signal, &trace, &core, n);

    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let trace_path = dir.join("trace.csv");
    write_trace_csv(&trace_path, &signal, &trace, &red)?;
    for report in &reports {
        report.write_csv(dir.join(format!("report_{}.csv", report.label)), Precision::RoundTrip)?;
    }
    let plot_path = dir.join("errors.svg");
    let series: Vec<Series<'_>> = reports
        .iter()
        .map(|r| Series {
            label: &r.label,
            values: &r.per_step_error,
        })
        .collect();
    let title = format!("|df - y|, {:?}, N = {n}", config.signal.family);
    let svg = error_plot_svg(&title, config.delta, &series, inputs.bound());
    std::fs::write(&plot_path, svg).map_err(|e| io_err(&plot_path, e))?;

    Ok(ScenarioOutcome {
        signal,
        trace,
        red,
        reports,
        core_bound,
        noise,
        trace_path,
        plot_path,
    })
}

/// Writes `t,u,f,df,ys,y,red1,red2,err_ys,err_y,err_red1,err_red2`, with one
/// `red<i>`/`err_red<i>` pair per baseline. Missing values are empty fields.
pub fn write_trace_csv(path: &Path, signal: &SampledSignal, trace: &DiffTrace, red: &[Vec<f64>]) -> Result<()> {
    let p = Precision::RoundTrip;
    let opt = |v: f64| if v.is_nan() { String::new() } else { p.fmt(v) };
    let mut out = String::from("t,u,f,df,ys,y");
    for i in 1..=red.len() {
        let _ = write!(out, ",red{i}");
    }
    out.push_str(",err_ys,err_y");
    for i in 1..=red.len() {
        let _ = write!(out, ",err_red{i}");
    }
    out.push('\n');
    let f = signal.f.as_deref();
    let df = signal.df.as_deref();
    for k in 0..signal.len() {
        let truth_df = df.map_or(f64::NAN, |d| d[k]);
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            p.fmt(signal.t(k)),
            p.fmt(signal.u[k]),
            f.map_or(String::new(), |f| p.fmt(f[k])),
            opt(truth_df),
            opt(trace.ys[k]),
            p.fmt(trace.y[k]),
        );
        for z in red {
            let _ = write!(out, ",{}", p.fmt(z[k]));
        }
        let _ = write!(
            out,
            ",{},{}",
            opt((truth_df - trace.ys[k]).abs()),
            opt((truth_df - trace.y[k]).abs())
        );
        for z in red {
            let _ = write!(out, ",{}", opt((truth_df - z[k]).abs()));
        }
        out.push('\n');
    }
    std::fs::File::create(path)
        .and_then(|mut file| file.write_all(out.as_bytes()))
        .map_err(|e| io_err(path, e))
}

/// Parameters of a randomized sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub count: usize,
    pub seed: u64,
    pub l: f64,
    pub delta: f64,
    pub gamma: f64,
    pub nbar: f64,
    pub kbar: KbarSetting,
    /// Fixed noise amplitude; otherwise drawn uniformly in `[0, 0.9·N̄]`.
    pub n: Option<f64>,
    /// Fixed `k₀`; otherwise alternating between 0 and 25.
    pub k0: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            count: 200,
            seed: 0,
            l: 1.0,
            delta: 0.01,
            gamma: 1.96,
            nbar: 0.08,
            kbar: KbarSetting::Samples(41),
            n: None,
            k0: None,
            output_dir: None,
        }
    }
}

/// Largest noise amplitude drawn by default, as a fraction of `N̄`.
pub const SWEEP_NOISE_FRACTION: f64 = 0.9;

const SWEEP_NOISES: [NoiseFamily; 3] = [
    NoiseFamily::UniformRandom,
    NoiseFamily::AdversarialSquareWave,
    NoiseFamily::PiecewiseConstantModulated,
];

/// One seeded run of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub seed: u64,
    pub signal: SignalSpec,
    pub noise: NoiseSpec,
    pub k0: u64,
    pub horizon: f64,
    pub report: ErrorReport,
    pub core_bound: Option<CoreBoundAudit>,
    pub noise_audit: NoiseAudit,
    pub trace: DiffTrace,
}

impl SweepRun {
    pub fn applicable(&self) -> bool {
        self.report.applicable()
    }

    pub fn satisfied(&self) -> bool {
        self.report.satisfied()
            && self.core_bound.is_some_and(|a| a.violations == 0)
            && self.noise_audit.ok
    }
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub runs: Vec<SweepRun>,
}

impl SweepSummary {
    pub fn applicable(&self) -> usize {
        self.runs.iter().filter(|r| r.applicable()).count()
    }

    pub fn passed(&self) -> usize {
        self.runs
            .iter()
            .filter(|r| r.applicable() && r.satisfied())
            .count()
    }

    pub fn first_failure(&self) -> Option<&SweepRun> {
        self.runs.iter().find(|r| r.applicable() && !r.satisfied())
    }

    /// Writes `seed,family,N,satisfied,max_err,bound`; `satisfied` is `n/a`
    /// for runs whose hypotheses fail.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("seed,family,N,satisfied,max_err,bound\n");
        for run in &self.runs {
            let status = if !run.applicable() {
                "n/a"
            } else if run.satisfied() {
                "true"
            } else {
                "false"
            };
            let _ = writeln!(
                out,
                "{},{},{},{status},{},{}",
                run.seed,
                run.noise.family.name(),
                run.noise.n,
                run.report.max_error(),
                run.report.bound
            );
        }
        std::fs::write(path, out).map_err(|e| io_err(path, e))
    }
}

/// Builds the signal, noise, `k₀` and horizon of sweep run `index`.
pub fn sweep_case(cfg: &SweepConfig, index: usize) -> Result<(SignalSpec, NoiseSpec, u64, f64)> {
    let seed = cfg.seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = if index % 5 == 4 {
        SignalFamily::Polynomial
    } else {
        SignalFamily::PiecewiseQuadraticRandom
    };
    let signal = SignalSpec::new(family, cfg.l, 1.0, 1.0, rng.random());
    let n = match cfg.n {
        Some(n) => n,
        None => rng.random_range(0.0..=SWEEP_NOISE_FRACTION * cfg.nbar),
    };
    let noise = NoiseSpec::new(SWEEP_NOISES[index % SWEEP_NOISES.len()], n, rng.random());
    let k0 = cfg.k0.unwrap_or(if (index / SWEEP_NOISES.len()).is_multiple_of(2) { 0 } else { 25 });
    let inputs = BoundInputs {
        l: cfg.l,
        n,
        delta: cfg.delta,
        gamma: cfg.gamma,
        k0,
        r1: signal.r1,
        kbar: window_of(cfg.kbar),
    };
    let t = convergence_time(&inputs)?;
    let horizon = (2.0 * t + 2.0).max(6.0);
    Ok((signal, noise, k0, horizon))
}

fn window_of(kbar: KbarSetting) -> WindowLimit {
    match kbar {
        KbarSetting::Samples(n) => WindowLimit::Finite(n),
        KbarSetting::Infinite => WindowLimit::Infinite,
    }
}

fn sweep_one(cfg: &SweepConfig, index: usize) -> Result<SweepRun> {
    let (signal_spec, noise, k0, horizon) = sweep_case(cfg, index)?;
    let signal = generate(&signal_spec, &noise, cfg.delta, horizon)?;
    let core = CoreParams::new(cfg.l, cfg.delta, window_of(cfg.kbar))?;
    let filter = FilterParams::paired(cfg.gamma, cfg.delta, k0, cfg.l)?;
    let trace = Differentiator::run(core, filter, &signal)?;
    let r1 = signal.df.as_ref().expect("synthetic")[0].abs();
    let inputs = BoundInputs {
        l: cfg.l,
        n: noise.n,
        delta: cfg.delta,
        gamma: cfg.gamma,
        k0,
        r1,
        kbar: core.kbar,
    };
    let report = verify_run(&signal, &trace, &inputs)?;
    let core_bound = if inputs.within_capacity() {
        Some(audit_core_bound(&signal, &trace, &core, noise.n)?)
    } else {
        None
    };
    let noise_audit = audit_noise_estimate(&signal, &trace, &core, noise.n);
    Ok(SweepRun {
        seed: cfg.seed.wrapping_add(index as u64),
        signal: signal_spec,
        noise,
        k0,
        horizon,
        report,
        core_bound,
        noise_audit,
        trace,
    })
}

/// Runs `count` seeded cases in parallel; results are ordered by seed.
/// Writes `sweep.csv` when an output directory is configured.
pub fn run_property_sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    if cfg.count == 0 {
        return Err(param("sweep count must be at least 1"));
    }
    FilterParams::paired(cfg.gamma, cfg.delta, 0, cfg.l)?;
    let runs = (0..cfg.count)
        .into_par_iter()
        .map(|i| sweep_one(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let summary = SweepSummary { runs };
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        summary.write_csv(dir.join("sweep.csv"))?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_benchmark() {
        let cfg = Overrides::default().resolve().unwrap();
        assert_eq!(cfg.kbar, KbarSetting::Samples(41));
        assert_eq!(cfg.signal.family, SignalFamily::Scenario1);
        assert_eq!(cfg.noise_bound(), 0.08);
        assert_eq!((cfg.delta, cfg.gamma, cfg.k0), (0.01, 1.96, 0));
        assert_eq!(cfg, ScenarioConfig::scenario1());
        let cfg2 = Overrides {
            scenario: Some(2),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(cfg2.noise, NoiseConfig::Banded);
    }

    #[test]
    fn layering_precedence() {
        let file: Overrides = toml::from_str("gamma = 2.5\nkbar = \"inf\"\nL = 1.0\nhorizon = 8.0\n").unwrap();
        let flags = Overrides {
            gamma: Some(3.0),
            ..Default::default()
        };
        let cfg = flags.over(file).resolve().unwrap();
        assert_eq!(cfg.gamma, 3.0);
        assert_eq!(cfg.kbar, KbarSetting::Infinite);
        assert_eq!(cfg.horizon, 8.0);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(toml::from_str::<Overrides>("gama = 2.0").is_err());
    }

    #[test]
    fn invalid_configs_name_the_invariant() {
        let cfg = Overrides {
            gamma: Some(0.9),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("must exceed L"), "{err}");

        let cfg = Overrides {
            horizon: Some(3.0),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("twice the convergence time"), "{err}");
    }

    #[test]
    fn kbar_parsing() {
        assert_eq!("41".parse::<KbarSetting>().unwrap(), KbarSetting::Samples(41));
        assert_eq!("inf".parse::<KbarSetting>().unwrap(), KbarSetting::Infinite);
        assert!("x".parse::<KbarSetting>().is_err());
    }

    #[test]
    fn sweep_cases_respect_noise_fraction() {
        let cfg = SweepConfig::default();
        for i in 0..30 {
            let (_, noise, k0, horizon) = sweep_case(&cfg, i).unwrap();
            assert!(noise.n <= SWEEP_NOISE_FRACTION * cfg.nbar);
            assert!(k0 == 0 || k0 == 25);
            assert!(horizon >= 6.0);
        }
    }
}
