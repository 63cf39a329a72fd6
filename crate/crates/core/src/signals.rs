//! Test-signal generators.
//!
//! Every generator returns a [`SampledSignal`] on the uniform grid `t_k = kΔ`,
//! `k = 0..=⌊horizon/Δ⌋`, together with the exact ground truth `f(t_k)`,
//! `ḟ(t_k)` and the noise sequence `η_k` that was added. Signals belong to the
//! class of functions with `|f̈| ≤ L` almost everywhere, except where a
//! derivative jump is recorded in [`SampledSignal::kinks`].
//!
//! All generators are pure functions of their arguments and seeds.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, param, Result};

/// Length of each constant-acceleration segment of the random family, in seconds.
pub const SEGMENT_SECONDS: f64 = 0.5;

/// Time of the derivative jump in the first benchmark scenario.
pub const SCENARIO1_KINK_TIME: f64 = 10.0;
/// Size of that jump.
pub const SCENARIO1_KINK_JUMP: f64 = 0.5;

/// Samples per sawtooth period of the modulated noise families.
const SAWTOOTH_PERIOD: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalFamily {
    /// `t²/2 + t + 0.5(t−10)·𝟙[t≥10]`.
    Scenario1,
    /// `(t²/2 + t + cos t)/2`.
    Scenario2,
    /// Twice-integrated seeded piecewise-constant acceleration.
    PiecewiseQuadraticRandom,
    /// Seeded `c0 + c1·t + a·t²/2`.
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub family: SignalFamily,
    /// Bound on `|f̈|`.
    pub l: f64,
    /// Bound on `|f(0)|`.
    pub r0: f64,
    /// Bound on `|ḟ(0)|`.
    pub r1: f64,
    pub seed: u64,
}

impl SignalSpec {
    pub fn new(family: SignalFamily, l: f64, r0: f64, r1: f64, seed: u64) -> Self {
        Self {
            family,
            l,
            r0,
            r1,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    /// i.i.d. uniform on `[−N, N]`.
    UniformRandom,
    /// Sawtooth `ν·(k mod 10)/10` whose level `ν ∈ [−N, N]` is redrawn every second.
    PiecewiseConstantModulated,
    Zero,
    /// `N·(−1)^k`.
    AdversarialSquareWave,
}

impl NoiseFamily {
    pub fn name(self) -> &'static str {
        match self {
            NoiseFamily::UniformRandom => "uniform",
            NoiseFamily::PiecewiseConstantModulated => "modulated",
            NoiseFamily::Zero => "zero",
            NoiseFamily::AdversarialSquareWave => "square",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    /// Amplitude bound `N`.
    pub n: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, n: f64, seed: u64) -> Self {
        Self { family, n, seed }
    }

    pub fn zero() -> Self {
        Self::new(NoiseFamily::Zero, 0.0, 0)
    }
}

/// A jump of the true derivative at sample `index`. The signal leaves the
/// bounded-curvature class there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kink {
    pub index: usize,
    pub jump: f64,
}

/// Uniformly sampled signal `u_k = f(kΔ) + η_k`, with ground truth when synthetic.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub delta: f64,
    pub u: Vec<f64>,
    pub f: Option<Vec<f64>>,
    pub df: Option<Vec<f64>>,
    pub noise: Option<Vec<f64>>,
    pub kinks: Vec<Kink>,
}

impl SampledSignal {
    /// Wraps raw measurements without ground truth.
    pub fn from_samples(delta: f64, u: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(param(format!("sampling period must be positive, got {delta}")));
        }
        Ok(Self {
            delta,
            u,
            f: None,
            df: None,
            noise: None,
            kinks: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.delta
    }

    /// Largest `|η_k|` actually present, when the noise is known.
    pub fn noise_amplitude(&self) -> Option<f64> {
        self.noise
            .as_ref()
            .map(|eta| eta.iter().fold(0.0_f64, |m, e| m.max(e.abs())))
    }

    /// Largest `|u_k|`; sets the scale of rounding error in difference quotients.
    pub fn max_abs_sample(&self) -> f64 {
        self.u.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Writes `t,u,f,df` rows. Missing ground truth is written as empty fields.
    pub fn write_csv(&self, path: impl AsRef<Path>, precision: Precision) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("t,u,f,df\n");
        for k in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                precision.fmt(self.t(k)),
                precision.fmt(self.u[k]),
                fmt_opt(precision, self.f.as_deref(), k),
                fmt_opt(precision, self.df.as_deref(), k),
            );
        }
        std::fs::File::create(path)
            .and_then(|mut file| file.write_all(out.as_bytes()))
            .map_err(|e| io_err(path, e))
    }
}

/// Number formatting for CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    /// Shortest representation that round-trips the `f64` exactly.
    #[default]
    RoundTrip,
    /// Scientific notation with this many significant digits (at least 6).
    Significant(usize),
}

impl Precision {
    pub fn fmt(self, x: f64) -> String {
        match self {
            Precision::RoundTrip => format!("{x}"),
            Precision::Significant(digits) => {
                let digits = digits.max(6);
                format!("{:.*e}", digits - 1, x)
            }
        }
    }
}

fn fmt_opt(precision: Precision, column: Option<&[f64]>, k: usize) -> String {
    column.map(|c| precision.fmt(c[k])).unwrap_or_default()
}

/// Number of grid points covering `[0, horizon]`.
pub fn grid_len(delta: f64, horizon: f64) -> Result<usize> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(param(format!("sampling period must be positive, got {delta}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(param(format!("horizon must be positive, got {horizon}")));
    }
    if horizon < delta {
        return Err(param(format!(
            "horizon {horizon} is shorter than one sampling period {delta}"
        )));
    }
    // Guard against 20.0/0.01 = 1999.9999999999998.
    let steps = (horizon / delta * (1.0 + 1e-12)).floor() as usize;
    Ok(steps + 1)
}

fn check_amplitude(name: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(param(format!("{name} must be finite and non-negative, got {value}")))
    }
}

fn symmetric(rng: &mut ChaCha8Rng, bound: f64) -> f64 {
    if bound == 0.0 {
        0.0
    } else {
        rng.random_range(-bound..=bound)
    }
}

/// Noise sequence `η_0..η_{len-1}` for the given family. `|η_k| ≤ N` holds exactly.
pub fn generate_noise(spec: &NoiseSpec, delta: f64, len: usize) -> Result<Vec<f64>> {
    check_amplitude("noise amplitude", spec.n)?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = match spec.family {
        NoiseFamily::Zero => vec![0.0; len],
        NoiseFamily::UniformRandom => (0..len).map(|_| symmetric(&mut rng, n)).collect(),
        NoiseFamily::AdversarialSquareWave => (0..len)
            .map(|k| if k % 2 == 0 { n } else { -n })
            .collect(),
        NoiseFamily::PiecewiseConstantModulated => {
            let per_level = ((1.0 / delta).round() as usize).max(1);
            let mut level = 0.0;
            (0..len)
                .map(|k| {
                    if k % per_level == 0 {
                        level = symmetric(&mut rng, n);
                    }
                    level * sawtooth(k)
                })
                .collect()
        }
    };
    Ok(noise)
}

/// `mod(t, 10Δ)/(10Δ)` evaluated at `t = kΔ`, in exact grid arithmetic.
fn sawtooth(k: usize) -> f64 {
    (k % SAWTOOTH_PERIOD) as f64 / SAWTOOTH_PERIOD as f64
}

/// Truth `(f, ḟ)` on the grid for a signal spec.
fn truth(spec: &SignalSpec, delta: f64, len: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<Kink>)> {
    check_amplitude("L", spec.l)?;
    check_amplitude("R0", spec.r0)?;
    check_amplitude("R1", spec.r1)?;
    let times = (0..len).map(|k| k as f64 * delta);
    let mut kinks = Vec::new();
    let (f, df): (Vec<f64>, Vec<f64>) = match spec.family {
        SignalFamily::Scenario1 => {
            if let Some(index) = (0..len).find(|&k| k as f64 * delta >= SCENARIO1_KINK_TIME) {
                if index > 0 {
                    kinks.push(Kink {
                        index,
                        jump: SCENARIO1_KINK_JUMP,
                    });
                }
            }
            times.map(scenario1_truth).unzip()
        }
        SignalFamily::Scenario2 => times.map(scenario2_truth).unzip(),
        SignalFamily::Polynomial => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let c0 = symmetric(&mut rng, spec.r0);
            let c1 = symmetric(&mut rng, spec.r1);
            let a = symmetric(&mut rng, spec.l);
            times
                .map(|t| (c0 + c1 * t + 0.5 * a * t * t, c1 + a * t))
                .unzip()
        }
        SignalFamily::PiecewiseQuadraticRandom => {
            let horizon = (len - 1) as f64 * delta;
            let path = PiecewiseQuadratic::random(spec, horizon);
            times.map(|t| path.eval(t)).unzip()
        }
    };
    Ok((f, df, kinks))
}

fn scenario1_truth(t: f64) -> (f64, f64) {
    if t >= SCENARIO1_KINK_TIME {
        (
            0.5 * t * t + t + SCENARIO1_KINK_JUMP * (t - SCENARIO1_KINK_TIME),
            t + 1.0 + SCENARIO1_KINK_JUMP,
        )
    } else {
        (0.5 * t * t + t, t + 1.0)
    }
}

fn scenario2_truth(t: f64) -> (f64, f64) {
    (
        (0.5 * t * t + t + t.cos()) / 2.0,
        (t + 1.0 - t.sin()) / 2.0,
    )
}

/// Exact closed form of a twice-integrated piecewise-constant acceleration.
#[derive(Debug, Clone)]
struct PiecewiseQuadratic {
    /// `(f, ḟ, f̈)` at the start of each segment.
    segments: Vec<(f64, f64, f64)>,
}

impl PiecewiseQuadratic {
    fn random(spec: &SignalSpec, horizon: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut f = symmetric(&mut rng, spec.r0);
        let mut df = symmetric(&mut rng, spec.r1);
        let count = (horizon / SEGMENT_SECONDS).floor() as usize + 1;
        let mut segments = Vec::with_capacity(count);
        for _ in 0..count {
            // A quarter of the segments sit on the curvature bound itself.
            let acc = if spec.l > 0.0 && rng.random_bool(0.25) {
                if rng.random_bool(0.5) {
                    spec.l
                } else {
                    -spec.l
                }
            } else {
                symmetric(&mut rng, spec.l)
            };
            segments.push((f, df, acc));
            let h = SEGMENT_SECONDS;
            f += df * h + 0.5 * acc * h * h;
            df += acc * h;
        }
        Self { segments }
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        let i = ((t / SEGMENT_SECONDS).floor() as usize).min(self.segments.len() - 1);
        let (f0, df0, acc) = self.segments[i];
        let tau = t - i as f64 * SEGMENT_SECONDS;
        (f0 + df0 * tau + 0.5 * acc * tau * tau, df0 + acc * tau)
    }
}

/// Samples `spec` plus `noise` on `[0, horizon]`.
pub fn generate(spec: &SignalSpec, noise: &NoiseSpec, delta: f64, horizon: f64) -> Result<SampledSignal> {
    let len = grid_len(delta, horizon)?;
    let (f, df, kinks) = truth(spec, delta, len)?;
    let eta = generate_noise(noise, delta, len)?;
    Ok(assemble(delta, f, df, eta, kinks))
}

fn assemble(delta: f64, f: Vec<f64>, df: Vec<f64>, eta: Vec<f64>, kinks: Vec<Kink>) -> SampledSignal {
    let u = f.iter().zip(&eta).map(|(f, e)| f + e).collect();
    SampledSignal {
        delta,
        u,
        f: Some(f),
        df: Some(df),
        noise: Some(eta),
        kinks,
    }
}

/// First benchmark: `t²/2 + t` with a derivative jump of 0.5 at t = 10, plus
/// i.i.d. uniform noise on `[−N, N]`.
pub fn generate_scenario1(delta: f64, horizon: f64, n: f64, seed: u64) -> Result<SampledSignal> {
    let spec = SignalSpec::new(SignalFamily::Scenario1, 1.0, 0.0, 1.0, seed);
    let noise = NoiseSpec::new(NoiseFamily::UniformRandom, n, seed);
    generate(&spec, &noise, delta, horizon)
}

/// Noise level of the second benchmark at time `t`: `0.1N̄`, `N̄` and `2N̄` on
/// `t ≤ 20/3`, `20/3 < t ≤ 40/3` and `t > 40/3`.
pub fn scenario2_level(t: f64, nbar: f64) -> f64 {
    if t <= 20.0 / 3.0 {
        0.1 * nbar
    } else if t <= 40.0 / 3.0 {
        nbar
    } else {
        2.0 * nbar
    }
}

/// Second benchmark: `(t²/2 + t + cos t)/2` with the three-band sawtooth noise.
/// The last band exceeds `N̄` on purpose.
pub fn generate_scenario2(delta: f64, horizon: f64, nbar: f64, seed: u64) -> Result<SampledSignal> {
    check_amplitude("N̄", nbar)?;
    let spec = SignalSpec::new(SignalFamily::Scenario2, 1.0, 0.5, 0.5, seed);
    let len = grid_len(delta, horizon)?;
    let (f, df, kinks) = truth(&spec, delta, len)?;
    let eta = (0..len)
        .map(|k| scenario2_level(k as f64 * delta, nbar) * sawtooth(k))
        .collect();
    Ok(assemble(delta, f, df, eta, kinks))
}

/// Random member of the bounded-curvature class. Accepts the
/// `PiecewiseQuadraticRandom` and `Polynomial` families.
pub fn generate_random_fl(spec: &SignalSpec, noise: &NoiseSpec, delta: f64, horizon: f64) -> Result<SampledSignal> {
    match spec.family {
        SignalFamily::PiecewiseQuadraticRandom | SignalFamily::Polynomial => {
            generate(spec, noise, delta, horizon)
        }
        other => Err(param(format!("{other:?} is not a randomized family"))),
    }
}
