//! Error bounds, convergence times and empirical verification of traces.
//!
//! The bounds here are exact-arithmetic statements. Empirical checks compare
//! against them with a floating-point allowance of [`ULP_SLACK`] units in the
//! last place of the quantities that enter the estimate: the samples `u_k`,
//! whose rounding is amplified by `1/Δ` in any difference quotient, and the
//! reference derivative itself.
//!
//! Worst-case errors are suprema over whole signal classes and infinite time
//! tails. Reports approximate both with the finite traces they are given, so
//! every verdict here is empirical.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::adaptive::{core_error_bound, CoreParams, WindowLimit};
use crate::differentiator::DiffTrace;
use crate::error::{io_err, param, Result};
use crate::filter::{ulp, verify_implicit};
use crate::signals::{Precision, SampledSignal};

/// Units in the last place tolerated by every bound check.
pub const ULP_SLACK: f64 = 4.0;

/// Steady-state worst-case error `2√(2NL) + LΔ/2`.
pub fn theorem2_bound(l: f64, n: f64, delta: f64) -> f64 {
    2.0 * (2.0 * n * l).sqrt() + l * delta / 2.0
}

/// Parameters entering the worst-case bound and convergence time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub l: f64,
    /// Noise amplitude bound `N`.
    pub n: f64,
    pub delta: f64,
    pub gamma: f64,
    pub k0: u64,
    /// Bound on `|ḟ(0)|`.
    pub r1: f64,
    pub kbar: WindowLimit,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(param(format!("L must be positive, got {}", self.l)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(param(format!("Δ must be positive, got {}", self.delta)));
        }
        if !(self.n >= 0.0 && self.n.is_finite()) {
            return Err(param(format!("N must be non-negative, got {}", self.n)));
        }
        if !(self.r1 >= 0.0 && self.r1.is_finite()) {
            return Err(param(format!("R1 must be non-negative, got {}", self.r1)));
        }
        if !(self.gamma > self.l && self.gamma.is_finite()) {
            return Err(param(format!(
                "γ = {} must exceed L = {}",
                self.gamma, self.l
            )));
        }
        Ok(())
    }

    pub fn core_params(&self) -> Result<CoreParams> {
        CoreParams::new(self.l, self.delta, self.kbar)
    }

    /// `N̄ = LΔ²(k̄−1)²/2`.
    pub fn noise_capacity(&self) -> f64 {
        self.core_params()
            .map(|p| p.noise_capacity())
            .unwrap_or(f64::NAN)
    }

    /// Whether the noise bound fits inside the window capacity.
    pub fn within_capacity(&self) -> bool {
        self.n <= self.noise_capacity()
    }

    pub fn bound(&self) -> f64 {
        theorem2_bound(self.l, self.n, self.delta)
    }

    pub fn with_r1(mut self, r1: f64) -> Self {
        self.r1 = r1;
        self
    }

    pub fn with_n(mut self, n: f64) -> Self {
        self.n = n;
        self
    }

    pub fn with_k0(mut self, k0: u64) -> Self {
        self.k0 = k0;
        self
    }
}

/// Time after which the worst-case bound holds.
///
/// With `k₀ = 0`: `2√(2N/L) + R₁/(γ−L) + 3Δ(γ−L/2)/(γ−L)`.
/// With `k₀ > 0`: `k₀Δ` if `N ≤ L(Δk₀)²/2`, otherwise
/// `2√(2N/L) + (2N/(Δk₀) − γΔk₀)/(γ−L) + 3Δ(γ−L/2)/(γ−L)`.
pub fn convergence_time(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let BoundInputs {
        l,
        n,
        delta,
        gamma,
        k0,
        r1,
        ..
    } = *inputs;
    let margin = gamma - l;
    let settle = 3.0 * delta * (gamma - l / 2.0) / margin;
    let noise = 2.0 * (2.0 * n / l).sqrt();
    if k0 == 0 {
        return Ok(noise + r1 / margin + settle);
    }
    let t0 = delta * k0 as f64;
    if n <= l * t0 * t0 / 2.0 {
        Ok(t0)
    } else {
        Ok(noise + (2.0 * n / t0 - gamma * t0) / margin + settle)
    }
}

/// Reverse running maximum: `out[k] = max_{ℓ ≥ k} errors[ℓ]`.
pub fn sup_error_from(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.is_empty() {
        return Err(param("empty error trace"));
    }
    let mut out = vec![0.0; errors.len()];
    let mut running = f64::NEG_INFINITY;
    for (slot, &e) in out.iter_mut().zip(errors).rev() {
        running = running.max(e);
        *slot = running;
    }
    Ok(out)
}

/// `max_{k ≥ from_k} |clean_k − noisy_k|` between runs of the same
/// differentiator on `f` and on `f + η`.
pub fn empirical_robustness(clean: &[f64], noisy: &[f64], from_k: usize) -> Result<f64> {
    if clean.len() != noisy.len() {
        return Err(param(format!(
            "trace lengths differ: {} vs {}",
            clean.len(),
            noisy.len()
        )));
    }
    Ok(clean
        .iter()
        .zip(noisy)
        .skip(from_k)
        .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs())))
}

/// Floating-point allowance for comparing a derivative estimate on `signal`
/// against an exact-arithmetic bound.
pub fn derivative_slack(signal: &SampledSignal) -> f64 {
    let df_scale = signal
        .df
        .as_ref()
        .map(|df| df.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
        .unwrap_or(0.0);
    ULP_SLACK * (ulp(signal.max_abs_sample()) / signal.delta + ulp(df_scale))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Satisfied,
    Violated,
    /// The hypotheses of the bound do not hold for this run.
    NotApplicable(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::NotApplicable(_) => "not-applicable",
        }
    }
}

/// What an estimate is checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criterion {
    /// Error bound that must hold after `from_time`.
    pub bound: f64,
    pub from_time: f64,
    /// Time allowed for re-entering the bound after a derivative jump of
    /// size `j` is `recovery_time(j)`; stored as the inputs to that function.
    pub recovery: RecoveryRule,
    /// Whether the bound is a guarantee for this estimator (false for baselines
    /// checked against the same numbers for comparison).
    pub guaranteed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecoveryRule {
    /// Convergence time with `R₁` equal to the jump size and `k₀ = 0`.
    ConvergenceTime(BoundInputs),
    /// A fixed allowance in seconds.
    Fixed(f64),
}

impl RecoveryRule {
    pub fn allowance(&self, jump: f64) -> Result<f64> {
        match *self {
            RecoveryRule::ConvergenceTime(inputs) => {
                convergence_time(&inputs.with_r1(jump.abs()).with_k0(0))
            }
            RecoveryRule::Fixed(t) => Ok(t),
        }
    }
}

impl Criterion {
    /// Bound and convergence time of the filtered differentiator.
    pub fn filtered(inputs: &BoundInputs) -> Result<Self> {
        Ok(Self {
            bound: inputs.bound(),
            from_time: convergence_time(inputs)?,
            recovery: RecoveryRule::ConvergenceTime(*inputs),
            guaranteed: true,
        })
    }

    /// Steady branch of the per-sample bound of the unfiltered core, which
    /// applies from `kΔ ≥ √(2N/L)`.
    pub fn unfiltered(inputs: &BoundInputs) -> Result<Self> {
        inputs.validate()?;
        Ok(Self {
            bound: inputs.bound(),
            from_time: (2.0 * inputs.n / inputs.l).sqrt(),
            recovery: RecoveryRule::ConvergenceTime(*inputs),
            guaranteed: true,
        })
    }

    /// Same numbers as [`Criterion::filtered`], for comparison only.
    pub fn reference(inputs: &BoundInputs) -> Result<Self> {
        Ok(Self {
            guaranteed: false,
            ..Self::filtered(inputs)?
        })
    }
}

/// Re-convergence after a derivative jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recovery {
    pub kink_index: usize,
    pub jump: f64,
    /// Allowed re-convergence time, seconds.
    pub allowed: f64,
    /// Time after the jump from which the error stays inside the bound until
    /// the next jump or the end of the trace; `None` if it never does.
    pub observed: Option<f64>,
}

impl Recovery {
    pub fn within_allowance(&self) -> bool {
        self.observed.is_some_and(|t| t <= self.allowed)
    }
}

/// Output-increment audit of a filtered trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementAudit {
    pub max_increment: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub label: String,
    pub delta: f64,
    /// `|ḟ(kΔ) − y_k|`; `NaN` where the estimator has no output.
    pub per_step_error: Vec<f64>,
    /// Reverse running max of the checked errors; steps without output, or
    /// within `k̄` samples plus the recovery allowance after a derivative
    /// jump, count as zero.
    pub sup_from: Vec<f64>,
    pub checked: Vec<bool>,
    pub bound: f64,
    /// Convergence time, seconds.
    pub tconv: f64,
    pub start_k: usize,
    pub first_k_within_bound: Option<usize>,
    /// Trace length in seconds.
    pub horizon: f64,
    /// Floating-point allowance applied to every comparison.
    pub slack: f64,
    pub guaranteed: bool,
    pub verdict: Verdict,
    pub recoveries: Vec<Recovery>,
    pub increments: Option<IncrementAudit>,
    /// Steps at which the implicit-update relation failed.
    pub implicit_failures: Option<usize>,
}

impl ErrorReport {
    /// Largest checked error from the convergence time on.
    pub fn max_error(&self) -> f64 {
        self.sup_from.get(self.start_k).copied().unwrap_or(0.0)
    }

    pub fn applicable(&self) -> bool {
        !matches!(self.verdict, Verdict::NotApplicable(_))
    }

    /// Bound satisfied and every audit clean.
    pub fn satisfied(&self) -> bool {
        self.verdict == Verdict::Satisfied
            && self.increments.is_none_or(|a| a.ok)
            && self.implicit_failures.is_none_or(|n| n == 0)
    }

    /// Applicable and failed: the case that should fail a run.
    pub fn violated(&self) -> bool {
        self.applicable() && !self.satisfied()
    }

    pub fn within(&self, k: usize) -> bool {
        self.per_step_error[k] <= self.bound + self.slack
    }

    pub fn summary(&self) -> String {
        let mut line = format!(
            "{}: {} (max error {:.6} from t = {:.4} s, bound {:.6}, horizon {:.2} s",
            self.label,
            self.verdict.label(),
            self.max_error(),
            self.tconv,
            self.bound,
            self.horizon,
        );
        if let Some(inc) = self.increments {
            let _ = write!(line, ", max increment {:.6} ≤ {:.6}", inc.max_increment, inc.bound);
        }
        if let Some(n) = self.implicit_failures {
            let _ = write!(line, ", implicit failures {n}");
        }
        for r in &self.recoveries {
            match r.observed {
                Some(t) => {
                    let _ = write!(line, ", recovery after jump {:.3}: {:.3} s (allowed {:.3} s)", r.jump, t, r.allowed);
                }
                None => {
                    let _ = write!(line, ", no recovery after jump {:.3}", r.jump);
                }
            }
        }
        if !self.guaranteed {
            line.push_str(", reference only");
        }
        line.push(')');
        if let Verdict::NotApplicable(why) = &self.verdict {
            let _ = write!(line, " [{why}]");
        }
        line
    }

    /// Writes `k,t,err,sup_err,bound,within`.
    pub fn write_csv(&self, path: impl AsRef<Path>, precision: Precision) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("k,t,err,sup_err,bound,within\n");
        for k in 0..self.per_step_error.len() {
            let err = self.per_step_error[k];
            let _ = writeln!(
                out,
                "{k},{},{},{},{},{}",
                precision.fmt(k as f64 * self.delta),
                if err.is_nan() { String::new() } else { precision.fmt(err) },
                precision.fmt(self.sup_from[k]),
                precision.fmt(self.bound),
                u8::from(!err.is_nan() && self.within(k)),
            );
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| io_err(path, e))
    }
}

fn ground_truth(signal: &SampledSignal) -> Result<&[f64]> {
    signal
        .df
        .as_deref()
        .ok_or_else(|| param("signal carries no ground-truth derivative"))
}

/// Checks one estimate sequence against `criterion`.
///
/// Steps from each recorded derivative jump until `k̄` samples plus the
/// recovery allowance have passed are left out of the bound check. How fast
/// the error re-enters the bound is reported per jump as a [`Recovery`],
/// separately from the verdict.
pub fn verify_estimate(
    label: &str,
    signal: &SampledSignal,
    estimate: &[f64],
    inputs: &BoundInputs,
    criterion: &Criterion,
) -> Result<ErrorReport> {
    inputs.validate()?;
    let df = ground_truth(signal)?;
    if estimate.len() != signal.len() {
        return Err(param(format!(
            "trace has {} steps but the signal has {}",
            estimate.len(),
            signal.len()
        )));
    }
    let len = signal.len();
    let delta = signal.delta;
    let horizon = (len - 1) as f64 * delta;
    let slack = derivative_slack(signal);
    let bound = criterion.bound;

    let per_step_error: Vec<f64> = df
        .iter()
        .zip(estimate)
        .map(|(d, y)| (d - y).abs())
        .collect();
    let mut checked: Vec<bool> = per_step_error.iter().map(|e| !e.is_nan()).collect();

    let mut recoveries = Vec::new();
    let mut kinks = signal.kinks.clone();
    kinks.sort_by_key(|k| k.index);
    for (i, kink) in kinks.iter().enumerate() {
        let allowed = criterion.recovery.allowance(kink.jump)?;
        let segment_end = kinks.get(i + 1).map_or(len, |next| next.index);
        // The core keeps differencing across the jump for up to k̄ samples;
        // the convergence clock restarts once its window is clear.
        let end = match inputs.kbar {
            WindowLimit::Finite(kbar) => kink.index + kbar + (allowed / delta).ceil() as usize,
            WindowLimit::Infinite => segment_end,
        }
        .min(len);
        checked[kink.index..end].iter_mut().for_each(|c| *c = false);
        // first step after which every error up to segment_end stays in bound
        let mut first_ok = None;
        for k in (kink.index..segment_end).rev() {
            let e = per_step_error[k];
            if e.is_nan() || e <= bound + slack {
                first_ok = Some(k);
            } else {
                break;
            }
        }
        recoveries.push(Recovery {
            kink_index: kink.index,
            jump: kink.jump,
            allowed,
            observed: first_ok.map(|k| (k - kink.index) as f64 * delta),
        });
    }

    let masked: Vec<f64> = per_step_error
        .iter()
        .zip(&checked)
        .map(|(&e, &c)| if c { e } else { 0.0 })
        .collect();
    let sup_from = sup_error_from(&masked)?;
    let tconv = criterion.from_time;
    let start_k = ((tconv / delta) * (1.0 - 1e-12)).ceil() as usize;
    let first_k_within_bound = sup_from.iter().position(|&s| s <= bound + slack);

    let verdict = if let Some(reason) = inapplicable(signal, inputs, tconv, horizon) {
        Verdict::NotApplicable(reason)
    } else if start_k >= len {
        Verdict::NotApplicable(format!("trace ends before t = {tconv}"))
    } else if sup_from[start_k] <= bound + slack {
        Verdict::Satisfied
    } else {
        Verdict::Violated
    };

    Ok(ErrorReport {
        label: label.to_string(),
        delta,
        per_step_error,
        sup_from,
        checked,
        bound,
        tconv,
        start_k,
        first_k_within_bound,
        horizon,
        slack,
        guaranteed: criterion.guaranteed,
        verdict,
        recoveries,
        increments: None,
        implicit_failures: None,
    })
}

fn inapplicable(signal: &SampledSignal, inputs: &BoundInputs, tconv: f64, horizon: f64) -> Option<String> {
    let capacity = inputs.noise_capacity();
    if !inputs.within_capacity() {
        return Some(format!(
            "noise bound N = {} exceeds window capacity N̄ = {capacity}",
            inputs.n
        ));
    }
    if let Some(noise) = &signal.noise {
        if let Some(k) = noise.iter().position(|e| e.abs() > inputs.n) {
            return Some(format!(
                "|η| exceeds N = {} from t = {:.4} s",
                inputs.n,
                signal.t(k)
            ));
        }
    }
    if horizon < 2.0 * tconv {
        return Some(format!(
            "horizon {horizon} s is shorter than twice the convergence time {tconv} s"
        ));
    }
    None
}

/// Full verification of a run of the filtered differentiator: the worst-case
/// bound from the convergence time on, the output-increment bound
/// `|y_k − y_{k−1}| ≤ γΔ` for `k > k₀`, and the implicit-update relation at
/// every step past `k₀`.
pub fn verify_run(signal: &SampledSignal, trace: &DiffTrace, inputs: &BoundInputs) -> Result<ErrorReport> {
    let criterion = Criterion::filtered(inputs)?;
    let mut report = verify_estimate("proposed", signal, &trace.y, inputs, &criterion)?;
    let (increments, implicit_failures) = audit_filter(trace, inputs);
    report.increments = Some(increments);
    report.implicit_failures = Some(implicit_failures);
    Ok(report)
}

fn audit_filter(trace: &DiffTrace, inputs: &BoundInputs) -> (IncrementAudit, usize) {
    let gd = inputs.gamma * inputs.delta;
    let mut max_increment: f64 = 0.0;
    let mut ok = true;
    let mut failures = 0;
    let first = (inputs.k0 as usize + 1).max(1);
    for k in first..trace.len() {
        let (y, prev) = (trace.y[k], trace.y[k - 1]);
        let inc = (y - prev).abs();
        max_increment = max_increment.max(inc);
        if inc > gd + ULP_SLACK * ulp(y.abs().max(prev.abs())) {
            ok = false;
        }
        if !verify_implicit(y, prev, trace.ys[k], gd) {
            failures += 1;
        }
    }
    (
        IncrementAudit {
            max_increment,
            bound: gd,
            ok,
        },
        failures,
    )
}

/// Per-sample check of the core output against [`core_error_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreBoundAudit {
    pub checked: usize,
    pub violations: usize,
    /// Largest `|y_{s,k} − ḟ(kΔ)| − bound_k`; negative when all pass.
    pub worst_margin: f64,
    pub first_violation: Option<usize>,
}

/// Checks `|y_{s,k} − ḟ(kΔ)| ≤ core_error_bound(k, N)` for every `k ≥ 1`.
///
/// Steps whose difference window can reach back across a derivative jump
/// are skipped.
pub fn audit_core_bound(signal: &SampledSignal, trace: &DiffTrace, params: &CoreParams, n: f64) -> Result<CoreBoundAudit> {
    let df = ground_truth(signal)?;
    if trace.len() != signal.len() {
        return Err(param("trace and signal lengths differ"));
    }
    let slack = derivative_slack(signal);
    let tainted = near_kink(signal, params);
    let mut audit = CoreBoundAudit {
        checked: 0,
        violations: 0,
        worst_margin: f64::NEG_INFINITY,
        first_violation: None,
    };
    for k in 1..signal.len() {
        if tainted(k) {
            continue;
        }
        let bound = core_error_bound(k as u64, n, params)?;
        let margin = (trace.ys[k] - df[k]).abs() - bound;
        audit.checked += 1;
        audit.worst_margin = audit.worst_margin.max(margin);
        if margin > slack {
            audit.violations += 1;
            audit.first_violation.get_or_insert(k);
        }
    }
    Ok(audit)
}

/// Checks `N̂_k ≤ N` along a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseAudit {
    pub max_estimate: f64,
    /// Step at which `max_estimate` occurred.
    pub argmax: usize,
    pub ok: bool,
}

/// Steps whose difference window reaches back across a derivative jump.
fn near_kink<'a>(signal: &'a SampledSignal, params: &CoreParams) -> impl Fn(usize) -> bool + 'a {
    let reach = match params.kbar {
        WindowLimit::Finite(kbar) => kbar,
        WindowLimit::Infinite => usize::MAX,
    };
    move |k| {
        signal
            .kinks
            .iter()
            .any(|kink| k >= kink.index && k - kink.index <= reach)
    }
}

/// Checks `N̂_k ≤ N` on every step whose window lies inside the
/// bounded-curvature part of the signal.
pub fn audit_noise_estimate(signal: &SampledSignal, trace: &DiffTrace, params: &CoreParams, n: f64) -> NoiseAudit {
    // Q_{k,ℓ,j} combines three samples; allow a few ulps of each.
    let slack = 2.0 * ULP_SLACK * ulp(signal.max_abs_sample());
    let tainted = near_kink(signal, params);
    let (argmax, max_estimate) = trace
        .nhat
        .iter()
        .enumerate()
        .filter(|&(k, _)| !tainted(k))
        .fold((0, 0.0_f64), |best, (k, &x)| if x > best.1 { (k, x) } else { best });
    NoiseAudit {
        max_estimate,
        argmax,
        ok: max_estimate <= n + slack,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::differentiator::Differentiator;
    use crate::filter::FilterParams;
    use crate::signals::{generate, generate_scenario1, generate_scenario2, NoiseSpec, SignalFamily, SignalSpec};
    use crate::error::Error;
    use approx::assert_abs_diff_eq;

    fn benchmark_inputs(k0: u64) -> BoundInputs {
        BoundInputs {
            l: 1.0,
            n: 0.08,
            delta: 0.01,
            gamma: 1.96,
            k0,
            r1: 1.0,
            kbar: WindowLimit::Finite(41),
        }
    }

    #[test]
    fn theorem2_values() {
        assert_eq!(theorem2_bound(1.0, 0.0, 0.01), 0.005);
        assert_abs_diff_eq!(theorem2_bound(1.0, 0.08, 0.01), 0.805, epsilon = 1e-12);
        let a = theorem2_bound(0.7, 0.3, 0.01) - 0.7 * 0.01 / 2.0;
        let b = theorem2_bound(2.8, 0.075, 0.01) - 2.8 * 0.01 / 2.0;
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn convergence_time_benchmark_value() {
        let t = convergence_time(&benchmark_inputs(0)).unwrap();
        assert_eq!(format!("{t:.4}"), "1.8873");
        // 0.8 + 1/0.96 + 0.03·1.46/0.96
        assert_abs_diff_eq!(t, 0.8 + 1.0 / 0.96 + 0.03 * 1.46 / 0.96, epsilon = 1e-12);
    }

    #[test]
    fn convergence_time_with_late_initialization() {
        // N = 0.08 > L(Δk₀)²/2 = 0.03125: second branch
        let t = convergence_time(&benchmark_inputs(25)).unwrap();
        assert_abs_diff_eq!(t, 0.8 + 0.15 / 0.96 + 0.03 * 1.46 / 0.96, epsilon = 1e-12);
        // small noise: first branch is exactly k₀Δ
        let t = convergence_time(&benchmark_inputs(25).with_n(0.03)).unwrap();
        assert_eq!(t, 25.0 * 0.01);
    }

    #[test]
    fn convergence_time_residual() {
        let inputs = benchmark_inputs(0).with_n(0.0).with_r1(0.0);
        let t = convergence_time(&inputs).unwrap();
        assert_abs_diff_eq!(t, 3.0 * 0.01 * (1.96 - 0.5) / 0.96, epsilon = 1e-15);
    }

    #[test]
    fn convergence_time_branch_gap_is_settling_slack() {
        let base = benchmark_inputs(25);
        let n_star = base.l * (base.delta * 25.0).powi(2) / 2.0;
        let settle = 3.0 * base.delta * (base.gamma - base.l / 2.0) / (base.gamma - base.l);
        let at = convergence_time(&base.with_n(n_star)).unwrap();
        let above = convergence_time(&base.with_n(n_star * (1.0 + 1e-12))).unwrap();
        assert!((above - at).abs() <= settle + 1e-9);
    }

    #[test]
    fn convergence_time_rejects_small_gamma() {
        let mut inputs = benchmark_inputs(0);
        inputs.gamma = 1.0;
        assert!(matches!(convergence_time(&inputs), Err(Error::Parameter(_))));
    }

    #[test]
    fn sup_from_examples() {
        assert_eq!(sup_error_from(&[3.0, 1.0, 2.0, 0.0]).unwrap(), vec![3.0, 2.0, 2.0, 0.0]);
        assert_eq!(sup_error_from(&[0.5; 4]).unwrap(), vec![0.5; 4]);
        assert!(sup_error_from(&[]).is_err());
    }

    #[test]
    fn robustness_estimator() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(empirical_robustness(&a, &a, 0).unwrap(), 0.0);
        let b = [9.0, 2.25, 3.25];
        assert_eq!(empirical_robustness(&a, &b, 1).unwrap(), 0.25);
        assert!(empirical_robustness(&a, &b[..2], 0).is_err());
    }

    fn run(signal: &SampledSignal, inputs: &BoundInputs) -> DiffTrace {
        let core = inputs.core_params().unwrap();
        let filt = FilterParams::new(inputs.gamma, inputs.delta, inputs.k0).unwrap();
        Differentiator::run(core, filt, signal).unwrap()
    }

    #[test]
    fn clean_ramp_is_satisfied() {
        let spec = SignalSpec::new(SignalFamily::Polynomial, 0.0, 1.0, 1.0, 5);
        let signal = generate(&spec, &NoiseSpec::zero(), 0.01, 10.0).unwrap();
        let inputs = benchmark_inputs(0).with_n(0.0).with_r1(signal.df.as_ref().unwrap()[0].abs());
        let trace = run(&signal, &inputs);
        let report = verify_run(&signal, &trace, &inputs).unwrap();
        assert!(report.satisfied(), "{}", report.summary());
        assert_eq!(report.bound, 0.005);
        assert!(report.max_error() <= 1e-12);
    }

    #[test]
    fn scenario1_report() {
        let signal = generate_scenario1(0.01, 20.0, 0.08, 4).unwrap();
        let inputs = benchmark_inputs(0);
        let trace = run(&signal, &inputs);
        let report = verify_run(&signal, &trace, &inputs).unwrap();
        assert!(report.satisfied(), "{}", report.summary());
        assert_eq!(report.start_k, 189);
        assert_eq!(report.recoveries.len(), 1);
        assert!(report.recoveries[0].within_allowance());
        // sup_from is non-increasing and the verdict matches it
        assert!(report.sup_from.windows(2).all(|w| w[0] >= w[1]));
        assert!(report.sup_from[report.start_k] <= report.bound + report.slack);
    }

    #[test]
    fn excessive_noise_is_not_applicable() {
        let signal = generate_scenario2(0.01, 20.0, 0.08, 0).unwrap();
        let inputs = benchmark_inputs(0).with_r1(0.5);
        let trace = run(&signal, &inputs);
        let report = verify_run(&signal, &trace, &inputs).unwrap();
        assert!(matches!(report.verdict, Verdict::NotApplicable(_)), "{}", report.summary());
        assert!(!report.violated());

        let over = benchmark_inputs(0).with_n(0.16);
        let signal = generate_scenario1(0.01, 20.0, 0.16, 0).unwrap();
        let report = verify_run(&signal, &run(&signal, &over), &over).unwrap();
        assert!(matches!(report.verdict, Verdict::NotApplicable(_)));
    }

    #[test]
    fn missing_truth_is_an_error() {
        let signal = SampledSignal::from_samples(0.01, vec![0.0; 10]).unwrap();
        let inputs = benchmark_inputs(0);
        let trace = run(&signal, &inputs);
        assert!(matches!(verify_run(&signal, &trace, &inputs), Err(Error::Parameter(_))));
    }

    #[test]
    fn csv_columns() {
        let signal = generate_scenario1(0.01, 4.0, 0.0, 0).unwrap();
        let inputs = benchmark_inputs(0).with_n(0.0);
        let report = verify_run(&signal, &run(&signal, &inputs), &inputs).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        report.write_csv(&path, Precision::RoundTrip).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.starts_with("k,t,err,sup_err,bound,within\n0,0,1,"));
        assert_eq!(text.lines().count(), signal.len() + 1);
    }
}
