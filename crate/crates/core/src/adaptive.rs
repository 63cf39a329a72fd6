//! Adaptive finite-difference differentiator with online noise estimation.
//!
//! At step `k ≥ 1` the estimator looks at the most recent samples
//! `u_k, …, u_{k−k̄}` and
//!
//! 1. measures how far the samples stray from every secant through `u_k`
//!    (`Q_{k,ℓ,j} = u_{k−j} − u_k + (u_k − u_{k−ℓ}) j/ℓ`), discounting what a
//!    curvature of `L` alone could explain, which yields the noise estimate
//!    `N̂_k`;
//! 2. picks the difference length `ℓ̂_k = min{k, k̄, ⌈(2/Δ)√(N̂_k/L)⌉}`, or 1 when
//!    no noise is detected;
//! 3. returns the backward difference `(u_k − u_{k−ℓ̂_k}) / (Δ ℓ̂_k)`.
//!
//! With `|f̈| ≤ L` and noise bounded by `N ≤ N̄ = LΔ²(k̄−1)²/2`, the error of the
//! estimate is bounded by [`core_error_bound`].

use crate::error::{param, Error, Result};

/// Window length parameter `k̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowLimit {
    /// Look back at most `k̄ ≥ 2` samples.
    Finite(usize),
    /// Look back over the whole history. Memory grows linearly with the
    /// number of samples, so the history is capped by
    /// [`CoreParams::history_cap`].
    Infinite,
}

impl WindowLimit {
    fn as_option(self) -> Option<usize> {
        match self {
            WindowLimit::Finite(n) => Some(n),
            WindowLimit::Infinite => None,
        }
    }
}

/// Default sample cap for runs with an infinite window (about 28 h at 100 Hz).
pub const DEFAULT_HISTORY_CAP: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreParams {
    /// Bound `L` on the second derivative of the signal.
    pub l: f64,
    /// Sampling period `Δ`.
    pub delta: f64,
    pub kbar: WindowLimit,
    /// Maximum number of retained samples when `kbar` is infinite.
    pub history_cap: usize,
}

impl CoreParams {
    pub fn new(l: f64, delta: f64, kbar: WindowLimit) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(param(format!("L must be positive and finite, got {l}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(param(format!("sampling period must be positive, got {delta}")));
        }
        if let WindowLimit::Finite(n) = kbar {
            if n < 2 {
                return Err(param(format!("window length k̄ must be at least 2, got {n}")));
            }
        }
        Ok(Self {
            l,
            delta,
            kbar,
            history_cap: DEFAULT_HISTORY_CAP,
        })
    }

    pub fn with_history_cap(mut self, cap: usize) -> Self {
        self.history_cap = cap;
        self
    }

    /// Largest noise amplitude `N̄ = LΔ²(k̄−1)²/2` the window can absorb.
    pub fn noise_capacity(&self) -> f64 {
        match self.kbar {
            WindowLimit::Finite(n) => {
                let span = (n - 1) as f64;
                self.l * self.delta * self.delta * span * span / 2.0
            }
            WindowLimit::Infinite => f64::INFINITY,
        }
    }

    /// Smallest window `⌈√(2N̄/(LΔ²)) + 1⌉` whose capacity covers `nbar`.
    pub fn window_for_capacity(l: f64, delta: f64, nbar: f64) -> Result<usize> {
        if !(l > 0.0 && delta > 0.0 && nbar >= 0.0 && nbar.is_finite()) {
            return Err(param("window sizing needs L > 0, Δ > 0 and finite N̄ ≥ 0"));
        }
        let exact = (2.0 * nbar / (l * delta * delta)).sqrt() + 1.0;
        // 0.16/(1e-4) evaluates a hair above 1600; do not let that round up a whole sample.
        let k = (exact * (1.0 - 1e-12)).ceil() as usize;
        Ok(k.max(2))
    }
}

/// Fixed-capacity sample history that always exposes a contiguous
/// oldest-to-newest slice.
///
/// Finite windows store each sample twice (at `i` and `i + cap`) so the most
/// recent `len` samples are contiguous without copying.
#[derive(Debug, Clone)]
pub struct SampleWindow {
    data: Vec<f64>,
    cap: Option<usize>,
    head: usize,
    len: usize,
}

impl SampleWindow {
    pub fn new(cap: Option<usize>) -> Self {
        match cap {
            Some(cap) => {
                assert!(cap > 0, "window capacity must be positive");
                Self {
                    data: vec![0.0; 2 * cap],
                    cap: Some(cap),
                    head: 0,
                    len: 0,
                }
            }
            None => Self {
                data: Vec::new(),
                cap: None,
                head: 0,
                len: 0,
            },
        }
    }

    pub fn push(&mut self, x: f64) {
        match self.cap {
            Some(cap) => {
                self.data[self.head] = x;
                self.data[self.head + cap] = x;
                self.head = (self.head + 1) % cap;
                self.len = (self.len + 1).min(cap);
            }
            None => {
                self.data.push(x);
                self.len += 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn clear(&mut self) {
        self.head = 0;
        self.len = 0;
        if self.cap.is_none() {
            self.data.clear();
        }
    }

    /// Retained samples, oldest first; the last element is the newest.
    pub fn as_slice(&self) -> &[f64] {
        match self.cap {
            Some(cap) => {
                let end = self.head + cap;
                &self.data[end - self.len..end]
            }
            None => &self.data,
        }
    }
}

/// `Q_{k,ℓ,j}` from the newest sample `u_k`, `u_{k−j}` and `u_{k−ℓ}`.
#[inline]
fn secant_deviation(newest: f64, back_j: f64, back_ell: f64, ell: usize, j: usize) -> f64 {
    back_j - newest + (newest - back_ell) * j as f64 / ell as f64
}

/// Deviation `LΔ² j(ℓ−j)/2` that curvature alone can produce.
#[inline]
fn curvature_allowance(params: &CoreParams, ell: usize, j: usize) -> f64 {
    params.l * params.delta * params.delta * (j * (ell - j)) as f64 / 2.0
}

/// `Q_{k,ℓ,j}` over a window whose last element is `u_k`.
///
/// Requires `1 ≤ j ≤ ℓ` and `ℓ < window.len()`.
pub fn q_stat(window: &[f64], ell: usize, j: usize) -> Result<f64> {
    if j == 0 || j > ell || ell >= window.len() {
        return Err(Error::Usage(format!(
            "Q needs 1 ≤ j ≤ ℓ < {} (window length), got ℓ = {ell}, j = {j}",
            window.len()
        )));
    }
    let newest = window.len() - 1;
    Ok(secant_deviation(
        window[newest],
        window[newest - j],
        window[newest - ell],
        ell,
        j,
    ))
}

fn longest_difference(k: u64, params: &CoreParams, available: usize) -> usize {
    let mut max_ell = usize::try_from(k).unwrap_or(usize::MAX);
    if let Some(kbar) = params.kbar.as_option() {
        max_ell = max_ell.min(kbar);
    }
    max_ell.min(available.saturating_sub(1))
}

/// Reference noise estimate: the direct triple loop
/// `N̂_k = ½ max_{2 ≤ ℓ ≤ min(k,k̄), 1 ≤ j ≤ ℓ} (|Q_{k,ℓ,j}| − LΔ² j(ℓ−j)/2)`,
/// clamped at zero. `N̂_1 = 0`.
///
/// `window` holds samples oldest first and ends at `u_k`; it must reach back
/// at least `min(k, k̄)` samples.
pub fn noise_estimate_naive(window: &[f64], k: u64, params: &CoreParams) -> f64 {
    if k < 2 {
        return 0.0;
    }
    let max_ell = longest_difference(k, params, window.len());
    let mut best = f64::NEG_INFINITY;
    for ell in 2..=max_ell {
        for j in 1..=ell {
            let q = q_stat(window, ell, j).expect("indices bounded by the window");
            let term = q.abs() - curvature_allowance(params, ell, j);
            best = best.max(term);
        }
    }
    (0.5 * best).max(0.0)
}

/// Cached evaluation of the same maximum as [`noise_estimate_naive`].
///
/// The curvature allowances are tabulated once per parameter set and the
/// window is walked through contiguous slices. Each term is produced by the
/// same floating-point expression as the reference, so the two agree bitwise.
#[derive(Debug, Clone)]
pub struct NoiseEstimator {
    params: CoreParams,
    /// Row `ℓ` starts at `offsets[ℓ]` and holds allowances for `j = 1..=ℓ`.
    allowances: Vec<f64>,
    offsets: Vec<usize>,
}

impl NoiseEstimator {
    pub fn new(params: CoreParams) -> Self {
        let mut estimator = Self {
            params,
            allowances: Vec::new(),
            offsets: Vec::new(),
        };
        if let WindowLimit::Finite(kbar) = params.kbar {
            estimator.extend_to(kbar);
        }
        estimator
    }

    fn extend_to(&mut self, max_ell: usize) {
        while self.offsets.len() <= max_ell {
            let ell = self.offsets.len();
            self.offsets.push(self.allowances.len());
            for j in 1..=ell {
                self.allowances
                    .push(curvature_allowance(&self.params, ell, j));
            }
        }
    }

    pub fn estimate(&mut self, window: &[f64], k: u64) -> f64 {
        if k < 2 {
            return 0.0;
        }
        let max_ell = longest_difference(k, &self.params, window.len());
        self.extend_to(max_ell);
        let newest_idx = window.len() - 1;
        let newest = window[newest_idx];
        let mut best = f64::NEG_INFINITY;
        for ell in 2..=max_ell {
            let back_ell = window[newest_idx - ell];
            let row = &self.allowances[self.offsets[ell]..self.offsets[ell] + ell];
            // window[newest_idx - j] for j = 1..=ell, newest first
            let recent = window[newest_idx - ell..newest_idx].iter().rev();
            for ((j, &back_j), &allowance) in (1..=ell).zip(recent).zip(row) {
                let q = secant_deviation(newest, back_j, back_ell, ell, j);
                best = best.max(q.abs() - allowance);
            }
        }
        (0.5 * best).max(0.0)
    }
}

/// Difference length `ℓ̂_k`: 1 when `N̂_k = 0`, otherwise
/// `min{k, k̄, ⌈(2/Δ)√(N̂_k/L)⌉}`.
pub fn window_length(nhat: f64, k: u64, params: &CoreParams) -> usize {
    if nhat <= 0.0 {
        return 1;
    }
    let by_noise = ((2.0 / params.delta) * (nhat / params.l).sqrt()).ceil();
    // saturating float-to-int cast keeps huge estimates finite
    let mut ell = (by_noise as usize).max(1);
    ell = ell.min(usize::try_from(k).unwrap_or(usize::MAX));
    if let Some(kbar) = params.kbar.as_option() {
        ell = ell.min(kbar);
    }
    ell.max(1)
}

/// Per-sample error bound of the adaptive difference for noise amplitude `N`:
/// `2√(2NL) + LΔ/2` once `kΔ ≥ √(2N/L)`, and `LΔk + 2N/(Δk)` before.
///
/// Fails with [`Error::BoundNotApplicable`] when `N > N̄`.
pub fn core_error_bound(k: u64, n: f64, params: &CoreParams) -> Result<f64> {
    if k == 0 {
        return Err(param("the per-sample bound starts at k = 1"));
    }
    if !(n >= 0.0) {
        return Err(param(format!("noise amplitude must be non-negative, got {n}")));
    }
    let capacity = params.noise_capacity();
    if n > capacity {
        return Err(Error::BoundNotApplicable(format!(
            "noise amplitude {n} exceeds window capacity N̄ = {capacity}"
        )));
    }
    let (l, delta) = (params.l, params.delta);
    let t = k as f64 * delta;
    if t >= (2.0 * n / l).sqrt() {
        Ok(2.0 * (2.0 * n * l).sqrt() + l * delta / 2.0)
    } else {
        Ok(l * t + 2.0 * n / t)
    }
}

/// One step of the adaptive core.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreOutput {
    pub k: u64,
    /// `y_{s,k}`.
    pub ys: f64,
    /// `N̂_k`.
    pub nhat: f64,
    /// `ℓ̂_k`.
    pub ell: usize,
}

/// Streaming state of the adaptive differentiator.
#[derive(Debug, Clone)]
pub struct AdaptiveCore {
    params: CoreParams,
    window: SampleWindow,
    estimator: NoiseEstimator,
    /// Index of the newest sample, `None` before `u_0`.
    k: Option<u64>,
    last: Option<CoreOutput>,
}

impl AdaptiveCore {
    pub fn new(params: CoreParams) -> Self {
        let cap = params.kbar.as_option().map(|kbar| kbar + 1);
        Self {
            params,
            window: SampleWindow::new(cap),
            estimator: NoiseEstimator::new(params),
            k: None,
            last: None,
        }
    }

    pub fn params(&self) -> &CoreParams {
        &self.params
    }

    /// Index of the newest sample.
    pub fn k(&self) -> Option<u64> {
        self.k
    }

    pub fn last(&self) -> Option<CoreOutput> {
        self.last
    }

    /// Retained samples, oldest first.
    pub fn window(&self) -> &[f64] {
        self.window.as_slice()
    }

    pub fn reset(&mut self) {
        self.window.clear();
        self.k = None;
        self.last = None;
    }

    /// Stores `u_0`. No estimate exists for `k = 0`.
    pub fn seed(&mut self, u0: f64) -> Result<()> {
        if self.k.is_some() {
            return Err(Error::Usage("the core is already seeded".into()));
        }
        self.window.push(u0);
        self.k = Some(0);
        Ok(())
    }

    /// Consumes `u_k` for `k ≥ 1` and returns `y_{s,k}` with its diagnostics.
    pub fn step(&mut self, u: f64) -> Result<CoreOutput> {
        let prev = self
            .k
            .ok_or_else(|| Error::Usage("step called before u_0 was seeded".into()))?;
        if self.params.kbar == WindowLimit::Infinite && self.window.len() >= self.params.history_cap {
            return Err(Error::HistoryCapExceeded {
                cap: self.params.history_cap,
            });
        }
        let k = prev + 1;
        self.window.push(u);
        self.k = Some(k);

        let samples = self.window.as_slice();
        let nhat = self.estimator.estimate(samples, k);
        let ell = window_length(nhat, k, &self.params);
        let newest = samples.len() - 1;
        let ys = (samples[newest] - samples[newest - ell]) / (self.params.delta * ell as f64);

        let out = CoreOutput { k, ys, nhat, ell };
        self.last = Some(out);
        Ok(out)
    }

    /// Seeds on the first call, steps afterwards.
    pub fn push(&mut self, u: f64) -> Result<Option<CoreOutput>> {
        if self.k.is_none() {
            self.seed(u)?;
            Ok(None)
        } else {
            self.step(u).map(Some)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(kbar: usize) -> CoreParams {
        CoreParams::new(1.0, 0.01, WindowLimit::Finite(kbar)).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(CoreParams::new(0.0, 0.01, WindowLimit::Finite(41)).is_err());
        assert!(CoreParams::new(1.0, -0.01, WindowLimit::Finite(41)).is_err());
        assert!(CoreParams::new(1.0, 0.01, WindowLimit::Finite(1)).is_err());
        assert!(CoreParams::new(1.0, 0.01, WindowLimit::Infinite).is_ok());
    }

    #[test]
    fn capacity_and_window_sizing() {
        let p = params(41);
        assert_abs_diff_eq!(p.noise_capacity(), 0.08, epsilon = 1e-15);
        assert_eq!(CoreParams::window_for_capacity(1.0, 0.01, 0.08).unwrap(), 41);
        assert_eq!(CoreParams::window_for_capacity(1.0, 0.01, 0.0).unwrap(), 2);
    }

    #[test]
    fn ring_keeps_latest_samples_contiguous() {
        let mut w = SampleWindow::new(Some(3));
        for x in 0..7 {
            w.push(x as f64);
        }
        assert_eq!(w.as_slice(), &[4.0, 5.0, 6.0]);
        w.clear();
        w.push(9.0);
        assert_eq!(w.as_slice(), &[9.0]);
    }

    #[test]
    fn q_of_affine_is_zero() {
        let window: Vec<f64> = (0..20).map(|m| 3.0 * m as f64 * 0.25 - 1.0).collect();
        for ell in 1..19 {
            for j in 1..=ell {
                assert_eq!(q_stat(&window, ell, j).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn q_of_quadratic_matches_closed_form() {
        // Δ a power of two keeps samples exact; the division by ℓ rounds once.
        let delta = 1.0 / 128.0;
        let window: Vec<f64> = (0..30).map(|m| (m as f64 * delta).powi(2) / 2.0).collect();
        for ell in 1..29 {
            for j in 1..=ell {
                let expected = -delta * delta * (j * (ell - j)) as f64 / 2.0;
                let q = q_stat(&window, ell, j).unwrap();
                assert!((q - expected).abs() <= 4.0 * f64::EPSILON * window[29]);
            }
        }
    }

    #[test]
    fn q_endpoint_vanishes() {
        let window = [0.3, -1.2, 4.0, 2.5, 0.1];
        for ell in 1..5 {
            assert_eq!(q_stat(&window, ell, ell).unwrap(), 0.0);
        }
    }

    #[test]
    fn q_rejects_out_of_range() {
        let window = [0.0, 1.0, 2.0];
        assert!(q_stat(&window, 3, 1).is_err());
        assert!(q_stat(&window, 2, 0).is_err());
        assert!(q_stat(&window, 1, 2).is_err());
    }

    #[test]
    fn first_estimate_is_zero() {
        let p = params(41);
        assert_eq!(noise_estimate_naive(&[5.0, -5.0], 1, &p), 0.0);
        let mut est = NoiseEstimator::new(p);
        assert_eq!(est.estimate(&[5.0, -5.0], 1), 0.0);
    }

    #[test]
    fn noiseless_quadratic_has_no_noise() {
        let delta = 1.0 / 128.0;
        let p = CoreParams::new(1.0, delta, WindowLimit::Finite(41)).unwrap();
        let mut core = AdaptiveCore::new(p);
        for m in 0..400 {
            let u = (m as f64 * delta).powi(2) / 2.0;
            if let Some(out) = core.push(u).unwrap() {
                assert!(out.nhat <= 2.0 * f64::EPSILON * u, "k={} nhat={}", out.k, out.nhat);
                assert_eq!(out.ell, 1);
            }
        }
    }

    #[test]
    fn alternating_noise_is_detected() {
        // u = affine + N(−1)^k, evaluate the (ℓ=2, j=1) term
        let (n, delta) = (0.05, 0.01);
        let p = params(41);
        let u: Vec<f64> = (0..60)
            .map(|k| 2.0 * k as f64 * delta + 1.0 + if k % 2 == 0 { n } else { -n })
            .collect();
        for k in 2..60usize {
            let lo = k.saturating_sub(41);
            let nhat = noise_estimate_naive(&u[lo..=k], k as u64, &p);
            assert!(nhat >= n - p.l * delta * delta / 4.0 - 1e-14, "k={k} nhat={nhat}");
        }
    }

    #[test]
    fn window_length_cases() {
        let p = params(41);
        assert_eq!(window_length(0.0, 1000, &p), 1);
        assert_eq!(window_length(0.08, 1000, &p), 41);
        assert_eq!(window_length(0.08, 1, &p), 1);
        assert_eq!(window_length(1e-6, 1000, &p), 1);
        // ⌈200·√0.0004⌉ = 4
        assert_eq!(window_length(0.0004, 1000, &p), 4);
    }

    #[test]
    fn affine_input_is_differentiated_exactly() {
        let p = CoreParams::new(1.0, 0.125, WindowLimit::Finite(5)).unwrap();
        let mut core = AdaptiveCore::new(p);
        for m in 0..50 {
            if let Some(out) = core.push(-0.75 * m as f64 * 0.125 + 2.0).unwrap() {
                assert_eq!(out.ys, -0.75);
            }
        }
    }

    #[test]
    fn step_before_seed_is_usage_error() {
        let mut core = AdaptiveCore::new(params(41));
        assert!(matches!(core.step(1.0), Err(Error::Usage(_))));
        core.seed(0.0).unwrap();
        assert!(matches!(core.seed(0.0), Err(Error::Usage(_))));
        assert_eq!(core.step(0.5).unwrap().k, 1);
    }

    #[test]
    fn window_never_exceeds_kbar_plus_one() {
        let mut core = AdaptiveCore::new(params(5));
        for m in 0..30 {
            core.push(m as f64).unwrap();
            assert!(core.window().len() <= 6);
        }
    }

    #[test]
    fn infinite_window_respects_history_cap() {
        let p = CoreParams::new(1.0, 0.01, WindowLimit::Infinite)
            .unwrap()
            .with_history_cap(10);
        let mut core = AdaptiveCore::new(p);
        for m in 0..10 {
            core.push(m as f64).unwrap();
        }
        assert!(matches!(
            core.push(10.0),
            Err(Error::HistoryCapExceeded { cap: 10 })
        ));
    }

    #[test]
    fn core_bound_branches() {
        let p = params(41);
        assert_eq!(core_error_bound(7, 0.0, &p).unwrap(), 0.005);
        assert_abs_diff_eq!(core_error_bound(40, 0.08, &p).unwrap(), 0.805, epsilon = 1e-12);
        assert_abs_diff_eq!(core_error_bound(10, 0.08, &p).unwrap(), 1.7, epsilon = 1e-12);
        assert!(matches!(
            core_error_bound(10, 0.2, &p),
            Err(Error::BoundNotApplicable(_))
        ));
    }

    proptest! {
        #[test]
        fn cached_estimate_is_bitwise_naive(
            samples in proptest::collection::vec(-5.0..5.0f64, 3..60),
            kbar in 2usize..45,
            l in 0.1..4.0f64,
        ) {
            let p = CoreParams::new(l, 0.01, WindowLimit::Finite(kbar)).unwrap();
            let mut est = NoiseEstimator::new(p);
            for k in 1..samples.len() {
                let lo = k.saturating_sub(kbar);
                let w = &samples[lo..=k];
                prop_assert_eq!(
                    est.estimate(w, k as u64).to_bits(),
                    noise_estimate_naive(w, k as u64, &p).to_bits()
                );
            }
        }

        #[test]
        fn output_invariant_under_offset(
            samples in proptest::collection::vec(-1.0..1.0f64, 2..80),
            shift in -8.0..8.0f64,
        ) {
            // A dyadic Δ and dyadic shift keep u + c exactly representable.
            let shift = (shift * 64.0).round() / 64.0;
            let samples: Vec<f64> = samples.iter().map(|x| (x * 1024.0).round() / 1024.0).collect();
            let p = CoreParams::new(1.0, 1.0 / 64.0, WindowLimit::Finite(9)).unwrap();
            let mut a = AdaptiveCore::new(p);
            let mut b = AdaptiveCore::new(p);
            for &u in &samples {
                let ya = a.push(u).unwrap();
                let yb = b.push(u + shift).unwrap();
                prop_assert_eq!(ya.map(|o| o.ys), yb.map(|o| o.ys));
            }
        }
    }
}
