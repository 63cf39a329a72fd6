//! Rate-limited output filter.
//!
//! The filter is the backward-Euler discretization of the first-order sliding
//! mode `ẏ = −γ sign(y − y_s)`. Its implicit update
//! `y_k = y_{k−1} − γΔ sign(y_k − y_{s,k})` has the closed-form solution
//! `y_k = y_{k−1} + sat_{γΔ}(y_{s,k} − y_{k−1})`, so the output either lands
//! exactly on `y_{s,k}` or moves towards it by exactly `γΔ`.

use crate::error::{param, Error, Result};

/// `x` clipped to `[−M, M]`.
#[inline]
pub fn sat(x: f64, m: f64) -> f64 {
    debug_assert!(m >= 0.0);
    if x.abs() <= m {
        x
    } else {
        m.copysign(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    /// Output rate bound `γ`. Must exceed the signal's curvature bound `L`.
    pub gamma: f64,
    pub delta: f64,
    /// Index `k₀` at which the output is initialized.
    pub k0: u64,
}

impl FilterParams {
    pub fn new(gamma: f64, delta: f64, k0: u64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(param(format!("γ must be positive and finite, got {gamma}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(param(format!("sampling period must be positive, got {delta}")));
        }
        Ok(Self { gamma, delta, k0 })
    }

    /// Like [`FilterParams::new`], additionally enforcing `γ > L`.
    pub fn paired(gamma: f64, delta: f64, k0: u64, l: f64) -> Result<Self> {
        if !(gamma > l) {
            return Err(param(format!("γ = {gamma} must exceed L = {l}")));
        }
        Self::new(gamma, delta, k0)
    }

    /// Largest admissible output increment `γΔ`.
    pub fn increment_bound(&self) -> f64 {
        self.gamma * self.delta
    }
}

#[derive(Debug, Clone)]
pub struct OutputFilter {
    params: FilterParams,
    y_prev: f64,
    /// Next expected step index.
    next_k: u64,
}

impl OutputFilter {
    pub fn new(params: FilterParams) -> Self {
        Self {
            params,
            y_prev: 0.0,
            next_k: 0,
        }
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    /// Last output `y_{k−1}`.
    pub fn y_prev(&self) -> f64 {
        self.y_prev
    }

    /// Index the next call to [`OutputFilter::step`] must carry.
    pub fn next_k(&self) -> u64 {
        self.next_k
    }

    /// Whether the initialization index `k₀` has been reached.
    pub fn initialized(&self) -> bool {
        self.next_k > self.params.k0
    }

    pub fn reset(&mut self) {
        self.y_prev = 0.0;
        self.next_k = 0;
    }

    /// Produces `y_k` from `y_{s,k}`. Steps must arrive in order `k = 0, 1, …`;
    /// `ys` is ignored at `k = 0` and required afterwards.
    pub fn step(&mut self, k: u64, ys: Option<f64>) -> Result<f64> {
        if k != self.next_k {
            return Err(Error::Usage(format!(
                "filter expected step {}, got {k}",
                self.next_k
            )));
        }
        let k0 = self.params.k0;
        let y = if k == 0 || k < k0 {
            0.0
        } else {
            let ys = ys.ok_or_else(|| Error::Usage(format!("step {k} needs y_s")))?;
            if k == k0 {
                ys
            } else {
                let step = self.params.increment_bound();
                let gap = ys - self.y_prev;
                // the in-band branch returns ys itself so that y_k = y_{s,k} holds exactly
                if gap.abs() <= step {
                    ys
                } else {
                    self.y_prev + sat(gap, step)
                }
            }
        };
        self.y_prev = y;
        self.next_k = k + 1;
        Ok(y)
    }
}

/// Checks `y_k = y_{k−1} − γΔ sign(y_k − y_{s,k})` with the set-valued sign
/// at zero: either `y_k = y_{s,k}` within reach of `y_{k−1}`, or `y_k` moved by
/// exactly `γΔ` towards `y_{s,k}` without reaching it.
pub fn verify_implicit(y: f64, y_prev: f64, ys: f64, gamma_delta: f64) -> bool {
    verify_implicit_ulps(y, y_prev, ys, gamma_delta, 0)
}

/// [`verify_implicit`] allowing `ulps` units in the last place of the
/// operands, for traces produced by other implementations.
pub fn verify_implicit_ulps(y: f64, y_prev: f64, ys: f64, gamma_delta: f64, ulps: u32) -> bool {
    let scale = y.abs().max(y_prev.abs()).max(ys.abs()).max(gamma_delta);
    let tol = ulps as f64 * ulp(scale);
    let close = |a: f64, b: f64| (a - b).abs() <= tol;
    if close(y, ys) {
        (y - y_prev).abs() <= gamma_delta + tol
    } else {
        let sign = (y - ys).signum();
        close(y, y_prev - gamma_delta * sign)
    }
}

/// Spacing of `f64` values around `x`.
pub fn ulp(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 || !x.is_finite() {
        return f64::MIN_POSITIVE;
    }
    let next = f64::from_bits(x.to_bits() + 1);
    next - x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn saturation() {
        assert_eq!(sat(0.5, 1.0), 0.5);
        assert_eq!(sat(3.0, 2.0), 2.0);
        assert_eq!(sat(-3.0, 2.0), -2.0);
        assert_eq!(sat(7.0, 0.0), 0.0);
        assert_eq!(sat(-7.0, 0.0), 0.0);
        assert_eq!(sat(2.0, 2.0), 2.0);
    }

    #[test]
    fn zero_before_initialization() {
        let mut filt = OutputFilter::new(FilterParams::new(1.96, 0.01, 3).unwrap());
        assert_eq!(filt.step(0, None).unwrap(), 0.0);
        assert_eq!(filt.step(1, Some(5.0)).unwrap(), 0.0);
        assert_eq!(filt.step(2, Some(5.0)).unwrap(), 0.0);
        assert!(!filt.initialized());
        assert_eq!(filt.step(3, Some(5.0)).unwrap(), 5.0);
        assert!(filt.initialized());
        assert_abs_diff_eq!(filt.step(4, Some(9.0)).unwrap(), 5.0196, epsilon = 1e-12);
    }

    #[test]
    fn saturated_first_step() {
        let mut filt = OutputFilter::new(FilterParams::new(1.96, 0.01, 0).unwrap());
        assert_eq!(filt.step(0, None).unwrap(), 0.0);
        assert_abs_diff_eq!(filt.step(1, Some(1.0)).unwrap(), 0.0196, epsilon = 1e-15);
    }

    #[test]
    fn tracks_inside_band() {
        let mut filt = OutputFilter::new(FilterParams::new(2.0, 0.5, 0).unwrap());
        filt.step(0, None).unwrap();
        assert_eq!(filt.step(1, Some(0.7)).unwrap(), 0.7);
        assert_eq!(filt.step(2, Some(-0.2)).unwrap(), -0.2);
    }

    #[test]
    fn out_of_order_is_usage_error() {
        let mut filt = OutputFilter::new(FilterParams::new(2.0, 0.5, 0).unwrap());
        assert!(matches!(filt.step(1, Some(0.0)), Err(Error::Usage(_))));
        filt.step(0, None).unwrap();
        assert!(matches!(filt.step(1, None), Err(Error::Usage(_))));
    }

    #[test]
    fn gamma_must_exceed_l() {
        assert!(FilterParams::paired(1.0, 0.01, 0, 1.0).is_err());
        assert!(FilterParams::paired(1.96, 0.01, 0, 1.0).is_ok());
        assert!(FilterParams::new(-1.0, 0.01, 0).is_err());
    }

    #[test]
    fn implicit_relation_cases() {
        let gd = 0.0196;
        assert!(verify_implicit(0.01, 0.0, 0.01, gd));
        assert!(verify_implicit(0.0196, 0.0, 1.0, gd));
        assert!(verify_implicit(-0.0196, 0.0, -1.0, gd));
        assert!(!verify_implicit(2.0 * gd, 0.0, 1.0, gd));
        // landed on y_s but jumped too far
        assert!(!verify_implicit(1.0, 0.0, 1.0, gd));
        // moved the wrong way
        assert!(!verify_implicit(-gd, 0.0, 1.0, gd));
    }

    #[test]
    fn constant_target_reached_in_finite_time() {
        let (gamma, delta) = (1.5, 0.01);
        let mut filt = OutputFilter::new(FilterParams::new(gamma, delta, 0).unwrap());
        filt.step(0, None).unwrap();
        let c = 0.37;
        let steps = (c / (gamma * delta)).ceil() as u64;
        let mut y = 0.0;
        for k in 1..=steps + 20 {
            y = filt.step(k, Some(c)).unwrap();
            if k >= steps {
                assert_eq!(y, c, "k={k}");
            }
        }
        assert_eq!(y, c);
    }

    proptest! {
        #[test]
        fn explicit_solution_satisfies_implicit_relation(
            ys in proptest::collection::vec(-50.0..50.0f64, 1..200),
            gamma in 0.1..5.0f64,
            k0 in 0u64..5,
        ) {
            let params = FilterParams::new(gamma, 0.01, k0).unwrap();
            let gd = params.increment_bound();
            let mut filt = OutputFilter::new(params);
            filt.step(0, None).unwrap();
            let mut prev = 0.0;
            for (i, &target) in ys.iter().enumerate() {
                let k = i as u64 + 1;
                let y = filt.step(k, Some(target)).unwrap();
                if k > k0 {
                    prop_assert!(verify_implicit(y, prev, target, gd));
                    prop_assert!((y - prev).abs() <= gd + 4.0 * ulp(y.abs().max(prev.abs())));
                }
                prev = y;
            }
        }

        #[test]
        fn scale_equivariance(
            ys in proptest::collection::vec(-5.0..5.0f64, 1..100),
            exponent in -4i32..5,
        ) {
            // powers of two scale without rounding
            let lambda = 2f64.powi(exponent);
            let mut a = OutputFilter::new(FilterParams::new(1.25, 0.125, 0).unwrap());
            let mut b = OutputFilter::new(FilterParams::new(1.25 * lambda, 0.125, 0).unwrap());
            a.step(0, None).unwrap();
            b.step(0, None).unwrap();
            for (i, &target) in ys.iter().enumerate() {
                let k = i as u64 + 1;
                let ya = a.step(k, Some(target)).unwrap();
                let yb = b.step(k, Some(target * lambda)).unwrap();
                prop_assert_eq!(ya * lambda, yb);
            }
        }
    }
}
