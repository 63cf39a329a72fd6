//! Comparison differentiators: the super-twisting robust exact differentiator
//! and the one-step backward difference.

use crate::error::{param, Result};

/// Gains of the super-twisting differentiator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub l: f64,
    pub delta: f64,
}

impl RedParams {
    pub fn new(lambda1: f64, lambda2: f64, l: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("λ1", lambda1), ("λ2", lambda2), ("L", l), ("Δ", delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(param(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self {
            lambda1,
            lambda2,
            l,
            delta,
        })
    }

    /// `λ1 = 1.5, λ2 = 1.1`.
    pub fn standard(l: f64, delta: f64) -> Result<Self> {
        Self::new(1.5, 1.1, l, delta)
    }

    /// `λ1 = 2.8, λ2 = 1.96`.
    pub fn fast(l: f64, delta: f64) -> Result<Self> {
        Self::new(2.8, 1.96, l, delta)
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Super-twisting differentiator
/// `ż0 = −λ1 √L |z0 − u|^½ sign(z0 − u) + z1`, `ż1 = −λ2 L sign(z0 − u)`,
/// stepped with forward Euler. The output is `z1`.
#[derive(Debug, Clone)]
pub struct Red {
    params: RedParams,
    z0: f64,
    z1: f64,
    initialized: bool,
}

impl Red {
    pub fn new(params: RedParams) -> Self {
        Self {
            params,
            z0: 0.0,
            z1: 0.0,
            initialized: false,
        }
    }

    pub fn params(&self) -> &RedParams {
        &self.params
    }

    pub fn state(&self) -> (f64, f64) {
        (self.z0, self.z1)
    }

    /// Starts from an arbitrary state, e.g. to test equilibria.
    pub fn with_state(params: RedParams, z0: f64, z1: f64) -> Self {
        Self {
            params,
            z0,
            z1,
            initialized: true,
        }
    }

    pub fn reset(&mut self) {
        self.z0 = 0.0;
        self.z1 = 0.0;
        self.initialized = false;
    }

    /// Consumes `u_k` and returns the derivative estimate after the update.
    /// The first call initializes `z0 = u_0`, `z1 = 0`.
    pub fn step(&mut self, u: f64) -> f64 {
        if !self.initialized {
            self.z0 = u;
            self.z1 = 0.0;
            self.initialized = true;
            return self.z1;
        }
        let RedParams {
            lambda1,
            lambda2,
            l,
            delta,
        } = self.params;
        let e = self.z0 - u;
        let s = sign(e);
        let dz0 = -lambda1 * l.sqrt() * e.abs().sqrt() * s + self.z1;
        let dz1 = -lambda2 * l * s;
        self.z0 += delta * dz0;
        self.z1 += delta * dz1;
        self.z1
    }
}

/// `(u_k − u_{k−1}) / Δ`.
#[inline]
pub fn finite_difference_step(u: f64, u_prev: f64, delta: f64) -> f64 {
    (u - u_prev) / delta
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_on_constant_input() {
        let p = RedParams::standard(1.0, 0.01).unwrap();
        let mut red = Red::with_state(p, 2.5, 0.0);
        for _ in 0..100 {
            assert_eq!(red.step(2.5), 0.0);
        }
        assert_eq!(red.state(), (2.5, 0.0));
    }

    #[test]
    fn first_call_initializes() {
        let mut red = Red::new(RedParams::fast(1.0, 0.01).unwrap());
        assert_eq!(red.step(3.0), 0.0);
        assert_eq!(red.state(), (3.0, 0.0));
    }

    #[test]
    fn parameter_sets() {
        let p = RedParams::fast(1.0, 0.01).unwrap();
        assert_eq!((p.lambda1, p.lambda2), (2.8, 1.96));
        let p = RedParams::standard(1.0, 0.01).unwrap();
        assert_eq!((p.lambda1, p.lambda2), (1.5, 1.1));
        assert!(RedParams::new(0.0, 1.0, 1.0, 0.01).is_err());
        assert!(RedParams::new(1.0, 1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn converges_on_clean_ramp() {
        let (l, delta, a) = (1.0, 0.01, 0.8);
        for p in [RedParams::standard(l, delta).unwrap(), RedParams::fast(l, delta).unwrap()] {
            let mut red = Red::new(p);
            let mut tail_err: f64 = 0.0;
            for k in 0..6000 {
                let z1 = red.step(a * k as f64 * delta + 0.3);
                if k >= 3000 {
                    tail_err = tail_err.max((z1 - a).abs());
                }
            }
            assert!(tail_err <= 5.0 * l * delta, "tail error {tail_err}");
        }
    }

    #[test]
    fn derivative_increment_bounded() {
        let p = RedParams::fast(1.0, 0.01).unwrap();
        let mut red = Red::new(p);
        let mut prev = red.step(0.0);
        for k in 1..2000 {
            let t = k as f64 * 0.01;
            let z1 = red.step(t.sin() + 0.05 * (k % 3) as f64);
            assert!((z1 - prev).abs() <= p.lambda2 * p.l * p.delta * (1.0 + 1e-12));
            prev = z1;
        }
    }

    #[test]
    fn finite_difference_cases() {
        assert_eq!(finite_difference_step(1.5, 1.5, 0.01), 0.0);
        assert_eq!(finite_difference_step(0.75, 0.5, 0.125), 2.0);
        let n = 0.08;
        assert!((finite_difference_step(n, -n, 0.01) - 2.0 * n / 0.01).abs() < 1e-12);
        assert!((finite_difference_step(-n, n, 0.01) + 2.0 * n / 0.01).abs() < 1e-12);
    }
}
