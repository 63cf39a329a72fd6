//! The complete differentiator: adaptive core followed by the rate-limited filter.

use crate::adaptive::{AdaptiveCore, CoreOutput, CoreParams};
use crate::error::{param, Result};
use crate::filter::{FilterParams, OutputFilter};
use crate::signals::SampledSignal;

/// Output of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub k: u64,
    /// Filtered estimate `y_k`.
    pub y: f64,
    /// Core output; absent at `k = 0`.
    pub core: Option<CoreOutput>,
}

#[derive(Debug, Clone)]
pub struct Differentiator {
    core: AdaptiveCore,
    filter: OutputFilter,
}

impl Differentiator {
    /// Pairs core and filter, requiring `γ > L` and matching sampling periods.
    pub fn new(core: CoreParams, filter: FilterParams) -> Result<Self> {
        if !(filter.gamma > core.l) {
            return Err(param(format!(
                "γ = {} must exceed L = {}",
                filter.gamma, core.l
            )));
        }
        if core.delta != filter.delta {
            return Err(param("core and filter must share the sampling period"));
        }
        Ok(Self {
            core: AdaptiveCore::new(core),
            filter: OutputFilter::new(filter),
        })
    }

    pub fn core_params(&self) -> &CoreParams {
        self.core.params()
    }

    pub fn filter_params(&self) -> &FilterParams {
        self.filter.params()
    }

    pub fn reset(&mut self) {
        self.core.reset();
        self.filter.reset();
    }

    pub fn step(&mut self, u: f64) -> Result<Estimate> {
        let core = self.core.push(u)?;
        let k = self.core.k().expect("pushed at least one sample");
        let y = self.filter.step(k, core.map(|c| c.ys))?;
        Ok(Estimate { k, y, core })
    }

    /// Runs a whole signal from a fresh state.
    pub fn run(core: CoreParams, filter: FilterParams, signal: &SampledSignal) -> Result<DiffTrace> {
        let mut diff = Self::new(core, filter)?;
        let mut trace = DiffTrace::with_capacity(signal.len());
        for &u in &signal.u {
            trace.push(diff.step(u)?);
        }
        Ok(trace)
    }
}

/// Per-step outputs of a run. Index 0 has no core output; its `ys`, `nhat`
/// and `ell` slots hold `NaN`, `0` and `0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiffTrace {
    pub y: Vec<f64>,
    pub ys: Vec<f64>,
    pub nhat: Vec<f64>,
    pub ell: Vec<usize>,
}

impl DiffTrace {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            y: Vec::with_capacity(n),
            ys: Vec::with_capacity(n),
            nhat: Vec::with_capacity(n),
            ell: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, est: Estimate) {
        self.y.push(est.y);
        match est.core {
            Some(c) => {
                self.ys.push(c.ys);
                self.nhat.push(c.nhat);
                self.ell.push(c.ell);
            }
            None => {
                self.ys.push(f64::NAN);
                self.nhat.push(0.0);
                self.ell.push(0);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::WindowLimit;

    #[test]
    fn rejects_gamma_not_above_l() {
        let core = CoreParams::new(1.0, 0.01, WindowLimit::Finite(41)).unwrap();
        let filt = FilterParams::new(1.0, 0.01, 0).unwrap();
        assert!(Differentiator::new(core, filt).is_err());
        let filt = FilterParams::new(2.0, 0.02, 0).unwrap();
        assert!(Differentiator::new(core, filt).is_err());
    }

    #[test]
    fn ramp_is_tracked_exactly_after_transient() {
        let delta = 0.125;
        let core = CoreParams::new(1.0, delta, WindowLimit::Finite(5)).unwrap();
        let filt = FilterParams::new(2.0, delta, 0).unwrap();
        let mut diff = Differentiator::new(core, filt).unwrap();
        let first = diff.step(1.0).unwrap();
        assert_eq!((first.k, first.y, first.core), (0, 0.0, None));
        let mut last = 0.0;
        for m in 1..40 {
            last = diff.step(1.0 + 0.5 * m as f64 * delta).unwrap().y;
        }
        assert_eq!(last, 0.5);
    }
}
