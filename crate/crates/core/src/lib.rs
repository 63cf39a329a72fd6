//! Robust exact first-order differentiation from noisy samples.
//!
//! The differentiator in [`differentiator`] chains two stages:
//!
//! * [`adaptive`]: a finite difference whose length adapts to an online
//!   estimate of the noise amplitude, accurate to `2√(2NL) + LΔ/2` for
//!   signals with `|f̈| ≤ L` and noise bounded by `N`;
//! * [`filter`]: a rate limiter obtained by implicit Euler discretization of a
//!   first-order sliding mode, which keeps the same worst-case accuracy while
//!   bounding every output increment by `γΔ`.
//!
//! [`signals`] generates benchmark and randomized test signals, [`baselines`]
//! holds the comparison differentiators, [`analysis`] evaluates bounds and
//! verifies traces, and [`scenario`] drives complete benchmark runs.

pub mod adaptive;
pub mod analysis;
pub mod baselines;
pub mod differentiator;
pub mod error;
pub mod filter;
pub mod plot;
pub mod scenario;
pub mod signals;

pub use adaptive::{AdaptiveCore, CoreOutput, CoreParams, WindowLimit};
pub use analysis::{convergence_time, theorem2_bound, verify_run, BoundInputs, ErrorReport, Verdict};
pub use differentiator::{DiffTrace, Differentiator, Estimate};
pub use error::{Error, Result};
pub use filter::{FilterParams, OutputFilter};
pub use signals::SampledSignal;
