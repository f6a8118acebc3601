//! Average intersection numbers of random trigonometric plane curves.
//!
//! A degree-`N` trigonometric curve is a map `S¹ → ℝ²` whose coordinates are
//! trigonometric polynomials of degree at most `N`. Pairs of such curves drawn
//! uniformly from the unit ball of the `L₂` (or Sobolev `W₂ʳ`) coefficient
//! metric meet, on average, in a number of points that has a closed rational
//! form. This crate provides
//!
//! * [`exact`]: arbitrary-precision evaluation of that closed form and its
//!   ingredients,
//! * [`sampling`] + [`intersection`] + [`montecarlo`]: an independent
//!   simulation that draws curve pairs and counts their crossings,
//! * [`chain`]: numeric reproduction of every intermediate integral of the
//!   derivation (slice integrals, the `1/8` integral, the Buffon factor,
//!   and a Monte Carlo integral over the incidence fiber).
//!
//! Data-parallel loops go through [`exec::Execution`]; with the default
//! `parallel` feature they run on rayon, otherwise sequentially. Results are
//! bit-identical either way.

pub mod chain;
pub mod curve;
pub mod error;
pub mod exact;
pub mod exec;
pub mod intersection;
pub mod montecarlo;
pub mod quadrature;
pub mod sampling;

pub use curve::{PlanePoint, SobolevOrder, TrigCurve};
pub use error::{Error, Result};
pub use exact::{ExactRational, MeanValue};
pub use exec::Execution;
pub use intersection::{CountingConfig, IntersectionResult};
pub use montecarlo::{Distribution, ExperimentConfig, ExperimentResult};
pub use sampling::{CurvePair, SeedSpec};
