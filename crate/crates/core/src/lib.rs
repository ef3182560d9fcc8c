//! Two-sided bounds between the Cheeger constant `h` and the spectral gap
//! `λ` of one-dimensional weighted spaces with a curvature lower bound `K`.
//!
//! The crate has three layers:
//!
//! * [`special`] and [`bounds`]: the Gaussian-tail functions, the implicit
//!   heat-semigroup bound, its inversions and the explicit closed forms.
//! * [`space`], [`spectral`], [`isoperimetry`] and [`heat`]: discrete model
//!   spaces with their eigenvalues, Cheeger constants and heat flow.
//! * [`suite`] and [`cli`]: the verification suite and the `sandwich` binary.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod heat;
pub mod isoperimetry;
pub mod linalg;
pub mod scalar;
pub mod space;
pub mod special;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
pub use scalar::Real;

pub type BoundReport = bounds::BoundReport<f64>;
pub type ExplicitBound = bounds::ExplicitBound<f64>;
pub type Preset = space::Preset<f64>;
pub type SpaceSpec = space::SpaceSpec<f64>;
pub type WeightedLine = space::WeightedLine<f64>;
pub type GridFunction = space::GridFunction<f64>;
pub type EigenResult = spectral::EigenResult<f64>;
pub type CutFamily = isoperimetry::CutFamily<f64>;
pub type CheegerResult = isoperimetry::CheegerResult<f64>;
pub type CoareaCheck = isoperimetry::CoareaCheck<f64>;
pub type FlowResult = heat::FlowResult<f64>;
pub type HeatFlow<'a> = heat::HeatFlow<'a, f64>;
