//! Decreasing rearrangements, isoperimetric profiles of the measures
//! `μ_r = α_r⁻¹ e^{-|t|^r} dt`, rearrangement-invariant norms and numerical
//! checks of the Poincaré and Sobolev-type inequalities they govern.
//!
//! The numerical core is generic over [`scalar::Scalar`] / [`scalar::Real`];
//! the aliases below fix the common choices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod grid;
pub mod inequalities;
pub mod io;
pub mod model;
pub mod norms;
pub mod operators;
pub mod oracle;
pub mod quadrature;
pub mod rearrangement;
pub mod scalar;
pub mod special;
pub mod suite;
pub mod testfns;

pub use error::{Error, Result};

use num_rational::Ratio;

pub type ModelMeasureF64 = model::ModelMeasure<f64>;
pub type MeasureProfileF64 = model::MeasureProfile<f64>;
pub type SampledFunctionF64 = rearrangement::SampledFunction<f64>;
pub type QuantileFunctionF64 = rearrangement::QuantileFunction<f64>;
pub type NormSpecF64 = norms::NormSpec<f64>;
pub type DiscreteSpaceF64 = oracle::DiscreteMetricSpace<f64>;
/// Rational arithmetic for exact rearrangements and perimeters.
pub type ExactSampledFunction = rearrangement::SampledFunction<Ratio<i64>>;
pub type ExactDiscreteSpace = oracle::DiscreteMetricSpace<Ratio<i64>>;
