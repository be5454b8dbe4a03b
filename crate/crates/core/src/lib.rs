//! Frequency-domain noise model of a spin oscillator cascaded with a
//! membrane-in-the-middle optomechanical cavity.
//!
//! Every routine is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`). The aliases below fix the scalar to `f64`.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod cascade;
pub mod error;
pub mod matrix;
pub mod optomech;
pub mod params;
pub mod presets;
pub mod scalar;
pub mod spin;
pub mod susceptibility;

pub use cascade::{NoiseKind, TransferModel, VarianceUnits, ZpfConvention};
pub use error::{ModelError, Result};
pub use presets::{Quadrature, Scenario};
pub use scalar::Real;

pub type Mat2 = matrix::ComplexMat2<f64>;
pub type Col2 = matrix::Column2<f64>;
pub type System = params::SystemParams<f64>;
pub type Spectrum64 = cascade::Spectrum<f64>;
pub type Preset = presets::PresetValues<f64>;
pub type Transfers = cascade::TransferSet<f64>;
