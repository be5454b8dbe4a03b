//! Scalar abstraction used by every model routine.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating-point scalar the model can be evaluated in (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Sum + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    /// `2π`.
    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }

    /// Converts a cyclic frequency in Hz to angular frequency in rad/s.
    #[inline]
    fn hz_to_rad(hz: Self) -> Self {
        hz * Self::TAU()
    }

    /// Converts an angular frequency in rad/s to Hz.
    #[inline]
    fn rad_to_hz(rad: Self) -> Self {
        rad / Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Both parts of `z` are finite.
#[inline]
pub fn finite<T: Real>(z: num_complex::Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// High-temperature bath occupancy `k_B T / (ħ Ω)` for an oscillator at angular frequency `omega`.
pub fn bath_occupancy<T: Real>(temperature_k: T, omega: T) -> T {
    T::lit(K_B) * temperature_k / (T::lit(HBAR) * omega)
}

/// Inverse of [`bath_occupancy`].
pub fn bath_temperature<T: Real>(occupancy: T, omega: T) -> T {
    occupancy * T::lit(HBAR) * omega / T::lit(K_B)
}
