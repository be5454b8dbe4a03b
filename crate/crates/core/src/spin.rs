//! Collective spin oscillator probed by the travelling light field.

use num_complex::Complex;

use crate::matrix::{Column2, ComplexMat2};
use crate::params::{SpinParams, SpinPhysicalParams};
use crate::scalar::Real;
use crate::susceptibility::chi_spin;

/// Light transfer and thermal-force response of the spin stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinTransfer<T> {
    /// `[[1, 0], [Γ_S χ_S, 1]]`.
    pub s_light: ComplexMat2<T>,
    /// Response to the force vector `(0, f)`: `(0, √(Γ_S γ_S) χ_S)`.
    pub f_force: Column2<T>,
}

impl<T: Real> SpinTransfer<T> {
    /// Stage without atoms.
    pub fn identity() -> Self {
        Self { s_light: ComplexMat2::identity(), f_force: Column2::zero() }
    }
}

pub fn spin_transfer<T: Real>(omega: T, spin: &SpinParams<T>) -> SpinTransfer<T> {
    let chi = chi_spin(omega, spin);
    let z = Complex::new(T::zero(), T::zero());
    SpinTransfer {
        s_light: ComplexMat2::shear(chi * spin.gamma_readout),
        f_force: Column2::new(z, chi * (spin.gamma_readout * spin.gamma_s).sqrt()),
    }
}

/// Light-atom coupling `α = Γ_sp / (8 A Δ) · λ² / (2π) · α₁`.
pub fn coupling_alpha<T: Real>(phys: &SpinPhysicalParams<T>) -> T {
    phys.gamma_sp / (T::lit(8.0) * phys.beam_area * phys.detuning_atomic) * phys.wavelength * phys.wavelength
        / T::two_pi()
        * phys.alpha1
}

/// Spin readout rate `Γ_S = ½ α² Φ |J_x|`.
pub fn readout_rate_spin<T: Real>(alpha: T, phys: &SpinPhysicalParams<T>) -> T {
    T::half() * alpha * alpha * phys.photon_flux * phys.jx.abs()
}
