//! Bare and effective oscillator susceptibilities.
//!
//! Conventions: `χ(Ω) = 2Ω₀ / (Ω₀² − Ω² − 2iΩγ)` with half-width γ. Optical
//! dynamical back-action enters only through the Schur complement
//! [`d_m_eff`], so every routine here is a pure function of its arguments.

use num_complex::Complex;

use crate::error::{ModelError, Result};
use crate::matrix::ComplexMat2;
use crate::params::{CavityParams, MechanicalParams, SpinParams};
use crate::scalar::Real;

/// Quadrature rotation O_θ.
pub fn rotation<T: Real>(angle: T) -> ComplexMat2<T> {
    ComplexMat2::rotation(angle)
}

/// Bare mechanical denominator `Ω_M² − Ω² − 2iΩγ_M0`.
pub fn d_m0<T: Real>(omega: T, mech: &MechanicalParams<T>) -> Complex<T> {
    oscillator_denominator(omega, mech.omega_m, mech.gamma_m0)
}

fn oscillator_denominator<T: Real>(omega: T, omega0: T, gamma: T) -> Complex<T> {
    Complex::new(omega0 * omega0 - omega * omega, -T::two() * omega * gamma)
}

fn checked_ratio<T: Real>(num: T, den: Complex<T>, omega: T) -> Result<Complex<T>> {
    if den.norm_sqr() == T::zero() {
        return Err(ModelError::Singular { freq_hz: T::rad_to_hz(omega).to_f64().unwrap_or(f64::NAN) });
    }
    Ok(den.inv() * num)
}

/// Bare membrane susceptibility `2Ω_M / D_M0(Ω)`.
///
/// Fails only when `γ_M0 = 0` and `Ω = Ω_M` exactly.
pub fn chi_mech_bare<T: Real>(omega: T, mech: &MechanicalParams<T>) -> Result<Complex<T>> {
    checked_ratio(T::two() * mech.omega_m, d_m0(omega, mech), omega)
}

/// Spin susceptibility with the mass sign carried by the signed Ω_S.
pub fn chi_spin<T: Real>(omega: T, spin: &SpinParams<T>) -> Complex<T> {
    let den = oscillator_denominator(omega, spin.omega_s, spin.gamma_s);
    den.inv() * (T::two() * spin.omega_s)
}

/// Optomechanical readout rate `Γ_M = 2g²/κ` with `g = g₀√N`.
pub fn readout_rate_mech<T: Real>(cavity: &CavityParams<T>) -> T {
    T::two() * cavity.g0 * cavity.g0 * cavity.n_photons / cavity.kappa()
}

/// Empty-cavity sideband denominator `(κ − iΩ)² + Δ²`.
pub fn d_cavity<T: Real>(omega: T, cavity: &CavityParams<T>) -> Complex<T> {
    let u = Complex::new(cavity.kappa(), -omega);
    u * u + cavity.detuning * cavity.detuning
}

/// Schur complement `D_M(Ω) = D_M0(Ω) + Γ_M κ Ω_M Δ / ((κ − iΩ)² + Δ²)`.
pub fn d_m_eff<T: Real>(omega: T, mech: &MechanicalParams<T>, cavity: &CavityParams<T>) -> Complex<T> {
    let d0 = d_m0(omega, mech);
    if cavity.detuning == T::zero() {
        return d0;
    }
    let k = readout_rate_mech(cavity) * cavity.kappa() * mech.omega_m * cavity.detuning;
    d0 + d_cavity(omega, cavity).inv() * k
}

/// Effective membrane susceptibility `2Ω_M / D_M(Ω)`, including optical spring and damping.
pub fn chi_mech_eff<T: Real>(
    omega: T,
    mech: &MechanicalParams<T>,
    cavity: &CavityParams<T>,
) -> Result<Complex<T>> {
    checked_ratio(T::two() * mech.omega_m, d_m_eff(omega, mech, cavity), omega)
}

/// Resonance of the optically dressed membrane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveMechanics<T> {
    /// Shifted resonance frequency (rad/s).
    pub omega: T,
    /// Total half-linewidth γ_M (rad/s).
    pub gamma: T,
}

impl<T: Real> EffectiveMechanics<T> {
    /// Optical contribution γ_M,opt = γ_M − γ_M0.
    pub fn optical_damping(&self, mech: &MechanicalParams<T>) -> T {
        self.gamma - mech.gamma_m0
    }
}

/// Locates the complex root `Ω_r − iγ_M` of `D_M` next to the bare resonance by
/// Newton iteration with the analytic derivative.
pub fn effective_resonance<T: Real>(
    mech: &MechanicalParams<T>,
    cavity: &CavityParams<T>,
) -> Result<EffectiveMechanics<T>> {
    let kappa = cavity.kappa();
    let det = cavity.detuning;
    let k = readout_rate_mech(cavity) * kappa * mech.omega_m * det;
    let i = Complex::new(T::zero(), T::one());
    let eval = |z: Complex<T>| {
        let u = -i * z + kappa;
        let q = (u * u + det * det).inv();
        let f = -(z * z) - i * z * (T::two() * mech.gamma_m0) + mech.omega_m * mech.omega_m + q * k;
        // q·q rather than dividing by dc²: |dc²|² overflows f32.
        let df = -z * T::two() - i * (T::two() * mech.gamma_m0) + i * u * (T::two() * k) * q * q;
        (f, df)
    };

    let mut z = Complex::new(mech.omega_m, -mech.gamma_m0);
    let tol = (T::lit(1e-13)).max(T::lit(64.0) * T::epsilon()) * mech.omega_m;
    for _ in 0..200 {
        let (f, df) = eval(z);
        if df.norm_sqr() == T::zero() {
            break;
        }
        let step = f / df;
        // Damp steps that would jump across the frequency axis scale.
        let max_step = T::lit(0.25) * mech.omega_m;
        let step = if step.norm() > max_step { step * (max_step / step.norm()) } else { step };
        z = z - step;
        if step.norm() <= tol {
            if !(z.re > T::zero()) {
                break;
            }
            return Ok(EffectiveMechanics { omega: z.re, gamma: -z.im });
        }
    }
    Err(ModelError::Unsupported(
        "effective mechanical resonance did not converge; the mode is overdamped or strongly hybridised".into(),
    ))
}
