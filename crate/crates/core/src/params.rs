//! Parameter model for the membrane, cavity, spin ensemble and the optical chain.
//!
//! All rates and frequencies are angular (rad/s). Conversion from Hz happens
//! at the configuration boundary.

use crate::cascade::TransferModel;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Membrane drum mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalParams<T> {
    /// Resonance frequency Ω_M.
    pub omega_m: T,
    /// Intrinsic half-linewidth γ_M0.
    pub gamma_m0: T,
    /// Thermal bath occupancy n̄_bath.
    pub n_bath: T,
    /// Effective mass in kg. Metadata only.
    pub m_eff: T,
    /// Zero-point amplitude in m. Metadata only.
    pub x_zpf: T,
}

impl<T: Real> MechanicalParams<T> {
    /// `γ_M0 = 0` is accepted: it describes a lossless membrane, which is only
    /// usable together with optical damping.
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_m > T::zero() && self.omega_m.is_finite()) {
            return Err(invalid("omega_m", "must be positive and finite"));
        }
        if !(self.gamma_m0 >= T::zero() && self.gamma_m0.is_finite()) {
            return Err(invalid("gamma_m0", "must be non-negative and finite"));
        }
        if !(self.n_bath >= T::zero() && self.n_bath.is_finite()) {
            return Err(invalid("n_bath", "must be non-negative and finite"));
        }
        Ok(())
    }
}

/// Two-port Fabry-Pérot cavity driven through port 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams<T> {
    /// Input-port half decay rate κ₁.
    pub kappa1: T,
    /// Loss-port half decay rate κ₂.
    pub kappa2: T,
    /// Laser detuning Δ = ω_L − ω_c (negative is red).
    pub detuning: T,
    /// Single-photon coupling g₀.
    pub g0: T,
    /// Mean intracavity photon number N.
    pub n_photons: T,
    /// Mode-matching efficiency η_mm.
    pub eta_mm: T,
}

impl<T: Real> CavityParams<T> {
    /// Total half linewidth κ = κ₁ + κ₂.
    pub fn kappa(&self) -> T {
        self.kappa1 + self.kappa2
    }

    /// Linearised coupling g = g₀ √N.
    pub fn coupling(&self) -> T {
        self.g0 * self.n_photons.sqrt()
    }

    /// Splits a total linewidth by the port ratio κ₁/κ₂.
    pub fn from_total(kappa: T, port_ratio: T, detuning: T, g0: T, n_photons: T, eta_mm: T) -> Self {
        let kappa2 = kappa / (port_ratio + T::one());
        Self { kappa1: kappa - kappa2, kappa2, detuning, g0, n_photons, eta_mm }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa1 >= T::zero()) {
            return Err(invalid("kappa1", "must be non-negative"));
        }
        if !(self.kappa2 >= T::zero()) {
            return Err(invalid("kappa2", "must be non-negative"));
        }
        if !(self.kappa() > T::zero() && self.kappa().is_finite()) {
            return Err(invalid("kappa", "kappa1 + kappa2 must be positive and finite"));
        }
        if !self.detuning.is_finite() {
            return Err(invalid("detuning", "must be finite"));
        }
        if !(self.g0 >= T::zero()) {
            return Err(invalid("g0", "must be non-negative"));
        }
        if !(self.n_photons >= T::zero() && self.n_photons.is_finite()) {
            return Err(invalid("n_photons", "must be non-negative and finite"));
        }
        if !(self.eta_mm >= T::zero() && self.eta_mm <= T::one()) {
            return Err(invalid("eta_mm", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Oscillator-level description of the collective spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams<T> {
    /// Signed Larmor frequency Ω_S; negative for a negative-mass oscillator.
    pub omega_s: T,
    /// Total half-linewidth γ_S.
    pub gamma_s: T,
    /// Intrinsic half-linewidth γ_S0. Metadata only.
    pub gamma_s0: T,
    /// Readout rate Γ_S.
    pub gamma_readout: T,
    /// Thermal spin occupancy n_S.
    pub n_spin: T,
}

impl<T: Real> SpinParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_s.abs() > T::zero() && self.omega_s.is_finite()) {
            return Err(invalid("omega_s", "must be non-zero and finite"));
        }
        if !(self.gamma_s > T::zero() && self.gamma_s.is_finite()) {
            return Err(invalid("gamma_s", "must be positive and finite"));
        }
        if !(self.gamma_readout >= T::zero() && self.gamma_readout.is_finite()) {
            return Err(invalid("gamma_readout", "must be non-negative and finite"));
        }
        if !(self.n_spin >= T::zero() && self.n_spin.is_finite()) {
            return Err(invalid("n_spin", "must be non-negative and finite"));
        }
        Ok(())
    }

    pub fn is_negative_mass(&self) -> bool {
        self.omega_s < T::zero()
    }

    /// Spin readout rate that gives quantum cooperativity `cq` at linewidth `gamma_s`
    /// and occupancy `n_spin`: `Γ_S = 2 C_q γ_S (2 n_S + 1)`.
    pub fn readout_for_cooperativity(cq: T, gamma_s: T, n_spin: T) -> T {
        T::two() * cq * gamma_s * (T::two() * n_spin + T::one())
    }

    /// Inverse of [`SpinParams::readout_for_cooperativity`].
    pub fn cooperativity(&self) -> T {
        self.gamma_readout / (T::two() * self.gamma_s * (T::two() * self.n_spin + T::one()))
    }
}

/// Microscopic light-atom parameters from which α and Γ_S follow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinPhysicalParams<T> {
    /// Detuning Δ_S from the optical transition (rad/s).
    pub detuning_atomic: T,
    /// Interaction area A (m²).
    pub beam_area: T,
    /// Probe wavelength λ (m).
    pub wavelength: T,
    /// Spontaneous emission rate Γ_sp (rad/s).
    pub gamma_sp: T,
    /// Vector polarizability factor α₁(Δ); unity at large detuning.
    pub alpha1: T,
    /// Probe photon flux Φ (1/s).
    pub photon_flux: T,
    /// Signed macroscopic spin projection J_x.
    pub jx: T,
}

impl<T: Real> SpinPhysicalParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.detuning_atomic == T::zero() || !self.detuning_atomic.is_finite() {
            return Err(invalid("detuning_atomic", "must be non-zero and finite"));
        }
        if !(self.beam_area > T::zero()) {
            return Err(invalid("beam_area", "must be positive"));
        }
        if !(self.photon_flux >= T::zero()) {
            return Err(invalid("photon_flux", "must be non-negative"));
        }
        Ok(())
    }
}

/// Optical chain between the two systems and towards the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeParams<T> {
    /// Transmissivity from the spin ensemble to the cavity.
    pub eta1: T,
    /// Transmissivity from the cavity to the detector.
    pub eta2: T,
    /// Deliberate quadrature rotation between the systems (rad).
    pub phi_interstage: T,
    /// Replaces the computed homodyne frame angle ψ + φ when set.
    pub detection_angle_override: Option<T>,
}

impl<T: Real> CascadeParams<T> {
    pub fn lossless() -> Self {
        Self { eta1: T::one(), eta2: T::one(), phi_interstage: T::zero(), detection_angle_override: None }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta1", self.eta1), ("eta2", self.eta2)] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(invalid(name, "must lie in [0, 1]"));
            }
        }
        if !self.phi_interstage.is_finite() {
            return Err(invalid("phi_interstage", "must be finite"));
        }
        Ok(())
    }
}

/// Membrane-in-cavity part of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptomechParams<T> {
    pub mech: MechanicalParams<T>,
    pub cavity: CavityParams<T>,
}

/// Classical drive noise added to the probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveNoise<T> {
    /// White-noise quanta n_WN added to the amplitude quadrature at the spin input.
    pub n_wn: T,
}

impl<T: Real> Default for DriveNoise<T> {
    fn default() -> Self {
        Self { n_wn: T::zero() }
    }
}

/// Complete configuration of the cascade. Either stage may be absent: a missing
/// spin stage passes light unchanged, a missing optomechanical stage is bypassed
/// (the light goes straight to the detector).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    pub spin: Option<SpinParams<T>>,
    pub optomech: Option<OptomechParams<T>>,
    pub cascade: CascadeParams<T>,
    pub drive: DriveNoise<T>,
    pub model: TransferModel,
}

impl<T: Real> SystemParams<T> {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = &self.spin {
            s.validate()?;
        }
        if let Some(om) = &self.optomech {
            om.mech.validate()?;
            om.cavity.validate()?;
        }
        self.cascade.validate()?;
        if !(self.drive.n_wn >= T::zero() && self.drive.n_wn.is_finite()) {
            return Err(invalid("n_wn", "must be non-negative and finite"));
        }
        Ok(())
    }

    /// Membrane and cavity with mode matching folded into the port rates.
    pub fn effective_optomech(&self) -> Option<OptomechParams<T>> {
        self.optomech.map(|om| OptomechParams {
            mech: om.mech,
            cavity: crate::optomech::apply_mode_matching(&om.cavity),
        })
    }
}
