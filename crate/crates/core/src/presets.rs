//! Experimental parameter sets and the scenarios built from them.
//!
//! Values are stored the way a lab notebook quotes them (Hz, K, degrees) and
//! converted to angular units by [`PresetValues::system`].

use std::fmt;
use std::str::FromStr;

use crate::cascade::TransferModel;
use crate::error::{invalid, ModelError, Result};
use crate::optomech::apply_mode_matching;
use crate::params::{
    CascadeParams, CavityParams, DriveNoise, MechanicalParams, OptomechParams, SpinParams, SystemParams,
};
use crate::scalar::{bath_occupancy, Real};
use crate::susceptibility::effective_resonance;

/// Which parts of the chain are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    MechOnly,
    SpinOnly,
    HybridNegative,
    HybridPositive,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::MechOnly, Scenario::SpinOnly, Scenario::HybridNegative, Scenario::HybridPositive];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::MechOnly => "mech-only",
            Scenario::SpinOnly => "spin-only",
            Scenario::HybridNegative => "hybrid-negative",
            Scenario::HybridPositive => "hybrid-positive",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| invalid("scenario", format!("unknown scenario `{s}`")))
    }
}

/// Measured quadrature in the detection frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quadrature<T> {
    Amplitude,
    Phase,
    Angle(T),
}

impl<T: Real> Quadrature<T> {
    pub fn angle(self) -> T {
        match self {
            Quadrature::Amplitude => T::zero(),
            Quadrature::Phase => T::FRAC_PI_2(),
            Quadrature::Angle(a) => a,
        }
    }

    /// Homodyne readout loses the visibility on top of the detector efficiency;
    /// the amplitude quadrature is read by direct detection.
    pub fn uses_homodyne(self) -> bool {
        !matches!(self, Quadrature::Amplitude)
    }
}

impl<T: Real> FromStr for Quadrature<T> {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amplitude" => Ok(Quadrature::Amplitude),
            "phase" => Ok(Quadrature::Phase),
            _ => {
                let rest = s
                    .strip_prefix("angle:")
                    .ok_or_else(|| invalid("quadrature", format!("expected amplitude, phase or angle:<rad>, got `{s}`")))?;
                let v: f64 = rest
                    .trim()
                    .parse()
                    .map_err(|_| invalid("quadrature", format!("bad angle `{rest}`")))?;
                if !v.is_finite() {
                    return Err(invalid("quadrature", "angle must be finite"));
                }
                Ok(Quadrature::Angle(T::lit(v)))
            }
        }
    }
}

/// Parameter set in laboratory units. Linewidths are half widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetValues<T> {
    pub mech_freq_hz: T,
    pub mech_linewidth_hz: T,
    pub t_bath_k: T,
    pub m_eff_kg: T,
    pub x_zpf_m: T,
    pub kappa_hz: T,
    /// κ₁/κ₂.
    pub port_ratio: T,
    pub detuning_hz: T,
    pub g0_hz: T,
    pub n_photons: T,
    pub eta_mm: T,
    pub spin_linewidth_hz: T,
    pub spin_intrinsic_linewidth_hz: T,
    pub n_spin: T,
    /// Spin quantum cooperativity; sets the spin readout rate.
    pub spin_cooperativity: T,
    /// Offset of |Ω_S| from the dressed membrane resonance.
    pub spin_detuning_hz: T,
    pub eta1: T,
    pub detection_efficiency: T,
    pub homodyne_visibility: T,
    /// Detection efficiency of the spin ensemble measured on its own.
    pub spin_detection_efficiency: T,
    pub interstage_rotation_deg: T,
    pub n_wn: T,
}

impl<T: Real> PresetValues<T> {
    fn common() -> Self {
        let l = T::lit;
        Self {
            mech_freq_hz: l(1.28e6),
            mech_linewidth_hz: l(50e-3),
            t_bath_k: l(7.0),
            m_eff_kg: l(14e-12),
            x_zpf_m: l(1e-15),
            kappa_hz: l(8.7e6),
            port_ratio: l(25.0),
            detuning_hz: l(-4.7e6),
            g0_hz: l(210.0),
            n_photons: l(5.7e6),
            eta_mm: l(0.9),
            spin_linewidth_hz: l(2.6e3),
            spin_intrinsic_linewidth_hz: l(500.0),
            n_spin: l(0.9),
            spin_cooperativity: l(1.10),
            spin_detuning_hz: T::zero(),
            eta1: l(0.61),
            detection_efficiency: l(0.72),
            homodyne_visibility: l(0.89),
            spin_detection_efficiency: l(0.7),
            interstage_rotation_deg: T::zero(),
            n_wn: T::zero(),
        }
    }

    /// Data set of the single-system and matched hybrid measurements.
    pub fn fig23() -> Self {
        Self::common()
    }

    /// Data set of the detuned hybrid measurement.
    pub fn fig4() -> Self {
        let l = T::lit;
        Self {
            kappa_hz: l(7.7e6),
            n_photons: l(4.2e6),
            spin_linewidth_hz: l(2.3e3),
            detection_efficiency: l(0.75),
            spin_detuning_hz: l(5.2e3),
            interstage_rotation_deg: l(-7.0),
            ..Self::common()
        }
    }

    pub const NAMES: [&'static str; 2] = ["fig23", "fig4"];

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "fig23" => Ok(Self::fig23()),
            "fig4" => Ok(Self::fig4()),
            _ => Err(invalid("preset", format!("unknown preset `{name}` (known: fig23, fig4)"))),
        }
    }

    pub fn mechanical(&self) -> MechanicalParams<T> {
        let omega_m = T::hz_to_rad(self.mech_freq_hz);
        MechanicalParams {
            omega_m,
            gamma_m0: T::hz_to_rad(self.mech_linewidth_hz),
            n_bath: bath_occupancy(self.t_bath_k, omega_m),
            m_eff: self.m_eff_kg,
            x_zpf: self.x_zpf_m,
        }
    }

    /// Cavity before mode matching is folded in.
    pub fn cavity(&self) -> CavityParams<T> {
        CavityParams::from_total(
            T::hz_to_rad(self.kappa_hz),
            self.port_ratio,
            T::hz_to_rad(self.detuning_hz),
            T::hz_to_rad(self.g0_hz),
            self.n_photons,
            self.eta_mm,
        )
    }

    pub fn optomech(&self) -> OptomechParams<T> {
        OptomechParams { mech: self.mechanical(), cavity: self.cavity() }
    }

    /// Spin oscillator placed `spin_detuning_hz` above the dressed membrane resonance.
    pub fn spin(&self, negative_mass: bool) -> Result<SpinParams<T>> {
        let om = self.optomech();
        let eff = effective_resonance(&om.mech, &apply_mode_matching(&om.cavity))?;
        let omega = eff.omega + T::hz_to_rad(self.spin_detuning_hz);
        let gamma_s = T::hz_to_rad(self.spin_linewidth_hz);
        Ok(SpinParams {
            omega_s: if negative_mass { -omega } else { omega },
            gamma_s,
            gamma_s0: T::hz_to_rad(self.spin_intrinsic_linewidth_hz),
            gamma_readout: SpinParams::readout_for_cooperativity(self.spin_cooperativity, gamma_s, self.n_spin),
            n_spin: self.n_spin,
        })
    }

    /// Full system for a scenario and measured quadrature.
    pub fn system(&self, scenario: Scenario, quadrature: Quadrature<T>) -> Result<SystemParams<T>> {
        let eta2 = if quadrature.uses_homodyne() {
            self.detection_efficiency * self.homodyne_visibility
        } else {
            self.detection_efficiency
        };
        let cascade = CascadeParams {
            eta1: self.eta1,
            eta2,
            phi_interstage: self.interstage_rotation_deg.to_radians(),
            detection_angle_override: None,
        };
        let drive = DriveNoise { n_wn: self.n_wn };
        let model = TransferModel::Full;
        let p = match scenario {
            Scenario::MechOnly => SystemParams { spin: None, optomech: Some(self.optomech()), cascade, drive, model },
            Scenario::SpinOnly => SystemParams {
                spin: Some(self.spin(true)?),
                optomech: None,
                cascade: CascadeParams { eta1: T::one(), eta2: self.spin_detection_efficiency, ..cascade },
                drive,
                model,
            },
            Scenario::HybridNegative | Scenario::HybridPositive => SystemParams {
                spin: Some(self.spin(scenario == Scenario::HybridNegative)?),
                optomech: Some(self.optomech()),
                cascade,
                drive,
                model,
            },
        };
        p.validate()?;
        Ok(p)
    }
}
