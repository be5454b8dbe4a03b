//! Cooperativity calibration, back-action to thermal ratios, occupancy
//! bookkeeping and the one-parameter bath temperature fit.

use crate::cascade::{spectrum, NoiseKind, Spectrum};
use crate::error::{invalid, ModelError, Result};
use crate::params::{CavityParams, OptomechParams, SystemParams};
use crate::scalar::{bath_occupancy, Real};
use crate::susceptibility::effective_resonance;

/// On-resonance heights of `S_PP − 1` with vacuum (`a_height`) and white-noise
/// (`b_height`) drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationInput<T> {
    pub a_height: T,
    pub b_height: T,
    pub n_wn: T,
    pub eta_det: T,
}

impl<T: Real> CalibrationInput<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_height >= T::zero() && self.a_height.is_finite()) {
            return Err(invalid("a_height", "must be non-negative and finite"));
        }
        if !(self.b_height >= self.a_height && self.b_height.is_finite()) {
            return Err(invalid("b_height", "must be finite and at least a_height"));
        }
        if !(self.n_wn > T::zero() && self.n_wn.is_finite()) {
            return Err(invalid("n_wn", "must be positive"));
        }
        if !(self.eta_det > T::zero() && self.eta_det <= T::one()) {
            return Err(invalid("eta_det", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Heights `(A, B)` produced by back-action and thermal responses `r_ba2`,
/// `r_th2` at detection efficiency `eta` and white-noise level `n_wn`.
pub fn forward_heights<T: Real>(eta: T, n_wn: T, r_ba2: T, r_th2: T) -> (T, T) {
    (eta * (r_ba2 + r_th2), eta * ((n_wn + T::one()) * r_ba2 + r_th2))
}

/// `R_BA² / R_Th² = (B − A) / ((n_WN + 1) A − B)`. The efficiency cancels.
pub fn ba_thermal_ratio<T: Real>(input: &CalibrationInput<T>) -> Result<T> {
    input.validate()?;
    let den = (input.n_wn + T::one()) * input.a_height - input.b_height;
    if !(den > T::zero()) {
        return Err(ModelError::CalibrationDomain(format!(
            "white-noise response exceeds linear-model bound: (n_wn + 1) A - B = {den:e} <= 0"
        )));
    }
    Ok((input.b_height - input.a_height) / den)
}

/// Calibration outcome with the individual responses recovered using `eta_det`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationResult<T> {
    /// `R_BA² / R_Th²`; for a spin oscillator this is its quantum cooperativity.
    pub ratio: T,
    pub cooperativity: T,
    pub r_ba2: T,
    pub r_th2: T,
}

pub fn calibrate<T: Real>(input: &CalibrationInput<T>) -> Result<CalibrationResult<T>> {
    let ratio = ba_thermal_ratio(input)?;
    let r_ba2 = (input.b_height - input.a_height) / (input.eta_det * input.n_wn);
    let r_th2 = input.a_height / input.eta_det - r_ba2;
    Ok(CalibrationResult { ratio, cooperativity: ratio, r_ba2, r_th2 })
}

/// `C_q^M = g₀² N / (2 κ γ_M0 n̄_bath)`.
pub fn quantum_cooperativity_mech<T: Real>(om: &OptomechParams<T>) -> T {
    let c = &om.cavity;
    c.g0 * c.g0 * c.n_photons / (T::two() * c.kappa() * om.mech.gamma_m0 * om.mech.n_bath)
}

/// Back-action to thermal ratio for a given cooperativity and detuned cavity.
pub fn ba_thermal_ratio_from_cq<T: Real>(cq: T, cavity: &CavityParams<T>, omega_m: T) -> T {
    let k2 = cavity.kappa() * cavity.kappa();
    let d = cavity.detuning;
    cq * T::half() * (k2 / (k2 + (d - omega_m).powi(2)) + k2 / (k2 + (d + omega_m).powi(2)))
}

pub fn ba_thermal_ratio_mech<T: Real>(om: &OptomechParams<T>) -> T {
    ba_thermal_ratio_from_cq(quantum_cooperativity_mech(om), &om.cavity, om.mech.omega_m)
}

/// `n̄ = (γ_M0/γ_M) n̄_bath + (γ_opt/γ_M) n̄_min`.
pub fn mean_occupancy<T: Real>(gamma_m0: T, gamma_opt: T, n_bath: T, n_min: T) -> T {
    let g = gamma_m0 + gamma_opt;
    let optical = if gamma_opt == T::zero() { T::zero() } else { gamma_opt / g * n_min };
    gamma_m0 / g * n_bath + optical
}

/// Sideband cooling limit `A₊ / (A₋ − A₊)` with the Stokes and anti-Stokes
/// rates `A± ∝ κ / (κ² + (Δ ∓ Ω_M)²)`. Infinite when the cavity does not cool.
pub fn cooling_limit<T: Real>(cavity: &CavityParams<T>, omega_m: T) -> T {
    let k = cavity.kappa();
    let d = cavity.detuning;
    let a_minus = k / (k * k + (d + omega_m).powi(2));
    let a_plus = k / (k * k + (d - omega_m).powi(2));
    if a_minus > a_plus {
        a_plus / (a_minus - a_plus)
    } else {
        T::infinity()
    }
}

/// Occupancy of the optically damped membrane, split into its two parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupancy<T> {
    pub gamma_total: T,
    pub gamma_opt: T,
    pub n_min: T,
    /// `(γ_M0/γ_M) n̄_bath`.
    pub thermal: T,
    /// `(γ_opt/γ_M) n̄_min`.
    pub optical: T,
    pub total: T,
}

pub fn effective_occupancy<T: Real>(om: &OptomechParams<T>) -> Result<Occupancy<T>> {
    let mech = &om.mech;
    let gamma_opt = if om.cavity.detuning == T::zero() || om.cavity.n_photons == T::zero() {
        T::zero()
    } else {
        effective_resonance(mech, &om.cavity)?.optical_damping(mech)
    };
    let gamma_total = mech.gamma_m0 + gamma_opt;
    if !(gamma_total > T::zero()) {
        return Err(ModelError::Unstable { reason: "total mechanical damping is not positive".into() });
    }
    let n_min = cooling_limit(&om.cavity, mech.omega_m);
    let thermal = mech.gamma_m0 / gamma_total * mech.n_bath;
    let optical = if gamma_opt == T::zero() { T::zero() } else { gamma_opt / gamma_total * n_min };
    Ok(Occupancy { gamma_total, gamma_opt, n_min, thermal, optical, total: thermal + optical })
}

/// Result of the bath temperature fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult<T> {
    pub t_bath: T,
    /// Sum of squared residuals at `t_bath`.
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Fits the membrane bath temperature to a measured PSD sampled on `grid_hz`
/// at quadrature `angle`, everything else fixed by `params`.
///
/// The model is affine in the bath occupancy, so two spectra suffice; the
/// search itself is a golden-section minimisation to relative tolerance 1e-4.
pub fn fit_bath_temperature<T: Real>(
    params: &SystemParams<T>,
    grid_hz: &[T],
    measured: &[T],
    angle: T,
    search_k: (T, T),
) -> Result<FitResult<T>> {
    let (t_lo, t_hi) = search_k;
    if grid_hz.is_empty() || measured.is_empty() {
        return Err(ModelError::NoBracket("no data points overlap the model grid".into()));
    }
    if grid_hz.len() != measured.len() {
        return Err(invalid("measured", "length differs from the frequency grid"));
    }
    if !(t_lo > T::zero() && t_hi > t_lo && t_hi.is_finite()) {
        return Err(invalid("search", "needs 0 < tmin < tmax"));
    }
    let om = params
        .optomech
        .ok_or_else(|| ModelError::Unsupported("bath fit needs an optomechanical stage".into()))?;

    let mut cold = *params;
    if let Some(o) = cold.optomech.as_mut() {
        o.mech.n_bath = T::zero();
    }
    let base: Spectrum<T> = spectrum(&cold, grid_hz, angle)?;
    let mem0 = base.column(NoiseKind::MembraneThermal);
    let omega_m = om.mech.omega_m;
    let residual = |t: T| -> T {
        let scale = T::two() * bath_occupancy(t, omega_m) + T::one();
        base.total
            .iter()
            .zip(mem0)
            .zip(measured)
            .map(|((&tot, &m), &y)| {
                let r = tot + m * (scale - T::one()) - y;
                r * r
            })
            .sum()
    };

    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let (mut a, mut b) = (t_lo, t_hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (residual(c), residual(d));
    let tol = T::lit(1e-4);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < 500 {
        iterations += 1;
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = residual(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = residual(d);
        }
        if (b - a) <= tol * (a + b) * T::half() {
            converged = true;
            break;
        }
    }
    let t = (a + b) * T::half();
    let edge = tol * (t_hi - t_lo).max(t);
    if t - t_lo <= edge || t_hi - t <= edge {
        return Err(ModelError::NoBracket(format!(
            "minimum at the edge of the search interval [{t_lo}, {t_hi}] K"
        )));
    }
    Ok(FitResult { t_bath: t, residual: residual(t), iterations, converged })
}

/// [`fit_bath_temperature`] against the total of a previously computed spectrum.
pub fn fit_bath_temperature_spectrum<T: Real>(
    measured: &Spectrum<T>,
    params: &SystemParams<T>,
    search_k: (T, T),
) -> Result<FitResult<T>> {
    fit_bath_temperature(params, &measured.grid_hz, &measured.total, measured.quadrature_angle, search_k)
}
