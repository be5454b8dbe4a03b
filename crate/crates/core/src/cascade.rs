//! Hybrid chain: spin stage, interstage loss and rotation, optomechanical
//! cavity, detection loss and homodyne frame.
//!
//! Spectra are one-sided, in Hz, normalised so that a vacuum quadrature has
//! unit PSD. Thermal forces enter with PSD `2(2n + 1)` in the same units.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, ModelError, Result};
use crate::matrix::{Column2, ComplexMat2};
use crate::optomech::{check_stability, detection_phase, lorentzian, transfer_broadband, transfer_full, transfer_nsb, OmTransfer};
use crate::params::{OptomechParams, SpinParams, SystemParams};
use crate::scalar::Real;
use crate::spin::{spin_transfer, SpinTransfer};
use crate::susceptibility::{chi_mech_bare, chi_mech_eff, effective_resonance, readout_rate_mech};

/// Which optomechanical transfer model the chain uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransferModel {
    #[default]
    Full,
    /// Resonant bad-cavity limit; detuning is ignored and the frame is not rotated.
    Broadband,
    Nsb,
}

/// Independent noise inputs of the chain, in output column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    /// Probe vacuum entering the spin stage.
    Shot,
    SpinThermal,
    InterstageVacuum,
    CavityLossVacuum,
    MembraneThermal,
    PostVacuum,
    /// Classical amplitude noise on the probe.
    WhiteNoise,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 7] = [
        NoiseKind::Shot,
        NoiseKind::SpinThermal,
        NoiseKind::InterstageVacuum,
        NoiseKind::CavityLossVacuum,
        NoiseKind::MembraneThermal,
        NoiseKind::PostVacuum,
        NoiseKind::WhiteNoise,
    ];

    /// Column label used in tabular output.
    pub fn label(self) -> &'static str {
        match self {
            NoiseKind::Shot => "shot",
            NoiseKind::SpinThermal => "spin_thermal",
            NoiseKind::InterstageVacuum => "interstage_vac",
            NoiseKind::CavityLossVacuum => "cavity_loss_vac",
            NoiseKind::MembraneThermal => "membrane_thermal",
            NoiseKind::PostVacuum => "post_vac",
            NoiseKind::WhiteNoise => "white_noise",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_vacuum(self) -> bool {
        matches!(self, NoiseKind::Shot | NoiseKind::InterstageVacuum | NoiseKind::CavityLossVacuum | NoiseKind::PostVacuum)
    }
}

/// How an input reaches the detector: as a two-quadrature vacuum field or as
/// a scalar force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel<T> {
    Field(ComplexMat2<T>),
    Force(Column2<T>),
}

/// Transfer of every noise input to the detection frame at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferSet<T> {
    /// Angular sideband frequency.
    pub omega: T,
    pub shot: ComplexMat2<T>,
    pub spin_force: Column2<T>,
    pub interstage: ComplexMat2<T>,
    pub cavity_loss: ComplexMat2<T>,
    pub membrane_force: Column2<T>,
    pub post: ComplexMat2<T>,
}

impl<T: Real> TransferSet<T> {
    /// The six physical channels. White noise travels along the amplitude
    /// column of `shot`.
    pub fn channels(&self) -> [(NoiseKind, Channel<T>); 6] {
        [
            (NoiseKind::Shot, Channel::Field(self.shot)),
            (NoiseKind::SpinThermal, Channel::Force(self.spin_force)),
            (NoiseKind::InterstageVacuum, Channel::Field(self.interstage)),
            (NoiseKind::CavityLossVacuum, Channel::Field(self.cavity_loss)),
            (NoiseKind::MembraneThermal, Channel::Force(self.membrane_force)),
            (NoiseKind::PostVacuum, Channel::Field(self.post)),
        ]
    }
}

/// Input spectral densities of the non-vacuum sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceStrengths<T> {
    pub spin_thermal: T,
    pub membrane_thermal: T,
    pub white_noise: T,
}

impl<T: Real> SourceStrengths<T> {
    pub fn from_params(params: &SystemParams<T>) -> Self {
        let thermal = |n: T| T::two() * (T::two() * n + T::one());
        Self {
            spin_thermal: params.spin.map_or(T::zero(), |s| thermal(s.n_spin)),
            membrane_thermal: params.optomech.map_or(T::zero(), |om| thermal(om.mech.n_bath)),
            white_noise: params.drive.n_wn,
        }
    }
}

fn om_stage<T: Real>(omega: T, om: &OptomechParams<T>, model: TransferModel) -> Result<OmTransfer<T>> {
    match model {
        TransferModel::Full => transfer_full(omega, &om.mech, &om.cavity),
        TransferModel::Broadband => transfer_broadband(omega, &om.mech, &om.cavity),
        TransferModel::Nsb => transfer_nsb(omega, &om.mech, &om.cavity),
    }
}

/// Homodyne frame angle applied before projecting onto the measured quadrature.
pub fn frame_angle<T: Real>(params: &SystemParams<T>) -> T {
    if let Some(a) = params.cascade.detection_angle_override {
        return a;
    }
    match (params.effective_optomech(), params.model) {
        (Some(om), TransferModel::Full | TransferModel::Nsb) => detection_phase(&om.cavity),
        _ => T::zero(),
    }
}

/// Validation and the stability guard for a configuration.
pub fn check_system<T: Real>(params: &SystemParams<T>) -> Result<()> {
    params.validate()?;
    if let Some(om) = params.effective_optomech() {
        match params.model {
            TransferModel::Broadband => {
                if !(om.mech.gamma_m0 > T::zero()) {
                    return Err(ModelError::Unstable {
                        reason: "broadband readout of an undamped membrane has no stationary state".into(),
                    });
                }
            }
            _ => check_stability(&om.mech, &om.cavity)?,
        }
    }
    Ok(())
}

/// Composes the chain at angular frequency `omega`.
pub fn hybrid_transfer<T: Real>(omega: T, params: &SystemParams<T>) -> Result<TransferSet<T>> {
    check_system(params)?;
    hybrid_transfer_unchecked(omega, params)
}

fn hybrid_transfer_unchecked<T: Real>(omega: T, params: &SystemParams<T>) -> Result<TransferSet<T>> {
    let om = match params.effective_optomech() {
        Some(om) => om_stage(omega, &om, params.model)?,
        None => OmTransfer::identity(),
    };
    let sp = match &params.spin {
        Some(s) => spin_transfer(omega, s),
        None => SpinTransfer::identity(),
    };
    let c = &params.cascade;
    let frame = ComplexMat2::rotation(frame_angle(params)).transpose();
    let m_rot = frame * om.m_light;
    let m_inter = m_rot * ComplexMat2::rotation(c.phi_interstage);
    let t12 = (c.eta1 * c.eta2).sqrt();
    Ok(TransferSet {
        omega,
        shot: (m_inter * sp.s_light).scale_re(t12),
        spin_force: m_inter.apply(sp.f_force).scale_re(t12),
        interstage: m_rot.scale_re(((T::one() - c.eta1) * c.eta2).sqrt()),
        cavity_loss: (frame * om.v_loss).scale_re(c.eta2.sqrt()),
        membrane_force: frame.apply(om.f_force).scale_re(c.eta2.sqrt()),
        post: frame.scale_re((T::one() - c.eta2).sqrt()),
    })
}

/// PSD of one quadrature at one frequency, split by source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdPoint<T> {
    pub total: T,
    /// Indexed by [`NoiseKind::index`].
    pub per_source: [T; 7],
}

fn psd_from_set<T: Real>(set: &TransferSet<T>, s: &SourceStrengths<T>, angle: T) -> PsdPoint<T> {
    let mut per = [T::zero(); 7];
    for (kind, ch) in set.channels() {
        per[kind.index()] = match ch {
            Channel::Field(m) => {
                let (a, b) = m.project_row(angle);
                a.norm_sqr() + b.norm_sqr()
            }
            Channel::Force(col) => {
                let strength = match kind {
                    NoiseKind::SpinThermal => s.spin_thermal,
                    _ => s.membrane_thermal,
                };
                col.project(angle).norm_sqr() * strength
            }
        };
    }
    per[NoiseKind::WhiteNoise.index()] = set.shot.project_row(angle).0.norm_sqr() * s.white_noise;
    PsdPoint { total: per.iter().copied().sum(), per_source: per }
}

/// Measured PSD of the quadrature at `angle` in the detection frame: `π/2`
/// selects the phase quadrature, `0` the amplitude quadrature.
pub fn output_psd<T: Real>(omega: T, params: &SystemParams<T>, angle: T) -> Result<PsdPoint<T>> {
    let set = hybrid_transfer(omega, params)?;
    Ok(psd_from_set(&set, &SourceStrengths::from_params(params), angle))
}

/// Full 2×2 output spectral matrix `Σ_k T_k S_k T_k†` in the detection frame.
pub fn output_spectral_matrix<T: Real>(omega: T, params: &SystemParams<T>) -> Result<ComplexMat2<T>> {
    let set = hybrid_transfer(omega, params)?;
    let s = SourceStrengths::from_params(params);
    let outer = |c: Column2<T>| {
        ComplexMat2::new(c.x * c.x.conj(), c.x * c.p.conj(), c.p * c.x.conj(), c.p * c.p.conj())
    };
    let mut acc = ComplexMat2::zero();
    for (kind, ch) in set.channels() {
        acc = acc
            + match ch {
                Channel::Field(m) => m * m.adjoint(),
                Channel::Force(c) => outer(c).scale_re(match kind {
                    NoiseKind::SpinThermal => s.spin_thermal,
                    _ => s.membrane_thermal,
                }),
            };
    }
    Ok(acc + outer(set.shot.col(0)).scale_re(s.white_noise))
}

/// Sampled output spectrum with per-source decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub grid_hz: Vec<T>,
    pub total: Vec<T>,
    /// One column per [`NoiseKind`], indexed by [`NoiseKind::index`].
    pub columns: [Vec<T>; 7],
    pub params: SystemParams<T>,
    pub quadrature_angle: T,
}

impl<T: Real> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.grid_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid_hz.is_empty()
    }

    pub fn column(&self, kind: NoiseKind) -> &[T] {
        &self.columns[kind.index()]
    }

    /// Back-action part: everything above shot noise that is not a thermal
    /// force or classical drive noise.
    pub fn qba(&self) -> Vec<T> {
        let th = self.column(NoiseKind::MembraneThermal);
        let sp = self.column(NoiseKind::SpinThermal);
        let wn = self.column(NoiseKind::WhiteNoise);
        (0..self.len()).map(|i| self.total[i] - th[i] - sp[i] - wn[i] - T::one()).collect()
    }
}

pub(crate) fn check_grid<T: Real>(grid_hz: &[T]) -> Result<()> {
    if grid_hz.is_empty() {
        return Err(ModelError::EmptyGrid);
    }
    for (i, w) in grid_hz.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(ModelError::NonIncreasingGrid { index: i + 1 });
        }
    }
    if grid_hz.iter().any(|f| !f.is_finite()) {
        return Err(invalid("grid", "frequencies must be finite"));
    }
    Ok(())
}

/// Evaluates the output PSD on a strictly increasing grid in Hz. Points are
/// computed in parallel; the result does not depend on the thread count.
pub fn spectrum<T: Real>(params: &SystemParams<T>, grid_hz: &[T], angle: T) -> Result<Spectrum<T>> {
    check_grid(grid_hz)?;
    check_system(params)?;
    let strengths = SourceStrengths::from_params(params);
    let points: Vec<PsdPoint<T>> = grid_hz
        .par_iter()
        .map(|&f| hybrid_transfer_unchecked(T::hz_to_rad(f), params).map(|set| psd_from_set(&set, &strengths, angle)))
        .collect::<Result<_>>()?;
    let mut columns: [Vec<T>; 7] = Default::default();
    for c in columns.iter_mut() {
        c.reserve(points.len());
    }
    let mut total = Vec::with_capacity(points.len());
    for p in &points {
        total.push(p.total);
        for (c, v) in columns.iter_mut().zip(p.per_source) {
            c.push(v);
        }
    }
    Ok(Spectrum { grid_hz: grid_hz.to_vec(), total, columns, params: *params, quadrature_angle: angle })
}

/// Evenly spaced grid of `points` frequencies from `start` to `stop` inclusive.
pub fn linear_grid<T: Real>(start: T, stop: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => {
            let step = (stop - start) / T::lit((n - 1) as f64);
            (0..n).map(|i| if i == n - 1 { stop } else { start + step * T::lit(i as f64) }).collect()
        }
    }
}

/// Normalisation of a zero-point-unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZpfConvention {
    /// Thermal oscillator variance `n + ½`.
    HalfQuantum,
    /// Thermal oscillator variance `2n + 1`.
    #[default]
    FullQuantum,
}

impl ZpfConvention {
    fn factor<T: Real>(self) -> T {
        match self {
            ZpfConvention::HalfQuantum => T::one(),
            ZpfConvention::FullQuantum => T::two(),
        }
    }
}

/// Units of an integrated variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceUnits {
    /// Area of `PSD − 1` in shot-noise units times Hz.
    ShotNoise,
    /// Membrane displacement variance in units of `x_zpf²`.
    Zpf(ZpfConvention),
}

fn interp<T: Real>(x: &[T], y: &[T], at: T) -> T {
    let i = x.partition_point(|&v| v <= at).clamp(1, x.len() - 1);
    let (x0, x1, y0, y1) = (x[i - 1], x[i], y[i - 1], y[i]);
    y0 + (y1 - y0) * (at - x0) / (x1 - x0)
}

/// Trapezoidal integral of sampled `y(x)` over `[lo, hi]`, interpolating
/// linearly at the band edges.
pub fn trapezoid_band<T: Real>(x: &[T], y: &[T], lo: T, hi: T) -> Result<T> {
    check_grid(x)?;
    let (gl, gh) = (x[0], x[x.len() - 1]);
    if !(lo >= gl && hi <= gh && lo <= hi) {
        return Err(ModelError::BandOutsideGrid {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
            grid_lo: gl.to_f64().unwrap_or(f64::NAN),
            grid_hi: gh.to_f64().unwrap_or(f64::NAN),
        });
    }
    if lo == hi || x.len() == 1 {
        return Ok(T::zero());
    }
    let mut xs = vec![lo];
    let mut ys = vec![interp(x, y, lo)];
    for (&xi, &yi) in x.iter().zip(y) {
        if xi > lo && xi < hi {
            xs.push(xi);
            ys.push(yi);
        }
    }
    xs.push(hi);
    ys.push(interp(x, y, hi));
    Ok(xs.windows(2).zip(ys.windows(2)).map(|(a, b)| (a[1] - a[0]) * (b[0] + b[1]) * T::half()).sum())
}

/// Factor turning an area of the spectrum (SN·Hz) into membrane variance in
/// `x_zpf²`. It is fixed by the thermal column: its area must equal the thermal
/// displacement variance `conv · 2γ_M0 (n + ½) ∫ |χ_eff|² df` over the same band.
pub fn zpf_conversion<T: Real>(sp: &Spectrum<T>, lo: T, hi: T, convention: ZpfConvention) -> Result<T> {
    let om = sp
        .params
        .effective_optomech()
        .ok_or_else(|| ModelError::Unsupported("zpf units need an optomechanical stage".into()))?;
    let th_area = trapezoid_band(&sp.grid_hz, sp.column(NoiseKind::MembraneThermal), lo, hi)?;
    if !(th_area > T::zero()) {
        return Err(ModelError::Unsupported("zpf units need a non-zero membrane thermal column in the band".into()));
    }
    let chi2 = sp
        .grid_hz
        .iter()
        .map(|&f| {
            let w = T::hz_to_rad(f);
            match sp.params.model {
                TransferModel::Broadband => chi_mech_bare(w, &om.mech),
                _ => chi_mech_eff(w, &om.mech, &om.cavity),
            }
            .map(|c| c.norm_sqr())
        })
        .collect::<Result<Vec<_>>>()?;
    let var_th = convention.factor::<T>()
        * T::two()
        * om.mech.gamma_m0
        * (om.mech.n_bath + T::half())
        * trapezoid_band(&sp.grid_hz, &chi2, lo, hi)?;
    Ok(var_th / th_area)
}

/// Area of `total − 1` over the band, optionally converted to `x_zpf²`.
pub fn integrate_variance<T: Real>(sp: &Spectrum<T>, band_hz: (T, T), units: VarianceUnits) -> Result<T> {
    let excess: Vec<T> = sp.total.iter().map(|&v| v - T::one()).collect();
    let area = trapezoid_band(&sp.grid_hz, &excess, band_hz.0, band_hz.1)?;
    match units {
        VarianceUnits::ShotNoise => Ok(area),
        VarianceUnits::Zpf(conv) => Ok(area * zpf_conversion(sp, band_hz.0, band_hz.1, conv)?),
    }
}

/// Integral of an arbitrary column (e.g. from [`Spectrum::qba`]) in the same units.
pub fn integrate_column<T: Real>(sp: &Spectrum<T>, column: &[T], band_hz: (T, T), units: VarianceUnits) -> Result<T> {
    let area = trapezoid_band(&sp.grid_hz, column, band_hz.0, band_hz.1)?;
    match units {
        VarianceUnits::ShotNoise => Ok(area),
        VarianceUnits::Zpf(conv) => Ok(area * zpf_conversion(sp, band_hz.0, band_hz.1, conv)?),
    }
}

/// Lorentzian approximation of the hybrid back-action PSD (per unit amplitude
/// noise). `omega_s` is signed; detunings are taken from `|Ω_S|`.
#[allow(clippy::too_many_arguments)]
pub fn qba_hybrid_approx<T: Real>(omega: T, gm: T, gs: T, gamma_m: T, gamma_s: T, omega_m: T, omega_s: T) -> T {
    let dm = omega - omega_m;
    let ds = omega - omega_s.abs();
    let sign = if omega_s < T::zero() { -T::one() } else { T::one() };
    let num = (gm * ds + sign * gs * dm).powi(2) + gm * gm * gamma_s * gamma_s;
    num / ((dm * dm + gamma_m * gamma_m) * (ds * ds + gamma_s * gamma_s))
}

/// Back-action interference envelope `|Γ_M χ_M + Γ_S χ_S|²` of the broadband model.
pub fn qba_ideal_broadband<T: Real>(omega: T, params: &SystemParams<T>) -> Result<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    if let Some(om) = params.optomech {
        acc = acc + chi_mech_bare(omega, &om.mech)? * readout_rate_mech(&om.cavity);
    }
    if let Some(s) = params.spin {
        acc = acc + crate::susceptibility::chi_spin(omega, &s) * s.gamma_readout;
    }
    Ok(acc.norm_sqr())
}

/// Spin oscillator tuned to the dressed membrane resonance: same frequency,
/// same linewidth and a readout rate matching the membrane's resonant response.
pub fn matched_spin<T: Real>(om: &OptomechParams<T>, negative_mass: bool, n_spin: T) -> Result<SpinParams<T>> {
    let eff = effective_resonance(&om.mech, &om.cavity)?;
    let (l0, _) = lorentzian(T::zero(), &om.cavity);
    let gamma_readout = readout_rate_mech(&om.cavity) * l0 * l0 * om.mech.omega_m / eff.omega;
    Ok(SpinParams {
        omega_s: if negative_mass { -eff.omega } else { eff.omega },
        gamma_s: eff.gamma,
        gamma_s0: eff.gamma,
        gamma_readout,
        n_spin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{CascadeParams, CavityParams, DriveNoise, MechanicalParams};
    use crate::scalar::Real;

    fn tp(x: f64) -> f64 {
        f64::hz_to_rad(x)
    }

    fn om() -> OptomechParams<f64> {
        OptomechParams {
            mech: MechanicalParams { omega_m: tp(1.28e6), gamma_m0: tp(50e-3), n_bath: 1.14e5, m_eff: 14e-12, x_zpf: 1e-15 },
            cavity: CavityParams::from_total(tp(8.7e6), 25.0, tp(-4.7e6), tp(210.0), 5.7e6, 0.9),
        }
    }

    fn spin(sign: f64) -> SpinParams<f64> {
        SpinParams {
            omega_s: sign * tp(1.268e6),
            gamma_s: tp(2.6e3),
            gamma_s0: tp(500.0),
            gamma_readout: SpinParams::readout_for_cooperativity(1.1, tp(2.6e3), 0.9),
            n_spin: 0.9,
        }
    }

    fn hybrid() -> SystemParams<f64> {
        SystemParams {
            spin: Some(spin(-1.0)),
            optomech: Some(om()),
            cascade: CascadeParams { eta1: 0.61, eta2: 0.64, phi_interstage: 0.1, detection_angle_override: None },
            drive: DriveNoise { n_wn: 0.7 },
            model: TransferModel::Full,
        }
    }

    fn empty() -> SystemParams<f64> {
        SystemParams { spin: None, optomech: None, cascade: CascadeParams::lossless(), drive: DriveNoise::default(), model: TransferModel::Full }
    }

    /// Straight-line composition of the chain, written without the helpers above.
    fn oracle(omega: f64, p: &SystemParams<f64>) -> [ComplexMat2<f64>; 4] {
        let o = p.effective_optomech().unwrap();
        let s = p.spin.unwrap();
        let t = transfer_full(omega, &o.mech, &o.cavity).unwrap();
        let chi = Complex::new(2.0 * s.omega_s, 0.0)
            / Complex::new(s.omega_s * s.omega_s - omega * omega, -2.0 * omega * s.gamma_s);
        let smat = ComplexMat2::new(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0), chi * s.gamma_readout, Complex::new(1.0, 0.0));
        let k = &o.cavity;
        let ang = (k.detuning).atan2(k.kappa1 - k.kappa2) + (k.detuning / k.kappa()).atan();
        let (sn, cs) = ang.sin_cos();
        let frame = ComplexMat2::from_real(cs, sn, -sn, cs);
        let (s2, c2) = p.cascade.phi_interstage.sin_cos();
        let r = ComplexMat2::from_real(c2, -s2, s2, c2);
        let e1 = p.cascade.eta1;
        let e2 = p.cascade.eta2;
        [
            (frame * t.m_light * r * smat).scale_re((e1 * e2).sqrt()),
            (frame * t.m_light).scale_re(((1.0 - e1) * e2).sqrt()),
            (frame * t.v_loss).scale_re(e2.sqrt()),
            frame.scale_re((1.0 - e2).sqrt()),
        ]
    }

    #[test]
    fn transfer_set_matches_straight_line_oracle() {
        let p = hybrid();
        let w = p.effective_optomech().unwrap().mech.omega_m;
        let set = hybrid_transfer(w, &p).unwrap();
        let o = oracle(w, &p);
        for (a, b) in [set.shot, set.interstage, set.cavity_loss, set.post].iter().zip(o.iter()) {
            assert!((*a - *b).max_abs() <= 1e-10 * b.max_abs().max(1e-300));
        }
        // Force columns: the spin force acts like a P-quadrature input of the
        // spin stage scaled by √(γ_S/Γ_S), seen through the rest of the chain.
        let s = p.spin.unwrap();
        let col = o[0].col(1).scale_re((s.gamma_s / s.gamma_readout).sqrt());
        let spin_col = set.spin_force;
        let chi = crate::susceptibility::chi_spin(w, &s);
        let expect = col.scale(chi * s.gamma_readout);
        assert!((spin_col.x - expect.x).norm() <= 1e-10 * expect.x.norm().max(expect.p.norm()));
        assert!((spin_col.p - expect.p).norm() <= 1e-10 * expect.x.norm().max(expect.p.norm()));
    }

    #[test]
    fn fully_lossy_channel_is_vacuum() {
        let mut p = hybrid();
        p.cascade.eta2 = 0.0;
        p.drive.n_wn = 0.0;
        for f in [1.2e6, 1.27e6, 1.35e6] {
            for a in [0.0, 0.7, std::f64::consts::FRAC_PI_2] {
                let r = output_psd(tp(f), &p, a).unwrap();
                assert!((r.total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vacuum_in_vacuum_out() {
        let p = empty();
        for a in [0.0, 0.3, 1.2] {
            let r = output_psd(tp(1.0e6), &p, a).unwrap();
            assert!((r.total - 1.0).abs() < 1e-15);
        }
        let mut p = empty();
        let mut o = om();
        o.cavity.n_photons = 0.0;
        let mut s = spin(1.0);
        s.gamma_readout = 0.0;
        p.optomech = Some(o);
        p.spin = Some(s);
        p.cascade.eta1 = 0.5;
        p.cascade.eta2 = 0.8;
        let r = output_psd(tp(1.28e6), &p, 0.4).unwrap();
        assert!((r.total - 1.0).abs() < 1e-12, "{}", r.total);
    }

    #[test]
    fn shot_noise_floor_far_from_resonance() {
        let mut p = hybrid();
        p.drive.n_wn = 0.0;
        for f in [20e6, 40e6] {
            let r = output_psd(tp(f), &p, std::f64::consts::FRAC_PI_2).unwrap();
            assert!((r.total - 1.0).abs() < 1e-3, "{f}: {}", r.total);
        }
    }

    #[test]
    fn columns_sum_to_total() {
        let p = hybrid();
        let grid = linear_grid(1.25e6, 1.30e6, 201);
        for a in [0.0, std::f64::consts::FRAC_PI_2, 0.9] {
            let s = spectrum(&p, &grid, a).unwrap();
            for i in 0..s.len() {
                let sum: f64 = s.columns.iter().map(|c| c[i]).sum();
                assert!((sum - s.total[i]).abs() <= 1e-10 * s.total[i]);
                assert!(s.total[i] >= 0.0);
            }
        }
    }

    #[test]
    fn spectrum_grid_checks() {
        let p = hybrid();
        assert_eq!(spectrum(&p, &[], 0.0).unwrap_err(), ModelError::EmptyGrid);
        let rev = [1.3e6, 1.2e6];
        assert!(matches!(spectrum(&p, &rev, 0.0), Err(ModelError::NonIncreasingGrid { index: 1 })));
        let one = spectrum(&p, &[1.27e6], 1.0).unwrap();
        let direct = output_psd(tp(1.27e6), &p, 1.0).unwrap();
        assert_eq!(one.total[0], direct.total);
    }

    #[test]
    fn unstable_configuration_is_reported() {
        let mut p = hybrid();
        if let Some(o) = p.optomech.as_mut() {
            o.cavity.detuning = -o.cavity.detuning;
        }
        assert!(matches!(spectrum(&p, &[1.28e6], 0.0), Err(ModelError::Unstable { .. })));
    }

    #[test]
    fn spin_stage_is_qnd_on_amplitude() {
        let mut p = empty();
        p.spin = Some(spin(-1.0));
        p.drive.n_wn = 0.0;
        for f in [1.26e6, 1.268e6, 1.27e6] {
            let r = output_psd(tp(f), &p, 0.0).unwrap();
            assert_eq!(r.total, 1.0);
        }
    }

    #[test]
    fn spin_on_resonance_phase_response() {
        let mut p = empty();
        let s = spin(1.0);
        p.spin = Some(s);
        p.cascade.eta2 = 0.7;
        let r = output_psd(s.omega_s, &p, std::f64::consts::FRAC_PI_2).unwrap();
        // Scalar oracle: |Γχ|² = (Γ/γ)² from the probe and Γγ|χ|²·2(2n+1) from the bath.
        let g = s.gamma_readout / s.gamma_s;
        let expect = 0.7 * (g * g + g * 2.0 * (2.0 * s.n_spin + 1.0));
        assert!(((r.total - 1.0) - expect).abs() <= 1e-9 * expect);
    }

    #[test]
    fn white_noise_only_in_amplitude_input() {
        let mut p = empty();
        p.drive.n_wn = 1.2;
        p.cascade.eta2 = 0.7;
        let amp = output_psd(tp(1e6), &p, 0.0).unwrap();
        let ph = output_psd(tp(1e6), &p, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((amp.total - (0.7 * 1.2 + 1.0)).abs() < 1e-12);
        assert!((ph.total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_rules() {
        let x = linear_grid(0.0, 10.0, 11);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let a = trapezoid_band(&x, &y, 0.5, 9.5).unwrap();
        assert!((a - (9.5f64.powi(2) - 0.25)).abs() < 1e-12);
        assert!(trapezoid_band(&x, &y, -1.0, 5.0).is_err());
        assert_eq!(trapezoid_band(&x, &y, 3.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn flat_shot_noise_integrates_to_zero() {
        let p = empty();
        let s = spectrum(&p, &linear_grid(1e6, 2e6, 51), 1.0).unwrap();
        assert_eq!(integrate_variance(&s, (1.1e6, 1.9e6), VarianceUnits::ShotNoise).unwrap(), 0.0);
    }

    #[test]
    fn zpf_oracle_broadband_oscillator() {
        // A broadband-read thermal oscillator without back action (tiny Γ_M)
        // integrates to n + ½ (canonical) or 2n + 1 (full quantum).
        let mut o = om();
        o.cavity.n_photons = 1.0;
        o.cavity.detuning = 0.0;
        o.mech.gamma_m0 = tp(100.0);
        o.mech.n_bath = 50.0;
        let mut p = empty();
        p.optomech = Some(o);
        p.model = TransferModel::Broadband;
        let grid = linear_grid(1.28e6 - 2e5, 1.28e6 + 2e5, 40001);
        let s = spectrum(&p, &grid, std::f64::consts::FRAC_PI_2).unwrap();
        let band = (1.08e6, 1.48e6);
        let half = integrate_variance(&s, band, VarianceUnits::Zpf(ZpfConvention::HalfQuantum)).unwrap();
        let full = integrate_variance(&s, band, VarianceUnits::Zpf(ZpfConvention::FullQuantum)).unwrap();
        // The band holds all but ~γ/(π·200 kHz) of the Lorentzian.
        assert!((half / 50.5 - 1.0).abs() < 2e-3, "half = {half}");
        assert!((full / half - 2.0).abs() < 1e-12);
        // The conversion equals 1/(2Γ_M) per Hz.
        let c = zpf_conversion(&s, band.0, band.1, ZpfConvention::HalfQuantum).unwrap();
        let gm = readout_rate_mech(&o.cavity);
        assert!((c * 2.0 * gm - 1.0).abs() < 1e-9, "c = {c}");
    }

    #[test]
    fn approx_formula_cases() {
        let (g, gam, w0) = (tp(50e3), tp(2.7e3), tp(1.28e6));
        let on = qba_hybrid_approx(w0, g, g, gam, gam, w0, -w0);
        assert!((on - (g / gam).powi(2)).abs() < 1e-9 * on);
        let mech_only = |w: f64| (g * g) / ((w - w0).powi(2) + gam * gam);
        let off = w0 + gam;
        let r = qba_hybrid_approx(off, g, g, gam, gam, w0, -w0) / mech_only(off);
        assert!((r - 0.5).abs() < 1e-12);
        // Matched negative mass over a wide band integrates to half.
        let grid = linear_grid(w0 - 2000.0 * gam, w0 + 2000.0 * gam, 400001);
        let h: Vec<f64> = grid.iter().map(|&w| qba_hybrid_approx(w, g, g, gam, gam, w0, -w0)).collect();
        let m: Vec<f64> = grid.iter().map(|&w| mech_only(w)).collect();
        let lo = grid[0];
        let hi = *grid.last().unwrap();
        let ratio = trapezoid_band(&grid, &h, lo, hi).unwrap() / trapezoid_band(&grid, &m, lo, hi).unwrap();
        assert!((ratio - 0.5).abs() < 1e-3, "ratio = {ratio}");
        // Positive mass does not cancel.
        let r = qba_hybrid_approx(off, g, g, gam, gam, w0, w0) / mech_only(off);
        assert!(r > 1.0);
    }

    #[test]
    fn ideal_broadband_envelope() {
        let mut o = om();
        o.cavity.detuning = 0.0;
        let gm = readout_rate_mech(&o.cavity);
        let matched = |sign: f64| SpinParams {
            omega_s: sign * o.mech.omega_m,
            gamma_s: o.mech.gamma_m0,
            gamma_s0: o.mech.gamma_m0,
            gamma_readout: gm,
            n_spin: 0.0,
        };
        let mut p = empty();
        p.optomech = Some(o);
        p.model = TransferModel::Broadband;
        for f in [1.27e6, 1.2801e6, 1.29e6] {
            let w = tp(f);
            let alone = qba_ideal_broadband(w, &p).unwrap();
            let chi = chi_mech_bare(w, &o.mech).unwrap();
            assert!((alone - (chi * gm).norm_sqr()).abs() <= 1e-12 * alone);
            let mut q = p;
            q.spin = Some(matched(-1.0));
            assert!(qba_ideal_broadband(w, &q).unwrap() <= 1e-20 * alone);
            q.spin = Some(matched(1.0));
            assert!((qba_ideal_broadband(w, &q).unwrap() / alone - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn matched_spin_tracks_dressed_membrane() {
        let o = om();
        let s = matched_spin(&o, true, 0.0).unwrap();
        assert!(s.is_negative_mass());
        let eff = effective_resonance(&o.mech, &o.cavity).unwrap();
        assert_eq!(s.omega_s, -eff.omega);
        assert_eq!(s.gamma_s, eff.gamma);
    }

    #[test]
    fn single_precision_spectrum() {
        let o = OptomechParams::<f32> {
            mech: MechanicalParams { omega_m: 1.0, gamma_m0: 1e-2, n_bath: 10.0, m_eff: 0.0, x_zpf: 0.0 },
            cavity: CavityParams { kappa1: 20.0, kappa2: 0.0, detuning: -5.0, g0: 0.1, n_photons: 100.0, eta_mm: 1.0 },
        };
        let p = SystemParams { spin: None, optomech: Some(o), cascade: CascadeParams::lossless(), drive: DriveNoise::default(), model: TransferModel::Full };
        let s = spectrum(&p, &linear_grid(0.1f32, 0.3, 11), 1.5).unwrap();
        assert!(s.total.iter().all(|v| v.is_finite() && *v > 0.0));
    }
}
