//! Quadrature scattering of the detuned two-port cavity with a membrane inside.
//!
//! The output of port 1 is `M X_in + V V_in + F f`, where `X_in` is the probe
//! vacuum, `V_in` the loss-port vacuum and `f` the membrane thermal force.

use num_complex::Complex;

use crate::error::{ModelError, Result};
use crate::matrix::{Column2, ComplexMat2};
use crate::params::{CavityParams, MechanicalParams};
use crate::scalar::{finite, Real};
use crate::susceptibility::{chi_mech_bare, chi_mech_eff, d_cavity, d_m0, d_m_eff, readout_rate_mech};

/// Transfer of the three input channels to the port-1 output quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmTransfer<T> {
    /// Probe light transfer.
    pub m_light: ComplexMat2<T>,
    /// Loss-port vacuum transfer.
    pub v_loss: ComplexMat2<T>,
    /// Response to the force vector `(0, f)`.
    pub f_force: Column2<T>,
}

impl<T: Real> OmTransfer<T> {
    /// Stage that passes light untouched.
    pub fn identity() -> Self {
        Self { m_light: ComplexMat2::identity(), v_loss: ComplexMat2::zero(), f_force: Column2::zero() }
    }

    pub fn is_finite(&self) -> bool {
        self.m_light.is_finite() && self.v_loss.is_finite() && self.f_force.is_finite()
    }
}

/// Polar form `(|L|, arg L)` of the cavity Lorentzian `L(Ω) = κ / (κ − i(Δ + Ω))`.
pub fn lorentzian<T: Real>(omega: T, cavity: &CavityParams<T>) -> (T, T) {
    let kappa = cavity.kappa();
    let x = cavity.detuning + omega;
    (kappa / kappa.hypot(x), x.atan2(kappa))
}

/// Phase of the classical intracavity amplitude, `φ = atan(Δ/κ)`.
pub fn intracavity_phase<T: Real>(cavity: &CavityParams<T>) -> T {
    (cavity.detuning / cavity.kappa()).atan()
}

/// Homodyne frame angle `ψ + φ` with `ψ = atan2(Δ, κ₁ − κ₂)`.
pub fn detection_phase<T: Real>(cavity: &CavityParams<T>) -> T {
    if cavity.detuning == T::zero() {
        return T::zero();
    }
    cavity.detuning.atan2(cavity.kappa1 - cavity.kappa2) + intracavity_phase(cavity)
}

/// Moves the mode-mismatched fraction of the input port into the loss port.
pub fn apply_mode_matching<T: Real>(cavity: &CavityParams<T>) -> CavityParams<T> {
    let eta = cavity.eta_mm;
    CavityParams {
        kappa1: eta * cavity.kappa1,
        kappa2: cavity.kappa2 + (T::one() - eta) * cavity.kappa1,
        eta_mm: T::one(),
        ..*cavity
    }
}

fn singular<T: Real>(omega: T) -> ModelError {
    ModelError::Singular { freq_hz: T::rad_to_hz(omega).to_f64().unwrap_or(f64::NAN) }
}

/// Exact transfer at angular frequency `omega`. Mode matching must already be
/// folded into `cavity` (see [`apply_mode_matching`]).
pub fn transfer_full<T: Real>(
    omega: T,
    mech: &MechanicalParams<T>,
    cavity: &CavityParams<T>,
) -> Result<OmTransfer<T>> {
    let kappa = cavity.kappa();
    let det = cavity.detuning;
    let gm = readout_rate_mech(cavity);
    let d0 = d_m0(omega, mech);
    let dm = d_m_eff(omega, mech, cavity);
    let dc = d_cavity(omega, cavity);
    if dc.norm_sqr() == T::zero() || dm.norm_sqr() == T::zero() || !finite(dc) || !finite(dm) {
        return Err(singular(omega));
    }
    let u = Complex::new(kappa, -omega);
    // Two inverses instead of one: |D_c D_M|² overflows f32.
    let inv = dc.inv() * dm.inv();
    let t_inv = ComplexMat2::new(u * d0, -d0 * det, d0 * det + gm * kappa * mech.omega_m, u * d0).scale(inv);

    let o = ComplexMat2::rotation(intracavity_phase(cavity));
    let core = o * t_inv * o.transpose();
    let m_light = core.scale_re(T::two() * cavity.kappa1) - ComplexMat2::identity();
    let v_loss = core.scale_re((T::lit(4.0) * cavity.kappa1 * cavity.kappa2).sqrt());

    let amp = T::two() * (gm * kappa * cavity.kappa1 * mech.gamma_m0).sqrt() * mech.omega_m;
    let a = Column2::new(Complex::new(-det, T::zero()), u).scale(inv * amp);
    let f_force = o.apply(a);

    let t = OmTransfer { m_light, v_loss, f_force };
    if !t.is_finite() {
        return Err(singular(omega));
    }
    Ok(t)
}

/// Resonant, large-bandwidth limit: a QND shear with the bare susceptibility.
/// The cavity linewidth and detuning are ignored apart from setting `Γ_M`.
pub fn transfer_broadband<T: Real>(
    omega: T,
    mech: &MechanicalParams<T>,
    cavity: &CavityParams<T>,
) -> Result<OmTransfer<T>> {
    let gm = readout_rate_mech(cavity);
    let chi = chi_mech_bare(omega, mech)?;
    let z = Complex::new(T::zero(), T::zero());
    Ok(OmTransfer {
        m_light: ComplexMat2::shear(chi * gm),
        v_loss: ComplexMat2::zero(),
        f_force: Column2::new(z, chi * (gm * mech.gamma_m0).sqrt()),
    })
}

/// First order expansion in `Ω/κ` around the carrier Lorentzian, with the
/// common phase factor dropped. The loss and force channels are not expanded
/// and are returned from the exact model.
pub fn transfer_nsb<T: Real>(
    omega: T,
    mech: &MechanicalParams<T>,
    cavity: &CavityParams<T>,
) -> Result<OmTransfer<T>> {
    let kappa = cavity.kappa();
    let det = cavity.detuning;
    let gm = readout_rate_mech(cavity);
    let chi = chi_mech_eff(omega, mech, cavity)?;
    let r2 = kappa * kappa + det * det;
    let l0 = kappa / r2.sqrt();
    let dl = -omega * det * kappa / (r2 * r2.sqrt());
    let i = Complex::new(T::zero(), T::one());
    let diag = Complex::new(T::one(), T::zero()) + i * chi * (gm * l0 * dl);
    let z = Complex::new(T::zero(), T::zero());
    let inner = ComplexMat2::new(diag, z, chi * (gm * l0 * l0), diag);
    let m_light = ComplexMat2::rotation(T::two() * intracavity_phase(cavity)) * inner;

    let exact = transfer_full(omega, mech, cavity)?;
    Ok(OmTransfer { m_light, ..exact })
}

/// Coefficients `[a3, a2, a1, a0]` of the monic characteristic quartic
/// `((κ+s)² + Δ²)(s² + 2γ s + Ω_M²) + Γ_M κ Ω_M Δ`.
pub fn characteristic_polynomial<T: Real>(mech: &MechanicalParams<T>, cavity: &CavityParams<T>) -> [T; 4] {
    let k = cavity.kappa();
    let d = cavity.detuning;
    let g = mech.gamma_m0;
    let w2 = mech.omega_m * mech.omega_m;
    let r2 = k * k + d * d;
    let two = T::two();
    [
        two * k + two * g,
        r2 + T::lit(4.0) * k * g + w2,
        two * k * w2 + two * g * r2,
        r2 * w2 + readout_rate_mech(cavity) * k * mech.omega_m * d,
    ]
}

/// Routh-Hurwitz test on the characteristic quartic. A lossless membrane with
/// no optical damping is reported as unstable too, since it has no stationary state.
///
/// Always evaluated in `f64`: the last Hurwitz determinant is a small difference
/// of large terms and single precision cannot resolve it.
pub fn check_stability<T: Real>(mech: &MechanicalParams<T>, cavity: &CavityParams<T>) -> Result<()> {
    let c = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let mech = MechanicalParams {
        omega_m: c(mech.omega_m),
        gamma_m0: c(mech.gamma_m0),
        n_bath: c(mech.n_bath),
        m_eff: c(mech.m_eff),
        x_zpf: c(mech.x_zpf),
    };
    let cavity = CavityParams {
        kappa1: c(cavity.kappa1),
        kappa2: c(cavity.kappa2),
        detuning: c(cavity.detuning),
        g0: c(cavity.g0),
        n_photons: c(cavity.n_photons),
        eta_mm: c(cavity.eta_mm),
    };
    let [a3, a2, a1, a0] = characteristic_polynomial(&mech, &cavity);
    if !(a0 > 0.0) {
        return Err(ModelError::Unstable {
            reason: "optical spring exceeds the mechanical restoring force (blue detuning too strong)".into(),
        });
    }
    let h2 = a3 * a2 - a1;
    let h3 = h2 * a1 - a3 * a3 * a0;
    let scale = a3 * a2 * a1;
    if !(a1 > 0.0 && h2 > 0.0 && h3 > 1e-12 * scale) {
        return Err(ModelError::Unstable {
            reason: "effective mechanical damping is not positive".into(),
        });
    }
    Ok(())
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::scalar::Real;
    use proptest::prelude::*;

    fn tp(x: f64) -> f64 {
        f64::hz_to_rad(x)
    }

    fn mech() -> MechanicalParams<f64> {
        MechanicalParams { omega_m: tp(1.28e6), gamma_m0: tp(50e-3), n_bath: 1.14e5, m_eff: 14e-12, x_zpf: 1e-15 }
    }

    fn cav(kappa_hz: f64, n: f64) -> CavityParams<f64> {
        CavityParams::from_total(tp(kappa_hz), 25.0, tp(-4.7e6), tp(210.0), n, 0.9)
    }

    fn rel(a: &ComplexMat2<f64>, b: &ComplexMat2<f64>) -> f64 {
        (*a - *b).max_abs() / a.max_abs().max(b.max_abs())
    }

    /// Solves the 3×3 system for the light quadratures and the membrane
    /// position by Gaussian elimination with partial pivoting, without any
    /// Schur-complement algebra.
    fn solve3(mut a: [[Complex<f64>; 3]; 3], mut b: [Complex<f64>; 3]) -> [Complex<f64>; 3] {
        for c in 0..3 {
            let p = (c..3).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).unwrap();
            a.swap(c, p);
            b.swap(c, p);
            for r in c + 1..3 {
                let f = a[r][c] / a[c][c];
                for k in c..3 {
                    let v = a[c][k];
                    a[r][k] -= f * v;
                }
                let v = b[c];
                b[r] -= f * v;
            }
        }
        let mut x = [Complex::new(0.0, 0.0); 3];
        for r in (0..3).rev() {
            let mut s = b[r];
            for k in r + 1..3 {
                s -= a[r][k] * x[k];
            }
            x[r] = s / a[r][r];
        }
        x
    }

    /// Brute-force output for a unit drive on probe quadrature `j` (0 or 1),
    /// loss quadrature `j` (2 or 3), or the force (4).
    fn oracle(omega: f64, m: &MechanicalParams<f64>, c: &CavityParams<f64>) -> (ComplexMat2<f64>, ComplexMat2<f64>, Column2<f64>) {
        let k = c.kappa();
        let d = c.detuning;
        let g = c.coupling();
        let phi = (d / k).atan();
        let (s, co) = phi.sin_cos();
        let cc = |x: f64| Complex::new(x, 0.0);
        let u = Complex::new(k, -omega);
        // Equations in the rotated frame: A' = O A Oᵀ, B' = O B, C' = C Oᵀ.
        let a = [[u, cc(d)], [cc(-d), u]];
        let o = [[co, -s], [s, co]];
        let mut ap = [[cc(0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        ap[i][j] += o[i][p] * a[p][q] * o[j][q];
                    }
                }
            }
        }
        let bp = [-g * o[0][1], -g * o[1][1]];
        let cp = [-2.0 * g * m.omega_m * o[0][0], -2.0 * g * m.omega_m * o[1][0]];
        let lhs = [
            [ap[0][0], ap[0][1], cc(bp[0])],
            [ap[1][0], ap[1][1], cc(bp[1])],
            [cc(cp[0]), cc(cp[1]), d_m0(omega, m)],
        ];
        let s1 = (2.0 * c.kappa1).sqrt();
        let s2 = (2.0 * c.kappa2).sqrt();
        let sf = 2.0 * m.omega_m * m.gamma_m0.sqrt();
        let zero = cc(0.0);
        let mut out = [[zero; 5]; 2];
        for j in 0..5 {
            let rhs = match j {
                0 => [cc(s1), zero, zero],
                1 => [zero, cc(s1), zero],
                2 => [cc(s2), zero, zero],
                3 => [zero, cc(s2), zero],
                _ => [zero, zero, cc(sf)],
            };
            let x = solve3(lhs, rhs);
            for i in 0..2 {
                let direct = if j == i { cc(1.0) } else { zero };
                out[i][j] = -direct + x[i] * s1;
            }
        }
        (
            ComplexMat2::new(out[0][0], out[0][1], out[1][0], out[1][1]),
            ComplexMat2::new(out[0][2], out[0][3], out[1][2], out[1][3]),
            Column2::new(out[0][4], out[1][4]),
        )
    }

    fn compare_with_oracle(omega: f64, m: &MechanicalParams<f64>, c: &CavityParams<f64>) -> f64 {
        let t = transfer_full(omega, m, c).unwrap();
        let (om, ov, of) = oracle(omega, m, c);
        let e1 = rel(&t.m_light, &om);
        let e2 = if c.kappa2 > 0.0 { rel(&t.v_loss, &ov) } else { t.v_loss.max_abs() };
        let fd = ((t.f_force.x - of.x).norm()).max((t.f_force.p - of.p).norm());
        let fs = t.f_force.x.norm().max(t.f_force.p.norm()).max(of.x.norm()).max(of.p.norm());
        let e3 = if fs > 0.0 { fd / fs } else { 0.0 };
        e1.max(e2).max(e3)
    }

    #[test]
    fn lorentzian_cases() {
        let mut c = cav(8.7e6, 0.0);
        c.detuning = 0.0;
        let (m, p) = lorentzian(0.0, &c);
        assert!((m - 1.0).abs() < 1e-15 && p == 0.0);
        c.detuning = -c.kappa();
        let (m, p) = lorentzian(0.0, &c);
        assert!((m - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((p + std::f64::consts::FRAC_PI_4).abs() < 1e-15);

        let c = cav(7.7e6, 4.2e6);
        let w = tp(1.28e6);
        let (m, p) = lorentzian(w, &c);
        let l = Complex::new(c.kappa(), 0.0) / Complex::new(c.kappa(), -(c.detuning + w));
        assert!((m - l.norm()).abs() < 1e-14);
        assert!((p - l.arg()).abs() < 1e-14);
    }

    #[test]
    fn intracavity_and_detection_phases() {
        let mut c = cav(8.7e6, 0.0);
        assert!((intracavity_phase(&c) - (-4.7f64 / 8.7).atan()).abs() < 1e-12);
        assert!((intracavity_phase(&c) + 0.4955).abs() < 5e-4);
        c.detuning = c.kappa();
        assert!((intracavity_phase(&c) - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        c.detuning = 0.0;
        assert_eq!(intracavity_phase(&c), 0.0);
        assert_eq!(detection_phase(&c), 0.0);

        let mut one_sided = cav(8.7e6, 0.0);
        one_sided.kappa1 = one_sided.kappa();
        one_sided.kappa2 = 0.0;
        let phi = intracavity_phase(&one_sided);
        assert!((detection_phase(&one_sided) - 2.0 * phi).abs() < 1e-15);

        let c = cav(7.7e6, 4.2e6);
        let psi = detection_phase(&c) - intracavity_phase(&c);
        assert!((psi + 0.585).abs() < 1e-3, "psi = {psi}");
        assert!((psi - (-4.7f64 / 7.1).atan()).abs() < 1e-3);
    }

    #[test]
    fn detection_phase_for_undercoupled_cavity() {
        let mut c = cav(7.7e6, 0.0);
        std::mem::swap(&mut c.kappa1, &mut c.kappa2);
        let psi = detection_phase(&c) - intracavity_phase(&c);
        assert!(psi < -std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn mode_matching_rules() {
        let mut c = CavityParams { kappa1: tp(7.4e6), kappa2: tp(0.3e6), detuning: 0.0, g0: 0.0, n_photons: 0.0, eta_mm: 1.0 };
        assert_eq!(apply_mode_matching(&c), c);
        c.eta_mm = 0.0;
        let z = apply_mode_matching(&c);
        assert_eq!(z.kappa1, 0.0);
        assert!((z.kappa2 - c.kappa()).abs() < 1e-6);
        c.eta_mm = 0.9;
        let e = apply_mode_matching(&c);
        assert!((e.kappa1 / tp(6.66e6) - 1.0).abs() < 1e-12);
        assert!((e.kappa2 / tp(1.04e6) - 1.0).abs() < 1e-12);
        assert!((e.kappa() - c.kappa()).abs() < 1e-6);
    }

    #[test]
    fn empty_one_sided_cavity_is_all_pass() {
        let m = mech();
        let c = CavityParams { kappa1: tp(8.7e6), kappa2: 0.0, detuning: 0.0, g0: 0.0, n_photons: 0.0, eta_mm: 1.0 };
        for k in 0..20 {
            let w = tp(1.0e5 + 3e5 * k as f64);
            let t = transfer_full(w, &m, &c).unwrap();
            let r = Complex::new(2.0 * c.kappa1, 0.0) / Complex::new(c.kappa(), -w) - 1.0;
            assert!(rel(&t.m_light, &ComplexMat2::diagonal(r)) < 1e-14);
            assert!((t.m_light.det().norm() - 1.0).abs() < 1e-12);
            assert_eq!(t.f_force, Column2::zero());
        }
    }

    #[test]
    fn full_transfer_matches_linear_solve_at_preset() {
        let m = mech();
        let c = apply_mode_matching(&cav(8.7e6, 5.7e6));
        for w in [m.omega_m, tp(1.2e6), tp(1.35e6)] {
            let e = compare_with_oracle(w, &m, &c);
            assert!(e < 1e-9, "rel err {e} at {w}");
        }
    }

    #[test]
    fn broadband_limits() {
        let m = mech();
        let mut c = cav(8.7e6, 5.7e6);
        let on = transfer_broadband(m.omega_m, &m, &c).unwrap();
        let gm = readout_rate_mech(&c);
        assert!((on.m_light.a21 - Complex::new(0.0, gm / m.gamma_m0)).norm() < 1e-9 * gm / m.gamma_m0);
        for k in 0..30 {
            let t = transfer_broadband(tp(1.2e6 + 5e3 * k as f64), &m, &c).unwrap();
            assert!((t.m_light.det() - 1.0).norm() < 1e-12);
        }
        c.n_photons = 0.0;
        let t = transfer_broadband(tp(1.3e6), &m, &c).unwrap();
        assert_eq!(t.m_light, ComplexMat2::identity());
    }

    #[test]
    fn nsb_reductions() {
        let m = mech();
        let mut c = cav(7.7e6, 4.2e6);
        c.detuning = 0.0;
        let w = tp(1.281e6);
        let t = transfer_nsb(w, &m, &c).unwrap();
        let chi = chi_mech_eff(w, &m, &c).unwrap();
        assert!(rel(&t.m_light, &ComplexMat2::shear(chi * readout_rate_mech(&c))) < 1e-14);

        let mut c = cav(7.7e6, 4.2e6);
        c.g0 = 0.0;
        let t = transfer_nsb(w, &m, &c).unwrap();
        assert!(rel(&t.m_light, &ComplexMat2::rotation(2.0 * intracavity_phase(&c))) < 1e-14);
    }

    #[test]
    fn stability_guard() {
        let m = mech();
        for n in [1e5, 1e6, 5.7e6, 2e7] {
            assert!(check_stability(&m, &apply_mode_matching(&cav(8.7e6, n))).is_ok());
        }
        let mut blue = cav(8.7e6, 5.7e6);
        blue.detuning = -blue.detuning;
        assert!(matches!(check_stability(&m, &blue), Err(ModelError::Unstable { .. })));
        // Far beyond the operating power the softened spring turns statically unstable.
        let mut strong = cav(8.7e6, 5.7e6);
        strong.n_photons = 1e12;
        assert!(check_stability(&m, &strong).is_err());
    }

    #[test]
    fn stability_agrees_with_effective_damping() {
        let m = mech();
        let c = apply_mode_matching(&cav(8.7e6, 5.7e6));
        let eff = crate::susceptibility::effective_resonance(&m, &c).unwrap();
        assert!(eff.gamma > 0.0);
        let mut b = c;
        b.detuning = tp(4.7e6);
        let eff = crate::susceptibility::effective_resonance(&m, &b).unwrap();
        assert!(eff.gamma < 0.0);
        assert!(check_stability(&m, &b).is_err());
    }

    fn arb_stable() -> impl Strategy<Value = (MechanicalParams<f64>, CavityParams<f64>, f64)> {
        (
            0.5e6..3e6f64,
            1e-3..1e3f64,
            1e6..2e7f64,
            0.3..1.0f64,
            -1.5..0.0f64,
            50.0..500.0f64,
            1e4..1e7f64,
            0.5..1.5f64,
        )
            .prop_map(|(om, g, k, frac, dr, g0, n, wr)| {
                let m = MechanicalParams { omega_m: tp(om), gamma_m0: tp(g), n_bath: 1e3, m_eff: 0.0, x_zpf: 0.0 };
                let kap = tp(k);
                let c = CavityParams {
                    kappa1: frac * kap,
                    kappa2: (1.0 - frac) * kap,
                    detuning: dr * kap,
                    g0: tp(g0),
                    n_photons: n,
                    eta_mm: 1.0,
                };
                (m, c, wr * m.omega_m)
            })
            .prop_filter("stable", |(m, c, _)| check_stability(m, c).is_ok())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn full_transfer_matches_linear_solve((m, c, w) in arb_stable()) {
            let e = compare_with_oracle(w, &m, &c);
            prop_assert!(e < 1e-9, "rel err {}", e);
        }
    }
}
