//! Trapped-ion parameter mapping: trap and laser settings in SI units in,
//! effective chain couplings out.
//!
//! All SI-to-lattice conversion lives here; every other module works in
//! lattice units. Frequencies are angular (rad/s), lengths are meters, masses
//! are kilograms. The homogeneous-spacing approximation is used throughout:
//! a real Coulomb crystal has a spacing `a(x)` that grows toward the edges,
//! so a non-uniform crystal must be mapped region by region with a local `a`
//! before calling into this module.
//!
//! The transverse phonon branch of a linear chain of `N` ions with spacing
//! `a` and Coulomb length `ell` is
//!
//! ```text
//! omega(k)^2 = omega_z^2 (1 - kappa_x (ell/a)^3 sum_{r<=N/2} (4/r^3) sin^2(k a r / 2))
//! ```
//!
//! with `kappa_x = (omega_x/omega_z)^2`. Its expansion around the zone-edge
//! zigzag mode `k = pi/a` defines the sound velocity [`sound_velocity`] and
//! the bare mass [`bare_mass`] of the effective scalar chain; the quartic
//! Coulomb correction gives the self-coupling [`quartic_coupling`]. The
//! Raman-beam exchange couplings [`spin_couplings`] map onto the fermion
//! hopping, [`fermi_velocity`] collapses their odd ranges into one velocity,
//! and [`yukawa`] gives the fermion-scalar vertex of the dipole-force beams.

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::mth::{self, KahanSum};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Reduced Planck constant, J s (2019 SI).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Coulomb coupling `e^2 / (4 pi eps0)`, J m (2019 SI).
pub const COULOMB_CONSTANT: f64 = 2.307_077_552_341_735_5e-28;

/// Coulomb length `ell` from `ell^3 = e^2 / (4 pi eps0 m_a omega_x^2)`.
#[must_use]
pub fn coulomb_length(m_a: f64, omega_x: f64) -> f64 {
    libm::cbrt(COULOMB_CONSTANT / (m_a * omega_x * omega_x))
}

/// Trap geometry and secular frequencies of the ion chain.
///
/// `omega_x` is the axial frequency along the chain, `omega_z` the in-plane
/// transverse frequency whose zone-edge zigzag mode carries the scalar field,
/// and `omega_y` the out-of-plane transverse frequency addressed by the
/// Raman exchange beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParams {
    /// Axial secular frequency (rad/s); sets the Coulomb length scale.
    pub omega_x: f64,
    /// Out-of-plane transverse secular frequency (rad/s).
    pub omega_y: f64,
    /// In-plane transverse secular frequency (rad/s).
    pub omega_z: f64,
    /// Number of ions in the chain.
    pub n_ions: usize,
    /// Ion spacing (m), homogeneous approximation.
    pub a: f64,
    /// Coulomb length (m), `ell^3 = e^2/(4 pi eps0 m_a omega_x^2)`.
    pub ell: f64,
    /// Ion mass (kg).
    pub m_a: f64,
}

impl TrapParams {
    /// Validates and builds trap parameters.
    ///
    /// The working ordering `omega_y >> omega_z >~ omega_x` is not enforced
    /// here; [`TrapParams::warnings`] reports violations.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] unless every frequency, length, and the
    /// mass are finite and positive and `n_ions >= 2`.
    pub fn new(
        omega_x: f64,
        omega_y: f64,
        omega_z: f64,
        n_ions: usize,
        a: f64,
        ell: f64,
        m_a: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("omega_x", omega_x),
            ("omega_y", omega_y),
            ("omega_z", omega_z),
            ("a", a),
            ("ell", ell),
            ("m_a", m_a),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if n_ions < 2 {
            return Err(Error::InvalidParameter(format!("n_ions must be >= 2, got {n_ions}")));
        }
        Ok(Self { omega_x, omega_y, omega_z, n_ions, a, ell, m_a })
    }

    /// Non-fatal diagnostics for frequency orderings outside the regime the
    /// mapping formulas assume.
    #[must_use]
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.omega_y <= self.omega_z {
            out.push(format!(
                "omega_y {:.3e} <= omega_z {:.3e}; the out-of-plane branch is not spectrally \
                 separated and the exchange-coupling formula degrades",
                self.omega_y, self.omega_z
            ));
        }
        if self.omega_z < self.omega_x {
            out.push(format!(
                "omega_z {:.3e} < omega_x {:.3e}; the chain is closer to a 3D cloud than to a \
                 linear crystal",
                self.omega_z, self.omega_x
            ));
        }
        out
    }

    /// Transition control ratio `kappa_x = (omega_x/omega_z)^2`.
    #[must_use]
    pub fn kappa_x(&self) -> f64 {
        let r = self.omega_x / self.omega_z;
        r * r
    }

    /// Out-of-plane ratio `kappa_y = (omega_x/omega_y)^2`.
    #[must_use]
    pub fn kappa_y(&self) -> f64 {
        let r = self.omega_x / self.omega_y;
        r * r
    }
}

/// Raman and dipole-force laser settings.
///
/// The exchange beams (`omega_l`, `delta_l`, `delta_k`, `eta_x`) generate the
/// phonon-mediated couplings of [`spin_couplings`]; the crossed dipole-force
/// beams (`omega_tilde`, `delta_k_tilde`, `z0`, `q_z`) generate the vertex of
/// [`yukawa`]. Detunings may take either sign; [`spin_couplings`] rejects
/// values that sit exactly on a branch it divides by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    /// Two-photon Rabi frequency of the exchange beams (rad/s).
    pub omega_l: f64,
    /// Beat-note detuning of the exchange beams (rad/s).
    pub delta_l: f64,
    /// Wavevector difference of the exchange beams (1/m).
    pub delta_k: f64,
    /// Two-photon ac-Stark amplitude of the dipole-force beams (rad/s).
    pub omega_tilde: f64,
    /// Wavevector difference of the dipole-force beams (1/m).
    pub delta_k_tilde: f64,
    /// Transverse coordinate of the zigzag equilibrium (m).
    pub z0: f64,
    /// Paul-trap micromotion parameter along z (dimensionless, << 1).
    pub q_z: f64,
    /// Lamb-Dicke parameter of the exchange beams along x.
    pub eta_x: f64,
}

impl LaserParams {
    /// Validates and builds laser parameters.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] for non-finite entries or negative
    /// amplitudes (`omega_l`, `omega_tilde`, `z0`, `q_z`, `eta_x`).
    pub fn new(
        omega_l: f64,
        delta_l: f64,
        delta_k: f64,
        omega_tilde: f64,
        delta_k_tilde: f64,
        z0: f64,
        q_z: f64,
        eta_x: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("omega_l", omega_l),
            ("delta_l", delta_l),
            ("delta_k", delta_k),
            ("omega_tilde", omega_tilde),
            ("delta_k_tilde", delta_k_tilde),
            ("z0", z0),
            ("q_z", q_z),
            ("eta_x", eta_x),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in [
            ("omega_l", omega_l),
            ("omega_tilde", omega_tilde),
            ("z0", z0),
            ("q_z", q_z),
            ("eta_x", eta_x),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(Self { omega_l, delta_l, delta_k, omega_tilde, delta_k_tilde, z0, q_z, eta_x })
    }
}

/// Partial sums `(eta_N(s), zeta_N(s))` with
/// `eta_N(s) = sum_{r<=N/2} (-1)^{r+1}/r^s` and
/// `zeta_N(s) = sum_{r<=N/2} 1/r^s`.
///
/// `n_ions` is the chain length `N`; the cutoff is the integer quotient
/// `N/2`. `n_ions < 2` gives empty sums, i.e. `(0, 0)`.
#[must_use]
pub fn eta_zeta(n_ions: usize, s: i32) -> (f64, f64) {
    let mut eta = KahanSum::new();
    let mut zeta = KahanSum::new();
    for r in 1..=(n_ions / 2) {
        let term = libm::pow(r as f64, -f64::from(s));
        zeta.add(term);
        eta.add(if r % 2 == 0 { -term } else { term });
    }
    (eta.total(), zeta.total())
}

/// In-plane transverse phonon frequency `omega(k)` from the direct
/// spring sum over ranges `r <= N/2`.
///
/// `omega(pi/a)^2` equals `omega_z^2 - 4 omega_x^2 (ell/a)^3 sum_{odd r} r^-3`,
/// which approaches the squared gap `bare_mass * c_b^4 / hbar^2` as `N` grows.
///
/// # Errors
///
/// [`Error::IonMapping`] when the squared frequency is negative (the linear
/// chain is unstable against zigzag distortion at this `k`).
pub fn zigzag_branch(trap: &TrapParams, k: f64) -> Result<f64> {
    let ratio = trap.ell / trap.a;
    let mut sum = KahanSum::new();
    for r in 1..=(trap.n_ions / 2) {
        let rf = r as f64;
        let s = libm::sin(0.5 * k * trap.a * rf);
        sum.add(4.0 / (rf * rf * rf) * s * s);
    }
    let om_sq = trap.omega_z * trap.omega_z
        * (1.0 - trap.kappa_x() * ratio * ratio * ratio * sum.total());
    if om_sq < 0.0 {
        return Err(Error::IonMapping(format!(
            "transverse branch unstable at k a = {}: omega^2 = {om_sq:.6e}",
            k * trap.a
        )));
    }
    Ok(libm::sqrt(om_sq))
}

/// Squared zigzag gap `omega_z^2 - (7/2) omega_x^2 (ell/a)^3 zeta_N(3)`,
/// in (rad/s)^2. Equals `bare_mass * c_b^4 / hbar^2`.
fn zigzag_gap_sq(trap: &TrapParams) -> f64 {
    let (_, zeta3) = eta_zeta(trap.n_ions, 3);
    let ratio = trap.ell / trap.a;
    trap.omega_z * trap.omega_z
        - 3.5 * trap.omega_x * trap.omega_x * ratio * ratio * ratio * zeta3
}

/// Transverse sound velocity `c_b` (m/s) of the zigzag branch:
/// `c_b^2 = a^2 omega_x^2 (ell/a)^3 eta_N(1)`.
///
/// `c_b^2` is exactly half the curvature of `omega(k)^2` at the zone edge
/// `k = pi/a` of [`zigzag_branch`], at every chain length.
#[must_use]
pub fn sound_velocity(trap: &TrapParams) -> f64 {
    let (eta1, _) = eta_zeta(trap.n_ions, 1);
    let ratio = trap.ell / trap.a;
    trap.a * trap.omega_x * libm::sqrt(ratio * ratio * ratio * eta1)
}

/// Bare mass squared (kg^2) of the effective scalar field:
/// `m0^2 = (hbar^2 / c_b^4)(omega_z^2 - (7/2) omega_x^2 (ell/a)^3 zeta_N(3))`.
///
/// Negative below the zigzag transition, zero exactly when
/// `kappa_x == critical_ratio(trap)`, positive above.
#[must_use]
pub fn bare_mass(trap: &TrapParams) -> f64 {
    let cb = sound_velocity(trap);
    let cb4 = cb * cb * cb * cb;
    HBAR * HBAR / cb4 * zigzag_gap_sq(trap)
}

/// Critical trap ratio of the linear-zigzag transition:
/// `kappa_{x,c} = 2 a^3 / (7 ell^3 zeta_N(3))`.
#[must_use]
pub fn critical_ratio(trap: &TrapParams) -> f64 {
    let (_, zeta3) = eta_zeta(trap.n_ions, 3);
    2.0 * trap.a * trap.a * trap.a / (7.0 * trap.ell * trap.ell * trap.ell * zeta3)
}

/// Dimensionless rigidity `K = m_a a c_b / hbar`; `1/K^2` acts as the
/// effective Planck constant of the chain.
#[must_use]
pub fn rigidity(trap: &TrapParams) -> f64 {
    trap.m_a * trap.a * sound_velocity(trap) / HBAR
}

/// Quartic self-coupling of the effective scalar field:
/// `lambda = 243 zeta_N(5) m_a^3 omega_x^2 ell^3 / (4 K^4)`.
///
/// This keeps the closed-form coefficient `243/4`. Rebuilding the coupling
/// from the pairwise quartic spring constants gives
/// [`quartic_coupling_direct_sum`]; the two differ by the constant factor
/// `(81/32) zeta_N(5) / sum_{odd r<=N/2} r^-5`, which tends to `81/31` for
/// long chains.
#[must_use]
pub fn quartic_coupling(trap: &TrapParams) -> f64 {
    let (_, zeta5) = eta_zeta(trap.n_ions, 5);
    let k = rigidity(trap);
    let m3 = trap.m_a * trap.m_a * trap.m_a;
    let ell3 = trap.ell * trap.ell * trap.ell;
    243.0 * zeta5 * m3 * trap.omega_x * trap.omega_x * ell3 / (4.0 * k * k * k * k)
}

/// Quartic self-coupling rebuilt from the pairwise quartic spring constants
/// `beta_r = (3/2) m_a omega_x^2 ell^3 / (a r)^5`.
///
/// A staggered configuration `u_n = (-1)^n u` picks up `(beta_r/4)(2u)^4`
/// per site from every odd range, so
/// `lambda = 24 (sum_{odd r<=N/2} r^-5) m_a^3 omega_x^2 ell^3 / K^4`
/// after the same field normalization as [`quartic_coupling`].
#[must_use]
pub fn quartic_coupling_direct_sum(trap: &TrapParams) -> f64 {
    let mut odd = KahanSum::new();
    let mut r = 1;
    while r <= trap.n_ions / 2 {
        let rf = r as f64;
        odd.add(1.0 / (rf * rf * rf * rf * rf));
        r += 2;
    }
    let k = rigidity(trap);
    let m3 = trap.m_a * trap.m_a * trap.m_a;
    let ell3 = trap.ell * trap.ell * trap.ell;
    24.0 * odd.total() * m3 * trap.omega_x * trap.omega_x * ell3 / (k * k * k * k)
}

/// Phonon-mediated exchange coupling `J_nl` (rad/s) between ions `n` and `l`:
///
/// ```text
/// J_nl = J0 [ omega_x^4 eta_N(1) / (omega_y^2 - delta_l^2)^2 / d^3
///             - (-1)^{n-l} lambda_C (a/ell)^2 exp(-d / lambda_C) ]
/// ```
///
/// with `J0 = 2 omega_l^2 eta_x^2 / (omega_x eta_N(1))`. The bracket is
/// dimensionless: lengths are in units of `ell` (`d = |n-l| a / ell`) and
/// frequencies in units of `omega_x`, so the propagator range is
/// `lambda_C = omega_x^2 / (gap^2 - delta_l^2)` with `gap^2` the squared
/// zigzag gap `bare_mass * c_b^4 / hbar^2`.
///
/// # Errors
///
/// [`Error::IonMapping`] when `n == l`, when `delta_l` sits exactly on the
/// out-of-plane branch (`delta_l^2 == omega_y^2`), or when
/// `delta_l^2 >= gap^2` (no exponentially decaying propagator).
pub fn spin_couplings(trap: &TrapParams, laser: &LaserParams, n: usize, l: usize) -> Result<f64> {
    if n == l {
        return Err(Error::IonMapping(format!("coincident sites n = l = {n} have no coupling")));
    }
    let (eta1, _) = eta_zeta(trap.n_ions, 1);
    let dl_sq = laser.delta_l * laser.delta_l;
    let dip_den = trap.omega_y * trap.omega_y - dl_sq;
    if dip_den == 0.0 {
        return Err(Error::IonMapping(format!(
            "delta_l {:.6e} is resonant with the out-of-plane branch at omega_y",
            laser.delta_l
        )));
    }
    let prop_den = zigzag_gap_sq(trap) - dl_sq;
    if prop_den <= 0.0 {
        return Err(Error::IonMapping(format!(
            "delta_l^2 {dl_sq:.6e} at or above the squared zigzag gap {:.6e}: no decaying \
             propagator",
            zigzag_gap_sq(trap)
        )));
    }
    let wx_sq = trap.omega_x * trap.omega_x;
    let lambda_c = wx_sq / prop_den;
    let a_over_ell = trap.a / trap.ell;
    let d = n.abs_diff(l) as f64 * a_over_ell;
    let dipolar = wx_sq * wx_sq * eta1 / (dip_den * dip_den) / (d * d * d);
    let alternation = if n.abs_diff(l) % 2 == 1 { -1.0 } else { 1.0 };
    let propagator = alternation * lambda_c * a_over_ell * a_over_ell * libm::exp(-d / lambda_c);
    let j0 = 2.0 * laser.omega_l * laser.omega_l * laser.eta_x * laser.eta_x
        / (trap.omega_x * eta1);
    Ok(j0 * (dipolar - propagator))
}

/// Exchange couplings at the odd ranges `1, 3, ..., 2*count - 1`.
///
/// The homogeneous-chain couplings depend only on the range, so the table is
/// built from a reference pair.
///
/// # Errors
///
/// Propagates [`spin_couplings`] errors.
pub fn odd_range_couplings(
    trap: &TrapParams,
    laser: &LaserParams,
    count: usize,
) -> Result<Vec<f64>> {
    (0..count).map(|i| spin_couplings(trap, laser, 0, 2 * i + 1)).collect()
}

/// Fermion velocity `c_f = 2a sum_{r>0} (2r-1) (-1)^{r-1} J_{n,n+(2r-1)}`
/// from the couplings at odd ranges (`odd_couplings[i]` is the coupling at
/// range `2i + 1`). A single entry gives the nearest-neighbor value `2 a J`.
#[must_use]
pub fn fermi_velocity(a: f64, odd_couplings: &[f64]) -> f64 {
    let mut sum = KahanSum::new();
    for (i, &j) in odd_couplings.iter().enumerate() {
        let weight = (2 * i + 1) as f64;
        sum.add(if i % 2 == 0 { weight * j } else { -weight * j });
    }
    2.0 * a * sum.total()
}

/// Yukawa coupling of the dipole-force beams:
/// `g = (omega_tilde/2) J0(q_z delta_k_tilde z0 / 2) cos(delta_k_tilde z0)`,
/// with `J0` the zero-order Bessel function. The Bessel factor is the
/// leading micromotion renormalization; the cosine is the interference
/// pattern of the crossed beams at the zigzag offset `z0`.
#[must_use]
pub fn yukawa(laser: &LaserParams) -> f64 {
    let modulation = 0.5 * laser.q_z * laser.delta_k_tilde * laser.z0;
    0.5 * laser.omega_tilde
        * mth::bessel_j0(modulation)
        * libm::cos(laser.delta_k_tilde * laser.z0)
}

/// Scalar chain in lattice units (`hbar = c_b = 1`): lengths stay in meters,
/// energies become inverse lengths. `m0_sq` maps to the squared Compton
/// wavenumber `(omega_z^2 - (7/2) omega_x^2 (ell/a)^3 zeta_N(3)) / c_b^2` and
/// the quartic coupling to `lambda c_b / hbar^3`.
///
/// # Errors
///
/// Propagates [`LatticeSpec::new`] validation.
pub fn lattice_spec(trap: &TrapParams) -> Result<LatticeSpec> {
    let cb = sound_velocity(trap);
    let m0_sq = zigzag_gap_sq(trap) / (cb * cb);
    let lam = quartic_coupling(trap) * cb / (HBAR * HBAR * HBAR);
    LatticeSpec::new(trap.n_ions, trap.a, m0_sq, lam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::{fermion_dispersion, FermionParams};
    use crate::lattice::scalar_dispersion;
    use alloc::vec;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use core::f64::consts::{LN_2, PI};

    const M_YB: f64 = 171.0 * 1.660_539_068_92e-27;

    fn yb_trap() -> TrapParams {
        let omega_x = 2.0 * PI * 150.0e3;
        TrapParams::new(
            omega_x,
            2.0 * PI * 1.2e6,
            2.0 * PI * 1.0e6,
            30,
            6.0e-6,
            coulomb_length(M_YB, omega_x),
            M_YB,
        )
        .unwrap()
    }

    fn exchange_laser(delta_l: f64) -> LaserParams {
        LaserParams::new(2.0 * PI * 50.0e3, delta_l, 2.0e7, 2.0 * PI * 20.0e3, 8.0e6, 0.0, 0.0, 0.1)
            .unwrap()
    }

    #[test]
    fn partial_sums_match_hand_values() {
        assert_eq!(eta_zeta(2, 1), (1.0, 1.0));
        assert_eq!(eta_zeta(2, 3), (1.0, 1.0));
        let (eta1, zeta1) = eta_zeta(8, 1);
        assert_relative_eq!(eta1, 1.0 - 0.5 + 1.0 / 3.0 - 0.25, max_relative = 1e-15);
        assert_relative_eq!(zeta1, 1.0 + 0.5 + 1.0 / 3.0 + 0.25, max_relative = 1e-15);
        let (_, zeta3) = eta_zeta(8, 3);
        assert_relative_eq!(zeta3, 1.0 + 1.0 / 8.0 + 1.0 / 27.0 + 1.0 / 64.0, max_relative = 1e-15);
    }

    #[test]
    fn alternating_harmonic_sum_approaches_ln_two() {
        let (eta1, _) = eta_zeta(1_000_000, 1);
        let err = (eta1 - LN_2).abs();
        assert!(err < 1e-6, "eta_N(1) misses ln 2 by {err:.3e}");
        // The remainder of the even-length partial sum is 1/(2 N) - O(1/N^2),
        // so the bound above is tight.
        assert!(err > 9.9e-7, "remainder {err:.3e} is smaller than the series allows");
    }

    #[test]
    fn cubic_partial_sum_grows_with_chain_length() {
        let mut last = 0.0;
        for n in [4usize, 8, 16, 64, 256, 1024] {
            let (_, zeta3) = eta_zeta(n, 3);
            assert!(zeta3 > last, "zeta_N(3) not increasing at N = {n}");
            last = zeta3;
        }
    }

    #[test]
    fn coulomb_length_matches_its_definition() {
        let trap = yb_trap();
        let ell3 = trap.ell * trap.ell * trap.ell;
        assert_relative_eq!(
            ell3 * trap.m_a * trap.omega_x * trap.omega_x,
            COULOMB_CONSTANT,
            max_relative = 1e-12
        );
        assert_relative_eq!(trap.ell, 9.707_146_337_336_47e-6, max_relative = 1e-12);
    }

    #[test]
    fn sound_velocity_matches_the_branch_curvature() {
        let trap = yb_trap();
        let cb_sq = sound_velocity(&trap).powi(2);
        let k0 = PI / trap.a;
        // Direct-sum difference quotient of the branch at the zone edge,
        // evaluated per term through sin^2 A - sin^2 B = sin(A+B) sin(A-B) so
        // the quotient never cancels two O(omega_z^2) values.
        let ratio = trap.ell / trap.a;
        let curvature = |q: f64| {
            let mut sum = KahanSum::new();
            for r in 1..=(trap.n_ions / 2) {
                let rf = r as f64;
                let plus = libm::sin((k0 - 0.5 * q) * trap.a * rf);
                let minus = libm::sin(0.5 * q * trap.a * rf);
                sum.add(4.0 / (rf * rf * rf) * plus * minus);
            }
            trap.omega_x * trap.omega_x * ratio.powi(3) * sum.total() / (q * q)
        };
        let q = 1e-3 / trap.a;
        let refined = (4.0 * curvature(q) - curvature(2.0 * q)) / 3.0;
        assert_relative_eq!(refined, cb_sq, max_relative = 1e-9);
        // Same quotient straight from the branch frequencies, looser band.
        let om0_sq = zigzag_branch(&trap, k0).unwrap().powi(2);
        let raw = (zigzag_branch(&trap, k0 - q).unwrap().powi(2) - om0_sq) / (q * q);
        assert_relative_eq!(raw, cb_sq, max_relative = 1e-6);
    }

    #[test]
    fn sound_velocity_scaling_read_offs() {
        let trap = yb_trap();
        let doubled_omega = TrapParams { omega_x: 2.0 * trap.omega_x, ..trap };
        assert_relative_eq!(
            sound_velocity(&doubled_omega),
            2.0 * sound_velocity(&trap),
            max_relative = 1e-12
        );
        let doubled_a = TrapParams { a: 2.0 * trap.a, ..trap };
        assert_relative_eq!(
            sound_velocity(&doubled_a).powi(2),
            0.5 * sound_velocity(&trap).powi(2),
            max_relative = 1e-12
        );
    }

    #[test]
    fn bare_mass_vanishes_at_the_critical_ratio() {
        let trap = yb_trap();
        let critical = TrapParams {
            omega_z: trap.omega_x / libm::sqrt(critical_ratio(&trap)),
            ..trap
        };
        let cb = sound_velocity(&critical);
        let scale = HBAR * HBAR * critical.omega_z * critical.omega_z / cb.powi(4);
        assert!(
            (bare_mass(&critical) / scale).abs() < 1e-12,
            "residual mass {:.3e} at the critical point",
            bare_mass(&critical) / scale
        );
        let below = TrapParams { omega_z: 0.99 * critical.omega_z, ..trap };
        let above = TrapParams { omega_z: 1.01 * critical.omega_z, ..trap };
        assert!(bare_mass(&below) < 0.0);
        assert!(bare_mass(&above) > 0.0);
    }

    #[test]
    fn bare_mass_crosses_zero_once_as_omega_z_sweeps() {
        let trap = yb_trap();
        let critical_z = trap.omega_x / libm::sqrt(critical_ratio(&trap));
        let mut previous = f64::NEG_INFINITY;
        let mut sign_changes = 0;
        let mut last_sign = -1.0;
        for i in 0..=200 {
            let wz = critical_z * (0.5 + f64::from(i) / 200.0);
            let m = bare_mass(&TrapParams { omega_z: wz, ..trap });
            assert!(m > previous, "bare mass not monotone at omega_z = {wz:.6e}");
            previous = m;
            let sign = if m >= 0.0 { 1.0 } else { -1.0 };
            if sign != last_sign {
                sign_changes += 1;
            }
            last_sign = sign;
        }
        assert_eq!(sign_changes, 1);
    }

    #[test]
    fn critical_ratio_shrinks_with_chain_length_toward_the_infinite_limit() {
        let trap = yb_trap();
        let mut last = f64::INFINITY;
        for n in [16usize, 64, 256, 4096] {
            let k = critical_ratio(&TrapParams { n_ions: n, ..trap });
            assert!(k < last, "critical ratio not decreasing at N = {n}");
            last = k;
        }
        let long = critical_ratio(&TrapParams { n_ions: 4_000_000, ..trap });
        let ell3 = trap.ell * trap.ell * trap.ell;
        let apery = 2.0 * trap.a.powi(3) / (7.0 * ell3 * 1.202_056_9);
        assert_relative_eq!(long, apery, max_relative = 1e-6);
    }

    #[test]
    fn quartic_coupling_read_offs() {
        let trap = yb_trap();
        let lam = quartic_coupling(&trap);
        assert!(lam > 0.0);
        let (_, zeta5) = eta_zeta(trap.n_ions, 5);
        let k = rigidity(&trap);
        let m3 = trap.m_a.powi(3);
        let ell3 = trap.ell.powi(3);
        assert_relative_eq!(
            lam * k.powi(4) / (m3 * trap.omega_x * trap.omega_x * ell3),
            243.0 / 4.0 * zeta5,
            max_relative = 1e-12
        );
        // K grows linearly with the mass at fixed ell and a, so lambda halves.
        let heavier = TrapParams { m_a: 2.0 * trap.m_a, ..trap };
        assert_relative_eq!(quartic_coupling(&heavier), 0.5 * lam, max_relative = 1e-12);
    }

    #[test]
    fn direct_pair_sum_pins_the_quartic_normalization() {
        let trap = yb_trap();
        // Per-site quartic energy of the staggered configuration u_n = (-1)^n u,
        // straight from the pairwise constants beta_r = (3/2) C / (a r)^5.
        let u = 0.3 * trap.a;
        let mut per_site = 0.0;
        let mut r = 1;
        while r <= trap.n_ions / 2 {
            let d = trap.a * r as f64;
            let beta = 1.5 * COULOMB_CONSTANT / (d * d * d * d * d);
            per_site += beta / 4.0 * (2.0 * u).powi(4);
            r += 2;
        }
        let field = rigidity(&trap) * u / libm::sqrt(trap.m_a * trap.a.powi(3));
        let lambda_direct = 4.0 * per_site / (trap.a * field.powi(4));
        assert_relative_eq!(
            lambda_direct,
            quartic_coupling_direct_sum(&trap),
            max_relative = 1e-12
        );

        let (_, zeta5) = eta_zeta(trap.n_ions, 5);
        let mut odd5 = 0.0;
        let mut r = 1;
        while r <= trap.n_ions / 2 {
            odd5 += libm::pow(r as f64, -5.0);
            r += 2;
        }
        assert_relative_eq!(
            quartic_coupling(&trap) / quartic_coupling_direct_sum(&trap),
            81.0 / 32.0 * zeta5 / odd5,
            max_relative = 1e-12
        );
        let long = TrapParams { n_ions: 2_000_000, ..trap };
        assert_relative_eq!(
            quartic_coupling(&long) / quartic_coupling_direct_sum(&long),
            81.0 / 31.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn far_detuned_couplings_decay_dipolarly() {
        let trap = yb_trap();
        let laser = exchange_laser(2.0 * PI * 50.0e3);
        let (eta1, _) = eta_zeta(trap.n_ions, 1);
        let j0 = 2.0 * laser.omega_l * laser.omega_l * laser.eta_x * laser.eta_x
            / (trap.omega_x * eta1);
        let dl_sq = laser.delta_l * laser.delta_l;
        let dip_den = trap.omega_y * trap.omega_y - dl_sq;
        let wx_sq = trap.omega_x * trap.omega_x;
        for r in 1..=8usize {
            let j = spin_couplings(&trap, &laser, 40, 40 + r).unwrap();
            let d = r as f64 * trap.a / trap.ell;
            let dipolar_only = j0 * wx_sq * wx_sq * eta1 / (dip_den * dip_den) / (d * d * d);
            assert_relative_eq!(j, dipolar_only, max_relative = 1e-4);
        }
    }

    #[test]
    fn near_resonant_detuning_favors_the_short_range_propagator() {
        let trap = yb_trap();
        let gap_sq = bare_mass(&trap) * sound_velocity(&trap).powi(4) / (HBAR * HBAR);
        let laser = exchange_laser(libm::sqrt(0.995 * gap_sq));
        let j_full = spin_couplings(&trap, &laser, 0, 1).unwrap();
        // Dipolar reconstruction of the same pair.
        let (eta1, _) = eta_zeta(trap.n_ions, 1);
        let j0 = 2.0 * laser.omega_l * laser.omega_l * laser.eta_x * laser.eta_x
            / (trap.omega_x * eta1);
        let dl_sq = laser.delta_l * laser.delta_l;
        let dip_den = trap.omega_y * trap.omega_y - dl_sq;
        let wx_sq = trap.omega_x * trap.omega_x;
        let d = trap.a / trap.ell;
        let dipolar_only = j0 * wx_sq * wx_sq * eta1 / (dip_den * dip_den) / (d * d * d);
        assert!(
            (j_full - dipolar_only).abs() > 100.0 * dipolar_only.abs(),
            "propagator term {:.3e} does not dominate the dipolar tail {:.3e}",
            j_full - dipolar_only,
            dipolar_only
        );
    }

    #[test]
    fn exchange_sign_alternates_with_range_parity_near_resonance() {
        let trap = yb_trap();
        let gap_sq = bare_mass(&trap) * sound_velocity(&trap).powi(4) / (HBAR * HBAR);
        let laser = exchange_laser(libm::sqrt(0.995 * gap_sq));
        for r in 1..=6usize {
            let j = spin_couplings(&trap, &laser, 10, 10 + r).unwrap();
            if r % 2 == 1 {
                assert!(j > 0.0, "odd range {r} should be positive, got {j:.3e}");
            } else {
                assert!(j < 0.0, "even range {r} should be negative, got {j:.3e}");
            }
            assert_relative_eq!(
                j,
                spin_couplings(&trap, &laser, 25, 25 + r).unwrap(),
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn degenerate_exchange_configurations_are_rejected() {
        let trap = yb_trap();
        let laser = exchange_laser(2.0 * PI * 50.0e3);
        assert!(matches!(spin_couplings(&trap, &laser, 5, 5), Err(Error::IonMapping(_))));
        let resonant = exchange_laser(trap.omega_y);
        assert!(matches!(spin_couplings(&trap, &resonant, 0, 1), Err(Error::IonMapping(_))));
        let gap_sq = bare_mass(&trap) * sound_velocity(&trap).powi(4) / (HBAR * HBAR);
        let above_gap = exchange_laser(libm::sqrt(1.5 * gap_sq));
        assert!(matches!(spin_couplings(&trap, &above_gap, 0, 1), Err(Error::IonMapping(_))));
    }

    #[test]
    fn nearest_neighbor_hopping_sets_the_velocity_exactly() {
        let j = 2.0 * PI * 1.7e3;
        let a = 6.0e-6;
        assert_eq!(fermi_velocity(a, &[j]), 2.0 * a * j);
        assert_eq!(fermi_velocity(a, &[]), 0.0);
    }

    #[test]
    fn alternating_velocity_sum_is_bounded_by_its_first_omitted_term() {
        // Dipolar table J_r = J1 / (2r - 1)^3 makes the weighted terms an
        // alternating sequence with magnitude J1 / (2r - 1)^2.
        let j1 = 2.0 * PI * 1.0e3;
        let a = 6.0e-6;
        let table = |count: usize| -> Vec<f64> {
            (0..count).map(|i| j1 / ((2 * i + 1) as f64).powi(3)).collect()
        };
        for cut in [4usize, 8, 16, 32] {
            let truncated = fermi_velocity(a, &table(cut));
            let full = fermi_velocity(a, &table(cut + 200));
            let first_omitted = 2.0 * a * j1 / ((2 * cut + 1) as f64).powi(2);
            assert!(
                (full - truncated).abs() <= first_omitted,
                "tail {:.3e} exceeds the first omitted term {:.3e} at cut {cut}",
                (full - truncated).abs(),
                first_omitted
            );
        }
    }

    #[test]
    fn velocity_round_trips_through_the_dispersion_slope() {
        let trap = yb_trap();
        let laser = exchange_laser(2.0 * PI * 50.0e3);
        let j1 = spin_couplings(&trap, &laser, 0, 1).unwrap();
        let cf = fermi_velocity(trap.a, &[j1]);
        let params = FermionParams::new(j1, 0.0).unwrap();
        let q = 1e-3 / trap.a;
        let (_, eps) = fermion_dispersion(q, trap.a, &params, 0.0);
        let slope = eps / q;
        assert!(
            (slope - cf).abs() <= cf * (q * trap.a) * (q * trap.a),
            "slope {slope:.6e} vs velocity {cf:.6e}"
        );
    }

    #[test]
    fn yukawa_reduces_to_half_the_rabi_frequency_without_modulation() {
        let laser =
            LaserParams::new(0.0, 0.0, 0.0, 2.0 * PI * 20.0e3, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(yukawa(&laser), 0.5 * laser.omega_tilde);
    }

    #[test]
    fn yukawa_vanishes_at_quarter_wave_offset() {
        let z0 = 3.0e-7;
        let laser = LaserParams::new(
            0.0,
            0.0,
            0.0,
            2.0 * PI * 20.0e3,
            0.5 * PI / z0,
            z0,
            0.05,
            0.0,
        )
        .unwrap();
        assert_abs_diff_eq!(yukawa(&laser), 0.0, epsilon = 1e-15 * laser.omega_tilde);
    }

    #[test]
    fn micromotion_factor_matches_the_bessel_series() {
        // q_z delta_k z0 / 2 = 1 isolates the J0(1) factor.
        let z0 = 2.5e-7;
        let delta_k = 8.0e6;
        let q_z = 2.0 / (delta_k * z0);
        let laser =
            LaserParams::new(0.0, 0.0, 0.0, 2.0 * PI * 20.0e3, delta_k, z0, q_z, 0.0).unwrap();
        let g = yukawa(&laser);
        let bessel = g / (0.5 * laser.omega_tilde * libm::cos(delta_k * z0));
        assert_relative_eq!(bessel, 0.765_197_686_6, max_relative = 1e-9);
    }

    #[test]
    fn lattice_round_trip_reproduces_the_zigzag_expansion() {
        let trap = TrapParams { omega_z: 2.0 * PI * 650.0e3, ..yb_trap() };
        let spec = lattice_spec(&trap).unwrap();
        let cb = sound_velocity(&trap);
        // Independent gap rebuild.
        let mut zeta3 = 0.0;
        for r in 1..=(trap.n_ions / 2) {
            zeta3 += libm::pow(r as f64, -3.0);
        }
        let ratio = trap.ell / trap.a;
        let gap_sq = trap.omega_z * trap.omega_z
            - 3.5 * trap.omega_x * trap.omega_x * ratio.powi(3) * zeta3;
        assert!(gap_sq > 0.0);
        assert_relative_eq!(spec.m0_sq, gap_sq / (cb * cb), max_relative = 1e-14);
        assert!(spec.lam > 0.0);

        let diff = |qa: f64| {
            let q = qa / trap.a;
            let lattice_sq = scalar_dispersion(q, &spec).unwrap().powi(2);
            let expansion_sq = (gap_sq + cb * cb * q * q) / (cb * cb);
            (lattice_sq - expansion_sq).abs()
        };
        for qa in [0.02, 0.04, 0.08] {
            let q = qa / trap.a;
            assert!(
                diff(qa) <= q * q * qa * qa / 10.0,
                "round-trip error {:.3e} outside the O(q^2 a^2) band at qa = {qa}",
                diff(qa)
            );
        }
        let order = diff(0.08) / diff(0.04);
        assert!((14.0..18.0).contains(&order), "error ratio {order:.2} is not quartic");
    }

    #[test]
    fn trap_validation_and_warnings() {
        let trap = yb_trap();
        assert!(trap.warnings().is_empty());
        assert!(TrapParams::new(0.0, 1.0, 1.0, 8, 1e-6, 1e-6, 1e-25).is_err());
        assert!(TrapParams::new(1.0, 1.0, -1.0, 8, 1e-6, 1e-6, 1e-25).is_err());
        assert!(TrapParams::new(1.0, 1.0, 1.0, 1, 1e-6, 1e-6, 1e-25).is_err());
        let squeezed = TrapParams { omega_y: 0.5 * trap.omega_z, ..trap };
        assert_eq!(squeezed.warnings().len(), 1);
        let cloud = TrapParams { omega_z: 0.5 * trap.omega_x, omega_y: trap.omega_y, ..trap };
        assert!(!cloud.warnings().is_empty());
        assert_relative_eq!(
            trap.kappa_x(),
            (trap.omega_x / trap.omega_z).powi(2),
            max_relative = 1e-15
        );
        assert!(trap.kappa_y() < trap.kappa_x());
    }

    #[test]
    fn laser_validation_rejects_negative_amplitudes() {
        assert!(LaserParams::new(-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(LaserParams::new(0.0, 0.0, 0.0, 0.0, 0.0, -1e-9, 0.0, 0.0).is_err());
        assert!(LaserParams::new(0.0, f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(LaserParams::new(1.0, -2.0, -3.0, 4.0, -5.0, 6.0, 0.1, 0.2).is_ok());
    }
}
