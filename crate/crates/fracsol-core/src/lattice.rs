//! Scalar chain model: parameters, field states, soliton profiles, energies,
//! and the reference formulas of the continuum theory.
//!
//! Everything works in lattice units (`hbar = 1`); the spacing `a` is carried
//! explicitly so observables can be reported in physical units. Site
//! coordinates are measured from the midpoint site `N/2`, and the staggering
//! sign `(-1)^n` is anchored so that the midpoint site is odd.

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::mth;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Default number of boundary cells excluded from charge readouts.
pub const DEFAULT_EDGE_EXCLUSION: usize = 3;

/// Couplings and geometry of the scalar chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    /// Number of sites N.
    pub n: usize,
    /// Lattice spacing a.
    pub a: f64,
    /// Bare mass squared; negative in the symmetry-broken regime.
    pub m0_sq: f64,
    /// Quartic coupling; zero gives a free chain.
    pub lam: f64,
}

impl LatticeSpec {
    /// Validates and builds a spec.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] for `n < 2`, non-positive `a`, negative
    /// `lam`, or non-finite entries.
    pub fn new(n: usize, a: f64, m0_sq: f64, lam: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
        }
        if !m0_sq.is_finite() {
            return Err(Error::InvalidParameter(format!("m0_sq must be finite, got {m0_sq}")));
        }
        if !(lam.is_finite() && lam >= 0.0) {
            return Err(Error::InvalidParameter(format!("lam must be >= 0, got {lam}")));
        }
        Ok(Self { n, a, m0_sq, lam })
    }

    /// Builds a symmetry-broken spec from the kink amplitude `phi0` and
    /// width `xi0` (length units): `m0_sq = -2/xi0^2`, `lam = 2/(xi0^2 phi0^2)`.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] unless `phi0 > 0` and `xi0 > 0`.
    pub fn from_kink_scales(n: usize, a: f64, phi0: f64, xi0: f64) -> Result<Self> {
        if !(phi0.is_finite() && phi0 > 0.0 && xi0.is_finite() && xi0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kink scales must be positive, got phi0 {phi0}, xi0 {xi0}"
            )));
        }
        Self::new(n, a, -2.0 / (xi0 * xi0), 2.0 / (xi0 * xi0 * phi0 * phi0))
    }

    /// True in the spontaneously broken phase (`m0_sq < 0`, `lam > 0`).
    #[must_use]
    pub fn is_broken(&self) -> bool {
        self.m0_sq < 0.0 && self.lam > 0.0
    }

    /// Vacuum amplitude `Φ0 = sqrt(-m0_sq/lam)`.
    ///
    /// # Errors
    ///
    /// [`Error::SymmetricPhase`] outside the broken phase.
    pub fn phi0(&self) -> Result<f64> {
        if !self.is_broken() {
            return Err(Error::SymmetricPhase(format!(
                "phi0 undefined for m0_sq {} lam {}",
                self.m0_sq, self.lam
            )));
        }
        Ok(libm::sqrt(-self.m0_sq / self.lam))
    }

    /// Kink width `ξ0 = sqrt(-2/m0_sq)`.
    ///
    /// # Errors
    ///
    /// [`Error::SymmetricPhase`] outside the broken phase.
    pub fn xi0(&self) -> Result<f64> {
        if !self.is_broken() {
            return Err(Error::SymmetricPhase(format!(
                "xi0 undefined for m0_sq {} lam {}",
                self.m0_sq, self.lam
            )));
        }
        Ok(libm::sqrt(-2.0 / self.m0_sq))
    }

    /// Index of the midpoint site that anchors coordinates and staggering.
    #[must_use]
    pub const fn midpoint(&self) -> usize {
        self.n / 2
    }

    /// Coordinate of site `n` measured from the midpoint site.
    #[must_use]
    pub fn site_position(&self, n: usize) -> f64 {
        self.a * (n as f64 - self.midpoint() as f64)
    }

    /// Staggering sign `(-1)^n` anchored so the midpoint site is odd.
    #[must_use]
    pub const fn stagger(&self, n: usize) -> f64 {
        if (n + self.midpoint()) % 2 == 0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Scalar field configuration: amplitudes and conjugate momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarState {
    /// Field amplitude per site.
    pub phi: Vec<f64>,
    /// Conjugate momentum per site.
    pub pi: Vec<f64>,
}

impl ScalarState {
    /// Validates lengths and finiteness.
    ///
    /// # Errors
    ///
    /// [`Error::ShapeMismatch`] on length disagreement,
    /// [`Error::InvalidParameter`] on non-finite entries.
    pub fn new(phi: Vec<f64>, pi: Vec<f64>) -> Result<Self> {
        if phi.len() != pi.len() {
            return Err(Error::ShapeMismatch(format!(
                "phi length {} vs pi length {}",
                phi.len(),
                pi.len()
            )));
        }
        if !phi.iter().chain(pi.iter()).all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite field entry".into()));
        }
        Ok(Self { phi, pi })
    }

    /// Uniform vacuum `sign * Φ0` at rest.
    ///
    /// # Errors
    ///
    /// [`Error::SymmetricPhase`] outside the broken phase.
    pub fn vacuum(spec: &LatticeSpec, sign: f64) -> Result<Self> {
        let phi0 = spec.phi0()?;
        Ok(Self { phi: vec![sign * phi0; spec.n], pi: vec![0.0; spec.n] })
    }

    /// Number of sites.
    #[must_use]
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    /// True when the chain has no sites.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// Kink descriptor: topological charge, center, and width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonProfile {
    /// Topological charge, +1.0 or -1.0.
    pub q_t: f64,
    /// Center `n0` in lattice-index units measured from the midpoint site;
    /// integers sit on sites, half-integers on links.
    pub center: f64,
    /// Width `ξ0/a` in lattice units.
    pub width: f64,
}

impl SolitonProfile {
    /// Validates the descriptor.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] unless `q_t` is exactly ±1 and `width > 0`.
    pub fn new(q_t: f64, center: f64, width: f64) -> Result<Self> {
        if q_t != 1.0 && q_t != -1.0 {
            return Err(Error::InvalidParameter(format!("q_t must be +1 or -1, got {q_t}")));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter(format!("width must be positive, got {width}")));
        }
        if !center.is_finite() {
            return Err(Error::InvalidParameter(format!("center must be finite, got {center}")));
        }
        Ok(Self { q_t, center, width })
    }
}

/// Analytic kink: `phi[n] = q_t Φ0 tanh((n - mid - n0)/width)`, `pi = 0`.
///
/// # Errors
///
/// [`Error::SymmetricPhase`] when no kink exists (`m0_sq >= 0` or `lam = 0`).
pub fn kink_profile(spec: &LatticeSpec, profile: &SolitonProfile) -> Result<ScalarState> {
    let phi0 = spec.phi0()?;
    let mid = spec.midpoint() as f64;
    let phi = (0..spec.n)
        .map(|n| profile.q_t * phi0 * libm::tanh((n as f64 - mid - profile.center) / profile.width))
        .collect();
    Ok(ScalarState { phi, pi: vec![0.0; spec.n] })
}

/// Kink-antikink pair: vacuum `-Φ0` outside, `+Φ0` plateau between walls at
/// `∓d/2`. `d` and `xi0` are in length units; coordinates are centered on the
/// chain midpoint.
///
/// # Errors
///
/// [`Error::SymmetricPhase`] outside the broken phase;
/// [`Error::InvalidParameter`] for `xi0 <= 0`.
pub fn kink_antikink_profile(spec: &LatticeSpec, d: f64, xi0: f64) -> Result<ScalarState> {
    let phi0 = spec.phi0()?;
    if !(xi0.is_finite() && xi0 > 0.0) {
        return Err(Error::InvalidParameter(format!("xi0 must be positive, got {xi0}")));
    }
    let phi = (0..spec.n)
        .map(|n| {
            let x = spec.site_position(n);
            -phi0 * libm::tanh((x - 0.5 * d) / xi0) + phi0 * libm::tanh((x + 0.5 * d) / xi0)
                - phi0
        })
        .collect();
    Ok(ScalarState { phi, pi: vec![0.0; spec.n] })
}

/// Per-site energy density (without the overall factor of `a`): kinetic,
/// forward-difference gradient assigned to the left site, potential, and,
/// when `gamma_diag` is given, the Yukawa expectation `g(-1)^n Φ_n Γ_nn`.
///
/// # Errors
///
/// [`Error::ShapeMismatch`] on dimension disagreement.
pub fn energy_density(
    spec: &LatticeSpec,
    state: &ScalarState,
    g: f64,
    gamma_diag: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let n = spec.n;
    if state.len() != n {
        return Err(Error::ShapeMismatch(format!("state length {} vs spec n {}", state.len(), n)));
    }
    if let Some(gd) = gamma_diag {
        if gd.len() != n {
            return Err(Error::ShapeMismatch(format!("gamma length {} vs spec n {}", gd.len(), n)));
        }
    }
    let inv_a_sq = 1.0 / (spec.a * spec.a);
    let mut density = Vec::with_capacity(n);
    for i in 0..n {
        let phi = state.phi[i];
        let pi = state.pi[i];
        let mut e = 0.5 * pi * pi + 0.5 * spec.m0_sq * phi * phi + 0.25 * spec.lam * phi * phi * phi * phi;
        if i + 1 < n {
            let d = state.phi[i + 1] - phi;
            e += 0.5 * d * d * inv_a_sq;
        }
        if let Some(gd) = gamma_diag {
            e += g * spec.stagger(i) * phi * gd[i];
        }
        density.push(e);
    }
    Ok(density)
}

/// Total energy `a · Σ_n density_n`, summed in site order so it is
/// bit-for-bit the sum of [`energy_density`].
///
/// # Errors
///
/// As [`energy_density`].
pub fn total_energy(
    spec: &LatticeSpec,
    state: &ScalarState,
    g: f64,
    gamma_diag: Option<&[f64]>,
) -> Result<f64> {
    let density = energy_density(spec, state, g, gamma_diag)?;
    Ok(spec.a * density.iter().sum::<f64>())
}

/// Topological charge `(phi[hi] - phi[lo])/(2Φ0)` read `exclusion` sites in
/// from each end.
///
/// # Errors
///
/// [`Error::SymmetricPhase`] outside the broken phase;
/// [`Error::InvalidParameter`] if the readout cells overlap.
pub fn topological_charge_with_exclusion(
    spec: &LatticeSpec,
    state: &ScalarState,
    exclusion: usize,
) -> Result<f64> {
    let phi0 = spec.phi0()?;
    let n = state.len();
    if 2 * exclusion + 1 >= n {
        return Err(Error::InvalidParameter(format!(
            "exclusion {exclusion} leaves no readout cells for n {n}"
        )));
    }
    Ok((state.phi[n - 1 - exclusion] - state.phi[exclusion]) / (2.0 * phi0))
}

/// [`topological_charge_with_exclusion`] with the default 3-site exclusion.
///
/// # Errors
///
/// As [`topological_charge_with_exclusion`].
pub fn topological_charge(spec: &LatticeSpec, state: &ScalarState) -> Result<f64> {
    topological_charge_with_exclusion(spec, state, DEFAULT_EDGE_EXCLUSION)
}

/// Continuum soliton mass. Classical: `M0 = (2√2/3)|m0|³/λ`. With
/// `quantum_corrected`, adds the leading fluctuation shift
/// `2μ(1/(2√3) - 3/(2π))` with `μ = |m0|`.
///
/// # Errors
///
/// [`Error::SymmetricPhase`] unless `m0_sq < 0` and `lam > 0`.
pub fn soliton_mass_reference(m0_sq: f64, lam: f64, quantum_corrected: bool) -> Result<f64> {
    if !(m0_sq < 0.0 && lam > 0.0) {
        return Err(Error::SymmetricPhase(format!(
            "soliton mass needs m0_sq < 0 and lam > 0, got {m0_sq}, {lam}"
        )));
    }
    let mu = libm::sqrt(-m0_sq);
    let m0 = 2.0 * core::f64::consts::SQRT_2 / 3.0 * mu * mu * mu / lam;
    if quantum_corrected {
        Ok(m0 + 2.0 * mu * (0.5 / libm::sqrt(3.0) - 1.5 / core::f64::consts::PI))
    } else {
        Ok(m0)
    }
}

/// Lattice dispersion `ω(k) = sqrt(m_eff² + (4/a²) sin²(ka/2))` with the
/// fluctuation mass `m_eff² = 2|m0_sq|` in the broken phase and `m0_sq`
/// otherwise.
///
/// # Errors
///
/// [`Error::InvalidParameter`] if the argument under the root is negative
/// (symmetric phase with `m0_sq < 0` is mapped to the fluctuation mass, so
/// this only triggers on pathological input).
pub fn scalar_dispersion(k: f64, spec: &LatticeSpec) -> Result<f64> {
    let m_eff_sq = if spec.m0_sq < 0.0 { -2.0 * spec.m0_sq } else { spec.m0_sq };
    let s = libm::sin(0.5 * k * spec.a);
    let arg = m_eff_sq + 4.0 / (spec.a * spec.a) * s * s;
    if arg < 0.0 {
        return Err(Error::InvalidParameter(format!("negative dispersion argument {arg}")));
    }
    Ok(libm::sqrt(arg))
}

/// Tadpole-renormalized bare mass:
/// `m0² = μ² − (3λ/2π)(1 + μ²a²/4)^{-1/2} K(1/(1 + μ²a²/4))`.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when `1 + μ²a²/4 <= 0` or the elliptic
/// argument reaches 1 (`μ² <= 0` with `λ > 0` makes K divergent).
pub fn tadpole_mass(mu_sq: f64, lam: f64, a: f64) -> Result<f64> {
    let den = 1.0 + 0.25 * mu_sq * a * a;
    if !(den > 0.0) {
        return Err(Error::InvalidParameter(format!("1 + mu_sq a^2/4 = {den} must be positive")));
    }
    if lam == 0.0 {
        return Ok(mu_sq);
    }
    let k = mth::complete_elliptic_k(1.0 / den)?;
    Ok(mu_sq - 1.5 * lam / core::f64::consts::PI / libm::sqrt(den) * k)
}

/// Continuum zero-mode spinor amplitude at position `x` relative to the
/// soliton center: `sqrt(|Ψ(x)|²) · (1, i q_t)/√2` with
/// `|Ψ(x)|² = cosh^{-2p}(x/ξ)/norm`, `p = sqrt(2g²/(λ c_f²))`, normalized to
/// unit integral over the line.
///
/// # Errors
///
/// [`Error::InvalidParameter`] unless `g, lam, xi, c_f > 0` and `q_t = ±1`.
pub fn continuum_zero_mode(
    x: f64,
    g: f64,
    lam: f64,
    xi: f64,
    c_f: f64,
    q_t: f64,
) -> Result<[C64; 2]> {
    if !(g > 0.0 && lam > 0.0 && xi > 0.0 && c_f > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "continuum zero mode needs positive g, lam, xi, c_f; got {g}, {lam}, {xi}, {c_f}"
        )));
    }
    if q_t != 1.0 && q_t != -1.0 {
        return Err(Error::InvalidParameter(format!("q_t must be +1 or -1, got {q_t}")));
    }
    let p = g * libm::sqrt(2.0 / lam) / c_f;
    // ∫ cosh^{-2p}(x/ξ) dx = ξ √π Γ(p)/Γ(p + 1/2).
    let norm = xi * libm::sqrt(core::f64::consts::PI) * libm::tgamma(p) / libm::tgamma(p + 0.5);
    let density = libm::pow(libm::cosh(x / xi), -2.0 * p) / norm;
    let amp = libm::sqrt(density) / core::f64::consts::SQRT_2;
    Ok([C64::new(amp, 0.0), C64::new(0.0, q_t * amp)])
}
