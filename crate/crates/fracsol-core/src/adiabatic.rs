//! Quasi-static kink scans.
//!
//! A relaxed kink is dragged across the chain in sub-lattice steps and the
//! Born-Oppenheimer energy is recorded at each position: the scalar part is
//! the static lattice energy, the fermionic part refills the instantaneous
//! ground state at half filling and adds the Yukawa expectation value. The
//! same machinery scans the in-gap mode energy and the kink-antikink pair
//! potential at fixed separation.

use crate::dynamics::{relax, relax_projected, RelaxParams};
use crate::error::{Error, Result};
use crate::fermion::{eigensystem_in_background, ground_correlation, FermionParams};
use crate::lattice::{
    kink_antikink_profile, kink_profile, total_energy, LatticeSpec, ScalarState, SolitonProfile,
};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Sites at each boundary a translated kink crossing must stay clear of.
pub const BOUNDARY_EXCLUSION: usize = 4;

/// Interpolation rule used by [`translate_kink_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolationMethod {
    /// Shape-preserving monotone cubic with Fritsch-Carlson slopes.
    MonotoneCubic,
    /// Piecewise linear.
    Linear,
}

/// Couplings a scan was taken at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanCouplings {
    /// Fermion tunneling energy.
    pub j: f64,
    /// Yukawa coupling.
    pub g: f64,
    /// Bare fermion mass.
    pub m_f: f64,
    /// Whether the values include the fermionic ground-state energy.
    pub with_fermions: bool,
}

/// One-dimensional scan: strictly increasing positions, one value each, and
/// the couplings the values were computed at. Values are raw energies; take
/// differences against [`ScanResult::min_value`] to compare scans.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Scan coordinate per point, strictly increasing.
    pub positions: Vec<f64>,
    /// Recorded value per point.
    pub values: Vec<f64>,
    /// Couplings of the scan.
    pub couplings: ScanCouplings,
}

impl ScanResult {
    /// Validates shape, finiteness, and strict monotonicity of positions.
    ///
    /// # Errors
    ///
    /// [`Error::ShapeMismatch`] on length disagreement,
    /// [`Error::InvalidParameter`] on an empty grid, non-finite entries, or
    /// positions out of order.
    pub fn new(positions: Vec<f64>, values: Vec<f64>, couplings: ScanCouplings) -> Result<Self> {
        if positions.len() != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} positions vs {} values",
                positions.len(),
                values.len()
            )));
        }
        if positions.is_empty() {
            return Err(Error::InvalidParameter("empty scan grid".into()));
        }
        if positions.iter().chain(values.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite scan entry".into()));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("scan positions must be strictly increasing".into()));
        }
        Ok(Self { positions, values, couplings })
    }

    /// Number of scan points.
    #[must_use]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    /// Whether the scan holds no points; `new` rejects this.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Smallest recorded value.
    #[must_use]
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest recorded value.
    #[must_use]
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Position of the smallest recorded value.
    #[must_use]
    pub fn min_position(&self) -> f64 {
        let mut best = 0;
        for i in 1..self.values.len() {
            if self.values[i] < self.values[best] {
                best = i;
            }
        }
        self.positions[best]
    }
}

/// Fritsch-Carlson slopes on a unit grid: harmonic mean of adjacent secants
/// inside, zero across extrema, one-sided at the ends limited to three times
/// the boundary secant. Monotone data stays monotone per interval.
fn monotone_slopes(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 2 {
        return m;
    }
    let d: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    for i in 1..n - 1 {
        let (lo, hi) = (d[i - 1], d[i]);
        if lo * hi > 0.0 {
            m[i] = 2.0 * lo * hi / (lo + hi);
        }
    }
    m[0] = end_slope(d[0], if n > 2 { d[1] } else { d[0] });
    m[n - 1] = end_slope(d[n - 2], if n > 2 { d[n - 3] } else { d[n - 2] });
    m
}

/// One-sided boundary slope `(3 d_near - d_far)/2`, clipped to keep the
/// boundary interval monotone.
fn end_slope(near: f64, far: f64) -> f64 {
    let m = 1.5 * near - 0.5 * far;
    if m * near <= 0.0 {
        0.0
    } else if m.abs() > 3.0 * near.abs() {
        3.0 * near
    } else {
        m
    }
}

/// Cubic Hermite evaluation at `x` on the unit grid, clamped to the end
/// values outside the data range.
fn hermite_eval(y: &[f64], m: &[f64], x: f64) -> f64 {
    let n = y.len();
    if x <= 0.0 {
        return y[0];
    }
    if x >= (n - 1) as f64 {
        return y[n - 1];
    }
    let i = x as usize;
    let t = x - i as f64;
    let d = y[i + 1] - y[i];
    let c2 = 3.0 * d - 2.0 * m[i] - m[i + 1];
    let c3 = m[i] + m[i + 1] - 2.0 * d;
    y[i] + t * (m[i] + t * (c2 + t * c3))
}

/// Piecewise-linear evaluation at `x` on the unit grid, clamped outside.
fn linear_eval(y: &[f64], x: f64) -> f64 {
    let n = y.len();
    if x <= 0.0 {
        return y[0];
    }
    if x >= (n - 1) as f64 {
        return y[n - 1];
    }
    let i = x as usize;
    let t = x - i as f64;
    y[i] + t * (y[i + 1] - y[i])
}

/// Zero crossings of the field, as fractional site coordinates.
fn field_crossings(phi: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..phi.len().saturating_sub(1) {
        let (lo, hi) = (phi[i], phi[i + 1]);
        if lo == 0.0 {
            out.push(i as f64);
        } else if lo * hi < 0.0 {
            out.push(i as f64 + lo / (lo - hi));
        }
    }
    if let Some(&last) = phi.last() {
        if last == 0.0 {
            out.push((phi.len() - 1) as f64);
        }
    }
    out
}

/// [`translate_kink_with`] using the monotone cubic rule.
///
/// # Errors
///
/// As [`translate_kink_with`].
pub fn translate_kink(state: &ScalarState, shift: f64) -> Result<ScalarState> {
    translate_kink_with(state, shift, InterpolationMethod::MonotoneCubic)
}

/// Rigidly translates a kink configuration by `shift` sites. Integer shifts
/// relabel sites exactly, padding with the boundary value; fractional shifts
/// resample both field and momentum through the chosen interpolant. The
/// identity `translate(s + 1)[n] = translate(s)[n - 1]` holds away from the
/// boundaries because both sides evaluate the same interpolant at the same
/// point.
///
/// # Errors
///
/// [`Error::InvalidParameter`] for a non-finite shift, a state with no zero
/// crossing to track, or a shift that would push any crossing within
/// [`BOUNDARY_EXCLUSION`] sites of an end.
pub fn translate_kink_with(
    state: &ScalarState,
    shift: f64,
    method: InterpolationMethod,
) -> Result<ScalarState> {
    if !shift.is_finite() {
        return Err(Error::InvalidParameter(format!("shift must be finite, got {shift}")));
    }
    let n = state.phi.len();
    let crossings = field_crossings(&state.phi);
    if crossings.is_empty() {
        return Err(Error::InvalidParameter("no zero crossing to translate".into()));
    }
    let lo_bound = BOUNDARY_EXCLUSION as f64;
    let hi_bound = (n - 1 - BOUNDARY_EXCLUSION) as f64;
    for &c in &crossings {
        let target = c + shift;
        if target < lo_bound || target > hi_bound {
            return Err(Error::InvalidParameter(format!(
                "shift {shift} moves the crossing at {c} to {target}, inside the {BOUNDARY_EXCLUSION}-site boundary zone"
            )));
        }
    }
    if shift == 0.0 {
        return Ok(state.clone());
    }
    let rounded = libm::round(shift);
    if shift == rounded {
        let s = rounded as i64;
        let pick = |src: &[f64], i: usize| -> f64 {
            let j = i as i64 - s;
            if j < 0 {
                src[0]
            } else if j >= n as i64 {
                src[n - 1]
            } else {
                src[j as usize]
            }
        };
        let phi = (0..n).map(|i| pick(&state.phi, i)).collect();
        let pi = (0..n).map(|i| pick(&state.pi, i)).collect();
        return ScalarState::new(phi, pi);
    }
    let resample = |src: &[f64]| -> Vec<f64> {
        match method {
            InterpolationMethod::MonotoneCubic => {
                let m = monotone_slopes(src);
                (0..n).map(|i| hermite_eval(src, &m, i as f64 - shift)).collect()
            }
            InterpolationMethod::Linear => {
                (0..n).map(|i| linear_eval(src, i as f64 - shift)).collect()
            }
        }
    };
    ScalarState::new(resample(&state.phi), resample(&state.pi))
}

/// Static energy of a configuration, with the fermionic ground-state Yukawa
/// expectation added when requested. The correlation diagonal enters the
/// density as `Γ_nn = C_nn / a` so the site sum reproduces `g Σ σ_n Φ_n C_nn`.
fn born_oppenheimer_energy(
    spec: &LatticeSpec,
    p: &FermionParams,
    state: &ScalarState,
    with_fermions: bool,
) -> Result<f64> {
    if !with_fermions {
        return total_energy(spec, state, 0.0, None);
    }
    let es = eigensystem_in_background(&state.phi, p)?;
    let c = ground_correlation(&es)?;
    let gamma: Vec<f64> = c.densities().iter().map(|d| d / spec.a).collect();
    total_energy(spec, state, p.g, Some(&gamma))
}

/// Relaxed link-centered kink used as the reference configuration for the
/// position scans.
fn relaxed_link_kink(spec: &LatticeSpec) -> Result<ScalarState> {
    let width = spec.xi0()? / spec.a;
    let seed = kink_profile(spec, &SolitonProfile::new(1.0, 0.5, width)?)?;
    relax(&seed, spec, &RelaxParams::default())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty scan grid".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite grid point".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("scan grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Pinning potential of a kink dragged across the lattice: the kink is
/// relaxed once at a link, translated to each `x0` (sites at integers, links
/// at half-integers, measured from the midpoint site), and the static energy
/// is recorded, including the fermionic ground-state energy when
/// `with_fermions` is set.
///
/// # Errors
///
/// [`Error::InvalidParameter`] for an invalid grid, a symmetric-phase spec,
/// or positions pushing the kink into the boundary zone; numerical errors
/// from relaxation and diagonalization pass through.
pub fn pn_scan(
    spec: &LatticeSpec,
    p: &FermionParams,
    x0_grid: &[f64],
    with_fermions: bool,
) -> Result<ScanResult> {
    check_grid(x0_grid)?;
    let relaxed = relaxed_link_kink(spec)?;
    let mut values = Vec::with_capacity(x0_grid.len());
    for &x0 in x0_grid {
        let state = translate_kink(&relaxed, x0 - 0.5)?;
        values.push(born_oppenheimer_energy(spec, p, &state, with_fermions)?);
    }
    ScanResult::new(
        x0_grid.to_vec(),
        values,
        ScanCouplings { j: p.j, g: p.g, m_f: p.m_f, with_fermions },
    )
}

/// Barrier heights extracted from a position scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnBarrier {
    /// Full sweep `max - min` over the scan.
    pub total: f64,
    /// Escape barriers from the two inequivalent link wells, sorted
    /// ascending. The back-reaction splits the link minima while the site
    /// maxima stay degenerate, so each sub-barrier is the scan maximum over
    /// one well class. Present only when the scan was taken with fermions at
    /// `g > 0` and both link classes host an interior minimum.
    pub sub_barriers: Option<(f64, f64)>,
}

/// Reads barrier heights off a scan. Sub-barriers measure the scan maximum
/// above the deepest interior local minimum of each link-parity class.
///
/// # Errors
///
/// [`Error::InvalidParameter`] for a scan with fewer than three points.
pub fn pn_barrier(scan: &ScanResult) -> Result<PnBarrier> {
    if scan.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "barrier extraction needs at least 3 points, got {}",
            scan.len()
        )));
    }
    let max = scan.max_value();
    let total = max - scan.min_value();
    let mut class_min = [f64::INFINITY; 2];
    for i in 1..scan.len() - 1 {
        let v = scan.values[i];
        if v < scan.values[i - 1] && v <= scan.values[i + 1] {
            let parity = (libm::floor(scan.positions[i] + 0.5) as i64).rem_euclid(2) as usize;
            if v < class_min[parity] {
                class_min[parity] = v;
            }
        }
    }
    let doubled = scan.couplings.with_fermions
        && scan.couplings.g > 0.0
        && class_min.iter().all(|v| v.is_finite());
    let sub_barriers = doubled.then(|| {
        let (a, b) = (max - class_min[0], max - class_min[1]);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    });
    Ok(PnBarrier { total, sub_barriers })
}

/// Continuum estimate of the pinning barrier: twice the Fourier transform of
/// the kink energy density at the reciprocal lattice vector,
/// `V0 = 2 ε̃(2π/a)` with `ε̃(q) = (Φ0²/ξ0) · π Q (Q² + 4) / (6 sinh(πQ/2))`
/// and `Q = q ξ0`. Decays as `exp(-π²ξ0/a)` for wide kinks.
///
/// # Errors
///
/// [`Error::SymmetricPhase`] outside the broken regime.
pub fn pn_fourier_estimate(spec: &LatticeSpec) -> Result<f64> {
    let phi0 = spec.phi0()?;
    let xi0 = spec.xi0()?;
    let q_big = core::f64::consts::TAU / spec.a * xi0;
    let amplitude = phi0 * phi0 / xi0 * core::f64::consts::PI * q_big * (q_big * q_big + 4.0)
        / (6.0 * libm::sinh(core::f64::consts::PI * q_big / 2.0));
    Ok(2.0 * amplitude)
}

/// In-gap mode energy along a kink drag: the level at the bottom edge of the
/// filled half of the spectrum, recorded at each kink position. Crosses zero
/// when the kink sits on a site and pulls away towards the link registration.
///
/// # Errors
///
/// As [`pn_scan`].
pub fn zero_mode_energy_scan(
    spec: &LatticeSpec,
    p: &FermionParams,
    x0_grid: &[f64],
) -> Result<ScanResult> {
    check_grid(x0_grid)?;
    let relaxed = relaxed_link_kink(spec)?;
    let mut values = Vec::with_capacity(x0_grid.len());
    for &x0 in x0_grid {
        let state = translate_kink(&relaxed, x0 - 0.5)?;
        let es = eigensystem_in_background(&state.phi, p)?;
        values.push(es.eps[es.n_filled - 1]);
    }
    ScanResult::new(
        x0_grid.to_vec(),
        values,
        ScanCouplings { j: p.j, g: p.g, m_f: p.m_f, with_fermions: true },
    )
}

/// `1/cosh²`, evaluated through `exp(-2|z|)` so large arguments underflow to
/// zero instead of overflowing.
fn sech_sq(z: f64) -> f64 {
    let e = libm::exp(-2.0 * libm::fabs(z));
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Breathing and translation directions of a kink-antikink pair at walls
/// `±d/2`: `∂Φ/∂d ∝ sech²(u) + sech²(v)` and `∂Φ/∂x0 ∝ sech²(u) - sech²(v)`
/// with `u, v = (x ∓ d/2)/ξ0`. Normalization is left to the projector.
fn pair_soft_directions(spec: &LatticeSpec, d: f64, xi0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = spec.n;
    let mut even = Vec::with_capacity(n);
    let mut odd = Vec::with_capacity(n);
    for i in 0..n {
        let x = spec.site_position(i);
        let su = sech_sq((x - 0.5 * d) / xi0);
        let sv = sech_sq((x + 0.5 * d) / xi0);
        even.push(su + sv);
        odd.push(su - sv);
    }
    (even, odd)
}

/// Interaction potential of a kink-antikink pair at wall separation `d` (in
/// length units). Each configuration is relaxed with the breathing and
/// translation directions projected out so the walls stay pinned, the static
/// energy is recorded as in [`pn_scan`], and the energy of a well-separated
/// reference pair on the same chain is subtracted.
///
/// # Errors
///
/// [`Error::InvalidParameter`] for an invalid grid or a chain too short to
/// host the asymptotic reference pair; relaxation and diagonalization errors
/// pass through.
pub fn kink_antikink_potential(
    spec: &LatticeSpec,
    p: &FermionParams,
    d_grid: &[f64],
    with_fermions: bool,
) -> Result<ScanResult> {
    check_grid(d_grid)?;
    let xi0 = spec.xi0()?;
    let span = spec.a * spec.n as f64;
    // Reference walls sit 16 ξ0 clear of each boundary, rounded to an even
    // site count so the registration matches even-integer grid points. The
    // margin keeps the in-gap fermion tails off the chain ends.
    let d_ref = 2.0 * spec.a * libm::floor((span - 32.0 * xi0) / (2.0 * spec.a));
    if d_ref <= 4.0 * xi0 {
        return Err(Error::InvalidParameter(format!(
            "chain span {span} too short for an asymptotic reference pair"
        )));
    }
    let energy_at = |d: f64| -> Result<f64> {
        let seed = kink_antikink_profile(spec, d, xi0)?;
        let (even, odd) = pair_soft_directions(spec, d, xi0);
        // Merged walls overshoot the vacuum amplitude; the step must stay
        // under the Verlet bound for the quartic curvature at the seed peak.
        let peak = seed.phi.iter().fold(0.0f64, |m, &x| m.max(libm::fabs(x)));
        let curvature =
            2.0 * libm::fabs(spec.m0_sq) + 4.0 / (spec.a * spec.a) + 3.0 * spec.lam * peak * peak;
        let params = RelaxParams { dt: Some(1.0 / libm::sqrt(curvature)), ..Default::default() };
        let relaxed = relax_projected(&seed, spec, &params, &[even, odd])?;
        born_oppenheimer_energy(spec, p, &relaxed, with_fermions)
    };
    let reference = energy_at(d_ref)?;
    let mut values = Vec::with_capacity(d_grid.len());
    for &d in d_grid {
        values.push(energy_at(d)? - reference);
    }
    ScanResult::new(
        d_grid.to_vec(),
        values,
        ScanCouplings { j: p.j, g: p.g, m_f: p.m_f, with_fermions },
    )
}
