//! Hamiltonian dynamics of the scalar chain: velocity-Verlet integration,
//! damped relaxation to static solutions, and trajectory recording.
//!
//! The step is symmetric: half a damping factor, half-kick, drift, half-kick,
//! half a damping factor. The conservative force uses zero-gradient free ends
//! (a missing neighbor counts as the site itself), matching the forward
//! difference gradient in the energy. An optional external force is held
//! fixed across both half-kicks of a step; providers are evaluated once per
//! step at the step-start state.

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, ScalarState};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Time step, damping, and step count for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Time step.
    pub dt: f64,
    /// Damping rate applied multiplicatively around each step.
    pub kappa: f64,
    /// Number of steps.
    pub steps: usize,
}

impl IntegratorConfig {
    /// Validates the configuration.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] unless `dt > 0` and `kappa >= 0`.
    pub fn new(dt: f64, kappa: f64, steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be >= 0, got {kappa}")));
        }
        Ok(Self { dt, kappa, steps })
    }
}

/// Parameters for damped relaxation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxParams {
    /// Time step; `None` picks `1/ω_max` from the band top.
    pub dt: Option<f64>,
    /// Damping rate.
    pub kappa: f64,
    /// Convergence threshold on `max|Π|` and `max|force|`.
    pub tol: f64,
    /// Step budget before giving up.
    pub max_steps: usize,
}

impl Default for RelaxParams {
    fn default() -> Self {
        Self { dt: None, kappa: 0.2, tol: 1e-10, max_steps: 5_000_000 }
    }
}

/// Recorded time series from [`evolve`]: the initial state plus one sample
/// every `stride` steps.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Sample times.
    pub times: Vec<f64>,
    /// Sampled states, aligned with `times`.
    pub states: Vec<ScalarState>,
    /// State after the last step.
    pub final_state: ScalarState,
}

/// External force callback: fills `out` with the per-site force given the
/// time and the step-start state.
pub type ForceProvider<'a> = &'a mut dyn FnMut(f64, &ScalarState, &mut [f64]);

/// Conservative force `(Φ_{n+1} - 2Φ_n + Φ_{n-1})/a² - m0²Φ_n - λΦ_n³` with
/// zero-gradient free ends, written into `out`.
///
/// # Panics
///
/// If `phi` and `out` do not both have length `spec.n`.
pub fn conservative_force(spec: &LatticeSpec, phi: &[f64], out: &mut [f64]) {
    let n = spec.n;
    assert_eq!(phi.len(), n);
    assert_eq!(out.len(), n);
    let inv_a_sq = 1.0 / (spec.a * spec.a);
    for i in 0..n {
        let left = if i == 0 { phi[0] } else { phi[i - 1] };
        let right = if i + 1 == n { phi[n - 1] } else { phi[i + 1] };
        // Grouping (left + right) first keeps the force bitwise antisymmetric
        // under mirror reflection, so a site-centered saddle stays centered.
        let lap = (left + right - 2.0 * phi[i]) * inv_a_sq;
        out[i] = lap - spec.m0_sq * phi[i] - spec.lam * phi[i] * phi[i] * phi[i];
    }
}

/// One velocity-Verlet step with symmetric multiplicative damping. The
/// optional `external` force is added to both half-kicks unchanged;
/// `force_buf` is scratch of length `spec.n`.
pub fn step(
    state: &mut ScalarState,
    spec: &LatticeSpec,
    dt: f64,
    kappa: f64,
    external: Option<&[f64]>,
    force_buf: &mut [f64],
) {
    let half = 0.5 * dt;
    let damp = if kappa == 0.0 { 1.0 } else { libm::exp(-0.5 * kappa * dt) };
    if kappa != 0.0 {
        for p in &mut state.pi {
            *p *= damp;
        }
    }
    conservative_force(spec, &state.phi, force_buf);
    match external {
        Some(f) => {
            for i in 0..spec.n {
                state.pi[i] += half * (force_buf[i] + f[i]);
            }
        }
        None => {
            for i in 0..spec.n {
                state.pi[i] += half * force_buf[i];
            }
        }
    }
    for i in 0..spec.n {
        state.phi[i] += dt * state.pi[i];
    }
    conservative_force(spec, &state.phi, force_buf);
    match external {
        Some(f) => {
            for i in 0..spec.n {
                state.pi[i] += half * (force_buf[i] + f[i]);
            }
        }
        None => {
            for i in 0..spec.n {
                state.pi[i] += half * force_buf[i];
            }
        }
    }
    if kappa != 0.0 {
        for p in &mut state.pi {
            *p *= damp;
        }
    }
}

/// Integrates `cfg.steps` steps, recording the state every `stride` steps
/// (the initial state is always recorded; `stride = 0` records only it).
///
/// # Errors
///
/// [`Error::ShapeMismatch`] on dimension disagreement;
/// [`Error::NoConvergence`] if the state leaves the finite range, with the
/// step index and time in the message.
pub fn evolve(
    initial: &ScalarState,
    spec: &LatticeSpec,
    cfg: &IntegratorConfig,
    stride: usize,
    mut force: Option<ForceProvider<'_>>,
) -> Result<Trajectory> {
    if initial.len() != spec.n {
        return Err(Error::ShapeMismatch(format!(
            "state length {} vs spec n {}",
            initial.len(),
            spec.n
        )));
    }
    let mut state = initial.clone();
    let mut force_buf = vec![0.0; spec.n];
    let mut ext_buf = vec![0.0; spec.n];
    let mut times = vec![0.0];
    let mut states = vec![state.clone()];
    for i in 0..cfg.steps {
        let t = i as f64 * cfg.dt;
        let ext = match force.as_mut() {
            Some(f) => {
                f(t, &state, &mut ext_buf);
                Some(ext_buf.as_slice())
            }
            None => None,
        };
        step(&mut state, spec, cfg.dt, cfg.kappa, ext, &mut force_buf);
        if !state.phi.iter().chain(state.pi.iter()).all(|x| x.is_finite()) {
            return Err(Error::NoConvergence(format!(
                "state non-finite at step {} (t = {})",
                i + 1,
                (i + 1) as f64 * cfg.dt
            )));
        }
        if stride != 0 && (i + 1) % stride == 0 {
            times.push((i + 1) as f64 * cfg.dt);
            states.push(state.clone());
        }
    }
    Ok(Trajectory { times, states, final_state: state })
}

fn band_top_dt(spec: &LatticeSpec) -> f64 {
    let m_eff_sq = if spec.m0_sq < 0.0 { -2.0 * spec.m0_sq } else { spec.m0_sq.max(0.0) };
    1.0 / libm::sqrt(m_eff_sq + 4.0 / (spec.a * spec.a))
}

fn orthonormalize(directions: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(directions.len());
    for d in directions {
        if d.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "projection direction length {} vs n {}",
                d.len(),
                n
            )));
        }
        let mut v = d.clone();
        for b in &basis {
            let dot: f64 = v.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
            for (vi, bi) in v.iter_mut().zip(b.iter()) {
                *vi -= dot * bi;
            }
        }
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if norm < 1e-12 {
            return Err(Error::InvalidParameter(
                "projection directions are linearly dependent".into(),
            ));
        }
        for vi in &mut v {
            *vi /= norm;
        }
        basis.push(v);
    }
    Ok(basis)
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let dot: f64 = v.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
        for (vi, bi) in v.iter_mut().zip(b.iter()) {
            *vi -= dot * bi;
        }
    }
}

fn projected_step(
    state: &mut ScalarState,
    spec: &LatticeSpec,
    dt: f64,
    kappa: f64,
    basis: &[Vec<f64>],
    force_buf: &mut [f64],
) {
    let half = 0.5 * dt;
    let damp = libm::exp(-0.5 * kappa * dt);
    for p in &mut state.pi {
        *p *= damp;
    }
    conservative_force(spec, &state.phi, force_buf);
    project_out(force_buf, basis);
    for i in 0..spec.n {
        state.pi[i] += half * force_buf[i];
    }
    for i in 0..spec.n {
        state.phi[i] += dt * state.pi[i];
    }
    conservative_force(spec, &state.phi, force_buf);
    project_out(force_buf, basis);
    for i in 0..spec.n {
        state.pi[i] += half * force_buf[i];
    }
    for p in &mut state.pi {
        *p *= damp;
    }
}

fn relax_inner(
    initial: &ScalarState,
    spec: &LatticeSpec,
    params: &RelaxParams,
    basis: &[Vec<f64>],
) -> Result<ScalarState> {
    if initial.len() != spec.n {
        return Err(Error::ShapeMismatch(format!(
            "state length {} vs spec n {}",
            initial.len(),
            spec.n
        )));
    }
    if !(params.tol > 0.0 && params.kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "relax needs tol > 0 and kappa > 0, got {}, {}",
            params.tol, params.kappa
        )));
    }
    let dt = match params.dt {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(v) => return Err(Error::InvalidParameter(format!("dt must be positive, got {v}"))),
        None => band_top_dt(spec),
    };
    let mut state = initial.clone();
    let phi_ref = initial.phi.clone();
    let mut force_buf = vec![0.0; spec.n];
    let mut disp = vec![0.0; spec.n];
    let mut residual = f64::INFINITY;
    for i in 0..params.max_steps {
        projected_step(&mut state, spec, dt, params.kappa, basis, &mut force_buf);
        if !basis.is_empty() {
            // Roundoff hygiene: the projected kicks keep Π and the
            // displacement in the orthogonal subspace up to accumulation.
            project_out(&mut state.pi, basis);
            for (d, (p, r)) in disp.iter_mut().zip(state.phi.iter().zip(phi_ref.iter())) {
                *d = p - r;
            }
            project_out(&mut disp, basis);
            for (p, (d, r)) in state.phi.iter_mut().zip(disp.iter().zip(phi_ref.iter())) {
                *p = r + d;
            }
        }
        if !state.phi.iter().all(|x| x.is_finite()) {
            return Err(Error::NoConvergence(format!("relaxation diverged at step {i}")));
        }
        conservative_force(spec, &state.phi, &mut force_buf);
        if !basis.is_empty() {
            project_out(&mut force_buf, basis);
        }
        let pi_max = state.pi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let f_max = force_buf.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        residual = pi_max.max(f_max);
        if residual < params.tol {
            state.pi.iter_mut().for_each(|p| *p = 0.0);
            return Ok(state);
        }
    }
    Err(Error::NoConvergence(format!(
        "relaxation residual {residual} above tol {} after {} steps",
        params.tol, params.max_steps
    )))
}

/// Damped evolution until `max|Π|` and `max|force|` both drop below
/// `params.tol`. Returns the static state with `Π` cleared.
///
/// # Errors
///
/// [`Error::NoConvergence`] with the final residual when the step budget is
/// exhausted or the state diverges.
pub fn relax(initial: &ScalarState, spec: &LatticeSpec, params: &RelaxParams) -> Result<ScalarState> {
    relax_inner(initial, spec, params, &[])
}

/// [`relax`] with the given directions projected out of the momentum, the
/// displacement from the initial configuration, and the convergence residual
/// after every step. Directions are orthonormalized internally.
///
/// # Errors
///
/// As [`relax`], plus [`Error::InvalidParameter`] for dependent directions.
pub fn relax_projected(
    initial: &ScalarState,
    spec: &LatticeSpec,
    params: &RelaxParams,
    directions: &[Vec<f64>],
) -> Result<ScalarState> {
    let basis = orthonormalize(directions, spec.n)?;
    relax_inner(initial, spec, params, &basis)
}

fn antisymmetrize(state: &mut ScalarState, center: usize) {
    let n = state.len();
    let kmax = center.min(n - 1 - center);
    state.phi[center] = 0.0;
    state.pi[center] = 0.0;
    for k in 1..=kmax {
        let p = 0.5 * (state.phi[center + k] - state.phi[center - k]);
        state.phi[center + k] = p;
        state.phi[center - k] = -p;
        let q = 0.5 * (state.pi[center + k] - state.pi[center - k]);
        state.pi[center + k] = q;
        state.pi[center - k] = -q;
    }
}

/// [`relax`] toward a saddle that is odd under reflection through
/// `center_site` (a site-centered kink). The field and momentum are
/// re-antisymmetrized about that site after every step, which removes the
/// translational instability; sites without a mirror partner relax freely.
///
/// # Errors
///
/// As [`relax`], plus [`Error::InvalidParameter`] if `center_site` is out of
/// range.
pub fn relax_reflection_antisymmetric(
    initial: &ScalarState,
    spec: &LatticeSpec,
    params: &RelaxParams,
    center_site: usize,
) -> Result<ScalarState> {
    if center_site >= spec.n {
        return Err(Error::InvalidParameter(format!(
            "center site {center_site} outside chain of {} sites",
            spec.n
        )));
    }
    if initial.len() != spec.n {
        return Err(Error::ShapeMismatch(format!(
            "state length {} vs spec n {}",
            initial.len(),
            spec.n
        )));
    }
    if !(params.tol > 0.0 && params.kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "relax needs tol > 0 and kappa > 0, got {}, {}",
            params.tol, params.kappa
        )));
    }
    let dt = match params.dt {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(v) => return Err(Error::InvalidParameter(format!("dt must be positive, got {v}"))),
        None => band_top_dt(spec),
    };
    let mut state = initial.clone();
    antisymmetrize(&mut state, center_site);
    let mut force_buf = vec![0.0; spec.n];
    let mut residual = f64::INFINITY;
    for i in 0..params.max_steps {
        step(&mut state, spec, dt, params.kappa, None, &mut force_buf);
        antisymmetrize(&mut state, center_site);
        if !state.phi.iter().all(|x| x.is_finite()) {
            return Err(Error::NoConvergence(format!("relaxation diverged at step {i}")));
        }
        conservative_force(spec, &state.phi, &mut force_buf);
        // The odd-sector force is what the constrained flow can remove.
        let kmax = center_site.min(spec.n - 1 - center_site);
        let mut f_max = 0.0f64;
        for k in 1..=kmax {
            f_max = f_max.max(0.5 * (force_buf[center_site + k] - force_buf[center_site - k]).abs());
        }
        let pi_max = state.pi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        residual = pi_max.max(f_max);
        if residual < params.tol {
            state.pi.iter_mut().for_each(|p| *p = 0.0);
            return Ok(state);
        }
    }
    Err(Error::NoConvergence(format!(
        "relaxation residual {residual} above tol {} after {} steps",
        params.tol, params.max_steps
    )))
}
