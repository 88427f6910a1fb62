//! Truncated-Wigner trajectory ensembles coupled to Gaussian fermion
//! evolution.
//!
//! Each trajectory draws a scalar initial condition from a Gaussian Wigner
//! ensemble, co-evolves it with the fermion correlation matrix, and records
//! field and charge observables on a uniform time grid. Ensembles average
//! trajectories in index order, so results are independent of how the
//! trajectories were scheduled. Fermionic fluctuations are carried entirely
//! by the correlation matrix; no stochastic fermion sampling takes place.
//!
//! Operator splitting per step (Lie-Trotter, the default): the scalar field
//! takes one velocity-Verlet step under the quartic force plus the Yukawa
//! force `-g σ_n C_nn(t)/a` held at its step-start value through both
//! half-kicks, then the fermion state advances over the full step under
//! `h(Φ(t+dt))`. The Strang variant instead splits the Yukawa kick around
//! the fermion update: opening half-kick with the step-start occupations,
//! drift, fermion step under `h(Φ(t+dt))`, closing half-kick with the
//! updated occupations. Splitting the fermion propagator itself would be
//! idle here: half-steps under the same Hamiltonian fuse, and the extra
//! eigenframe phases they leave behind are invisible to the occupation
//! numbers that carry the back-action.

use crate::dynamics::{conservative_force, evolve, step, IntegratorConfig, RelaxParams};
use crate::error::{Error, Result};
use crate::fermion::{
    accumulated_charge_from_density, condensate_from_density, unit_cell_charge_from_density,
    zero_mode_filling, CorrelationUpdate, FermionFrame, FermionParams, ZeroModePair,
};
use crate::fit::{fit_kink, FitResult};
use crate::lattice::{energy_density, kink_antikink_profile, LatticeSpec, ScalarState};
use crate::modes::{normal_modes, sample_initial, WignerSpec};
use crate::rng::GaussianSampler;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

/// Scalar-fermion operator splitting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    /// First order: scalar step with step-start occupations, then a full
    /// fermion step with the updated field.
    #[default]
    LieTrotter,
    /// Second order: opening half-kick with step-start occupations, drift,
    /// fermion step with the updated field, closing half-kick with the
    /// updated occupations.
    Strang,
}

/// Full description of a trajectory ensemble.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Scalar chain.
    pub spec: LatticeSpec,
    /// Fermion couplings; `g = 0` removes the fermion sector entirely.
    pub fparams: FermionParams,
    /// Initial-condition ensemble for the scalar field.
    pub wigner: WignerSpec,
    /// Integrator step.
    pub dt: f64,
    /// Evolution span; the step count is `round(t_max / dt)`.
    pub t_max: f64,
    /// Steps between recorded samples (the initial state is always
    /// recorded).
    pub record_stride: usize,
    /// Trajectory count.
    pub n_traj: usize,
    /// Base RNG seed; trajectory `i` draws from the stream `(seed, i)`.
    pub seed: u64,
    /// Fermion update rule: exact unitary steps or instantaneous ground
    /// states.
    pub fermion_mode: CorrelationUpdate,
    /// Occupancy of the mid-gap pair in the initial fermion state.
    pub zero_mode_occupation: ZeroModePair,
    /// Operator splitting order.
    pub splitting: Splitting,
}

impl ExperimentConfig {
    /// Config with integration defaults: `dt = 0.01`, `t_max = 10`,
    /// `record_stride = 10`, one trajectory, seed 0, unitary fermions at
    /// half filling, Lie-Trotter splitting.
    #[must_use]
    pub fn new(spec: LatticeSpec, fparams: FermionParams, wigner: WignerSpec) -> Self {
        Self {
            spec,
            fparams,
            wigner,
            dt: 0.01,
            t_max: 10.0,
            record_stride: 10,
            n_traj: 1,
            seed: 0,
            fermion_mode: CorrelationUpdate::Unitary,
            zero_mode_occupation: ZeroModePair::FillLower,
            splitting: Splitting::LieTrotter,
        }
    }

    /// Validates the run parameters.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] on a non-positive or non-finite `dt`, a
    /// span shorter than one step, a zero stride, or an empty ensemble.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_traj == 0 {
            return Err(Error::InvalidParameter("n_traj must be at least 1".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be at least 1".into()));
        }
        if self.n_steps() == 0 {
            return Err(Error::InvalidParameter(format!(
                "t_max {} spans no full step of dt {}",
                self.t_max, self.dt
            )));
        }
        Ok(())
    }

    /// Step count realizing `t_max`.
    #[must_use]
    pub fn n_steps(&self) -> usize {
        libm::round(self.t_max / self.dt).max(0.0) as usize
    }

    fn coupled(&self) -> bool {
        self.fparams.g != 0.0
    }
}

/// Time series of one trajectory. Scalar observables are recorded for every
/// sample; the fermionic ones are empty when the run is decoupled (`g = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// Sample times, uniform at `record_stride · dt` starting from 0.
    pub times: Vec<f64>,
    /// Field snapshots, one row of `N` sites per time.
    pub phi: Vec<Vec<f64>>,
    /// Energy density per site, including the Yukawa term when coupled.
    pub energy_density: Vec<Vec<f64>>,
    /// Unit-cell charge density `ρ_{n,n+1}`; rows of length `N - 1`.
    pub cell_charge: Vec<Vec<f64>>,
    /// Accumulated charge `ΔQ_n` over all cells (no boundary exclusion).
    pub accumulated_charge: Vec<Vec<f64>>,
    /// Sublattice-staggered density per unit cell; rows of length `N / 2`.
    pub condensate: Vec<Vec<f64>>,
    /// `|tr C − N_f|` per sample.
    pub trace_error: Vec<f64>,
    /// `‖C² − C‖_F` per sample; an upper bound on the entrywise residual.
    pub purity_residual: Vec<f64>,
}

impl TrajectoryRecord {
    fn with_capacity(records: usize) -> Self {
        Self {
            times: Vec::with_capacity(records),
            phi: Vec::with_capacity(records),
            energy_density: Vec::with_capacity(records),
            cell_charge: Vec::with_capacity(records),
            accumulated_charge: Vec::with_capacity(records),
            condensate: Vec::with_capacity(records),
            trace_error: Vec::with_capacity(records),
            purity_residual: Vec::with_capacity(records),
        }
    }
}

/// Per-time ensemble mean and standard error of one observable grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeanSe {
    /// Trajectory means, dimensioned like a single-trajectory record.
    pub mean: Vec<Vec<f64>>,
    /// Standard errors of the means; zero for a single trajectory.
    pub se: Vec<Vec<f64>>,
}

/// Ensemble averages of every recorded observable.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Shared sample times.
    pub times: Vec<f64>,
    /// Trajectories averaged.
    pub n_traj: usize,
    /// Scalar field.
    pub phi: MeanSe,
    /// Energy density.
    pub energy_density: MeanSe,
    /// Unit-cell charge density.
    pub cell_charge: MeanSe,
    /// Accumulated charge.
    pub accumulated_charge: MeanSe,
    /// Scalar fermion condensate.
    pub condensate: MeanSe,
    /// Worst `|tr C − N_f|` over trajectories, per sample time.
    pub max_trace_error: Vec<f64>,
    /// Worst `‖C² − C‖_F` over trajectories, per sample time.
    pub max_purity_residual: Vec<f64>,
}

/// One trajectory of the coupled system from an explicit initial scalar
/// sample. The initial fermion state is the ground state of `h(Φ(0))` at
/// the filling selected by `cfg.zero_mode_occupation`.
///
/// With `g = 0` this delegates to the plain scalar integrator, so the field
/// history is bit-identical to [`evolve`] and the fermionic observables stay
/// empty.
///
/// # Errors
///
/// Config validation, shape mismatches, eigensolver failures, and a
/// non-finite state mid-run ([`Error::NoConvergence`] with the step index).
pub fn run_trajectory(cfg: &ExperimentConfig, sample: &ScalarState) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let n = cfg.spec.n;
    if sample.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "sample length {} vs spec n {}",
            sample.len(),
            n
        )));
    }
    let steps = cfg.n_steps();
    let stride = cfg.record_stride;
    let records = 1 + steps / stride;

    if !cfg.coupled() {
        let icfg = IntegratorConfig::new(cfg.dt, 0.0, steps)?;
        let traj = evolve(sample, &cfg.spec, &icfg, stride, None)?;
        let mut rec = TrajectoryRecord::with_capacity(traj.times.len());
        for (t, state) in traj.times.iter().zip(&traj.states) {
            rec.times.push(*t);
            rec.phi.push(state.phi.clone());
            rec.energy_density.push(energy_density(&cfg.spec, state, 0.0, None)?);
        }
        return Ok(rec);
    }

    let filled = zero_mode_filling(n, cfg.zero_mode_occupation);
    let mut frame = FermionFrame::ground(&sample.phi, &cfg.fparams, filled)?;
    let mut state = sample.clone();
    let mut density = vec![0.0; n];
    let mut ext = vec![0.0; n];
    let mut force_buf = vec![0.0; n];
    let mut rec = TrajectoryRecord::with_capacity(records);
    frame.density(&mut density)?;
    record_coupled(cfg, 0.0, &state, &density, &frame, &mut rec)?;
    let g = cfg.fparams.g;
    let inv_a = 1.0 / cfg.spec.a;
    for k in 0..steps {
        match cfg.splitting {
            Splitting::LieTrotter => {
                frame.density(&mut density)?;
                for i in 0..n {
                    ext[i] = -g * cfg.spec.stagger(i) * density[i] * inv_a;
                }
                step(&mut state, &cfg.spec, cfg.dt, 0.0, Some(&ext), &mut force_buf);
                advance_fermions(&mut frame, &state.phi, cfg.dt, cfg.fermion_mode)?;
            }
            Splitting::Strang => {
                let half = 0.5 * cfg.dt;
                frame.density(&mut density)?;
                conservative_force(&cfg.spec, &state.phi, &mut force_buf);
                for i in 0..n {
                    state.pi[i] +=
                        half * (force_buf[i] - g * cfg.spec.stagger(i) * density[i] * inv_a);
                }
                for i in 0..n {
                    state.phi[i] += cfg.dt * state.pi[i];
                }
                advance_fermions(&mut frame, &state.phi, cfg.dt, cfg.fermion_mode)?;
                frame.density(&mut density)?;
                conservative_force(&cfg.spec, &state.phi, &mut force_buf);
                for i in 0..n {
                    state.pi[i] +=
                        half * (force_buf[i] - g * cfg.spec.stagger(i) * density[i] * inv_a);
                }
            }
        }
        if !state.phi.iter().chain(state.pi.iter()).all(|x| x.is_finite()) {
            return Err(Error::NoConvergence(format!(
                "state non-finite at step {} (t = {})",
                k + 1,
                (k + 1) as f64 * cfg.dt
            )));
        }
        if (k + 1) % stride == 0 {
            frame.density(&mut density)?;
            record_coupled(cfg, (k + 1) as f64 * cfg.dt, &state, &density, &frame, &mut rec)?;
        }
    }
    Ok(rec)
}

fn advance_fermions(
    frame: &mut FermionFrame,
    phi: &[f64],
    dt: f64,
    mode: CorrelationUpdate,
) -> Result<()> {
    match mode {
        CorrelationUpdate::Unitary => frame.step(phi, dt),
        CorrelationUpdate::Adiabatic => {
            let params = *frame.params();
            *frame = FermionFrame::ground(phi, &params, frame.n_filled())?;
            Ok(())
        }
    }
}

fn record_coupled(
    cfg: &ExperimentConfig,
    t: f64,
    state: &ScalarState,
    density: &[f64],
    frame: &FermionFrame,
    rec: &mut TrajectoryRecord,
) -> Result<()> {
    let gamma: Vec<f64> = density.iter().map(|d| d / cfg.spec.a).collect();
    rec.times.push(t);
    rec.phi.push(state.phi.clone());
    rec.energy_density.push(energy_density(&cfg.spec, state, cfg.fparams.g, Some(&gamma))?);
    rec.cell_charge.push(unit_cell_charge_from_density(density));
    rec.accumulated_charge.push(accumulated_charge_from_density(density, 0));
    rec.condensate.push(condensate_from_density(density));
    let (dtrace, purity) = frame.invariant_residuals();
    rec.trace_error.push(dtrace);
    rec.purity_residual.push(purity);
    Ok(())
}

/// One trajectory whose initial condition is drawn from the stream
/// `(cfg.seed, index)`.
///
/// # Errors
///
/// As [`run_trajectory`], plus sampling failures ([`Error::UnstableMode`]).
pub fn run_trajectory_indexed(cfg: &ExperimentConfig, index: u64) -> Result<TrajectoryRecord> {
    let mut rng = GaussianSampler::for_trajectory(cfg.seed, index);
    let sample = sample_initial(&cfg.wigner, &cfg.spec, &mut rng)?;
    run_trajectory(cfg, &sample)
}

/// Streaming mean/variance accumulator over trajectory records in index
/// order. Feeding records in a different order changes rounding, so
/// parallel drivers must buffer and push by index.
#[derive(Debug, Clone, Default)]
pub struct EnsembleAccumulator {
    n: usize,
    times: Vec<f64>,
    phi: Welford,
    energy: Welford,
    cell: Welford,
    acc: Welford,
    cond: Welford,
    max_trace: Vec<f64>,
    max_purity: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
struct Welford {
    mean: Vec<Vec<f64>>,
    m2: Vec<Vec<f64>>,
}

impl Welford {
    fn push(&mut self, count: usize, data: &[Vec<f64>]) -> Result<()> {
        if count == 1 {
            self.mean = data.to_vec();
            self.m2 = data.iter().map(|row| vec![0.0; row.len()]).collect();
            return Ok(());
        }
        if data.len() != self.mean.len() {
            return Err(Error::ShapeMismatch(format!(
                "record has {} rows, accumulator {}",
                data.len(),
                self.mean.len()
            )));
        }
        let inv = 1.0 / count as f64;
        for (t, row) in data.iter().enumerate() {
            if row.len() != self.mean[t].len() {
                return Err(Error::ShapeMismatch(format!(
                    "row {t} has {} entries, accumulator {}",
                    row.len(),
                    self.mean[t].len()
                )));
            }
            for (i, &x) in row.iter().enumerate() {
                let d = x - self.mean[t][i];
                self.mean[t][i] += d * inv;
                self.m2[t][i] += d * (x - self.mean[t][i]);
            }
        }
        Ok(())
    }

    fn finish(self, n: usize) -> MeanSe {
        let norm = if n > 1 { 1.0 / (n as f64 * (n as f64 - 1.0)) } else { 0.0 };
        let se = self
            .m2
            .iter()
            .map(|row| row.iter().map(|&v| libm::sqrt(v * norm)).collect())
            .collect();
        MeanSe { mean: self.mean, se }
    }
}

impl EnsembleAccumulator {
    /// Empty accumulator.
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds one trajectory record in. The first record fixes every shape.
    ///
    /// # Errors
    ///
    /// [`Error::ShapeMismatch`] when a later record disagrees with the
    /// first.
    pub fn push(&mut self, rec: &TrajectoryRecord) -> Result<()> {
        self.n += 1;
        if self.n == 1 {
            self.times = rec.times.clone();
            self.max_trace = rec.trace_error.clone();
            self.max_purity = rec.purity_residual.clone();
        } else {
            if rec.times != self.times {
                return Err(Error::ShapeMismatch("record time grids disagree".into()));
            }
            for (m, &v) in self.max_trace.iter_mut().zip(&rec.trace_error) {
                *m = m.max(v);
            }
            for (m, &v) in self.max_purity.iter_mut().zip(&rec.purity_residual) {
                *m = m.max(v);
            }
        }
        self.phi.push(self.n, &rec.phi)?;
        self.energy.push(self.n, &rec.energy_density)?;
        self.cell.push(self.n, &rec.cell_charge)?;
        self.acc.push(self.n, &rec.accumulated_charge)?;
        self.cond.push(self.n, &rec.condensate)?;
        Ok(())
    }

    /// Number of records folded in so far.
    #[must_use]
    pub fn len(&self) -> usize {
        self.n
    }

    /// True before any record has been pushed.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Final means and standard errors.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] when no record was pushed.
    pub fn finish(self) -> Result<EnsembleResult> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("ensemble has no trajectories".into()));
        }
        Ok(EnsembleResult {
            times: self.times,
            n_traj: self.n,
            phi: self.phi.finish(self.n),
            energy_density: self.energy.finish(self.n),
            cell_charge: self.cell.finish(self.n),
            accumulated_charge: self.acc.finish(self.n),
            condensate: self.cond.finish(self.n),
            max_trace_error: self.max_trace,
            max_purity_residual: self.max_purity,
        })
    }
}

/// Runs `cfg.n_traj` trajectories sequentially and averages them.
///
/// # Errors
///
/// The first failing trajectory aborts the ensemble with
/// [`Error::TrajectoryFailed`] carrying its index.
pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleResult> {
    cfg.validate()?;
    let mut acc = EnsembleAccumulator::new();
    for index in 0..cfg.n_traj as u64 {
        let rec = run_trajectory_indexed(cfg, index)
            .map_err(|e| Error::TrajectoryFailed { index, message: e.to_string() })?;
        acc.push(&rec)?;
    }
    acc.finish()
}

/// Kink width history `ξ(t)` from wall fits of the ensemble mean field.
/// Returns widths in length units, aligned with `ens.times`.
///
/// # Errors
///
/// Propagates the first failing profile fit with its sample index in the
/// message.
pub fn kink_width_series(ens: &EnsembleResult, a: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ens.phi.mean.len());
    for (t, row) in ens.phi.mean.iter().enumerate() {
        let fit = fit_kink(row).map_err(|e| {
            Error::InvalidParameter(format!("width fit failed at sample {t}: {e}"))
        })?;
        out.push(a * fit.params[2]);
    }
    Ok(out)
}

/// Wall fit of the mean field at one recorded sample; see [`fit_kink`] for
/// the parameter layout.
///
/// # Errors
///
/// [`Error::InvalidParameter`] for an out-of-range sample index, plus fit
/// failures.
pub fn fit_kink_at(ens: &EnsembleResult, sample: usize) -> Result<FitResult> {
    let row = ens.phi.mean.get(sample).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "sample {sample} out of range ({} recorded)",
            ens.phi.mean.len()
        ))
    })?;
    fit_kink(row)
}

/// Self-consistent minimum of the scalar energy dressed by the fermionic
/// ground-state occupations: alternates damped scalar relaxation under the
/// frozen Yukawa force `-g σ_n C_nn/a` with recomputation of the
/// occupations, until the combined force is below `params.tol`. Returns the
/// relaxed field with zero momentum.
///
/// # Errors
///
/// [`Error::NoConvergence`] when the force residual stalls; eigensolver
/// failures propagate.
pub fn relax_self_consistent(
    spec: &LatticeSpec,
    fparams: &FermionParams,
    initial: &ScalarState,
    filling: usize,
    params: &RelaxParams,
) -> Result<ScalarState> {
    let n = spec.n;
    if initial.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "state length {} vs spec n {}",
            initial.len(),
            n
        )));
    }
    let mut state = ScalarState::new(initial.phi.clone(), vec![0.0; n])?;
    if fparams.g == 0.0 {
        return crate::dynamics::relax(&state, spec, params);
    }
    let peak = state.phi.iter().fold(0.0f64, |m, &x| m.max(libm::fabs(x)));
    let curvature = 2.0 * libm::fabs(spec.m0_sq) + 4.0 / (spec.a * spec.a)
        + 3.0 * spec.lam * peak * peak
        + libm::fabs(fparams.g) / spec.a;
    let dt = params.dt.unwrap_or(1.0 / libm::sqrt(curvature));
    let mut ext = vec![0.0; n];
    let mut force_buf = vec![0.0; n];
    let mut density = vec![0.0; n];
    let inner_cap = (params.max_steps / 64).max(1000);
    for _ in 0..64 {
        let frame = FermionFrame::ground(&state.phi, fparams, filling)?;
        frame.density(&mut density)?;
        for i in 0..n {
            ext[i] = -fparams.g * spec.stagger(i) * density[i] / spec.a;
        }
        for p in &mut state.pi {
            *p = 0.0;
        }
        let mut inner_done = false;
        for _ in 0..inner_cap {
            step(&mut state, spec, dt, params.kappa, Some(&ext), &mut force_buf);
            conservative_force(spec, &state.phi, &mut force_buf);
            let mut worst = 0.0f64;
            for i in 0..n {
                worst = worst.max(libm::fabs(force_buf[i] + ext[i]));
            }
            if worst < params.tol {
                inner_done = true;
                break;
            }
        }
        if !inner_done {
            return Err(Error::NoConvergence(
                "dressed relaxation stalled before reaching the force tolerance".into(),
            ));
        }
        // Converged against the frozen occupations; accept once the refresh
        // no longer moves the force off tolerance.
        let frame = FermionFrame::ground(&state.phi, fparams, filling)?;
        frame.density(&mut density)?;
        conservative_force(spec, &state.phi, &mut force_buf);
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst
                .max(libm::fabs(force_buf[i] - fparams.g * spec.stagger(i) * density[i] / spec.a));
        }
        if worst < params.tol {
            for p in &mut state.pi {
                *p = 0.0;
            }
            return Ok(state);
        }
    }
    Err(Error::NoConvergence(
        "occupation refresh kept shifting the dressed minimum".into(),
    ))
}

/// Trajectory-level outcome of a kink-antikink collision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionOutcome {
    /// Final separation exceeds the initial one by more than two sites.
    Reflection,
    /// Separation over the final third of the run stays below the initial
    /// one: a bound oscillating pair.
    Bion,
    /// Neither clear escape nor clear binding.
    Mixed,
}

/// Ensemble averages plus per-trajectory separation diagnostics.
#[derive(Debug, Clone)]
pub struct CollisionResult {
    /// Averaged observables of the collision ensemble.
    pub ensemble: EnsembleResult,
    /// Wall separation per trajectory and sample time, in length units;
    /// zero where the field has fewer than two interior zero crossings.
    pub separations: Vec<Vec<f64>>,
    /// Classified outcome per trajectory.
    pub outcomes: Vec<CollisionOutcome>,
}

impl CollisionResult {
    /// `(reflections, bions, mixed)` tallies.
    #[must_use]
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for o in &self.outcomes {
            match o {
                CollisionOutcome::Reflection => c.0 += 1,
                CollisionOutcome::Bion => c.1 += 1,
                CollisionOutcome::Mixed => c.2 += 1,
            }
        }
        c
    }
}

/// Builds the collision initial ensemble: the analytic kink-antikink
/// profile at wall separation `d` as background, vacuum fluctuations on
/// every internal mode, the two lowest (Goldstone) modes frozen with the
/// odd one unoccupied, and a mean momentum kick `-p0` along the even one,
/// which moves the walls toward each other for `p0 > 0`.
///
/// # Errors
///
/// Profile and mode-construction failures propagate.
pub fn collision_config(
    base: &ExperimentConfig,
    d: f64,
    p0: f64,
) -> Result<ExperimentConfig> {
    let spec = &base.spec;
    let xi0 = spec.xi0()?;
    let background = kink_antikink_profile(spec, d, xi0)?;
    let basis = normal_modes(spec, &background.phi)?;
    // Even Goldstone: the soft-pair member overlapping the analytic
    // approach direction sech²(u) + sech²(v), which shrinks d.
    let mut even_dir = vec![0.0; spec.n];
    for (i, e) in even_dir.iter_mut().enumerate() {
        let x = spec.site_position(i);
        let u = (x - 0.5 * d) / xi0;
        let v = (x + 0.5 * d) / xi0;
        let su = 1.0 / libm::cosh(u);
        let sv = 1.0 / libm::cosh(v);
        *e = su * su + sv * sv;
    }
    let overlap = |nu: usize| -> f64 {
        let row = basis.modes.row(nu);
        libm::fabs(row.iter().zip(&even_dir).map(|(m, e)| m * e).sum::<f64>())
    };
    let even = if overlap(0) >= overlap(1) { 0 } else { 1 };
    let odd = 1 - even;
    // Sign of the mode relative to the approach direction, so -p0 always
    // means approaching walls.
    let orient = {
        let row = basis.modes.row(even);
        let s: f64 = row.iter().zip(&even_dir).map(|(m, e)| m * e).sum();
        if s >= 0.0 {
            1.0
        } else {
            -1.0
        }
    };
    let mut wigner = WignerSpec::vacuum_fluctuations(background, basis)?;
    wigner.frozen[even] = true;
    wigner.frozen[odd] = true;
    wigner.shift_p[even] = -orient * spec.a * p0;
    let mut cfg = base.clone();
    cfg.wigner = wigner;
    Ok(cfg)
}

/// Runs a collision ensemble prepared by [`collision_config`] and
/// classifies every trajectory by its wall-separation history.
///
/// # Errors
///
/// As [`run_ensemble`].
pub fn collision_experiment(
    base: &ExperimentConfig,
    d: f64,
    p0: f64,
) -> Result<CollisionResult> {
    let cfg = collision_config(base, d, p0)?;
    collision_run(&cfg)
}

/// Collision ensemble runner for an already-prepared config (for classical
/// variants, freeze or rescale the Wigner spec before calling).
///
/// # Errors
///
/// As [`run_ensemble`].
pub fn collision_run(cfg: &ExperimentConfig) -> Result<CollisionResult> {
    cfg.validate()?;
    let mut acc = EnsembleAccumulator::new();
    let mut separations = Vec::with_capacity(cfg.n_traj);
    let mut outcomes = Vec::with_capacity(cfg.n_traj);
    for index in 0..cfg.n_traj as u64 {
        let rec = run_trajectory_indexed(cfg, index)
            .map_err(|e| Error::TrajectoryFailed { index, message: e.to_string() })?;
        let seps: Vec<f64> =
            rec.phi.iter().map(|row| wall_separation(&cfg.spec, row)).collect();
        outcomes.push(classify_separation(&seps, cfg.spec.a));
        separations.push(seps);
        acc.push(&rec)?;
    }
    Ok(CollisionResult { ensemble: acc.finish()?, separations, outcomes })
}

/// Distance between the outermost interior zero crossings of the field, in
/// length units; zero when fewer than two crossings exist (merged walls).
#[must_use]
pub fn wall_separation(spec: &LatticeSpec, phi: &[f64]) -> f64 {
    let mut first = None;
    let mut last = None;
    for i in 0..phi.len().saturating_sub(1) {
        let crossing = if phi[i] == 0.0 {
            Some(i as f64)
        } else if phi[i] * phi[i + 1] < 0.0 {
            Some(i as f64 + phi[i] / (phi[i] - phi[i + 1]))
        } else {
            None
        };
        if let Some(x) = crossing {
            if first.is_none() {
                first = Some(x);
            }
            last = Some(x);
        }
    }
    match (first, last) {
        (Some(a), Some(b)) if b > a => spec.a * (b - a),
        _ => 0.0,
    }
}

/// Applies the separation-history thresholds: reflection when the final
/// separation exceeds the initial one by more than `2a`, bion when the
/// maximum over the final third stays below the initial one.
#[must_use]
pub fn classify_separation(separations: &[f64], a: f64) -> CollisionOutcome {
    if separations.len() < 3 {
        return CollisionOutcome::Mixed;
    }
    let s0 = separations[0];
    let s_final = separations[separations.len() - 1];
    if s_final > s0 + 2.0 * a {
        return CollisionOutcome::Reflection;
    }
    let tail_start = separations.len() - separations.len() / 3;
    let tail_max = separations[tail_start..].iter().fold(0.0f64, |m, &s| m.max(s));
    if tail_max < s0 {
        CollisionOutcome::Bion
    } else {
        CollisionOutcome::Mixed
    }
}
