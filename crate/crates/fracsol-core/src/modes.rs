//! Linearized fluctuations about a scalar background: the elasticity matrix,
//! its normal-mode basis, stability classification, and Wigner sampling of
//! initial conditions for semiclassical ensembles.
//!
//! Mode coordinates follow `Q_ν = Σ_n M_{nν} δΦ_n` and
//! `P_ν = a Σ_n M_{nν} δΠ_n`; the inverse maps add `Σ_ν Q_ν M_{nν}` to the
//! field and `(1/a) Σ_ν P_ν M_{nν}` to the momentum.

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, ScalarState};
use crate::linalg::{Mat, SymTridiag};
use crate::rng::GaussianSampler;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Dimensionless stiffness matrix of fluctuations about `phi_background`:
/// diagonal `2 + m0²a² + 3λa²Φ_n²` (boundary rows start from 1), off-diagonal
/// `-1`. Its eigenvalues are `a²Ω²`.
///
/// # Errors
///
/// [`Error::ShapeMismatch`] if the background length differs from `spec.n`.
pub fn elasticity_matrix(spec: &LatticeSpec, phi_background: &[f64]) -> Result<SymTridiag> {
    let n = spec.n;
    if phi_background.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "background length {} vs spec n {}",
            phi_background.len(),
            n
        )));
    }
    let a_sq = spec.a * spec.a;
    let diag = (0..n)
        .map(|i| {
            let neighbors = if i == 0 || i + 1 == n { 1.0 } else { 2.0 };
            let phi = phi_background[i];
            neighbors + spec.m0_sq * a_sq + 3.0 * spec.lam * a_sq * phi * phi
        })
        .collect();
    Ok(SymTridiag { diag, offdiag: vec![-1.0; n - 1] })
}

/// Orthonormal normal-mode basis about a background. Mode `ν` occupies row
/// `ν` of `modes`; `omega_sq[ν]` is the physical `Ω_ν²` (the stiffness
/// eigenvalue divided by `a²`), ascending.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    /// Physical mode frequencies squared, ascending (negative means unstable).
    pub omega_sq: Vec<f64>,
    /// Row `ν` holds mode `ν`: `M_{nν} = modes[(ν, n)]`.
    pub modes: Mat,
}

impl ModeBasis {
    /// Number of modes (equals the number of sites).
    #[must_use]
    pub fn len(&self) -> usize {
        self.omega_sq.len()
    }

    /// True when the basis is empty.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.omega_sq.is_empty()
    }
}

/// Diagonalizes the elasticity matrix about `phi_background`.
///
/// # Errors
///
/// As [`elasticity_matrix`], plus [`Error::NoConvergence`] from the
/// eigensolver.
pub fn normal_modes(spec: &LatticeSpec, phi_background: &[f64]) -> Result<ModeBasis> {
    let k = elasticity_matrix(spec, phi_background)?;
    let eig = k.eigh()?;
    let inv_a_sq = 1.0 / (spec.a * spec.a);
    Ok(ModeBasis {
        omega_sq: eig.values.iter().map(|v| v * inv_a_sq).collect(),
        modes: eig.vectors_t,
    })
}

/// Outcome of [`stability_classify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stability {
    /// All mode frequencies are non-negative (within 1e-10).
    Stable,
    /// At least one genuinely negative `Ω²`; carries the lowest mode.
    Unstable {
        /// Index of the lowest mode.
        index: usize,
        /// Its `Ω²`.
        omega_sq: f64,
    },
}

/// Classifies a basis as unstable iff the lowest `Ω²` is below `-1e-10`.
#[must_use]
pub fn stability_classify(basis: &ModeBasis) -> Stability {
    match basis.omega_sq.first() {
        Some(&w) if w < -1e-10 => Stability::Unstable { index: 0, omega_sq: w },
        _ => Stability::Stable,
    }
}

/// Projects a state onto mode coordinates relative to a background:
/// `Q_ν = Σ_n M_{nν} (Φ - Φ_bg)_n`, `P_ν = a Σ_n M_{nν} (Π - Π_bg)_n`.
///
/// # Errors
///
/// [`Error::ShapeMismatch`] on dimension disagreement.
pub fn mode_coordinates(
    basis: &ModeBasis,
    spec: &LatticeSpec,
    state: &ScalarState,
    background: &ScalarState,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = spec.n;
    if state.len() != n || background.len() != n || basis.len() != n {
        return Err(Error::ShapeMismatch("mode projection dimension mismatch".into()));
    }
    let mut q = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    for nu in 0..n {
        let row = basis.modes.row(nu);
        let mut qa = 0.0;
        let mut pa = 0.0;
        for i in 0..n {
            qa += row[i] * (state.phi[i] - background.phi[i]);
            pa += row[i] * (state.pi[i] - background.pi[i]);
        }
        q.push(qa);
        p.push(spec.a * pa);
    }
    Ok((q, p))
}

/// Gaussian Wigner ensemble over mode coordinates: background, basis,
/// per-mode variances, deterministic mean shifts, and frozen modes (no
/// randomness, shift only).
#[derive(Debug, Clone)]
pub struct WignerSpec {
    /// Background configuration added to every sample.
    pub background: ScalarState,
    /// Mode basis of the fluctuations.
    pub basis: ModeBasis,
    /// Variance of `Q_ν`; vacuum default `1/(2Ω_ν)` (0 where `Ω² <= 0`).
    pub sigma_q_sq: Vec<f64>,
    /// Variance of `P_ν`; vacuum default `Ω_ν/2` (0 where `Ω² <= 0`).
    pub sigma_p_sq: Vec<f64>,
    /// Mean shift of `Q_ν`.
    pub shift_q: Vec<f64>,
    /// Mean shift of `P_ν`.
    pub shift_p: Vec<f64>,
    /// Frozen modes draw nothing and take exactly their shifts.
    pub frozen: Vec<bool>,
}

impl WignerSpec {
    /// Ground-state (vacuum) variances about the background; shifts zero,
    /// nothing frozen. Modes with `Ω² <= 0` get zero variance here and must
    /// be frozen before sampling.
    ///
    /// # Errors
    ///
    /// [`Error::ShapeMismatch`] if background and basis sizes disagree.
    pub fn vacuum_fluctuations(background: ScalarState, basis: ModeBasis) -> Result<Self> {
        let n = basis.len();
        if background.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "background length {} vs basis size {n}",
                background.len()
            )));
        }
        let mut sigma_q_sq = vec![0.0; n];
        let mut sigma_p_sq = vec![0.0; n];
        for nu in 0..n {
            let w_sq = basis.omega_sq[nu];
            if w_sq > 0.0 {
                let w = libm::sqrt(w_sq);
                sigma_q_sq[nu] = 0.5 / w;
                sigma_p_sq[nu] = 0.5 * w;
            }
        }
        Ok(Self {
            background,
            basis,
            sigma_q_sq,
            sigma_p_sq,
            shift_q: vec![0.0; n],
            shift_p: vec![0.0; n],
            frozen: vec![false; n],
        })
    }

    /// Validity diagnostics: currently flags a lowest-mode position variance
    /// exceeding `0.1 Φ0²`, where the Gaussian approximation degrades.
    #[must_use]
    pub fn warnings(&self, spec: &LatticeSpec) -> Vec<String> {
        let mut out = Vec::new();
        if let Ok(phi0) = spec.phi0() {
            if let Some(&s0) = self.sigma_q_sq.first() {
                if !self.frozen.first().copied().unwrap_or(false) && s0 > 0.1 * phi0 * phi0 {
                    out.push(format!(
                        "lowest-mode variance {s0:.3e} exceeds 0.1 Phi0^2 = {:.3e}; \
                         Gaussian sampling is unreliable this soft",
                        0.1 * phi0 * phi0
                    ));
                }
            }
        }
        out
    }
}

/// Draws one initial condition: per unfrozen mode one Gaussian pair
/// `(Q, P)` in ascending mode order, frozen modes contribute their shifts
/// deterministically and consume no randomness.
///
/// # Errors
///
/// [`Error::UnstableMode`] when an unfrozen mode has `Ω² <= 0`;
/// [`Error::ShapeMismatch`] on inconsistent field lengths.
pub fn sample_initial(
    w: &WignerSpec,
    spec: &LatticeSpec,
    rng: &mut GaussianSampler,
) -> Result<ScalarState> {
    let n = spec.n;
    if w.basis.len() != n
        || w.background.len() != n
        || w.sigma_q_sq.len() != n
        || w.sigma_p_sq.len() != n
        || w.shift_q.len() != n
        || w.shift_p.len() != n
        || w.frozen.len() != n
    {
        return Err(Error::ShapeMismatch("Wigner spec dimension mismatch".into()));
    }
    let mut phi = w.background.phi.clone();
    let mut pi = w.background.pi.clone();
    let inv_a = 1.0 / spec.a;
    for nu in 0..n {
        let (q, p) = if w.frozen[nu] {
            (w.shift_q[nu], w.shift_p[nu])
        } else {
            let w_sq = w.basis.omega_sq[nu];
            if w_sq <= 0.0 {
                return Err(Error::UnstableMode { mode: nu, omega_sq: w_sq });
            }
            let (gq, gp) = rng.normal_pair();
            (
                w.shift_q[nu] + libm::sqrt(w.sigma_q_sq[nu]) * gq,
                w.shift_p[nu] + libm::sqrt(w.sigma_p_sq[nu]) * gp,
            )
        };
        if q == 0.0 && p == 0.0 {
            continue;
        }
        let row = w.basis.modes.row(nu);
        for i in 0..n {
            phi[i] += q * row[i];
            pi[i] += inv_a * p * row[i];
        }
    }
    ScalarState::new(phi, pi)
}
