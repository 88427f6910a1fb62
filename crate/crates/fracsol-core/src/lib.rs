//! Lattice solitons coupled to staggered fermions.
//!
//! This crate simulates a one-dimensional scalar chain with a quartic
//! double-well potential, Yukawa-coupled to a single staggered (Kogut-Susskind)
//! fermion species. It provides:
//!
//! * kink and kink-antikink profiles, relaxation to static solutions, and
//!   symplectic real-time evolution ([`lattice`], [`dynamics`]);
//! * harmonic normal modes about a background and Wigner sampling of the
//!   ground-state Gaussian ([`modes`]);
//! * the fermion single-particle sector: spectra, ground-state correlation
//!   matrices, exact unitary propagation of Gaussian states, and the charge
//!   observables that detect fermion-number fractionalization ([`fermion`]);
//! * adiabatic tools: sub-lattice kink translation, Peierls-Nabarro barrier
//!   scans and their Fourier estimate, zero-mode spectral flow, and the
//!   kink-antikink interaction potential ([`adiabatic`]);
//! * a truncated-Wigner ensemble engine over trajectories that co-evolve the
//!   scalar chain with its fermionic Gaussian state ([`twa`]);
//! * profile and power-law fits for extracting widths, charges, and
//!   growth exponents from ensemble means ([`fit`]);
//! * the mapping from trapped-ion trap/laser parameters to the lattice
//!   couplings ([`ion`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); the `std` feature (on by
//! default) only toggles `std::error::Error` impls.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_docs)]

extern crate alloc;

pub mod adiabatic;
pub mod dynamics;
pub mod error;
pub mod fermion;
pub mod fit;
pub mod ion;
pub mod lattice;
pub mod linalg;
pub mod modes;
pub mod mth;
pub mod rng;
pub mod twa;

pub use error::{Error, Result};
