//! Desk-scale simulation of the full spin–boson model on a truncated Fock
//! space.
//!
//! The bath is replaced by three independent combs of harmonic modes, one
//! per field component. Different components are uncorrelated and each has
//! autocorrelation `u(t)`, and the reduced spin dynamics started from the
//! photon vacuum see the bath only through these vacuum correlations, so a
//! comb whose kernel `û` matches `u` on the working window is a faithful
//! stand-in there.

pub mod compare;
pub mod evolve;
pub mod hamiltonian;
pub mod modes;
pub mod space;

pub use compare::{
    error_curve, reduced_observable, spin_frames, sred_consistency, CurveStatus, ErrorCurve, ErrorCurveSettings, ErrorRow,
    SpinFrame,
};
pub use evolve::{evolve_state, EvolveSettings, Evolver, PropagatorKind};
pub use hamiltonian::{build_hamiltonian, Csr, FullHamiltonian};
pub use modes::{discretize_bath, working_window, BathDiscretization, KernelReproduction, Mode, ModeSet, QuadratureRule};
pub use space::{dimension_for, TruncatedSpace};
