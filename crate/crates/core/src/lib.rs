//! Relaxation of a spin-1/2 coupled to the quantized electromagnetic field.
//!
//! The crate builds the GKLS generator `L` that describes the relaxation of
//! a spin in a constant field `(0, 0, β)` coupled to the photon vacuum, the
//! approximate Heisenberg evolution `e^{tg²L} γ_t σ`, and a reference
//! simulation of the full spin–photon Hamiltonian on a truncated Fock space
//! against which the approximation is measured.
//!
//! Modules, bottom up:
//!
//! * [`spin`]: Pauli and ladder algebra, Larmor evolution `γ_t`.
//! * [`kernel`]: cutoff, spectral density, `u(t)` and the coefficients `d_m`.
//! * [`gkls`]: the generator, its spectrum and semigroup, CP certification.
//! * [`propagator`]: `e^{tg²L}γ_tσ`, Bloch trajectories and relaxation rates.
//! * [`oracle`]: truncated-Fock simulation and error curves.

pub mod error;
pub mod gkls;
pub mod kernel;
pub mod oracle;
pub mod propagator;
pub mod quad;
pub mod spin;

pub use error::{Error, Result};
pub use gkls::{GklsGenerator, Semigroup};
pub use kernel::{BathKernel, CutoffSpec, DCoefficients};
pub use spin::{ExternalField, LadderCoefficients, SpinObservable, C64};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spin-algebra.md")]
    mod spin_algebra {}
    #[doc = include_str!("../../../book/src/bath-kernel.md")]
    mod bath_kernel {}
    #[doc = include_str!("../../../book/src/generator.md")]
    mod generator {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/fock-oracle.md")]
    mod fock_oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
