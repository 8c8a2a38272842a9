//! Numerical core for gap-protected constrained quantum dynamics.
//!
//! The crate builds Schrieffer-Wolff transformations for Hamiltonians with an
//! isolated energy band, simulates exact and constrained (projected) dynamics
//! for closed and Lindblad-open systems, and evaluates the rigorous error
//! bounds that control the difference between them.
//!
//! Everything here is a pure function of its inputs. The crate is `no_std`
//! and only needs `alloc`; file formats and the command line live in the
//! `swbound` crate.
//!
//! Module map:
//!
//! * [`linalg`]: dense complex kernel (norms, Hermitian eigendecomposition,
//!   normal-matrix exponentials, Sylvester solver, Lanczos norm estimates).
//! * [`lattice`]: 1D spin chains, the PXP parent model, local interaction
//!   norms and the local Schrieffer-Wolff construction.
//! * [`swt`]: band splitting, generator construction, the `V'` series and
//!   all closed-form bound evaluators.
//! * [`closed`]: error traces for closed systems, commutator growth, light
//!   cones and Lieb-Robinson bounds.
//! * [`open`]: adjoint Lindblad evolution, decoherence-free subspaces and the
//!   quantum Zeno error.
//! * [`ensemble`]: seeded random instances used by property suites.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod closed;
pub mod ensemble;
mod error;
pub mod lattice;
pub mod linalg;
pub mod open;
pub mod swt;

pub use error::{Error, Result};
pub use linalg::{c64, HermitianEigen, OperatorMatrix};
