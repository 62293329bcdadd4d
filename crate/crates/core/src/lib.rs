//! Sequential two-outcome measurements on simulated quantum states.
//!
//! The crate is layered bottom-up:
//!
//! - [`register`], [`state`], [`linalg`]: composite systems, pure and mixed
//!   states, Hermitian operators and their spectra.
//! - [`gates`]: matrix-free gate application (controlled unitaries, Fourier
//!   transform over `Z_n`, permutation unitaries).
//! - [`measurement`]: two-outcome measurements, collapse, Naimark forms, and
//!   exact checks of the gentle-measurement and quantum-union bounds.
//! - [`amplification`]: the alternating-projector amplification procedure with
//!   its exact acceptance oracles, and the OR test built from it.
//! - [`disturbance`]: the control-qubit sequential test with a randomly
//!   interleaved disturbance check.
//! - [`power`]: the same procedures on tensor powers `|φ⟩^{⊗k}`, which the
//!   testers need at copy counts far beyond dense simulation.
//! - [`testers`]: property testers built on the OR test.

pub mod amplification;
pub mod disturbance;
pub mod error;
pub mod gates;
pub mod linalg;
pub mod measurement;
pub mod power;
pub mod random;
pub mod register;
pub mod state;
pub mod testers;

pub use error::{Error, Result};
pub use register::RegisterShape;
pub use state::{
    eigendecompose, subsystem_purity, trace_distance_pure, DensityOperator, EigenDecomposition, HermitianOperator,
    PureState, QuantumState,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/gates.md")]
    mod gates {}
    #[doc = include_str!("../../../book/src/measurements.md")]
    mod measurements {}
    #[doc = include_str!("../../../book/src/amplification.md")]
    mod amplification {}
    #[doc = include_str!("../../../book/src/disturbance.md")]
    mod disturbance {}
    #[doc = include_str!("../../../book/src/testers.md")]
    mod testers {}
}
