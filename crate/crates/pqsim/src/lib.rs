//! Dense Kraus-operator simulation of qubit decoherence.
//!
//! The crate models open-system evolution of small qubit registers with
//! explicit linear (Kraus) operators: phase and amplitude damping channels,
//! noisy logic gates built from joint system-environment Hamiltonians, and a
//! full simulation of a three-qubit error-correction cycle that keeps a
//! stored qubit alive through repeated decode/correct/re-encode passes.
//!
//! Modules:
//!
//! * [`qmath`] - complex dense linear algebra: tensor products, partial
//!   traces, Hermitian matrix exponentials, operator embedding, and
//!   worst-case fidelity search over pure inputs.
//! * [`channels`] - Kraus channel construction and application, including
//!   the fast XOR form of multi-qubit phase damping.
//! * [`noisy_gates`] - rotation and controlled-not gates with simultaneous
//!   decoherence, plus their worst-case gate fidelities.
//! * [`qec3`] - the three-qubit code: encode/decode circuits, syndrome
//!   correction, and the storage-cycle simulator in ideal, lumped and
//!   continuous noise modes.
//! * [`error_model`] - closed-form performance model (optimal storage time,
//!   minimum effective decoherence rate, critical decoherence threshold)
//!   and least-squares fitting of its parameters from simulation output.

pub mod channels;
pub mod error_model;
pub mod noisy_gates;
pub mod qec3;
pub mod qmath;

pub use channels::{KrausChannel, PhaseDampingBasis};
pub use error_model::ErrorModelParams;
pub use noisy_gates::{DampingKind, NoisyGate};
pub use qec3::{CycleConfig, CycleMode, CycleResult};
pub use qmath::{BlochPoint, CMatrix, CVector, Complex, MixedState};
