//! Correlation-tensor dynamics for small qubit systems.
//!
//! A state of N ∈ {2, 3} qubits is stored as its real correlation tensor
//! `T_m = Tr(Σ_m ρ)`. Under a Hamiltonian built from a coupling tensor `J`
//! the tensor obeys the linear flow `dT/dt = M T`, with `M` real and
//! skew-symmetric. The crate builds `M`, extracts its frequencies and
//! nullspace, propagates tensors exactly, and cross-checks every result
//! against a plain density-matrix reference in [`oracle`].

pub mod cli;
pub mod dynamics;
pub mod error;
pub(crate) mod linalg;
pub mod models;
pub mod oracle;
pub mod pauli;
pub mod states;
pub mod stationary;
pub mod verify;

pub use error::{Error, Result};
pub use models::{CouplingTensor, FieldVector};
pub use pauli::{CorrelationTensor, MultiIndex, PauliIndex};
