//! Clifford and Pauli machinery for multi-prover interactive games, with
//! stabilizer and dense simulation backends and the transformations that
//! replace Clifford provers by classical ones.

pub mod bits;
pub mod boolcircuit;
pub mod clifford;
pub mod dense;
pub mod desim;
pub mod distribution;
pub mod error;
pub mod exec;
pub mod games;
pub mod pauli;
pub mod protocol;
pub mod random;
pub mod rng;
pub mod stabilizer;
pub mod strategy;

pub use bits::BitString;
pub use clifford::{CliffordCircuit, CliffordGate, CliffordTableau};
pub use dense::{DenseMatrix, DenseState};
pub use desim::{declifford, declifford_mostly, delegate_postprocessing, verify_state_link};
pub use distribution::{game_value, tv_distance};
pub use error::{Error, Result};
pub use exec::{exact_history_distribution, run_once, run_shots, Distribution, ExecConfig};
pub use pauli::PauliOperator;
pub use protocol::{History, Protocol};
pub use rng::SplitMix64;
pub use stabilizer::StabilizerState;
pub use strategy::{ClassicalStrategy, QuantumStrategy, Strategy};
