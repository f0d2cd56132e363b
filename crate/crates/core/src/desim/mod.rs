//! Turning quantum strategies into equivalent classical ones.

pub mod correction;
pub mod declifford;
pub mod delegate;
pub mod mostly;
pub mod verify;

pub use correction::{correct_answer, correction_update, CorrectionProgram, CorrectionSession};
pub use declifford::{
    declifford, declifford_with, sample_precomputed, DesimOptions, Hardcoded, LambdaForm,
    PrecomputedInteraction,
};
pub use delegate::{delegate_postprocessing, Delegated};
pub use mostly::declifford_mostly;
pub use verify::{verify_state_link, StateLink};
