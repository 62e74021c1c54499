//! Dense tanh networks with exact reverse-mode gradients, Adam, a
//! finite-difference gradient checker, and a text checkpoint format.

mod adam;
mod checkpoint;
mod dense;
mod gradcheck;

use thiserror::Error;

pub use adam::Adam;
pub use checkpoint::{write_atomic, Checkpoint, CHECKPOINT_FORMAT};
pub use dense::{clip_grad_norm, DenseNet, ForwardCache, Gradients};
pub use gradcheck::{
    gradient_check, gradient_check_against, gradient_check_squared, relative_error, squared_error_difference,
    squared_error_loss, stable_central_differences, REL_ERROR_FLOOR,
};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("forward cache does not belong to the current parameters")]
    StaleCache,
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
