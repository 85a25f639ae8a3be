//! Reverse-mode automatic differentiation on a flat tape, plus the training
//! utilities built around it: tensors, deterministic RNG, AdamW, cosine
//! learning-rate schedules, finite-difference gradient checking and a binary
//! checkpoint format.
//!
//! Every op is generic over [`Real`] so the same graph code runs at f32 for
//! training speed and at f64 for gradient verification. Tapes run in checked
//! mode by default: any non-finite value produced by an op fails the forward
//! pass immediately instead of corrupting a training run later.

pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod ops;
pub mod optim;
pub mod real;
pub mod rng;
pub mod schedule;
pub mod shape;
pub mod tape;
pub mod tensor;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointError, Hyper};
pub use error::{Result, TapeError};
pub use gradcheck::{assert_grad_check, grad_check, DualFn, GradCheckReport};
pub use optim::{AdamW, BoundParams, Params};
pub use real::{c, Real};
pub use rng::Rng;
pub use schedule::LrSchedule;
pub use tape::{Tape, VarId};
pub use tensor::{from_f64_tensor, Tensor};
