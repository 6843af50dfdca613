//! Video story question answering built from scratch.
//!
//! The pipeline has three stages. A joint embedding module aligns scene
//! features with dialogue and description sentences and reconstructs each
//! scene-dialogue pair into a textual story. Stories are kept in a per-episode
//! long-term memory. Two attention BiLSTM rankers then answer five-way
//! multiple-choice questions: one selects the story relevant to the question,
//! the other selects the answer given the fused question-story sequence. Both
//! are trained with hinge rank losses, and every hand-derived gradient is
//! validated against a finite-difference oracle.

pub mod corpus;
pub mod embedder;
pub mod error;
pub mod eval;
pub mod memory;
pub mod numcore;
pub mod oracle;
pub mod scorer;
pub(crate) mod ckpt;
pub mod qa;

pub use error::{Error, Result};
