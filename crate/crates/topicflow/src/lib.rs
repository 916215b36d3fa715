//! Topic-level dialogue structure discovery and structure-controlled
//! response generation.
//!
//! The pipeline: parse a dialogue corpus, train an utterance encoder with
//! dialogue-aware contrastive losses, cluster utterance representations into
//! topics with spherical k-means, behavioral-clone topic transitions into a
//! structure graph, and train a small encoder-decoder generator whose loss
//! adds a KL pull toward the predicted topic center. An evaluation module
//! scores generations with overlap, diversity, and topic-hit metrics.

pub mod checkpoint;
pub mod corpus;
pub mod encoder;
pub mod error;
pub mod optim;
pub mod tape;
pub mod tensor;

pub use error::{Error, Result};
