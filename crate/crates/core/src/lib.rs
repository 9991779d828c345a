//! Graver-basis augmentation for block-structured integer programs.
//!
//! The crate solves two-stage and multi-stage stochastic integer programs by
//! augmenting along kernel vectors of the block constraint matrix, and ships
//! the structural tools around that solver: Steinitz reordering, Graver basis
//! enumeration, integer-cone intersection, equal-sum submultisets, explicit
//! norm-bound calculators and the lower-bound matrix families.

pub mod blockip;
pub mod bounds;
pub mod cli;
pub mod cones;
pub mod error;
pub mod format;
pub mod generate;
pub mod graver;
pub mod hilbert;
pub mod multistage;
pub mod instance;
pub mod lowerbound;
pub mod steinitz;
pub mod subrep;
pub mod twostage;
pub mod types;

pub use error::{Error, Result};
pub use instance::{TwoStageInstance, Violation};
pub use types::{IntMatrix, IntVector};
