//! Goalkeeper penalty-kick policy evaluation.
//!
//! The crate covers the whole offline pipeline: merging annotated and event
//! datasets ([`linkage`]), synthetic data ([`datagen`]), per-kick features
//! ([`features`]), gradient-boosted direction and distance predictors
//! ([`models`]), the augmented zero-sum penalty game ([`gametheory`]) and the
//! policy simulator ([`simulator`]).

pub mod datagen;
pub mod domain;
pub mod error;
pub mod features;
pub mod gametheory;
pub mod io;
pub mod linkage;
pub mod models;
pub mod shootout;
pub mod simulator;

pub use domain::*;
pub use error::{Error, Result};
