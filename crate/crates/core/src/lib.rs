//! Synthesis and evaluation toolkit for procedural-video assessment.
//!
//! The crate covers the full offline pipeline: interval algebra and
//! annotation types ([`temporal`]), greedy localization metrics
//! ([`matching`]), caption scoring ([`text`]), perturbed-dataset synthesis
//! ([`perturb`]), frame sampling and storyboard composition ([`media`]),
//! file schemas and model-response parsing ([`annot`], [`manifest`],
//! [`responses`]), metric report emission ([`report`]), and the per-task
//! evaluation drivers ([`eval`]).

pub mod annot;
pub mod error;
pub mod eval;
pub mod manifest;
pub mod matching;
pub mod media;
pub mod perturb;
pub mod report;
pub mod responses;
pub mod temporal;
pub mod text;

pub use error::{Error, Result};
