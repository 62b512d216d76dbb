//! Agreement-preserving gender reinflection for morphologically rich
//! languages.
//!
//! A tree-structured Markov random field over morpho-syntactic tags scores
//! how well the tags of each dependency edge agree. Intervening on the
//! gender of an animate noun clamps its tag; max-product belief propagation
//! then infers how the rest of the sentence must change, and a lexicon plus
//! suffix rules reinflect the affected words. The [`eval`] module measures
//! the effect of the resulting counterfactual augmentation with an n-gram
//! language model.

pub mod config;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod inference;
pub mod model;
pub mod pipeline;
pub mod synthetic;
pub mod training;
pub mod treebank;

pub use error::{Error, Result};
