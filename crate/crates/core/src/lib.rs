//! Affect modelling for short social-media texts.
//!
//! The crate covers the full path from raw tweets to task outputs:
//!
//! * [`dataio`] reads and writes every on-disk format and persists models.
//! * [`textprep`] normalizes text and splits concatenated hashtag bodies.
//! * [`features`] builds tweet-specific counts, averaged word vectors and the
//!   assembled per-sample feature matrix.
//! * [`evec`] trains emotional word vectors with a small text CNN.
//! * [`regress`] holds kernel ridge regression, ε-SVR, grid search and
//!   prediction ensembles.
//! * [`ordmap`] maps regression outputs onto ordinal classes.
//! * [`multilabel`] implements the Laplacian-regularized linear model and
//!   logistic classifier chains.
//! * [`eval`] scores predictions and audits paired-sentence bias.

pub mod dataio;
pub mod error;
pub mod eval;
pub mod evec;
pub mod features;
pub mod multilabel;
pub mod ordmap;
pub mod regress;
pub mod textprep;

pub use error::{Error, Result};
