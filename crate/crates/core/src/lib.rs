//! Cross-language textual similarity detection with bilingual word embeddings.
//!
//! The crate provides five similarity scorers over aligned textual units
//! ([`methods`]), the distance-matrix evaluation protocol with F1 threshold
//! search ([`evaluation`]), derivative-free weight tuning ([`optimizer`]),
//! and score fusion including a C4.5 decision tree ([`fusion`]).
//!
//! ```
//! use xlsim::corpus::{Granularity, TextualUnit};
//! use xlsim::embeddings::EmbeddingSpace;
//! use xlsim::methods::cl_wes;
//!
//! let space = EmbeddingSpace::from_entries(2, [
//!     ("en", "cat", vec![1.0, 0.2]),
//!     ("fr", "chat", vec![0.9, 0.25]),
//! ])?;
//! let en = TextualUnit::from_tagged("1", "en", Granularity::Sentence, "the/DET cat/NOUN")?;
//! let fr = TextualUnit::from_tagged("1", "fr", Granularity::Sentence, "le/DET chat/NOUN")?;
//! assert!(cl_wes(&space, &en, &fr) > 0.99);
//! # Ok::<(), xlsim::Error>(())
//! ```

pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod evaluation;
pub mod fusion;
pub mod methods;
pub mod optimizer;

pub use error::{Error, Result};

// The guide's snippets run as doc-tests so the book cannot drift from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/embeddings.md")]
    mod embeddings {}
    #[doc = include_str!("../../../book/src/methods.md")]
    mod methods {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/optimizer.md")]
    mod optimizer {}
    #[doc = include_str!("../../../book/src/fusion.md")]
    mod fusion {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
