//! Compiles every code block in the guide (`book/`) as a doc-test, so the
//! book cannot drift from the API. mdBook itself does not run example code
//! against the real crate; including each chapter as module documentation
//! here makes `cargo test --doc` do it instead. One module per chapter, so
//! a failure names the chapter it came from.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/ontology.md")]
pub mod ontology {}

#[doc = include_str!("../../../book/src/corpus.md")]
pub mod corpus {}

#[doc = include_str!("../../../book/src/text-metrics.md")]
pub mod text_metrics {}

#[doc = include_str!("../../../book/src/indexing.md")]
pub mod indexing {}

#[doc = include_str!("../../../book/src/relevance.md")]
pub mod relevance {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}
