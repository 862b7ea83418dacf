//! Ontodex indexes a corpus of wiki-style documents against an application
//! ontology and ranks the documents by relevance to an *abstract context* —
//! a problem-specific selection of ontology classes.
//!
//! The pipeline has two halves:
//!
//! 1. **Indexing** ([`build_index`]): each document contributes a
//!    candidate-name set (title, categories, parent categories), which is
//!    fuzzily matched against ontology class and attribute names by
//!    Levenshtein distance. A match set yields a document-to-ontology
//!    similarity, per-element tf·idf weights and description overlaps, and
//!    the ontology fragment spanned by the matched classes. The result
//!    persists as a JSON Lines index.
//! 2. **Ranking** ([`rank_documents`]): every indexed document is compared
//!    with the context, either structurally (fragment graph vs. context
//!    graph) or by the angular separation of weight vectors, and sorted by
//!    the combined relevance.
//!
//! Everything is deterministic: rebuilding an index from the same inputs —
//! in any document order — produces byte-identical output.
//!
//! ```
//! use std::collections::BTreeMap;
//! use ontodex::{
//!     build_index, rank_documents, AbstractContext, CategoryGraph, Corpus, Document,
//!     IndexParams, Ontology, OntologyClass, RankMethod, RankOptions, Relation,
//!     RelationKind, StopWordList, SynonymTable,
//! };
//!
//! # fn main() -> ontodex::Result<()> {
//! // A two-class ontology: jazz is a kind of music.
//! let class = |name: &str, description: &str| OntologyClass {
//!     name: name.into(),
//!     description: description.into(),
//!     attributes: Vec::new(),
//! };
//! let ontology = Ontology::new(
//!     vec![
//!         class("music", "the art of organized sound"),
//!         class("jazz", "improvised swing music"),
//!     ],
//!     vec![Relation::new("jazz", "music", RelationKind::Taxonomical)],
//! )?;
//!
//! // Two documents and the category graph they point into.
//! let graph = CategoryGraph::new(
//!     ["Jazz".into(), "Music".into()],
//!     [("Jazz".to_string(), "Music".to_string())],
//! )?;
//! let doc = |id: &str, title: &str, cats: &[&str], text: &str| Document {
//!     id: id.into(),
//!     title: title.into(),
//!     categories: cats.iter().map(|c| c.to_string()).collect(),
//!     text: text.into(),
//!     metadata: BTreeMap::new(),
//! };
//! let corpus = Corpus::new(
//!     vec![
//!         doc("d1", "Bebop", &["Jazz"], "bebop is a jazz style with fast tempos"),
//!         doc("d2", "Granite", &[], "an igneous rock unrelated to music genres"),
//!     ],
//!     graph,
//! )?;
//!
//! // Index, then rank against a jazz context.
//! let (index, report) = build_index(
//!     &corpus,
//!     &ontology,
//!     &IndexParams::default(),
//!     &StopWordList::default_english(),
//!     &SynonymTable::empty(),
//! )?;
//! assert!(report.errors.is_empty());
//!
//! let context = AbstractContext::new(
//!     &ontology,
//!     vec!["jazz".into(), "music".into()],
//!     Vec::new(),
//! )?;
//! let ranked = rank_documents(
//!     &index,
//!     &ontology,
//!     &context,
//!     RankMethod::Graph,
//!     &RankOptions::default(),
//! )?;
//! assert_eq!(ranked[0].doc_id, "d1");
//! assert!(ranked[0].relevance > ranked[1].relevance);
//! # Ok(())
//! # }
//! ```

#[cfg(doctest)]
pub mod book;
pub mod corpus;
pub mod error;
pub mod indexing;
pub mod ontology;
pub mod relevance;
pub mod text;

pub use corpus::{
    candidate_names, cs_max, load_category_graph, load_corpus, CategoryGraph, Corpus, CsMaxMode,
    Document,
};
pub use error::{Error, Result};
pub use indexing::{
    build_index, load_index, load_synonyms, save_index, BuildReport, ElementMatch, Index,
    IndexParams, IndexRecord, SynonymTable,
};
pub use ontology::{
    load_ontology, ElementKind, ElementRef, Ontology, OntologyAttribute, OntologyClass,
    OntologyFragment, Relation, RelationKind,
};
pub use relevance::{
    load_context, rank_documents, AbstractContext, ClassGraph, RankMethod, RankOptions,
    RankedResult, RelevanceMode, WeightedContext,
};
pub use text::StopWordList;
