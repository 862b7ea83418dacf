//! Documents, the category graph, and the per-document candidate-name set.
//!
//! A corpus is a list of wiki-style documents plus a graph of categories
//! with child→parent edges. Indexing compares each document's candidate
//! names — its title, its categories, and the parents of those categories —
//! against the ontology, so the candidate set is the bridge between raw
//! documents and the ontology vocabulary.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::normalize;

/// One wiki-style document: stable id, title, category memberships, plain
/// body text, and free-form string metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub categories: Vec<String>,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

/// The category graph: a set of category names and child→parent edges.
/// Names are normalized on construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryGraph {
    categories: BTreeSet<String>,
    parents: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Deserialize)]
struct CategoryGraphFile {
    #[serde(default)]
    categories: Vec<String>,
    #[serde(default)]
    edges: Vec<CategoryEdgeFile>,
}

#[derive(Deserialize)]
struct CategoryEdgeFile {
    child: String,
    parent: String,
}

impl CategoryGraph {
    /// A graph with no categories.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates and normalizes category names and child→parent edges.
    pub fn new<I, E>(categories: I, edges: E) -> Result<Self>
    where
        I: IntoIterator<Item = String>,
        E: IntoIterator<Item = (String, String)>,
    {
        let categories: BTreeSet<String> = categories
            .into_iter()
            .map(|c| {
                let c = normalize(&c);
                if c.is_empty() {
                    Err(Error::Validation("category name is empty".into()))
                } else {
                    Ok(c)
                }
            })
            .collect::<Result<_>>()?;

        let mut parents: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (child, parent) in edges {
            let child = normalize(&child);
            let parent = normalize(&parent);
            for endpoint in [&child, &parent] {
                if !categories.contains(endpoint) {
                    return Err(Error::Validation(format!(
                        "category edge endpoint '{endpoint}' is not a category"
                    )));
                }
            }
            if child == parent {
                return Err(Error::Validation(format!(
                    "category '{child}' is its own parent"
                )));
            }
            parents.entry(child).or_default().insert(parent);
        }
        Ok(Self {
            categories,
            parents,
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.categories.contains(&normalize(name))
    }

    /// Parent categories of `name` (one hop up); empty for unknown names.
    pub fn parents(&self, name: &str) -> impl Iterator<Item = &str> {
        self.parents
            .get(&normalize(name))
            .into_iter()
            .flat_map(|set| set.iter().map(String::as_str))
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(String::as_str)
    }

    pub fn category_count(&self) -> usize {
        self.categories.len()
    }

    /// Adds an isolated category; returns false if it was already present.
    fn add_category(&mut self, name: &str) -> bool {
        self.categories.insert(normalize(name))
    }
}

/// Parses a category graph from its JSON representation.
pub fn load_category_graph(mut reader: impl Read) -> Result<CategoryGraph> {
    let mut raw = String::new();
    reader.read_to_string(&mut raw)?;
    let file: CategoryGraphFile =
        serde_json::from_str(&raw).map_err(|e| Error::parse_at(e.line(), e))?;
    CategoryGraph::new(
        file.categories,
        file.edges.into_iter().map(|e| (e.child, e.parent)),
    )
}

/// Parses documents from a JSON Lines stream, in file order. Blank lines
/// are skipped; duplicate ids are an error.
pub fn load_corpus(reader: impl Read) -> Result<Vec<Document>> {
    let mut documents = Vec::new();
    let mut seen = BTreeSet::new();
    for (number, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document =
            serde_json::from_str(&line).map_err(|e| Error::parse_at(number + 1, e))?;
        if doc.id.is_empty() {
            return Err(Error::parse_at(number + 1, "document id is empty"));
        }
        if normalize(&doc.title).is_empty() {
            return Err(Error::parse_at(
                number + 1,
                format!("document '{}' has an empty title", doc.id),
            ));
        }
        if !seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateDocument(doc.id));
        }
        documents.push(doc);
    }
    Ok(documents)
}

/// A validated corpus: documents plus the category graph they refer to.
///
/// Document categories missing from the graph are auto-added as isolated
/// categories rather than rejected; [`Corpus::added_category_count`] reports
/// how many, so callers can warn.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    category_graph: CategoryGraph,
    added_categories: usize,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, mut category_graph: CategoryGraph) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for doc in &documents {
            if doc.id.is_empty() {
                return Err(Error::Validation("document id is empty".into()));
            }
            if normalize(&doc.title).is_empty() {
                return Err(Error::Validation(format!(
                    "document '{}' has an empty title",
                    doc.id
                )));
            }
            if !seen.insert(doc.id.clone()) {
                return Err(Error::DuplicateDocument(doc.id.clone()));
            }
        }
        let mut added_categories = 0;
        for doc in &documents {
            for category in &doc.categories {
                if category_graph.add_category(category) {
                    added_categories += 1;
                }
            }
        }
        Ok(Self {
            documents,
            category_graph,
            added_categories,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn category_graph(&self) -> &CategoryGraph {
        &self.category_graph
    }

    /// Number of document categories that were absent from the loaded graph
    /// and auto-added as isolated categories.
    pub fn added_category_count(&self) -> usize {
        self.added_categories
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }
}

/// The candidate-name set CS of a document: its normalized title, its
/// normalized category names, and the parents of those categories in the
/// graph (two category levels in total). Categories absent from the graph
/// contribute only themselves.
pub fn candidate_names(doc: &Document, graph: &CategoryGraph) -> BTreeSet<String> {
    let mut names = BTreeSet::new();
    names.insert(normalize(&doc.title));
    for category in &doc.categories {
        let category = normalize(category);
        for parent in graph.parents(&category) {
            names.insert(parent.to_string());
        }
        names.insert(category);
    }
    names
}

/// How the CS-size bound entering the similarity formula is chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsMaxMode {
    /// Total number of categories in the graph — the corpus-wide constant.
    #[default]
    Global,
    /// Maximum candidate-set size over the corpus documents; tighter, but
    /// costs a pass over the corpus.
    LocalMax,
}

impl std::str::FromStr for CsMaxMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(CsMaxMode::Global),
            "local-max" => Ok(CsMaxMode::LocalMax),
            other => Err(Error::Validation(format!(
                "unknown cs-max mode '{other}' (expected 'global' or 'local-max')"
            ))),
        }
    }
}

impl std::fmt::Display for CsMaxMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CsMaxMode::Global => "global",
            CsMaxMode::LocalMax => "local-max",
        })
    }
}

/// The bound on candidate-set size used by the similarity formula, always
/// at least 1 so the formula's denominator stays positive.
pub fn cs_max(corpus: &Corpus, mode: CsMaxMode) -> Result<usize> {
    if corpus.is_empty() {
        return Err(Error::Validation(
            "cannot compute cs_max of an empty corpus".into(),
        ));
    }
    let bound = match mode {
        CsMaxMode::Global => corpus.category_graph().category_count(),
        CsMaxMode::LocalMax => corpus
            .documents()
            .iter()
            .map(|doc| candidate_names(doc, corpus.category_graph()).len())
            .max()
            .unwrap_or(0),
    };
    Ok(bound.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, title: &str, categories: &[&str]) -> Document {
        Document {
            id: id.into(),
            title: title.into(),
            categories: categories.iter().map(|c| c.to_string()).collect(),
            text: String::new(),
            metadata: BTreeMap::new(),
        }
    }

    fn music_graph() -> CategoryGraph {
        CategoryGraph::new(
            ["Music".into(), "Art".into(), "Jazz".into()],
            [
                ("Jazz".to_string(), "Music".to_string()),
                ("Music".to_string(), "Art".to_string()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn load_corpus_single_line() {
        let src = br#"{"id":"d1","title":"Jazz","categories":["Music"],"text":"body"}"#;
        let docs = load_corpus(&src[..]).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].id, "d1");
        assert_eq!(docs[0].categories, vec!["Music"]);
    }

    #[test]
    fn load_corpus_duplicate_id() {
        let src = b"{\"id\":\"d1\",\"title\":\"A\"}\n{\"id\":\"d1\",\"title\":\"B\"}\n";
        let err = load_corpus(&src[..]).unwrap_err();
        assert!(matches!(err, Error::DuplicateDocument(id) if id == "d1"));
    }

    #[test]
    fn load_corpus_empty_stream() {
        assert!(load_corpus(&b""[..]).unwrap().is_empty());
    }

    #[test]
    fn load_corpus_reports_line_numbers() {
        let src = b"{\"id\":\"d1\",\"title\":\"A\"}\nnot json\n";
        match load_corpus(&src[..]).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn load_corpus_rejects_blank_title() {
        let src = br#"{"id":"d1","title":"  "}"#;
        assert!(load_corpus(&src[..]).is_err());
    }

    #[test]
    fn category_graph_rejects_dangling_edge() {
        let err = CategoryGraph::new(["A".into()], [("A".to_string(), "Missing".to_string())])
            .unwrap_err();
        assert!(err.to_string().contains("missing"), "{err}");
    }

    #[test]
    fn category_graph_rejects_self_loop() {
        let err =
            CategoryGraph::new(["A".into()], [("A".to_string(), "a".to_string())]).unwrap_err();
        assert!(err.to_string().contains("own parent"), "{err}");
    }

    #[test]
    fn load_category_graph_from_json() {
        let src = br#"{"categories":["Music","Art"],"edges":[{"child":"Music","parent":"Art"}]}"#;
        let graph = load_category_graph(&src[..]).unwrap();
        assert_eq!(graph.category_count(), 2);
        assert_eq!(graph.parents("music").collect::<Vec<_>>(), vec!["art"]);
    }

    #[test]
    fn candidate_names_title_category_and_parent() {
        let names = candidate_names(&doc("d1", "Jazz", &["Music"]), &music_graph());
        let expected: BTreeSet<String> = ["jazz", "music", "art"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(names, expected);
    }

    #[test]
    fn candidate_names_without_categories_is_title_only() {
        let names = candidate_names(&doc("d1", "Solo_Title", &[]), &music_graph());
        assert_eq!(names, BTreeSet::from(["solo title".to_string()]));
    }

    #[test]
    fn candidate_names_collapse_duplicates() {
        // The category's parent equals the title, so the set has 2 entries.
        let names = candidate_names(&doc("d1", "Music", &["Jazz"]), &music_graph());
        assert_eq!(names.len(), 2);
        assert!(names.contains("music") && names.contains("jazz"));
    }

    #[test]
    fn candidate_names_unknown_category_contributes_itself() {
        let names = candidate_names(&doc("d1", "T", &["Offbeat"]), &music_graph());
        assert!(names.contains("offbeat"));
        assert_eq!(names.len(), 2);
    }

    #[test]
    fn candidate_names_size_bound() {
        let d = doc("d1", "Jazz", &["Jazz", "Music"]);
        let graph = music_graph();
        let parents: BTreeSet<&str> = d
            .categories
            .iter()
            .flat_map(|c| graph.parents(c).collect::<Vec<_>>())
            .collect();
        let names = candidate_names(&d, &graph);
        assert!(names.len() <= 1 + d.categories.len() + parents.len());
    }

    #[test]
    fn corpus_auto_adds_missing_categories() {
        let corpus = Corpus::new(vec![doc("d1", "T", &["Brand New"])], music_graph()).unwrap();
        assert_eq!(corpus.added_category_count(), 1);
        assert!(corpus.category_graph().contains("brand new"));
    }

    #[test]
    fn corpus_rejects_duplicate_ids() {
        let err = Corpus::new(
            vec![doc("d1", "A", &[]), doc("d1", "B", &[])],
            CategoryGraph::empty(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateDocument(_)));
    }

    #[test]
    fn cs_max_global_counts_categories() {
        let corpus = Corpus::new(vec![doc("d1", "T", &[])], music_graph()).unwrap();
        assert_eq!(cs_max(&corpus, CsMaxMode::Global).unwrap(), 3);
    }

    #[test]
    fn cs_max_local_max_is_largest_candidate_set() {
        let corpus = Corpus::new(
            vec![doc("d1", "T", &["Jazz"]), doc("d2", "U", &[])],
            music_graph(),
        )
        .unwrap();
        // d1: {t, jazz, music} → 3; d2: {u} → 1.
        assert_eq!(cs_max(&corpus, CsMaxMode::LocalMax).unwrap(), 3);
    }

    #[test]
    fn cs_max_local_max_bounds_every_document() {
        let corpus = Corpus::new(
            vec![
                doc("d1", "Jazz", &["Jazz", "Music"]),
                doc("d2", "Rock", &["Music"]),
                doc("d3", "Lone", &[]),
            ],
            music_graph(),
        )
        .unwrap();
        let bound = cs_max(&corpus, CsMaxMode::LocalMax).unwrap();
        for d in corpus.documents() {
            assert!(candidate_names(d, corpus.category_graph()).len() <= bound);
        }
    }

    #[test]
    fn cs_max_empty_corpus_is_an_error() {
        let corpus = Corpus::new(Vec::new(), music_graph()).unwrap();
        assert!(cs_max(&corpus, CsMaxMode::Global).is_err());
    }

    #[test]
    fn cs_max_is_at_least_one() {
        let corpus = Corpus::new(vec![doc("d1", "T", &[])], CategoryGraph::empty()).unwrap();
        assert_eq!(cs_max(&corpus, CsMaxMode::Global).unwrap(), 1);
    }

    #[test]
    fn metadata_round_trips() {
        let src = br#"{"id":"d1","title":"T","categories":[],"text":"","metadata":{"lang":"en"}}"#;
        let docs = load_corpus(&src[..]).unwrap();
        assert_eq!(docs[0].metadata.get("lang").map(String::as_str), Some("en"));
    }
}
