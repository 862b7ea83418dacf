//! Topic indexing: match each document's candidate names against the
//! ontology vocabulary, score the document-to-ontology similarity, attach
//! per-element weights, extract the spanned ontology fragment, and persist
//! the result as a JSON Lines index.
//!
//! Determinism is a hard requirement here: records are sorted by document
//! id, every collection iterates in sorted order, and floats are rounded to
//! [`SIGNIFICANT_DIGITS`] significant digits when records are built, so
//! rebuilding an index — in any document order, on any thread count —
//! produces byte-identical output.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{candidate_names, cs_max, CategoryGraph, Corpus, CsMaxMode, Document};
use crate::error::{Error, Result};
use crate::ontology::{ElementKind, ElementRef, Ontology, OntologyFragment};
use crate::text::{
    count_occurrences, description_overlap, levenshtein_within, tokens, StopWordList,
};

/// Significant digits kept in every similarity, weight, and overlap value —
/// applied when records are constructed, so in-memory and persisted values
/// are identical.
pub const SIGNIFICANT_DIGITS: usize = 12;

const INDEX_FORMAT: &str = "ontodex-index";
const INDEX_VERSION: u32 = 1;

/// Rounds `x` to `digits` significant digits (round-half-even via decimal
/// formatting). Zero and non-finite values pass through.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x)
        .parse()
        .expect("a formatted float always reparses")
}

fn round(x: f64) -> f64 {
    round_significant(x, SIGNIFICANT_DIGITS)
}

/// Tuning parameters of the indexing run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexParams {
    /// Weight coefficient in [0,1] balancing match coverage against edit
    /// distance in the similarity formula.
    pub k: f64,
    /// Exclusive upper bound on the Levenshtein distance of a match.
    pub d_max: usize,
    /// How the candidate-set size bound is chosen.
    pub cs_max_mode: CsMaxMode,
}

impl Default for IndexParams {
    fn default() -> Self {
        Self {
            k: 0.5,
            d_max: 3,
            cs_max_mode: CsMaxMode::Global,
        }
    }
}

impl IndexParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.k) {
            return Err(Error::OutOfRange(format!(
                "k must be within [0, 1], got {}",
                self.k
            )));
        }
        if self.d_max < 1 {
            return Err(Error::OutOfRange("d_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Optional synonyms per element name; a candidate string within distance
/// of any synonym matches the element as if it were the name itself.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymTable {
    map: BTreeMap<String, BTreeSet<String>>,
}

impl SynonymTable {
    /// A table with no synonyms — the default.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a table, normalizing names and synonyms and dropping entries
    /// that are empty or identical to their element name.
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (String, S)>,
        S: IntoIterator<Item = String>,
    {
        let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (name, synonyms) in entries {
            let name = crate::text::normalize(&name);
            if name.is_empty() {
                continue;
            }
            let set = map.entry(name.clone()).or_default();
            for synonym in synonyms {
                let synonym = crate::text::normalize(&synonym);
                if !synonym.is_empty() && synonym != name {
                    set.insert(synonym);
                }
            }
        }
        map.retain(|_, set| !set.is_empty());
        Self { map }
    }

    pub fn synonyms(&self, name: &str) -> impl Iterator<Item = &str> {
        self.map
            .get(name)
            .into_iter()
            .flat_map(|set| set.iter().map(String::as_str))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Parses a synonym table from a JSON object of name → list of synonyms.
pub fn load_synonyms(mut reader: impl Read) -> Result<SynonymTable> {
    let mut raw = String::new();
    reader.read_to_string(&mut raw)?;
    let entries: BTreeMap<String, Vec<String>> =
        serde_json::from_str(&raw).map_err(|e| Error::parse_at(e.line(), e))?;
    Ok(SynonymTable::new(entries))
}

/// Matches every candidate name against every ontology element: a pair is
/// kept when the Levenshtein distance between the candidate and the element
/// name (or any of its synonyms) is below `d_max`. Returns the matched
/// (element, candidate, distance) triples sorted by element name then
/// candidate, plus the distance total.
pub fn match_elements(
    cs: &BTreeSet<String>,
    ont: &Ontology,
    d_max: usize,
    synonyms: &SynonymTable,
) -> (Vec<(ElementRef, String, usize)>, usize) {
    let mut matches = Vec::new();
    for element in ont.elements() {
        let name = element.name().to_string();
        for candidate in cs {
            let distance = std::iter::once(name.as_str())
                .chain(synonyms.synonyms(&name))
                .filter_map(|alias| levenshtein_within(candidate, alias, d_max))
                .min();
            if let Some(d) = distance {
                matches.push((element.clone(), candidate.clone(), d));
            }
        }
    }
    matches.sort_by(|a, b| (a.0.name(), &a.1, &a.0).cmp(&(b.0.name(), &b.1, &b.0)));
    let d_sum = matches.iter().map(|(_, _, d)| d).sum();
    (matches, d_sum)
}

/// The document-to-ontology similarity over a match set of size `n_pair`
/// with distance total `d_sum`:
///
/// ```text
/// sim = 1 − ½·[ (1−k)·n_pair/(cs_max·n_ont) + k·(1 − d_sum/(d_max·n_pair)) ]
/// ```
///
/// An empty match set is defined as sim = 1. Precondition violations
/// (`n_pair > cs_max·n_ont` or `d_sum > d_max·n_pair`) are reported as
/// errors, never clamped.
pub fn compute_sim(
    n_pair: usize,
    d_sum: usize,
    params: &IndexParams,
    cs_max: usize,
    n_ont: usize,
) -> Result<f64> {
    params.validate()?;
    if n_pair == 0 {
        return Ok(1.0);
    }
    if cs_max < 1 || n_ont < 1 {
        return Err(Error::Precondition(format!(
            "cs_max ({cs_max}) and n_ont ({n_ont}) must be positive"
        )));
    }
    if n_pair > cs_max * n_ont {
        return Err(Error::Precondition(format!(
            "n_pair ({n_pair}) exceeds cs_max·n_ont ({})",
            cs_max * n_ont
        )));
    }
    if d_sum > params.d_max * n_pair {
        return Err(Error::Precondition(format!(
            "d_sum ({d_sum}) exceeds d_max·n_pair ({})",
            params.d_max * n_pair
        )));
    }
    let pair_share = n_pair as f64 / (cs_max as f64 * n_ont as f64);
    let distance_term = 1.0 - d_sum as f64 / (params.d_max as f64 * n_pair as f64);
    Ok(1.0 - 0.5 * ((1.0 - params.k) * pair_share + params.k * distance_term))
}

/// Corpus-level statistics needed for element weights: document count and
/// per-element-name document frequency.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    doc_count: usize,
    doc_frequency: BTreeMap<String, usize>,
}

impl CorpusStats {
    /// Counts, for every element name in the ontology, the documents whose
    /// title or text contains the name as a token sequence.
    pub fn compute(documents: &[Document], ont: &Ontology) -> Self {
        let needles: BTreeMap<String, Vec<String>> = ont
            .elements()
            .map(|e| (e.name().to_string(), tokens(e.name())))
            .collect();
        let mut doc_frequency: BTreeMap<String, usize> =
            needles.keys().map(|n| (n.clone(), 0)).collect();
        for doc in documents {
            let title = tokens(&doc.title);
            let text = tokens(&doc.text);
            for (name, needle) in &needles {
                if count_occurrences(&title, needle) + count_occurrences(&text, needle) > 0 {
                    *doc_frequency.get_mut(name).unwrap() += 1;
                }
            }
        }
        Self {
            doc_count: documents.len(),
            doc_frequency,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    /// Documents containing `name`; 0 for names absent everywhere.
    pub fn document_frequency(&self, name: &str) -> usize {
        self.doc_frequency.get(name).copied().unwrap_or(0)
    }
}

/// tf·idf weight of an element name within a document: tf is the share of
/// the document's tokens (title plus text) covered by occurrences of the
/// name, idf is ln(1 + N/df). A name that never occurs weighs 0 — matches
/// can arise from category names absent from the document body, so tf = 0
/// is reachable and must not consult df.
pub fn element_weight(name: &str, doc: &Document, stats: &CorpusStats) -> f64 {
    let needle = tokens(name);
    let title = tokens(&doc.title);
    let text = tokens(&doc.text);
    let total = title.len() + text.len();
    if total == 0 {
        return 0.0;
    }
    let occurrences = count_occurrences(&title, &needle) + count_occurrences(&text, &needle);
    if occurrences == 0 {
        return 0.0;
    }
    let tf = occurrences as f64 / total as f64;
    let df = stats.document_frequency(name).max(1);
    let idf = (1.0 + stats.doc_count() as f64 / df as f64).ln();
    tf * idf
}

/// One matched (element, candidate-name) pair with its edit distance and
/// the element's weight and description-overlap coefficient in this
/// document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementMatch {
    pub element: String,
    pub kind: ElementKind,
    pub matched_name: String,
    pub distance: usize,
    pub w: f64,
    pub kd: f64,
}

/// Everything the index stores about one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub doc_id: String,
    pub sim: f64,
    pub matches: Vec<ElementMatch>,
    pub fragment: OntologyFragment,
}

/// The built index: one record per document plus the parameters and input
/// hashes it was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    pub records: Vec<IndexRecord>,
    pub params: IndexParams,
    pub ontology_hash: String,
    pub corpus_hash: String,
}

impl Index {
    pub fn record(&self, doc_id: &str) -> Option<&IndexRecord> {
        self.records.iter().find(|r| r.doc_id == doc_id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 over a canonical serialization of the ontology (classes sorted
/// by name, relations sorted), for index provenance.
pub fn ontology_hash(ont: &Ontology) -> String {
    let classes: Vec<_> = ont
        .classes()
        .map(|c| {
            serde_json::json!({
                "name": c.name,
                "description": c.description,
                "attributes": c
                    .attributes
                    .iter()
                    .map(|a| serde_json::json!({"name": a.name, "description": a.description}))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    let relations: Vec<_> = ont
        .relations()
        .map(|r| serde_json::json!({"from": r.from, "to": r.to, "kind": r.kind}))
        .collect();
    let canonical = serde_json::json!({"classes": classes, "relations": relations});
    hex(&Sha256::digest(canonical.to_string()))
}

/// SHA-256 over per-document hashes sorted by id plus the category graph,
/// so the value is independent of document order in the source file.
pub fn corpus_hash(corpus: &Corpus) -> String {
    let doc_hashes: BTreeMap<&str, String> = corpus
        .documents()
        .iter()
        .map(|doc| {
            let payload = serde_json::to_string(doc).expect("documents serialize to JSON");
            (doc.id.as_str(), hex(&Sha256::digest(payload)))
        })
        .collect();
    let mut hasher = Sha256::new();
    for (id, doc_hash) in doc_hashes {
        hasher.update(id);
        hasher.update(b"\x1f");
        hasher.update(doc_hash);
        hasher.update(b"\n");
    }
    hasher.update(b"categories\n");
    for category in corpus.category_graph().categories() {
        hasher.update(category);
        hasher.update(b"\n");
        for parent in corpus.category_graph().parents(category) {
            hasher.update(b">");
            hasher.update(parent);
            hasher.update(b"\n");
        }
    }
    hex(&hasher.finalize())
}

/// Indexes a single document: candidate names, element matches, similarity,
/// per-element weight and description overlap, and the spanned fragment.
#[allow(clippy::too_many_arguments)]
pub fn index_document(
    doc: &Document,
    ont: &Ontology,
    graph: &CategoryGraph,
    params: &IndexParams,
    cs_max: usize,
    stats: &CorpusStats,
    stops: &StopWordList,
    synonyms: &SynonymTable,
) -> Result<IndexRecord> {
    let cs = candidate_names(doc, graph);
    let (matched, d_sum) = match_elements(&cs, ont, params.d_max, synonyms);
    let sim = compute_sim(matched.len(), d_sum, params, cs_max, ont.element_count())?;

    // w and kd are per element; compute each once even when an element
    // matched several candidate names.
    let mut per_element: BTreeMap<ElementRef, (f64, f64)> = BTreeMap::new();
    let mut matches = Vec::with_capacity(matched.len());
    for (element, matched_name, distance) in &matched {
        let (w, kd) = *per_element.entry(element.clone()).or_insert_with(|| {
            let w = element_weight(element.name(), doc, stats);
            let kd = element_overlap(element, doc, ont, stops, synonyms);
            (round(w), round(kd))
        });
        matches.push(ElementMatch {
            element: element.name().to_string(),
            kind: element.kind(),
            matched_name: matched_name.clone(),
            distance: *distance,
            w,
            kd,
        });
    }

    let seeds: BTreeSet<&str> = matched
        .iter()
        .map(|(element, _, _)| element.owner_class())
        .collect();
    let fragment = if seeds.is_empty() {
        OntologyFragment::empty()
    } else {
        let seeds: Vec<&str> = seeds.into_iter().collect();
        ont.select_fragment(&seeds)?.fragment
    };

    Ok(IndexRecord {
        doc_id: doc.id.clone(),
        sim: round(sim),
        matches,
        fragment,
    })
}

/// Description-overlap coefficient of an element against a document. With
/// an empty description the overlap is undefined, so fall back to name
/// evidence: 1 when the element name (or a synonym) occurs in the title or
/// text, else 0.
fn element_overlap(
    element: &ElementRef,
    doc: &Document,
    ont: &Ontology,
    stops: &StopWordList,
    synonyms: &SynonymTable,
) -> f64 {
    let description = ont.element_description(element).unwrap_or("");
    let content = format!("{} {}", doc.title, doc.text);
    if !description.trim().is_empty() {
        return description_overlap(description, &content, stops);
    }
    let stream = tokens(&content);
    let occurs = std::iter::once(element.name())
        .chain(synonyms.synonyms(element.name()))
        .any(|alias| count_occurrences(&stream, &tokens(alias)) > 0);
    if occurs {
        1.0
    } else {
        0.0
    }
}

/// Per-document failure collected during a build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentError {
    pub doc_id: String,
    pub message: String,
}

/// Summary of a build: counts for reporting plus any per-document errors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub document_count: usize,
    pub match_count: usize,
    pub added_categories: usize,
    pub errors: Vec<DocumentError>,
}

/// Indexes the whole corpus. Documents are processed in parallel; the
/// record list is sorted by document id afterwards, so the result is
/// independent of processing order. A failing document is reported in the
/// build report rather than aborting the build.
pub fn build_index(
    corpus: &Corpus,
    ont: &Ontology,
    params: &IndexParams,
    stops: &StopWordList,
    synonyms: &SynonymTable,
) -> Result<(Index, BuildReport)> {
    params.validate()?;
    let cs_bound = if corpus.is_empty() {
        1
    } else {
        cs_max(corpus, params.cs_max_mode)?
    };
    let stats = CorpusStats::compute(corpus.documents(), ont);

    let results: Vec<std::result::Result<IndexRecord, DocumentError>> = corpus
        .documents()
        .par_iter()
        .map(|doc| {
            index_document(
                doc,
                ont,
                corpus.category_graph(),
                params,
                cs_bound,
                &stats,
                stops,
                synonyms,
            )
            .map_err(|e| DocumentError {
                doc_id: doc.id.clone(),
                message: e.to_string(),
            })
        })
        .collect();

    let mut records = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for result in results {
        match result {
            Ok(record) => records.push(record),
            Err(error) => errors.push(error),
        }
    }
    records.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    errors.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

    let report = BuildReport {
        document_count: corpus.len(),
        match_count: records.iter().map(|r| r.matches.len()).sum(),
        added_categories: corpus.added_category_count(),
        errors,
    };
    let index = Index {
        records,
        params: *params,
        ontology_hash: ontology_hash(ont),
        corpus_hash: corpus_hash(corpus),
    };
    Ok((index, report))
}

#[derive(Serialize, Deserialize)]
struct IndexHeader {
    format: String,
    version: u32,
    params: IndexParams,
    ontology_hash: String,
    corpus_hash: String,
}

/// Writes the index as JSON Lines: a header line, then one record per line.
pub fn save_index(index: &Index, mut writer: impl Write) -> Result<()> {
    let header = IndexHeader {
        format: INDEX_FORMAT.to_string(),
        version: INDEX_VERSION,
        params: index.params,
        ontology_hash: index.ontology_hash.clone(),
        corpus_hash: index.corpus_hash.clone(),
    };
    let line = serde_json::to_string(&header).expect("index header serializes to JSON");
    writer.write_all(line.as_bytes())?;
    writer.write_all(b"\n")?;
    for record in &index.records {
        let line = serde_json::to_string(record).expect("index records serialize to JSON");
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads an index written by [`save_index`], validating the header and
/// rejecting duplicate document ids.
pub fn load_index(reader: impl Read) -> Result<Index> {
    let mut lines = BufReader::new(reader).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::parse_at(1, "missing index header"))??;
    let header: IndexHeader =
        serde_json::from_str(&header_line).map_err(|e| Error::parse_at(1, e))?;
    if header.format != INDEX_FORMAT {
        return Err(Error::parse_at(
            1,
            format!("unrecognized format tag '{}'", header.format),
        ));
    }
    if header.version != INDEX_VERSION {
        return Err(Error::UnsupportedVersion {
            found: header.version,
            supported: INDEX_VERSION,
        });
    }

    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for (number, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: IndexRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse_at(number + 2, e))?;
        if !seen.insert(record.doc_id.clone()) {
            return Err(Error::DuplicateDocument(record.doc_id));
        }
        records.push(record);
    }
    Ok(Index {
        records,
        params: header.params,
        ontology_hash: header.ontology_hash,
        corpus_hash: header.corpus_hash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{OntologyAttribute, OntologyClass, Relation, RelationKind};
    use proptest::prelude::*;

    fn class(name: &str, description: &str) -> OntologyClass {
        OntologyClass {
            name: name.into(),
            description: description.into(),
            attributes: Vec::new(),
        }
    }

    fn small_ontology() -> Ontology {
        // music (attr: genre) — jazz, plus an unrelated class.
        let mut music = class("music", "organized sound with melody and rhythm");
        music.attributes.push(OntologyAttribute {
            name: "genre".into(),
            description: "style category of musical works".into(),
        });
        Ontology::new(
            vec![
                music,
                class("jazz", "improvised swing music"),
                class("rock", ""),
            ],
            vec![
                Relation::new("jazz", "music", RelationKind::Taxonomical),
                Relation::new("rock", "music", RelationKind::Taxonomical),
            ],
        )
        .unwrap()
    }

    fn doc(id: &str, title: &str, categories: &[&str], text: &str) -> Document {
        Document {
            id: id.into(),
            title: title.into(),
            categories: categories.iter().map(|c| c.to_string()).collect(),
            text: text.into(),
            metadata: BTreeMap::new(),
        }
    }

    fn cs(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|n| n.to_string()).collect()
    }

    #[test]
    fn round_significant_trims_digits() {
        assert_eq!(round_significant(0.8625, 12), 0.8625);
        assert_eq!(round_significant(1.0 / 3.0, 12), 0.333333333333);
        assert_eq!(round_significant(0.0, 12), 0.0);
        assert_eq!(round_significant(123456789.0, 3), 123000000.0);
    }

    #[test]
    fn match_elements_exact_match() {
        let ont = Ontology::new(vec![class("jazz", "")], vec![]).unwrap();
        let (matches, d_sum) = match_elements(&cs(&["jazz"]), &ont, 2, &SynonymTable::empty());
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0].1, "jazz");
        assert_eq!(matches[0].2, 0);
        assert_eq!(d_sum, 0);
    }

    #[test]
    fn match_elements_prunes_distant_names() {
        let ont = Ontology::new(vec![class("rock", "")], vec![]).unwrap();
        let (matches, d_sum) = match_elements(&cs(&["jazz"]), &ont, 2, &SynonymTable::empty());
        assert!(matches.is_empty());
        assert_eq!(d_sum, 0);
    }

    #[test]
    fn match_elements_close_name() {
        let ont = Ontology::new(vec![class("music", "")], vec![]).unwrap();
        let (matches, d_sum) =
            match_elements(&cs(&["jazz", "muzic"]), &ont, 2, &SynonymTable::empty());
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0].1, "muzic");
        assert_eq!(matches[0].2, 1);
        assert_eq!(d_sum, 1);
    }

    #[test]
    fn match_elements_via_synonym_at_distance_zero() {
        let ont = Ontology::new(vec![class("musical instrument", "")], vec![]).unwrap();
        let synonyms = SynonymTable::new([(
            "musical instrument".to_string(),
            vec!["instrument".to_string()],
        )]);
        let (matches, d_sum) = match_elements(&cs(&["instrument"]), &ont, 1, &synonyms);
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0].0.name(), "musical instrument");
        assert_eq!(matches[0].2, 0);
        assert_eq!(d_sum, 0);
    }

    #[test]
    fn match_elements_output_is_sorted() {
        let ont = small_ontology();
        let (matches, _) = match_elements(
            &cs(&["jazz", "muzic", "genre"]),
            &ont,
            2,
            &SynonymTable::empty(),
        );
        let keys: Vec<(&str, &str)> = matches
            .iter()
            .map(|(e, c, _)| (e.name(), c.as_str()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn compute_sim_empty_match_set_is_one() {
        let params = IndexParams::default();
        assert_eq!(compute_sim(0, 0, &params, 10, 4).unwrap(), 1.0);
    }

    #[test]
    fn compute_sim_spot_value() {
        // 1 − ½·[0.5·(2/40) + 0.5·(1 − 3/6)] = 0.8625
        let params = IndexParams {
            k: 0.5,
            d_max: 3,
            cs_max_mode: CsMaxMode::Global,
        };
        let sim = compute_sim(2, 3, &params, 10, 4).unwrap();
        assert!((sim - 0.8625).abs() < 1e-12, "{sim}");
    }

    #[test]
    fn compute_sim_saturated_coverage_with_k_zero() {
        let params = IndexParams {
            k: 0.0,
            d_max: 3,
            cs_max_mode: CsMaxMode::Global,
        };
        let sim = compute_sim(40, 0, &params, 10, 4).unwrap();
        assert!((sim - 0.5).abs() < 1e-12, "{sim}");
    }

    #[test]
    fn compute_sim_rejects_precondition_violations() {
        let params = IndexParams::default();
        assert!(matches!(
            compute_sim(41, 0, &params, 10, 4),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            compute_sim(2, 7, &params, 10, 4),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn compute_sim_rejects_out_of_range_k() {
        let params = IndexParams {
            k: 1.5,
            d_max: 3,
            cs_max_mode: CsMaxMode::Global,
        };
        assert!(matches!(
            compute_sim(1, 0, &params, 10, 4),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn element_weight_absent_name_is_zero() {
        let ont = small_ontology();
        let d = doc("d1", "Quiet", &[], "nothing relevant here");
        let stats = CorpusStats::compute(std::slice::from_ref(&d), &ont);
        assert_eq!(element_weight("jazz", &d, &stats), 0.0);
    }

    #[test]
    fn element_weight_single_token_document() {
        let ont = Ontology::new(vec![class("jazz", "")], vec![]).unwrap();
        let d = doc("d1", "jazz", &[], "");
        let stats = CorpusStats::compute(std::slice::from_ref(&d), &ont);
        let w = element_weight("jazz", &d, &stats);
        assert!((w - 2.0_f64.ln()).abs() < 1e-12, "{w}");
    }

    #[test]
    fn element_weight_shared_idf() {
        let ont = Ontology::new(vec![class("jazz", "")], vec![]).unwrap();
        let d1 = doc("d1", "jazz", &[], "one two three");
        let d2 = doc("d2", "jazz", &[], "four five six");
        let docs = vec![d1.clone(), d2.clone()];
        let stats = CorpusStats::compute(&docs, &ont);
        assert_eq!(
            element_weight("jazz", &d1, &stats),
            element_weight("jazz", &d2, &stats)
        );
    }

    #[test]
    fn corpus_stats_count_documents_containing_names() {
        let ont = small_ontology();
        let docs = vec![
            doc("d1", "Jazz", &[], "jazz music swings"),
            doc("d2", "Silence", &[], "no relevant words"),
        ];
        let stats = CorpusStats::compute(&docs, &ont);
        assert_eq!(stats.doc_count(), 2);
        assert_eq!(stats.document_frequency("jazz"), 1);
        assert_eq!(stats.document_frequency("music"), 1);
        assert_eq!(stats.document_frequency("rock"), 0);
    }

    fn fixture_corpus() -> (Corpus, Ontology) {
        let graph = CategoryGraph::new(
            ["Music".into(), "Art".into(), "Jazz".into()],
            [
                ("Jazz".to_string(), "Music".to_string()),
                ("Music".to_string(), "Art".to_string()),
            ],
        )
        .unwrap();
        let docs = vec![
            doc("d1", "Jazz", &["Jazz"], "jazz is improvised music"),
            doc("d2", "Silence", &[], "nothing matches here"),
        ];
        (Corpus::new(docs, graph).unwrap(), small_ontology())
    }

    #[test]
    fn index_document_no_matches_yields_unit_sim() {
        let (corpus, ont) = fixture_corpus();
        let stats = CorpusStats::compute(corpus.documents(), &ont);
        let record = index_document(
            corpus.document("d2").unwrap(),
            &ont,
            corpus.category_graph(),
            &IndexParams::default(),
            10,
            &stats,
            &StopWordList::default_english(),
            &SynonymTable::empty(),
        )
        .unwrap();
        assert!(record.matches.is_empty());
        assert_eq!(record.sim, 1.0);
        assert!(record.fragment.is_empty());
    }

    #[test]
    fn index_document_title_match_seeds_fragment() {
        let (corpus, ont) = fixture_corpus();
        let stats = CorpusStats::compute(corpus.documents(), &ont);
        let record = index_document(
            corpus.document("d1").unwrap(),
            &ont,
            corpus.category_graph(),
            &IndexParams::default(),
            10,
            &stats,
            &StopWordList::default_english(),
            &SynonymTable::empty(),
        )
        .unwrap();
        // CS = {jazz, music}; both match their classes exactly.
        assert_eq!(record.matches.len(), 2);
        assert!(record.matches.iter().all(|m| m.distance == 0));
        assert_eq!(
            record.fragment.classes,
            BTreeSet::from(["jazz".to_string(), "music".to_string()])
        );
        // Verify sim against the formula evaluated on observed counts.
        let expected = compute_sim(2, 0, &IndexParams::default(), 10, ont.element_count()).unwrap();
        assert_eq!(record.sim, round(expected));
    }

    #[test]
    fn build_index_empty_corpus() {
        let (_, ont) = fixture_corpus();
        let corpus = Corpus::new(Vec::new(), CategoryGraph::empty()).unwrap();
        let (index, report) = build_index(
            &corpus,
            &ont,
            &IndexParams::default(),
            &StopWordList::default_english(),
            &SynonymTable::empty(),
        )
        .unwrap();
        assert!(index.is_empty());
        assert_eq!(report.document_count, 0);
    }

    #[test]
    fn build_index_sorts_records_by_id() {
        let (corpus, ont) = fixture_corpus();
        let shuffled = Corpus::new(
            corpus.documents().iter().rev().cloned().collect(),
            corpus.category_graph().clone(),
        )
        .unwrap();
        let params = IndexParams::default();
        let stops = StopWordList::default_english();
        let (index, _) =
            build_index(&shuffled, &ont, &params, &stops, &SynonymTable::empty()).unwrap();
        let ids: Vec<&str> = index.records.iter().map(|r| r.doc_id.as_str()).collect();
        assert_eq!(ids, vec!["d1", "d2"]);
    }

    #[test]
    fn build_index_is_deterministic_under_document_permutation() {
        let (corpus, ont) = fixture_corpus();
        let params = IndexParams::default();
        let stops = StopWordList::default_english();
        let synonyms = SynonymTable::empty();

        let mut bytes_forward = Vec::new();
        let (index, _) = build_index(&corpus, &ont, &params, &stops, &synonyms).unwrap();
        save_index(&index, &mut bytes_forward).unwrap();

        let reversed = Corpus::new(
            corpus.documents().iter().rev().cloned().collect(),
            corpus.category_graph().clone(),
        )
        .unwrap();
        let mut bytes_reversed = Vec::new();
        let (index, _) = build_index(&reversed, &ont, &params, &stops, &synonyms).unwrap();
        save_index(&index, &mut bytes_reversed).unwrap();

        assert_eq!(bytes_forward, bytes_reversed);
    }

    #[test]
    fn save_load_round_trip() {
        let (corpus, ont) = fixture_corpus();
        let (index, _) = build_index(
            &corpus,
            &ont,
            &IndexParams::default(),
            &StopWordList::default_english(),
            &SynonymTable::empty(),
        )
        .unwrap();
        let mut bytes = Vec::new();
        save_index(&index, &mut bytes).unwrap();
        let loaded = load_index(&bytes[..]).unwrap();
        assert_eq!(loaded, index);
    }

    #[test]
    fn load_index_rejects_wrong_version() {
        let src = br#"{"format":"ontodex-index","version":9,"params":{"k":0.5,"d_max":3,"cs_max_mode":"global"},"ontology_hash":"x","corpus_hash":"y"}"#;
        assert!(matches!(
            load_index(&src[..]),
            Err(Error::UnsupportedVersion { found: 9, .. })
        ));
    }

    #[test]
    fn load_index_rejects_wrong_format_tag() {
        let src = br#"{"format":"other","version":1,"params":{"k":0.5,"d_max":3,"cs_max_mode":"global"},"ontology_hash":"x","corpus_hash":"y"}"#;
        assert!(matches!(
            load_index(&src[..]),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn load_index_rejects_empty_file() {
        assert!(matches!(
            load_index(&b""[..]),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn load_index_reports_position_of_bad_record() {
        let mut src = Vec::new();
        src.extend_from_slice(br#"{"format":"ontodex-index","version":1,"params":{"k":0.5,"d_max":3,"cs_max_mode":"global"},"ontology_hash":"x","corpus_hash":"y"}"#);
        src.extend_from_slice(b"\n{\"doc_id\":\"d1\",\"sim\":1.0,\"matches\":[],\"fragment\"");
        match load_index(&src[..]).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn load_index_rejects_duplicate_doc_ids() {
        let mut src = Vec::new();
        src.extend_from_slice(br#"{"format":"ontodex-index","version":1,"params":{"k":0.5,"d_max":3,"cs_max_mode":"global"},"ontology_hash":"x","corpus_hash":"y"}"#);
        let record =
            br#"{"doc_id":"d1","sim":1.0,"matches":[],"fragment":{"classes":[],"relations":[]}}"#;
        src.extend_from_slice(b"\n");
        src.extend_from_slice(record);
        src.extend_from_slice(b"\n");
        src.extend_from_slice(record);
        src.extend_from_slice(b"\n");
        assert!(matches!(
            load_index(&src[..]),
            Err(Error::DuplicateDocument(id)) if id == "d1"
        ));
    }

    #[test]
    fn corpus_hash_is_document_order_independent() {
        let (corpus, _) = fixture_corpus();
        let reversed = Corpus::new(
            corpus.documents().iter().rev().cloned().collect(),
            corpus.category_graph().clone(),
        )
        .unwrap();
        assert_eq!(corpus_hash(&corpus), corpus_hash(&reversed));
    }

    #[test]
    fn corpus_hash_changes_with_content() {
        let (corpus, _) = fixture_corpus();
        let mut docs: Vec<Document> = corpus.documents().to_vec();
        docs[0].text.push_str(" extra");
        let changed = Corpus::new(docs, corpus.category_graph().clone()).unwrap();
        assert_ne!(corpus_hash(&corpus), corpus_hash(&changed));
    }

    #[test]
    fn ontology_hash_is_stable_and_content_sensitive() {
        let (_, ont) = fixture_corpus();
        assert_eq!(ontology_hash(&ont), ontology_hash(&ont));
        let other = Ontology::new(vec![class("solo", "")], vec![]).unwrap();
        assert_ne!(ontology_hash(&ont), ontology_hash(&other));
    }

    proptest! {
        #[test]
        fn compute_sim_stays_in_half_open_band(
            k in 0.0f64..=1.0,
            d_max in 1usize..6,
            cs_max in 1usize..30,
            n_ont in 1usize..30,
            pair_seed in 0usize..900,
            sum_seed in 0usize..5000,
        ) {
            let params = IndexParams { k, d_max, cs_max_mode: CsMaxMode::Global };
            let n_pair = 1 + pair_seed % (cs_max * n_ont);
            let d_sum = sum_seed % (d_max * n_pair + 1);
            let sim = compute_sim(n_pair, d_sum, &params, cs_max, n_ont).unwrap();
            prop_assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&sim), "sim out of band: {sim}");
        }

        /// The formula rewards a higher distance total: the distance term
        /// shrinks as d_sum grows and enters the bracket negatively, so sim
        /// is non-decreasing in d_sum for fixed n_pair when k > 0.
        #[test]
        fn compute_sim_non_decreasing_in_distance_total(
            k in 0.01f64..=1.0,
            d_max in 1usize..6,
            n_pair in 1usize..40,
            sum_seed in 0usize..5000,
        ) {
            let params = IndexParams { k, d_max, cs_max_mode: CsMaxMode::Global };
            let high = d_max * n_pair;
            let d_sum = sum_seed % high.max(1);
            let lo = compute_sim(n_pair, d_sum, &params, 50, 50).unwrap();
            let hi = compute_sim(n_pair, d_sum + 1, &params, 50, 50).unwrap();
            prop_assert!(hi >= lo - 1e-12, "sim decreased: {lo} -> {hi}");
        }

        /// More matched pairs at a fixed distance ratio can only lower sim
        /// (the coverage share grows) as long as k < 1.
        #[test]
        fn compute_sim_non_increasing_in_pair_count_at_fixed_ratio(
            k in 0.0f64..0.99,
            d_max in 1usize..6,
            n_pair in 1usize..20,
            ratio_num in 0usize..=6,
        ) {
            let params = IndexParams { k, d_max, cs_max_mode: CsMaxMode::Global };
            // d_sum = r·n_pair with r = ratio_num/6·d_max kept exactly
            // representable by scaling both pair counts by 6.
            let scale = 6;
            let small = n_pair * scale;
            let large = small * 2;
            let d_small = ratio_num * n_pair * d_max;
            let d_large = d_small * 2;
            let lo = compute_sim(large, d_large, &params, 100, 100).unwrap();
            let hi = compute_sim(small, d_small, &params, 100, 100).unwrap();
            prop_assert!(lo <= hi + 1e-12, "sim grew with pair count: {hi} -> {lo}");
        }

        #[test]
        fn match_elements_distances_below_bound(
            names in proptest::collection::btree_set("[a-d]{1,5}", 1..5),
            cs_names in proptest::collection::btree_set("[a-d]{1,5}", 1..5),
            d_max in 1usize..4,
        ) {
            let ont = Ontology::new(
                names.iter().map(|n| class(n, "")).collect(),
                vec![],
            ).unwrap();
            let (matches, d_sum) = match_elements(&cs_names, &ont, d_max, &SynonymTable::empty());
            prop_assert!(matches.iter().all(|(_, _, d)| *d < d_max));
            prop_assert_eq!(d_sum, matches.iter().map(|(_, _, d)| d).sum::<usize>());
        }
    }
}
