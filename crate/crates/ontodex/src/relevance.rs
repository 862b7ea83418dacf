//! Context relevance: compare each indexed document against an abstract
//! context — a problem-specific selection of ontology classes — and rank.
//!
//! Two methods are provided. The graph method compares the document's
//! ontology fragment with the context's induced class graph structurally
//! (node names, degrees, path lengths). The weight method spreads weights
//! from the context classes over the ontology and measures the angular
//! separation between those weights and the document's indexed element
//! weights. Either way, the final relevance combines the method similarity
//! with the document's indexed similarity.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexing::{round_significant, Index, IndexRecord, SIGNIFICANT_DIGITS};
use crate::ontology::{ElementKind, Ontology, OntologyFragment};
use crate::text::{name_similarity, normalize};

/// A problem-specific selection of ontology classes (and optionally
/// attributes), validated against the ontology at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractContext {
    classes: BTreeSet<String>,
    attributes: BTreeSet<(String, String)>,
}

#[derive(Deserialize)]
struct ContextFile {
    classes: Vec<String>,
    #[serde(default)]
    attributes: Vec<ContextAttributeFile>,
}

#[derive(Deserialize)]
struct ContextAttributeFile {
    class: String,
    name: String,
}

impl AbstractContext {
    /// Validates class and attribute names against the ontology; the class
    /// set must be non-empty.
    pub fn new<C, A>(ont: &Ontology, classes: C, attributes: A) -> Result<Self>
    where
        C: IntoIterator<Item = String>,
        A: IntoIterator<Item = (String, String)>,
    {
        let classes: BTreeSet<String> = classes.into_iter().map(|c| normalize(&c)).collect();
        if classes.is_empty() {
            return Err(Error::Validation("context has no classes".into()));
        }
        for class in &classes {
            if !ont.contains_class(class) {
                return Err(Error::UnknownClass(class.clone()));
            }
        }
        let attributes: BTreeSet<(String, String)> = attributes
            .into_iter()
            .map(|(owner, name)| (normalize(&owner), normalize(&name)))
            .collect();
        for (owner, name) in &attributes {
            let exists = ont
                .class(owner)
                .is_some_and(|c| c.attributes.iter().any(|a| &a.name == name));
            if !exists {
                return Err(Error::UnknownElement(format!("{owner}.{name}")));
            }
        }
        Ok(Self {
            classes,
            attributes,
        })
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().map(String::as_str)
    }

    pub fn attributes(&self) -> impl Iterator<Item = (&str, &str)> {
        self.attributes
            .iter()
            .map(|(o, n)| (o.as_str(), n.as_str()))
    }

    /// The context as a class graph: its classes plus every ontology
    /// relation whose endpoints are both context classes.
    pub fn induced_graph(&self, ont: &Ontology) -> ClassGraph {
        let edges = ont
            .relations()
            .filter(|r| self.classes.contains(&r.from) && self.classes.contains(&r.to))
            .map(|r| (r.from.clone(), r.to.clone()));
        ClassGraph::new(self.classes.iter().cloned(), edges)
    }
}

/// Parses a context file and validates it against the ontology.
pub fn load_context(mut reader: impl Read, ont: &Ontology) -> Result<AbstractContext> {
    let mut raw = String::new();
    reader.read_to_string(&mut raw)?;
    let file: ContextFile = serde_json::from_str(&raw).map_err(|e| Error::parse_at(e.line(), e))?;
    AbstractContext::new(
        ont,
        file.classes,
        file.attributes.into_iter().map(|a| (a.class, a.name)),
    )
}

/// An undirected graph over class names — the shape shared by ontology
/// fragments and induced context graphs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassGraph {
    adjacency: BTreeMap<String, BTreeSet<String>>,
}

impl ClassGraph {
    pub fn new<N, E>(nodes: N, edges: E) -> Self
    where
        N: IntoIterator<Item = String>,
        E: IntoIterator<Item = (String, String)>,
    {
        let mut adjacency: BTreeMap<String, BTreeSet<String>> = nodes
            .into_iter()
            .map(|n| (normalize(&n), BTreeSet::new()))
            .collect();
        adjacency.remove("");
        for (a, b) in edges {
            let a = normalize(&a);
            let b = normalize(&b);
            if a.is_empty() || b.is_empty() || a == b {
                continue;
            }
            adjacency.entry(a.clone()).or_default().insert(b.clone());
            adjacency.entry(b).or_default().insert(a);
        }
        Self { adjacency }
    }

    pub fn from_fragment(fragment: &OntologyFragment) -> Self {
        Self::new(
            fragment.classes.iter().cloned(),
            fragment
                .relations
                .iter()
                .map(|r| (r.from.clone(), r.to.clone())),
        )
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.adjacency.keys().map(String::as_str)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn degree(&self, node: &str) -> usize {
        self.adjacency.get(node).map_or(0, BTreeSet::len)
    }

    /// Hop distances from `node` to every reachable node.
    pub fn distances_from(&self, node: &str) -> BTreeMap<String, usize> {
        let mut dist = BTreeMap::new();
        if !self.adjacency.contains_key(node) {
            return dist;
        }
        dist.insert(node.to_string(), 0);
        let mut queue = VecDeque::from([node.to_string()]);
        while let Some(current) = queue.pop_front() {
            let d = dist[&current];
            for next in &self.adjacency[&current] {
                if !dist.contains_key(next) {
                    dist.insert(next.clone(), d + 1);
                    queue.push_back(next.clone());
                }
            }
        }
        dist
    }
}

/// One matched node pair with its name similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub left: String,
    pub right: String,
    pub similarity: f64,
}

/// Greedy one-to-one matching of similarly named nodes: all cross pairs
/// with name similarity ≥ `theta`, sorted by similarity descending (ties by
/// the name pair), accepted while both nodes are still free. The result is
/// deterministic, and symmetric up to swapping pair sides.
pub fn match_nodes(g1: &ClassGraph, g2: &ClassGraph, theta: f64) -> Vec<MatchedPair> {
    let mut candidates = Vec::new();
    for left in g1.nodes() {
        for right in g2.nodes() {
            let similarity = name_similarity(left, right);
            if similarity >= theta {
                candidates.push(MatchedPair {
                    left: left.to_string(),
                    right: right.to_string(),
                    similarity,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then_with(|| a.left.cmp(&b.left))
            .then_with(|| a.right.cmp(&b.right))
    });
    let mut used_left = BTreeSet::new();
    let mut used_right = BTreeSet::new();
    let mut matched = Vec::new();
    for pair in candidates {
        if used_left.contains(&pair.left) || used_right.contains(&pair.right) {
            continue;
        }
        used_left.insert(pair.left.clone());
        used_right.insert(pair.right.clone());
        matched.push(pair);
    }
    matched
}

fn ratio(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        a.min(b) as f64 / a.max(b) as f64
    }
}

/// Structural similarity of two class graphs in [0,1]: the product of
/// matched-node coverage, mean name similarity, mean degree ratio, and mean
/// path-length ratio over matched pairs. Identical graphs score exactly 1;
/// graphs with no matchable nodes score 0.
pub fn graph_similarity(g1: &ClassGraph, g2: &ClassGraph, theta: f64) -> f64 {
    let matched = match_nodes(g1, g2, theta);
    if matched.is_empty() {
        return 0.0;
    }
    let len = matched.len() as f64;
    let coverage = 2.0 * len / (g1.node_count() + g2.node_count()) as f64;
    let name = matched.iter().map(|m| m.similarity).sum::<f64>() / len;
    let nbr = matched
        .iter()
        .map(|m| {
            let d1 = g1.degree(&m.left);
            let d2 = g2.degree(&m.right);
            if d1 == 0 && d2 == 0 {
                1.0
            } else {
                ratio(d1, d2)
            }
        })
        .sum::<f64>()
        / len;

    // Path factor: compare shortest-path lengths between every unordered
    // pair of matched pairs. Both-unreachable layouts agree (1); exactly
    // one unreachable disagrees (0). Fewer than two pairs leave nothing to
    // compare, an empty mean defined as 1.
    let path = if matched.len() < 2 {
        1.0
    } else {
        let left_dist: Vec<BTreeMap<String, usize>> =
            matched.iter().map(|m| g1.distances_from(&m.left)).collect();
        let right_dist: Vec<BTreeMap<String, usize>> = matched
            .iter()
            .map(|m| g2.distances_from(&m.right))
            .collect();
        let mut total = 0.0;
        let mut count = 0usize;
        for i in 0..matched.len() {
            for other in &matched[i + 1..] {
                let p1 = left_dist[i].get(&other.left);
                let p2 = right_dist[i].get(&other.right);
                total += match (p1, p2) {
                    (None, None) => 1.0,
                    (Some(a), Some(b)) => ratio(*a, *b),
                    _ => 0.0,
                };
                count += 1;
            }
        }
        total / count as f64
    };

    coverage * name * nbr * path
}

/// Context weights spread over the ontology: each class within `l_max` hops
/// of a context class gets weight 1/(d+1); its attributes inherit that
/// weight. Context classes themselves sit at distance 0, weight 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedContext {
    class_weights: BTreeMap<String, f64>,
    attribute_weights: BTreeMap<(String, String), f64>,
}

impl WeightedContext {
    pub fn class_weight(&self, name: &str) -> Option<f64> {
        self.class_weights.get(&normalize(name)).copied()
    }

    pub fn attribute_weight(&self, owner: &str, name: &str) -> Option<f64> {
        self.attribute_weights
            .get(&(normalize(owner), normalize(name)))
            .copied()
    }

    pub fn class_count(&self) -> usize {
        self.class_weights.len()
    }

    /// The context as a (kind, name) → weight vector for angular
    /// comparison. Distinct attributes sharing a name collapse to the
    /// larger weight, mirroring how index matches are keyed.
    fn element_vector(&self) -> BTreeMap<(ElementKind, String), f64> {
        let mut vector = BTreeMap::new();
        for (name, weight) in &self.class_weights {
            vector.insert((ElementKind::Class, name.clone()), *weight);
        }
        for ((_, name), weight) in &self.attribute_weights {
            let entry = vector
                .entry((ElementKind::Attribute, name.clone()))
                .or_insert(0.0);
            if *weight > *entry {
                *entry = *weight;
            }
        }
        vector
    }
}

/// Spreads context weights over the ontology: hop distances from the
/// context classes (every relation kind traversed, undirected), cut off
/// beyond `l_max`, weight 1/(d+1), attributes inheriting from their class.
pub fn context_weights(ont: &Ontology, ctx: &AbstractContext, l_max: usize) -> WeightedContext {
    let sources: BTreeSet<String> = ctx.classes().map(str::to_string).collect();
    let mut class_weights = BTreeMap::new();
    let mut attribute_weights = BTreeMap::new();
    for (class, distance) in ont.distances_from(&sources) {
        if distance > l_max {
            continue;
        }
        let weight = 1.0 / (distance + 1) as f64;
        if let Some(c) = ont.class(&class) {
            for attribute in &c.attributes {
                attribute_weights.insert((class.clone(), attribute.name.clone()), weight);
            }
        }
        class_weights.insert(class, weight);
    }
    WeightedContext {
        class_weights,
        attribute_weights,
    }
}

/// Cosine of the angle between two aligned non-negative vectors; 0 when
/// either vector is all zero. Clamped into [0,1] against rounding spill.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot / (nu * nv).sqrt()).clamp(0.0, 1.0)
}

/// Angular separation between the context weight vector and the document's
/// indexed element vector (w·kd per element), aligned on (kind, name) keys.
pub fn angular_similarity(ctx_w: &WeightedContext, record: &IndexRecord) -> f64 {
    let u_map = ctx_w.element_vector();
    let mut v_map: BTreeMap<(ElementKind, String), f64> = BTreeMap::new();
    for m in &record.matches {
        let value = m.w * m.kd;
        let entry = v_map.entry((m.kind, m.element.clone())).or_insert(0.0);
        if value > *entry {
            *entry = value;
        }
    }
    let keys: BTreeSet<&(ElementKind, String)> = u_map.keys().chain(v_map.keys()).collect();
    let u: Vec<f64> = keys
        .iter()
        .map(|k| u_map.get(*k).copied().unwrap_or(0.0))
        .collect();
    let v: Vec<f64> = keys
        .iter()
        .map(|k| v_map.get(*k).copied().unwrap_or(0.0))
        .collect();
    cosine_similarity(&u, &v)
}

/// How the method similarity s and the indexed similarity combine.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RelevanceMode {
    /// relevance = s · sim (the default).
    #[default]
    Product,
    /// relevance = α·s + (1−α)·sim.
    Blend { alpha: f64 },
}

/// Combines the method similarity with the document's indexed similarity.
/// Inputs outside [0,1] are rejected, not clamped.
pub fn document_relevance(s: f64, index_sim: f64, mode: RelevanceMode) -> Result<f64> {
    for (label, value) in [("s", s), ("index similarity", index_sim)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfRange(format!(
                "{label} must be within [0, 1], got {value}"
            )));
        }
    }
    match mode {
        RelevanceMode::Product => Ok(s * index_sim),
        RelevanceMode::Blend { alpha } => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::OutOfRange(format!(
                    "alpha must be within [0, 1], got {alpha}"
                )));
            }
            Ok(alpha * s + (1.0 - alpha) * index_sim)
        }
    }
}

/// Which comparison drives the ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMethod {
    /// Structural fragment-vs-context graph comparison.
    Graph,
    /// Angular separation of context weights and indexed element weights.
    Weight,
}

impl std::str::FromStr for RankMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph" => Ok(RankMethod::Graph),
            "weight" => Ok(RankMethod::Weight),
            other => Err(Error::Validation(format!(
                "unknown ranking method '{other}' (expected 'graph' or 'weight')"
            ))),
        }
    }
}

impl std::fmt::Display for RankMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RankMethod::Graph => "graph",
            RankMethod::Weight => "weight",
        })
    }
}

/// Ranking knobs with their conventional defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOptions {
    /// Node-name similarity threshold for graph matching.
    pub theta: f64,
    /// Context weight propagation bound in hops.
    pub l_max: usize,
    pub mode: RelevanceMode,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self {
            theta: 0.6,
            l_max: 2,
            mode: RelevanceMode::Product,
        }
    }
}

/// One ranked document with the quantities the rank was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedResult {
    pub doc_id: String,
    pub s: f64,
    pub index_sim: f64,
    pub relevance: f64,
}

/// Scores every index record against the context with the chosen method
/// and returns the results sorted by relevance descending, ties broken by
/// document id.
pub fn rank_documents(
    index: &Index,
    ont: &Ontology,
    ctx: &AbstractContext,
    method: RankMethod,
    options: &RankOptions,
) -> Result<Vec<RankedResult>> {
    if !(0.0..=1.0).contains(&options.theta) {
        return Err(Error::OutOfRange(format!(
            "theta must be within [0, 1], got {}",
            options.theta
        )));
    }
    let ctx_graph = ctx.induced_graph(ont);
    let ctx_weights = context_weights(ont, ctx, options.l_max);

    let mut results = Vec::with_capacity(index.records.len());
    for record in &index.records {
        let s = match method {
            RankMethod::Graph => graph_similarity(
                &ClassGraph::from_fragment(&record.fragment),
                &ctx_graph,
                options.theta,
            ),
            RankMethod::Weight => angular_similarity(&ctx_weights, record),
        };
        let s = round_significant(s, SIGNIFICANT_DIGITS);
        let relevance = document_relevance(s, record.sim, options.mode)?;
        results.push(RankedResult {
            doc_id: record.doc_id.clone(),
            s,
            index_sim: record.sim,
            relevance: round_significant(relevance, SIGNIFICANT_DIGITS),
        });
    }
    results.sort_by(|a, b| {
        b.relevance
            .total_cmp(&a.relevance)
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexing::{ElementMatch, IndexParams};
    use crate::ontology::{OntologyAttribute, OntologyClass, Relation, RelationKind};
    use proptest::prelude::*;

    fn class(name: &str) -> OntologyClass {
        OntologyClass {
            name: name.into(),
            description: String::new(),
            attributes: Vec::new(),
        }
    }

    fn chain(names: &[&str]) -> Ontology {
        let relations = names
            .windows(2)
            .map(|w| Relation::new(w[0], w[1], RelationKind::Associative))
            .collect();
        Ontology::new(names.iter().map(|n| class(n)).collect(), relations).unwrap()
    }

    fn graph(nodes: &[&str], edges: &[(&str, &str)]) -> ClassGraph {
        ClassGraph::new(
            nodes.iter().map(|n| n.to_string()),
            edges.iter().map(|(a, b)| (a.to_string(), b.to_string())),
        )
    }

    fn record(doc_id: &str, sim: f64, matches: Vec<ElementMatch>) -> IndexRecord {
        IndexRecord {
            doc_id: doc_id.into(),
            sim,
            matches,
            fragment: OntologyFragment::empty(),
        }
    }

    fn m(element: &str, kind: ElementKind, w: f64, kd: f64) -> ElementMatch {
        ElementMatch {
            element: element.into(),
            kind,
            matched_name: element.into(),
            distance: 0,
            w,
            kd,
        }
    }

    #[test]
    fn context_validates_against_ontology() {
        let ont = chain(&["a", "b", "c"]);
        assert!(AbstractContext::new(&ont, vec!["a".into()], Vec::new()).is_ok());
        assert!(matches!(
            AbstractContext::new(&ont, vec!["nope".into()], Vec::new()),
            Err(Error::UnknownClass(_))
        ));
        assert!(AbstractContext::new(&ont, Vec::new(), Vec::new()).is_err());
    }

    #[test]
    fn context_validates_attributes() {
        let mut with_attr = class("a");
        with_attr.attributes.push(OntologyAttribute {
            name: "x".into(),
            description: String::new(),
        });
        let ont = Ontology::new(vec![with_attr, class("b")], vec![]).unwrap();
        assert!(
            AbstractContext::new(&ont, vec!["a".into()], vec![("a".into(), "x".into())]).is_ok()
        );
        assert!(matches!(
            AbstractContext::new(&ont, vec!["a".into()], vec![("a".into(), "y".into())]),
            Err(Error::UnknownElement(_))
        ));
    }

    #[test]
    fn load_context_round_trip() {
        let ont = chain(&["jazz", "music"]);
        let src = br#"{"classes": ["Jazz", "Music"]}"#;
        let ctx = load_context(&src[..], &ont).unwrap();
        assert_eq!(ctx.classes().collect::<Vec<_>>(), vec!["jazz", "music"]);
    }

    #[test]
    fn induced_graph_keeps_inner_relations_only() {
        let ont = chain(&["a", "b", "c"]);
        let ctx = AbstractContext::new(&ont, vec!["a".into(), "b".into()], Vec::new()).unwrap();
        let g = ctx.induced_graph(&ont);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.degree("a"), 1);
        // c is adjacent to b in the ontology but outside the context.
        assert_eq!(g.degree("b"), 1);
    }

    #[test]
    fn match_nodes_identity() {
        let g = graph(&["a", "b"], &[("a", "b")]);
        let matched = match_nodes(&g, &g, 0.6);
        assert_eq!(matched.len(), 2);
        assert!(matched
            .iter()
            .all(|p| p.left == p.right && p.similarity == 1.0));
    }

    #[test]
    fn match_nodes_below_threshold_is_empty() {
        let g1 = graph(&["alpha"], &[]);
        let g2 = graph(&["omega"], &[]);
        assert!(match_nodes(&g1, &g2, 0.9).is_empty());
    }

    #[test]
    fn match_nodes_prefers_higher_similarity() {
        let g1 = graph(&["jazz"], &[]);
        let g2 = graph(&["jazz", "jizz"], &[]);
        let matched = match_nodes(&g1, &g2, 0.6);
        assert_eq!(matched.len(), 1);
        assert_eq!(matched[0].right, "jazz");
        assert_eq!(matched[0].similarity, 1.0);
    }

    #[test]
    fn graph_similarity_identity_is_exactly_one() {
        let g = graph(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        assert_eq!(graph_similarity(&g, &g, 0.6), 1.0);
    }

    #[test]
    fn graph_similarity_empty_side_is_zero() {
        let g = graph(&["a"], &[]);
        assert_eq!(graph_similarity(&g, &ClassGraph::default(), 0.6), 0.0);
    }

    #[test]
    fn graph_similarity_path_versus_triangle() {
        // Path a–b–c against triangle a–b–c: identity matching, coverage 1,
        // names 1, degree ratios (1/2, 2/2, 1/2) → 2/3, path ratios
        // (ab 1/1, ac 2↔1 → 1/2, bc 1/1) → 5/6; product 5/9.
        let path = graph(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        let triangle = graph(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]);
        let s = graph_similarity(&path, &triangle, 0.9);
        assert!((s - 5.0 / 9.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn graph_similarity_unreachable_pairs() {
        // Two components on both sides matched the same way: both layouts
        // agree that the matched pairs are disconnected.
        let g1 = graph(&["a", "b"], &[]);
        let g2 = graph(&["a", "b"], &[]);
        assert_eq!(graph_similarity(&g1, &g2, 0.9), 1.0);
        // Connected on one side only: the layouts disagree, path factor 0.
        let g3 = graph(&["a", "b"], &[("a", "b")]);
        let s = graph_similarity(&g1, &g3, 0.9);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn context_weights_at_l_max_zero() {
        let ont = chain(&["a", "b", "c"]);
        let ctx = AbstractContext::new(&ont, vec!["a".into()], Vec::new()).unwrap();
        let weights = context_weights(&ont, &ctx, 0);
        assert_eq!(weights.class_weight("a"), Some(1.0));
        assert_eq!(weights.class_weight("b"), None);
        assert_eq!(weights.class_count(), 1);
    }

    #[test]
    fn context_weights_decay_with_distance() {
        let ont = chain(&["a", "b", "c"]);
        let ctx = AbstractContext::new(&ont, vec!["a".into()], Vec::new()).unwrap();
        let weights = context_weights(&ont, &ctx, 2);
        assert_eq!(weights.class_weight("a"), Some(1.0));
        assert_eq!(weights.class_weight("b"), Some(0.5));
        assert_eq!(weights.class_weight("c"), Some(1.0 / 3.0));
    }

    #[test]
    fn context_weights_cut_off_beyond_l_max() {
        let ont = chain(&["a", "b", "c", "d"]);
        let ctx = AbstractContext::new(&ont, vec!["a".into()], Vec::new()).unwrap();
        let weights = context_weights(&ont, &ctx, 2);
        assert_eq!(weights.class_weight("d"), None);
    }

    #[test]
    fn context_weights_attributes_inherit_owner_weight() {
        let mut b = class("b");
        b.attributes.push(OntologyAttribute {
            name: "x".into(),
            description: String::new(),
        });
        let ont = Ontology::new(
            vec![class("a"), b],
            vec![Relation::new("a", "b", RelationKind::Associative)],
        )
        .unwrap();
        let ctx = AbstractContext::new(&ont, vec!["a".into()], Vec::new()).unwrap();
        let weights = context_weights(&ont, &ctx, 2);
        assert_eq!(weights.attribute_weight("b", "x"), Some(0.5));
    }

    #[test]
    fn cosine_similarity_fixture() {
        assert_eq!(cosine_similarity(&[1.0, 0.5], &[0.5, 1.0]), 0.8);
        assert_eq!(cosine_similarity(&[1.0, 2.0], &[2.0, 4.0]), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn angular_similarity_aligns_on_kind_and_name() {
        let ont = chain(&["jazz", "music"]);
        let ctx =
            AbstractContext::new(&ont, vec!["jazz".into(), "music".into()], Vec::new()).unwrap();
        let weights = context_weights(&ont, &ctx, 0);
        // Document matched both context classes with equal weight: the
        // vectors point the same way.
        let rec = record(
            "d1",
            1.0,
            vec![
                m("jazz", ElementKind::Class, 0.4, 1.0),
                m("music", ElementKind::Class, 0.4, 1.0),
            ],
        );
        assert!((angular_similarity(&weights, &rec) - 1.0).abs() < 1e-12);
        // No matches at all → zero vector → 0.
        assert_eq!(
            angular_similarity(&weights, &record("d2", 1.0, vec![])),
            0.0
        );
    }

    #[test]
    fn angular_similarity_ignores_kind_collisions() {
        // A class and an attribute sharing a name stay distinct keys.
        let ont = chain(&["jazz"]);
        let ctx = AbstractContext::new(&ont, vec!["jazz".into()], Vec::new()).unwrap();
        let weights = context_weights(&ont, &ctx, 0);
        let rec = record("d1", 1.0, vec![m("jazz", ElementKind::Attribute, 0.4, 1.0)]);
        assert_eq!(angular_similarity(&weights, &rec), 0.0);
    }

    #[test]
    fn document_relevance_modes() {
        assert_eq!(
            document_relevance(1.0, 1.0, RelevanceMode::Product).unwrap(),
            1.0
        );
        assert_eq!(
            document_relevance(0.0, 0.9, RelevanceMode::Product).unwrap(),
            0.0
        );
        let blended = document_relevance(0.8, 0.4, RelevanceMode::Blend { alpha: 0.25 }).unwrap();
        assert!((blended - (0.25 * 0.8 + 0.75 * 0.4)).abs() < 1e-12);
    }

    #[test]
    fn document_relevance_rejects_out_of_range() {
        assert!(document_relevance(1.5, 0.5, RelevanceMode::Product).is_err());
        assert!(document_relevance(0.5, -0.1, RelevanceMode::Product).is_err());
        assert!(document_relevance(0.5, 0.5, RelevanceMode::Blend { alpha: 2.0 }).is_err());
    }

    fn tiny_index(ont: &Ontology) -> Index {
        let fragment = ont.select_fragment(&["jazz", "music"]).unwrap().fragment;
        let exact = IndexRecord {
            doc_id: "d1".into(),
            sim: 0.9,
            matches: vec![
                m("jazz", ElementKind::Class, 0.4, 1.0),
                m("music", ElementKind::Class, 0.4, 1.0),
            ],
            fragment,
        };
        let blank = record("d2", 1.0, vec![]);
        Index {
            records: vec![exact, blank],
            params: IndexParams::default(),
            ontology_hash: String::new(),
            corpus_hash: String::new(),
        }
    }

    #[test]
    fn rank_documents_fragment_equal_to_context_scores_record_sim() {
        let ont = chain(&["jazz", "music"]);
        let ctx =
            AbstractContext::new(&ont, vec!["jazz".into(), "music".into()], Vec::new()).unwrap();
        let index = tiny_index(&ont);
        let results = rank_documents(
            &index,
            &ont,
            &ctx,
            RankMethod::Graph,
            &RankOptions::default(),
        )
        .unwrap();
        assert_eq!(results[0].doc_id, "d1");
        assert_eq!(results[0].s, 1.0);
        assert_eq!(results[0].relevance, 0.9);
        assert_eq!(results[1].relevance, 0.0);
    }

    #[test]
    fn rank_documents_is_a_sorted_permutation() {
        let ont = chain(&["jazz", "music"]);
        let ctx = AbstractContext::new(&ont, vec!["jazz".into()], Vec::new()).unwrap();
        let index = tiny_index(&ont);
        for method in [RankMethod::Graph, RankMethod::Weight] {
            let results =
                rank_documents(&index, &ont, &ctx, method, &RankOptions::default()).unwrap();
            let mut ids: Vec<&str> = results.iter().map(|r| r.doc_id.as_str()).collect();
            ids.sort_unstable();
            assert_eq!(ids, vec!["d1", "d2"]);
            assert!(results.windows(2).all(|w| w[0].relevance >= w[1].relevance));
        }
    }

    #[test]
    fn rank_documents_breaks_ties_by_doc_id() {
        let ont = chain(&["jazz", "music"]);
        let ctx = AbstractContext::new(&ont, vec!["jazz".into()], Vec::new()).unwrap();
        let index = Index {
            records: vec![record("dz", 1.0, vec![]), record("da", 1.0, vec![])],
            params: IndexParams::default(),
            ontology_hash: String::new(),
            corpus_hash: String::new(),
        };
        let results = rank_documents(
            &index,
            &ont,
            &ctx,
            RankMethod::Weight,
            &RankOptions::default(),
        )
        .unwrap();
        assert_eq!(results[0].doc_id, "da");
        assert_eq!(results[1].doc_id, "dz");
    }

    #[test]
    fn rank_documents_rejects_bad_theta() {
        let ont = chain(&["jazz"]);
        let ctx = AbstractContext::new(&ont, vec!["jazz".into()], Vec::new()).unwrap();
        let index = tiny_index(&chain(&["jazz", "music"]));
        let options = RankOptions {
            theta: 1.5,
            ..RankOptions::default()
        };
        assert!(rank_documents(&index, &ont, &ctx, RankMethod::Graph, &options).is_err());
    }

    /// Random small graphs with unique single-letter names.
    fn arb_graph() -> impl Strategy<Value = ClassGraph> {
        (2usize..7, proptest::collection::vec(any::<bool>(), 21)).prop_map(|(n, mask)| {
            let names = ["ga", "gb", "gc", "gd", "ge", "gf", "gg"];
            let nodes: Vec<String> = names[..n].iter().map(|s| s.to_string()).collect();
            let mut edges = Vec::new();
            let mut bit = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if mask[bit % mask.len()] {
                        edges.push((nodes[i].clone(), nodes[j].clone()));
                    }
                    bit += 1;
                }
            }
            ClassGraph::new(nodes, edges)
        })
    }

    proptest! {
        #[test]
        fn graph_similarity_self_is_one(g in arb_graph()) {
            prop_assert_eq!(graph_similarity(&g, &g, 0.6), 1.0);
        }

        #[test]
        fn graph_similarity_is_symmetric(g1 in arb_graph(), g2 in arb_graph()) {
            let a = graph_similarity(&g1, &g2, 0.6);
            let b = graph_similarity(&g2, &g1, 0.6);
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }

        #[test]
        fn graph_similarity_stays_in_range(g1 in arb_graph(), g2 in arb_graph(), theta in 0.0f64..=1.0) {
            let s = graph_similarity(&g1, &g2, theta);
            prop_assert!((0.0..=1.0).contains(&s), "{s}");
        }

        #[test]
        fn cosine_similarity_scale_invariant(
            u in proptest::collection::vec(0.0f64..10.0, 1..6),
            scale in 0.001f64..100.0,
        ) {
            let v: Vec<f64> = u.iter().map(|x| x + 0.25).collect();
            let scaled: Vec<f64> = u.iter().map(|x| x * scale).collect();
            let a = cosine_similarity(&u, &v);
            let b = cosine_similarity(&scaled, &v);
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }
}
