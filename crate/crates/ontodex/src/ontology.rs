//! The application ontology: classes with attributes, typed relations, and
//! the graph algorithms over them — deterministic shortest paths and
//! fragment selection.
//!
//! All class and attribute names are normalized on construction (see
//! [`crate::text::normalize`]), so lookups and comparisons are
//! case/whitespace-insensitive. Relations carry a kind but are traversed as
//! undirected, unweighted edges: the kind matters to consumers as metadata,
//! not to the path metric.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::normalize;

/// The three relation kinds distinguished by the ontology format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Associative,
    Taxonomical,
    Hierarchical,
}

/// A typed, directed relation between two classes. Traversal ignores the
/// direction; it is preserved for round-tripping and display.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub from: String,
    pub to: String,
    pub kind: RelationKind,
}

impl Relation {
    pub fn new(from: impl Into<String>, to: impl Into<String>, kind: RelationKind) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            kind,
        }
    }

    /// True when the relation connects `a` and `b` in either direction.
    pub fn connects(&self, a: &str, b: &str) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }
}

/// An attribute of a class. The owning class is the map entry it lives in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyAttribute {
    pub name: String,
    pub description: String,
}

/// A class with its attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyClass {
    pub name: String,
    pub description: String,
    pub attributes: Vec<OntologyAttribute>,
}

/// Whether an ontology element is a class or an attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Class,
    Attribute,
}

/// A reference to one ontology element: a class, or an attribute together
/// with its owning class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ElementRef {
    Class { name: String },
    Attribute { owner: String, name: String },
}

impl ElementRef {
    pub fn name(&self) -> &str {
        match self {
            ElementRef::Class { name } => name,
            ElementRef::Attribute { name, .. } => name,
        }
    }

    pub fn kind(&self) -> ElementKind {
        match self {
            ElementRef::Class { .. } => ElementKind::Class,
            ElementRef::Attribute { .. } => ElementKind::Attribute,
        }
    }

    /// The class this element belongs to: itself for a class, the owner for
    /// an attribute.
    pub fn owner_class(&self) -> &str {
        match self {
            ElementRef::Class { name } => name,
            ElementRef::Attribute { owner, .. } => owner,
        }
    }
}

#[derive(Deserialize)]
struct OntologyFile {
    #[serde(default)]
    classes: Vec<ClassFile>,
    #[serde(default)]
    relations: Vec<RelationFile>,
}

#[derive(Deserialize)]
struct ClassFile {
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    attributes: Vec<AttributeFile>,
}

#[derive(Deserialize)]
struct AttributeFile {
    name: String,
    #[serde(default)]
    description: String,
}

#[derive(Deserialize)]
struct RelationFile {
    from: String,
    to: String,
    kind: RelationKind,
}

/// The application ontology: a validated set of classes and relations.
///
/// Immutable after construction; all operations are read-only and safe to
/// call concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct Ontology {
    classes: BTreeMap<String, OntologyClass>,
    relations: BTreeSet<Relation>,
    adjacency: BTreeMap<String, BTreeSet<String>>,
}

/// Parses and validates an ontology from its JSON representation.
pub fn load_ontology(mut reader: impl Read) -> Result<Ontology> {
    let mut raw = String::new();
    reader.read_to_string(&mut raw)?;
    let file: OntologyFile =
        serde_json::from_str(&raw).map_err(|e| Error::parse_at(e.line(), e))?;

    let classes = file
        .classes
        .into_iter()
        .map(|c| OntologyClass {
            name: c.name,
            description: c.description,
            attributes: c
                .attributes
                .into_iter()
                .map(|a| OntologyAttribute {
                    name: a.name,
                    description: a.description,
                })
                .collect(),
        })
        .collect();
    let relations = file
        .relations
        .into_iter()
        .map(|r| Relation::new(r.from, r.to, r.kind))
        .collect();
    Ontology::new(classes, relations)
}

impl Ontology {
    /// Validates and normalizes the given classes and relations.
    pub fn new(classes: Vec<OntologyClass>, relations: Vec<Relation>) -> Result<Self> {
        let mut class_map = BTreeMap::new();
        for mut class in classes {
            class.name = normalize(&class.name);
            if class.name.is_empty() {
                return Err(Error::Validation(
                    "class name is empty after normalization".into(),
                ));
            }
            let mut attr_names = BTreeSet::new();
            for attr in &mut class.attributes {
                attr.name = normalize(&attr.name);
                if attr.name.is_empty() {
                    return Err(Error::Validation(format!(
                        "class '{}' has an attribute with an empty name",
                        class.name
                    )));
                }
                if !attr_names.insert(attr.name.clone()) {
                    return Err(Error::Validation(format!(
                        "class '{}' has duplicate attribute '{}'",
                        class.name, attr.name
                    )));
                }
            }
            let name = class.name.clone();
            if class_map.insert(name.clone(), class).is_some() {
                return Err(Error::Validation(format!("duplicate class name: {name}")));
            }
        }

        let mut relation_set = BTreeSet::new();
        let mut adjacency: BTreeMap<String, BTreeSet<String>> = class_map
            .keys()
            .map(|name| (name.clone(), BTreeSet::new()))
            .collect();
        for mut relation in relations {
            relation.from = normalize(&relation.from);
            relation.to = normalize(&relation.to);
            for endpoint in [&relation.from, &relation.to] {
                if !class_map.contains_key(endpoint) {
                    return Err(Error::Validation(format!(
                        "relation endpoint '{endpoint}' is not a class"
                    )));
                }
            }
            if relation.from == relation.to {
                return Err(Error::Validation(format!(
                    "relation from '{}' to itself",
                    relation.from
                )));
            }
            adjacency
                .get_mut(&relation.from)
                .unwrap()
                .insert(relation.to.clone());
            adjacency
                .get_mut(&relation.to)
                .unwrap()
                .insert(relation.from.clone());
            relation_set.insert(relation);
        }

        Ok(Self {
            classes: class_map,
            relations: relation_set,
            adjacency,
        })
    }

    pub fn classes(&self) -> impl Iterator<Item = &OntologyClass> {
        self.classes.values()
    }

    pub fn class_names(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    /// Looks a class up by (unnormalized) name.
    pub fn class(&self, name: &str) -> Option<&OntologyClass> {
        self.classes.get(&normalize(name))
    }

    pub fn contains_class(&self, name: &str) -> bool {
        self.class(name).is_some()
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.iter()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    /// All elements — every class, then every attribute — in deterministic
    /// order. Names repeat if distinct elements share one.
    pub fn elements(&self) -> impl Iterator<Item = ElementRef> + '_ {
        let classes = self
            .classes
            .keys()
            .map(|name| ElementRef::Class { name: name.clone() });
        let attributes = self.classes.values().flat_map(|class| {
            class.attributes.iter().map(|attr| ElementRef::Attribute {
                owner: class.name.clone(),
                name: attr.name.clone(),
            })
        });
        classes.chain(attributes)
    }

    /// Size of the element name multiset: class count plus attribute count.
    pub fn element_count(&self) -> usize {
        self.classes.len()
            + self
                .classes
                .values()
                .map(|c| c.attributes.len())
                .sum::<usize>()
    }

    /// The description of the element, if the element exists.
    pub fn element_description(&self, element: &ElementRef) -> Option<&str> {
        match element {
            ElementRef::Class { name } => self.classes.get(name).map(|c| c.description.as_str()),
            ElementRef::Attribute { owner, name } => self
                .classes
                .get(owner)?
                .attributes
                .iter()
                .find(|a| &a.name == name)
                .map(|a| a.description.as_str()),
        }
    }

    /// Classes adjacent to `name` under any relation kind, either direction.
    pub fn neighbors(&self, name: &str) -> impl Iterator<Item = &str> {
        self.adjacency
            .get(name)
            .into_iter()
            .flat_map(|set| set.iter().map(String::as_str))
    }

    fn require_class(&self, name: &str) -> Result<String> {
        let normalized = normalize(name);
        if self.classes.contains_key(&normalized) {
            Ok(normalized)
        } else {
            Err(Error::UnknownClass(name.to_string()))
        }
    }

    /// Hop distances from every class in `sources` to every reachable class.
    pub(crate) fn distances_from(&self, sources: &BTreeSet<String>) -> BTreeMap<String, usize> {
        let mut dist: BTreeMap<String, usize> = sources.iter().map(|s| (s.clone(), 0)).collect();
        let mut queue: VecDeque<String> = sources.iter().cloned().collect();
        while let Some(current) = queue.pop_front() {
            let d = dist[&current];
            for next in self.neighbors(&current) {
                if !dist.contains_key(next) {
                    dist.insert(next.to_string(), d + 1);
                    queue.push_back(next.to_string());
                }
            }
        }
        dist
    }

    /// A minimum-hop path from `a` to `b`, every relation treated as an
    /// undirected edge. Among equal-length paths the lexicographically
    /// smallest sequence of normalized class names wins, so the result is
    /// deterministic. `None` when the classes are disconnected.
    pub fn shortest_path(&self, a: &str, b: &str) -> Result<Option<Vec<String>>> {
        let a = self.require_class(a)?;
        let b = self.require_class(b)?;
        if a == b {
            return Ok(Some(vec![a]));
        }

        let from_a = self.distances_from(&BTreeSet::from([a.clone()]));
        let Some(&total) = from_a.get(&b) else {
            return Ok(None);
        };
        let to_b = self.distances_from(&BTreeSet::from([b.clone()]));

        // Walk greedily: at each step take the smallest neighbor that still
        // lies on some shortest a..b path. Greedy prefix minimization yields
        // the lexicographically smallest full sequence.
        let mut path = vec![a.clone()];
        let mut current = a;
        while current != b {
            let walked = from_a[&current];
            let next = self
                .neighbors(&current)
                .find(|n| {
                    from_a.get(*n) == Some(&(walked + 1))
                        && to_b.get(*n) == Some(&(total - walked - 1))
                })
                .expect("a shortest path continues from every on-path node")
                .to_string();
            path.push(next.clone());
            current = next;
        }
        Ok(Some(path))
    }
}

/// A connected selection of the ontology: the classes of interest plus the
/// relations linking them. Attributes ride along with their classes and are
/// enumerated through [`OntologyFragment::attributes`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyFragment {
    pub classes: BTreeSet<String>,
    pub relations: BTreeSet<Relation>,
}

impl OntologyFragment {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Attributes of the included classes, with their owning class.
    pub fn attributes<'a>(
        &'a self,
        ont: &'a Ontology,
    ) -> impl Iterator<Item = (&'a str, &'a OntologyAttribute)> {
        self.classes
            .iter()
            .filter_map(|name| ont.classes.get(name))
            .flat_map(|class| {
                class
                    .attributes
                    .iter()
                    .map(move |attr| (class.name.as_str(), attr))
            })
    }
}

/// Result of fragment selection: the fragment itself plus the seed pairs
/// that turned out to be disconnected. Both classes of an unreachable pair
/// stay in the fragment; dropping them silently would lose data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentSelection {
    pub fragment: OntologyFragment,
    pub unreachable: Vec<(String, String)>,
}

impl Ontology {
    /// Selects the fragment spanned by `seed`: the seed classes, every class
    /// on the selected shortest path between each seed pair, the relations
    /// along those paths, and any direct relations among seed classes.
    ///
    /// For every reachable seed pair the distance inside the fragment equals
    /// the distance in the full ontology, because a full shortest path per
    /// pair is included.
    pub fn select_fragment<S: AsRef<str>>(&self, seed: &[S]) -> Result<FragmentSelection> {
        if seed.is_empty() {
            return Err(Error::Validation("fragment seed is empty".into()));
        }
        let seeds: BTreeSet<String> = seed
            .iter()
            .map(|name| self.require_class(name.as_ref()))
            .collect::<Result<_>>()?;

        let mut classes = seeds.clone();
        let mut relations = BTreeSet::new();
        let mut unreachable = Vec::new();

        let ordered: Vec<&String> = seeds.iter().collect();
        for (i, a) in ordered.iter().enumerate() {
            for b in &ordered[i + 1..] {
                match self.shortest_path(a, b)? {
                    None => unreachable.push(((*a).clone(), (*b).clone())),
                    Some(path) => {
                        classes.extend(path.iter().cloned());
                        for step in path.windows(2) {
                            relations.extend(
                                self.relations
                                    .iter()
                                    .filter(|r| r.connects(&step[0], &step[1]))
                                    .cloned(),
                            );
                        }
                    }
                }
            }
        }
        // Direct relations among seed classes, whether or not a path used them.
        relations.extend(
            self.relations
                .iter()
                .filter(|r| seeds.contains(&r.from) && seeds.contains(&r.to))
                .cloned(),
        );

        Ok(FragmentSelection {
            fragment: OntologyFragment { classes, relations },
            unreachable,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(name: &str) -> OntologyClass {
        OntologyClass {
            name: name.into(),
            description: String::new(),
            attributes: Vec::new(),
        }
    }

    fn chain_abc() -> Ontology {
        Ontology::new(
            vec![class("A"), class("B"), class("C")],
            vec![
                Relation::new("A", "B", RelationKind::Taxonomical),
                Relation::new("B", "C", RelationKind::Taxonomical),
            ],
        )
        .unwrap()
    }

    #[test]
    fn load_two_class_file() {
        let src = br#"{
            "classes": [
                {"name": "A", "description": "", "attributes": []},
                {"name": "B", "description": "", "attributes": [{"name": "x", "description": ""}]}
            ],
            "relations": [{"from": "A", "to": "B", "kind": "taxonomical"}]
        }"#;
        let ont = load_ontology(&src[..]).unwrap();
        assert_eq!(ont.class_count(), 2);
        assert_eq!(ont.relation_count(), 1);
        assert_eq!(ont.element_count(), 3);
    }

    #[test]
    fn load_rejects_dangling_relation() {
        let src = br#"{
            "classes": [{"name": "A"}],
            "relations": [{"from": "A", "to": "Z", "kind": "associative"}]
        }"#;
        let err = load_ontology(&src[..]).unwrap_err();
        assert!(err.to_string().contains("'z'"), "{err}");
    }

    #[test]
    fn load_accepts_empty_ontology() {
        let ont = load_ontology(&br#"{"classes": [], "relations": []}"#[..]).unwrap();
        assert_eq!(ont.class_count(), 0);
        assert_eq!(ont.element_count(), 0);
    }

    #[test]
    fn load_rejects_duplicate_class_names() {
        let src = br#"{"classes": [{"name": "Jazz"}, {"name": "jazz "}], "relations": []}"#;
        let err = load_ontology(&src[..]).unwrap_err();
        assert!(err.to_string().contains("duplicate class"), "{err}");
    }

    #[test]
    fn load_rejects_malformed_json() {
        let err = load_ontology(&b"{\"classes\": ["[..]).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn shortest_path_chain() {
        let ont = chain_abc();
        let path = ont.shortest_path("A", "C").unwrap().unwrap();
        assert_eq!(path, vec!["a", "b", "c"]);
    }

    #[test]
    fn shortest_path_identity() {
        let ont = chain_abc();
        assert_eq!(ont.shortest_path("A", "A").unwrap().unwrap(), vec!["a"]);
    }

    #[test]
    fn shortest_path_diamond_breaks_ties_lexicographically() {
        // A-B-D and A-C-D are both length 2; the b route sorts first.
        let ont = Ontology::new(
            vec![class("A"), class("B"), class("C"), class("D")],
            vec![
                Relation::new("A", "B", RelationKind::Associative),
                Relation::new("A", "C", RelationKind::Associative),
                Relation::new("B", "D", RelationKind::Associative),
                Relation::new("C", "D", RelationKind::Associative),
            ],
        )
        .unwrap();
        let path = ont.shortest_path("A", "D").unwrap().unwrap();
        assert_eq!(path, vec!["a", "b", "d"]);
        // Brute-force check: enumerate both candidates, pick the smaller.
        let candidates = [vec!["a", "b", "d"], vec!["a", "c", "d"]];
        assert_eq!(path, *candidates.iter().min().unwrap());
    }

    #[test]
    fn shortest_path_unknown_class() {
        let ont = chain_abc();
        assert!(matches!(
            ont.shortest_path("A", "Z"),
            Err(Error::UnknownClass(_))
        ));
    }

    #[test]
    fn shortest_path_unreachable() {
        let ont = Ontology::new(vec![class("A"), class("B")], vec![]).unwrap();
        assert_eq!(ont.shortest_path("A", "B").unwrap(), None);
    }

    #[test]
    fn path_length_symmetric() {
        let ont = chain_abc();
        let ab = ont.shortest_path("A", "C").unwrap().unwrap();
        let ba = ont.shortest_path("C", "A").unwrap().unwrap();
        assert_eq!(ab.len(), ba.len());
    }

    #[test]
    fn fragment_single_seed() {
        let ont = chain_abc();
        let sel = ont.select_fragment(&["A"]).unwrap();
        assert_eq!(sel.fragment.classes, BTreeSet::from(["a".to_string()]));
        assert!(sel.fragment.relations.is_empty());
        assert!(sel.unreachable.is_empty());
    }

    #[test]
    fn fragment_chain_includes_intermediate() {
        let ont = chain_abc();
        let sel = ont.select_fragment(&["A", "C"]).unwrap();
        let classes: Vec<&str> = sel.fragment.classes.iter().map(String::as_str).collect();
        assert_eq!(classes, vec!["a", "b", "c"]);
        assert_eq!(sel.fragment.relations.len(), 2);
        assert!(sel.unreachable.is_empty());
    }

    #[test]
    fn fragment_reports_unreachable_pairs() {
        let ont = Ontology::new(vec![class("A"), class("D")], vec![]).unwrap();
        let sel = ont.select_fragment(&["A", "D"]).unwrap();
        assert_eq!(
            sel.fragment.classes,
            BTreeSet::from(["a".to_string(), "d".to_string()])
        );
        assert_eq!(sel.unreachable, vec![("a".to_string(), "d".to_string())]);
    }

    #[test]
    fn fragment_rejects_unknown_seed() {
        let ont = chain_abc();
        assert!(matches!(
            ont.select_fragment(&["A", "Nope"]),
            Err(Error::UnknownClass(_))
        ));
    }

    #[test]
    fn fragment_rejects_empty_seed() {
        let ont = chain_abc();
        assert!(ont.select_fragment::<&str>(&[]).is_err());
    }

    #[test]
    fn fragment_keeps_seed_to_seed_relations() {
        // Triangle: A-B, B-C, A-C. Seeds {A, C}: the direct edge is the
        // path; B stays out.
        let ont = Ontology::new(
            vec![class("A"), class("B"), class("C")],
            vec![
                Relation::new("A", "B", RelationKind::Associative),
                Relation::new("B", "C", RelationKind::Associative),
                Relation::new("A", "C", RelationKind::Hierarchical),
            ],
        )
        .unwrap();
        let sel = ont.select_fragment(&["A", "C"]).unwrap();
        assert_eq!(
            sel.fragment.classes,
            BTreeSet::from(["a".to_string(), "c".to_string()])
        );
        assert_eq!(sel.fragment.relations.len(), 1);
        assert_eq!(
            sel.fragment.relations.iter().next().unwrap().kind,
            RelationKind::Hierarchical
        );
    }

    #[test]
    fn fragment_selection_is_deterministic() {
        let ont = chain_abc();
        let a = ont.select_fragment(&["C", "A"]).unwrap();
        let b = ont.select_fragment(&["A", "C"]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn normalization_applies_to_lookups() {
        let ont = Ontology::new(vec![class("Jazz_Music")], vec![]).unwrap();
        assert!(ont.contains_class("jazz music"));
        assert!(ont.contains_class(" JAZZ_MUSIC "));
    }
}
