//! String-level primitives: Levenshtein distance, name normalization,
//! tokenization, and the description-overlap coefficient.
//!
//! Every name that enters the matching pipeline goes through [`normalize`]
//! first, so all comparisons downstream operate on case-folded,
//! whitespace-collapsed strings.

use std::collections::BTreeSet;
use std::io::BufRead;

use crate::error::Result;

/// Minimal built-in English stop-word list used when no file is supplied.
pub const DEFAULT_STOP_WORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "but", "by", "for", "from", "had", "has", "have",
    "he", "her", "his", "i", "in", "is", "it", "its", "not", "of", "on", "or", "she", "that",
    "the", "their", "they", "this", "to", "was", "were", "will", "with", "you",
];

/// Case-folds, trims, collapses whitespace runs, and maps underscores to
/// spaces. Wiki titles use underscores where prose uses spaces, so both
/// spellings normalize to the same string.
pub fn normalize(s: &str) -> String {
    s.to_lowercase()
        .replace('_', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Minimum number of single-character insertions, removals, and replacements
/// transforming `a` into `b`, computed over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }

    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = if ca == cb { 0 } else { 1 };
            let next = (prev + cost).min(row[j] + 1).min(row[j + 1] + 1);
            prev = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

/// Levenshtein distance with an exclusive upper bound: `Some(d)` when the
/// distance `d` is strictly below `limit`, `None` otherwise.
///
/// Equivalent to `levenshtein(a, b) < limit` but abandons the computation as
/// soon as every cell of the current row meets the bound, which is what makes
/// scanning a large candidate set against a large name set affordable.
pub fn levenshtein_within(a: &str, b: &str, limit: usize) -> Option<usize> {
    let la = a.chars().count();
    let lb = b.chars().count();
    // The distance is at least the length difference.
    if la.abs_diff(lb) >= limit {
        return None;
    }
    if la == 0 || lb == 0 {
        let d = la.max(lb);
        return (d < limit).then_some(d);
    }

    let bc: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=bc.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        let mut row_min = row[0];
        for (j, cb) in bc.iter().enumerate() {
            let cost = if ca == *cb { 0 } else { 1 };
            let next = (prev + cost).min(row[j] + 1).min(row[j + 1] + 1);
            prev = row[j + 1];
            row[j + 1] = next;
            row_min = row_min.min(next);
        }
        if row_min >= limit {
            return None;
        }
    }
    let d = row[bc.len()];
    (d < limit).then_some(d)
}

/// Normalized name similarity in `[0, 1]`:
/// `1 - levenshtein(a, b) / max(|a|, |b|)`, and `1` when both are empty.
///
/// Callers are expected to pass already-normalized strings.
pub fn name_similarity(a: &str, b: &str) -> f64 {
    let la = a.chars().count();
    let lb = b.chars().count();
    let longest = la.max(lb);
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

/// Lowercased tokens split on any non-alphanumeric character, empties dropped.
/// Returns the sequence (with duplicates) for frequency counting.
pub fn tokens(s: &str) -> Vec<String> {
    s.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Deduplicated token set of `s`.
pub fn token_set(s: &str) -> BTreeSet<String> {
    tokens(s).into_iter().collect()
}

/// Number of (possibly overlapping) occurrences of the token sequence
/// `needle` inside `stream`. Empty needles never occur.
pub fn count_occurrences(stream: &[String], needle: &[String]) -> usize {
    if needle.is_empty() || stream.len() < needle.len() {
        return 0;
    }
    stream
        .windows(needle.len())
        .filter(|w| *w == needle)
        .count()
}

/// A set of normalized stop words excluded from description comparison.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWordList {
    words: BTreeSet<String>,
}

impl StopWordList {
    /// A list that filters nothing.
    pub fn empty() -> Self {
        Self::default()
    }

    /// The built-in minimal English list ([`DEFAULT_STOP_WORDS`]).
    pub fn default_english() -> Self {
        Self {
            words: DEFAULT_STOP_WORDS.iter().map(|w| w.to_string()).collect(),
        }
    }

    /// Reads one word per line; lines are normalized and blank lines skipped.
    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut words = BTreeSet::new();
        for line in reader.lines() {
            let word = normalize(&line?);
            if !word.is_empty() {
                words.insert(word);
            }
        }
        Ok(Self { words })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    fn filtered(&self, s: &str) -> BTreeSet<String> {
        token_set(s)
            .into_iter()
            .filter(|t| !self.contains(t))
            .collect()
    }
}

/// Jaccard coefficient between the stop-word-filtered token sets of a
/// description and a document body; `0` when either filtered set is empty.
pub fn description_overlap(description: &str, doc_text: &str, stops: &StopWordList) -> f64 {
    let a = stops.filtered(description);
    let b = stops.filtered(doc_text);
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let intersection = a.intersection(&b).count();
    let union = a.union(&b).count();
    intersection as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force edit search, independent of the DP implementation.
    fn levenshtein_oracle(a: &[char], b: &[char]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((ca, ra)), Some((cb, rb))) => {
                if ca == cb {
                    levenshtein_oracle(ra, rb)
                } else {
                    let replace = levenshtein_oracle(ra, rb);
                    let insert = levenshtein_oracle(a, rb);
                    let remove = levenshtein_oracle(ra, b);
                    1 + replace.min(insert).min(remove)
                }
            }
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("Jazz_Music "), "jazz music");
        assert_eq!(normalize("ABC"), "abc");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("  Many   Spaces\tHere "), "many spaces here");
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
        // Frozen from the recursive oracle.
        assert_eq!(
            levenshtein_oracle(
                &"kitten".chars().collect::<Vec<_>>(),
                &"sitting".chars().collect::<Vec<_>>()
            ),
            3
        );
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }

    #[test]
    fn levenshtein_unicode_scalars() {
        // One replacement, not byte-level edits.
        assert_eq!(levenshtein("caté", "cate"), 1);
        assert_eq!(levenshtein("über", "uber"), 1);
    }

    #[test]
    fn bounded_matches_full_exhaustively() {
        let strings = ab_strings(4);
        for a in &strings {
            for b in &strings {
                let d = levenshtein(a, b);
                for limit in 0..6 {
                    let expect = (d < limit).then_some(d);
                    assert_eq!(
                        levenshtein_within(a, b, limit),
                        expect,
                        "a={a:?} b={b:?} limit={limit}"
                    );
                }
            }
        }
    }

    fn ab_strings(max_len: usize) -> Vec<String> {
        let mut out = vec![String::new()];
        let mut frontier = vec![String::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for s in &frontier {
                for c in ['a', 'b'] {
                    let mut t = s.clone();
                    t.push(c);
                    next.push(t);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn name_similarity_examples() {
        assert_eq!(name_similarity("alpha", "alpha"), 1.0);
        assert_eq!(name_similarity("ab", "cd"), 0.0);
        assert_eq!(name_similarity("jazz", "jizz"), 0.75);
        assert_eq!(name_similarity("", ""), 1.0);
    }

    #[test]
    fn tokens_split_on_non_alphanumeric() {
        assert_eq!(tokens("Hans. .PETER!"), vec!["hans", "peter"]);
        assert_eq!(tokens("a_b-c"), vec!["a", "b", "c"]);
        assert!(tokens("...").is_empty());
    }

    #[test]
    fn count_occurrences_sliding_window() {
        let stream = tokens("jazz music and jazz music and jazz");
        assert_eq!(count_occurrences(&stream, &tokens("jazz")), 3);
        assert_eq!(count_occurrences(&stream, &tokens("jazz music")), 2);
        assert_eq!(count_occurrences(&stream, &tokens("music jazz")), 0);
        assert_eq!(count_occurrences(&stream, &[]), 0);
    }

    #[test]
    fn description_overlap_examples() {
        let stops = StopWordList::empty();
        assert_eq!(description_overlap("red fish", "fish red", &stops), 1.0);
        assert_eq!(description_overlap("red fish", "blue bird", &stops), 0.0);
        // Token sets {a, b} and {b, c}: 1 shared of 3 total.
        let third = description_overlap("aa bb", "bb cc", &stops);
        assert!((third - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn description_overlap_empty_filtered_set_is_zero() {
        let stops = StopWordList::default_english();
        assert_eq!(
            description_overlap("the of and", "anything here", &stops),
            0.0
        );
        assert_eq!(description_overlap("", "anything here", &stops), 0.0);
        assert_eq!(description_overlap("anything here", "", &stops), 0.0);
    }

    #[test]
    fn stop_word_list_from_reader_normalizes() {
        let list = StopWordList::from_reader("The\n\n  AND \nof\n".as_bytes()).unwrap();
        assert_eq!(list.len(), 3);
        assert!(list.contains("the"));
        assert!(list.contains("and"));
        assert!(!list.contains("AND"));
    }

    proptest! {
        #[test]
        fn levenshtein_is_a_metric(a in "[ab]{0,6}", b in "[ab]{0,6}", c in "[ab]{0,6}") {
            let dab = levenshtein(&a, &b);
            let dba = levenshtein(&b, &a);
            prop_assert_eq!(dab, dba);
            prop_assert_eq!(dab == 0, a == b);
            let dac = levenshtein(&a, &c);
            let dcb = levenshtein(&c, &b);
            prop_assert!(dab <= dac + dcb);
        }

        #[test]
        fn bounded_agrees_with_full(a in "[a-d]{0,8}", b in "[a-d]{0,8}", limit in 0usize..10) {
            let d = levenshtein(&a, &b);
            prop_assert_eq!(levenshtein_within(&a, &b, limit), (d < limit).then_some(d));
        }

        #[test]
        fn name_similarity_bounds(a in "[a-c]{0,6}", b in "[a-c]{0,6}") {
            let s = name_similarity(&a, &b);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(s, name_similarity(&b, &a));
            prop_assert_eq!(s == 1.0, a == b);
        }

        #[test]
        fn overlap_symmetric_and_bounded(a in "[a-c ]{0,16}", b in "[a-c ]{0,16}") {
            let stops = StopWordList::empty();
            let ab = description_overlap(&a, &b, &stops);
            let ba = description_overlap(&b, &a, &stops);
            prop_assert_eq!(ab, ba);
            prop_assert!((0.0..=1.0).contains(&ab));
            // Invariant under duplication: sets ignore token multiplicity.
            let doubled = format!("{a} {a}");
            prop_assert_eq!(description_overlap(&doubled, &b, &stops), ab);
        }
    }
}
