use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseVector;

pub const DEFAULT_MIN_COUNT: usize = 3;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// A set of lowercased tokens removed during tokenization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn none() -> Self {
        Self::default()
    }

    /// The bundled 174-entry English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    /// One token per line; blank lines are ignored.
    pub fn parse(content: &str) -> Self {
        Self(
            content
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&content))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

/// Lowercases, splits on every non-alphanumeric character and drops stopwords.
pub fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| !stopwords.contains(t))
        .collect()
}

/// Term to feature-index map. Indices follow lexicographic term order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    index: BTreeMap<String, usize>,
    counts: Vec<usize>,
}

impl Vocabulary {
    /// Keeps every term whose total occurrence count is strictly greater than
    /// `min_count`.
    pub fn build<'a, I, D>(documents: I, min_count: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a D>,
        D: AsRef<[String]> + 'a + ?Sized,
    {
        let mut totals: HashMap<&str, usize> = HashMap::new();
        for doc in documents {
            for token in doc.as_ref() {
                *totals.entry(token.as_str()).or_default() += 1;
            }
        }
        let kept: BTreeMap<&str, usize> = totals
            .into_iter()
            .filter(|&(_, c)| c > min_count)
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary(min_count));
        }
        let counts = kept.values().copied().collect();
        let index = kept
            .into_keys()
            .enumerate()
            .map(|(i, t)| (t.to_string(), i))
            .collect();
        Ok(Self { index, counts })
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Training-corpus occurrence count of the term at `index`.
    pub fn count(&self, index: usize) -> Option<usize> {
        self.counts.get(index).copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, usize)> {
        self.index.iter().map(|(t, &i)| (t.as_str(), i))
    }
}

/// Raw in-vocabulary term counts scaled to unit L2 norm. Out-of-vocabulary
/// tokens are dropped; a document with no known token maps to the empty vector.
pub fn vectorize<T: Scalar>(tokens: &[String], vocab: &Vocabulary) -> SparseVector<T> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for t in tokens {
        if let Some(i) = vocab.get(t) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let pairs = counts.into_iter().map(|(i, c)| (i, T::of_usize(c))).collect();
    SparseVector::from_sorted(pairs)
        .expect("BTreeMap keys are strictly increasing")
        .normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn tokenize_removes_stopwords() {
        let sw: Stopwords = ["the"].into_iter().collect();
        assert_eq!(tokenize("The cat sat", &sw), toks(&["cat", "sat"]));
    }

    #[test]
    fn tokenize_empty() {
        assert!(tokenize("", &Stopwords::none()).is_empty());
    }

    #[test]
    fn tokenize_splits_on_punctuation_and_lowercases() {
        assert_eq!(
            tokenize("e-mail E-MAIL", &Stopwords::none()),
            toks(&["e", "mail", "e", "mail"])
        );
    }

    #[test]
    fn bundled_list_has_174_entries() {
        let sw = Stopwords::english();
        assert_eq!(sw.len(), 174);
        assert!(sw.contains("the") && sw.contains("yourselves"));
    }

    #[test]
    fn min_count_is_strict() {
        let docs = vec![toks(&["keep", "keep", "drop", "drop"]), toks(&["keep", "keep", "drop"])];
        let v = Vocabulary::build(&docs, 3).unwrap();
        assert!(v.contains("keep"));
        assert!(!v.contains("drop"));
        assert_eq!(v.count(0), Some(4));
    }

    #[test]
    fn empty_vocabulary_is_error() {
        let docs = vec![toks(&["a", "b", "c"])];
        let err = Vocabulary::build(&docs, 3).unwrap_err();
        assert!(err.to_string().contains("no terms survive min_count"));
    }

    #[test]
    fn lexicographic_indices() {
        let mut d = vec!["b"; 5];
        d.extend(vec!["a"; 7]);
        let v = Vocabulary::build(&[toks(&d)], 3).unwrap();
        assert_eq!(v.get("a"), Some(0));
        assert_eq!(v.get("b"), Some(1));
    }

    fn vocab_ab() -> Vocabulary {
        Vocabulary::build(&[toks(&["a", "a", "a", "a", "b", "b", "b", "b"])], 3).unwrap()
    }

    #[test]
    fn vectorize_counts_then_normalizes() {
        let v: SparseVector<f64> = vectorize(&toks(&["a", "a", "b"]), &vocab_ab());
        let s5 = 5f64.sqrt();
        assert_eq!(v.entries(), &[(0, 2.0 / s5), (1, 1.0 / s5)]);
    }

    #[test]
    fn vectorize_all_oov_is_empty() {
        let v: SparseVector<f64> = vectorize(&toks(&["zzz", "q"]), &vocab_ab());
        assert!(v.is_empty());
    }

    #[test]
    fn vectorize_single_token_unit() {
        let vocab = Vocabulary::build(&[toks(&["a", "a", "a", "a"])], 3).unwrap();
        let v: SparseVector<f32> = vectorize(&toks(&["a"]), &vocab);
        assert_eq!(v.entries(), &[(0, 1.0)]);
    }

    proptest! {
        #[test]
        fn vectorized_documents_have_unit_norm(
            doc in proptest::collection::vec(0usize..6, 1..40)
        ) {
            let vocab_doc: Vec<String> = (0..6).flat_map(|i| vec![format!("t{i}"); 4]).collect();
            let vocab = Vocabulary::build(&[vocab_doc], 3).unwrap();
            let tokens: Vec<String> = doc.iter().map(|i| format!("t{i}")).collect();
            let a: SparseVector<f64> = vectorize(&tokens, &vocab);
            let b: SparseVector<f64> = vectorize(&tokens, &vocab);
            prop_assert_eq!(&a, &b);
            prop_assert!((a.norm() - 1.0).abs() <= 1e-12);
        }
    }
}
