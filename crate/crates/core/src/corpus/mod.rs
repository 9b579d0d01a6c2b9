//! Corpus ingestion, tokenization, vectorization and one-vs-rest task
//! construction.

mod loader;
mod synth;
mod tasks;
mod text;

use std::collections::BTreeSet;

pub use loader::{load_corpus, CorpusFormat};
pub use synth::{synth_generate, SynthParams};
pub use tasks::{make_tasks, split, split_indices, BinaryTask, SplitScheme, TaskSplit};
pub use text::{tokenize, vectorize, Stopwords, Vocabulary, DEFAULT_MIN_COUNT};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: String,
}

/// An immutable, id-ordered collection of labeled documents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
}

impl Corpus {
    /// Sorts by id and rejects duplicate ids and empty labels.
    pub fn new(mut documents: Vec<Document>) -> crate::Result<Self> {
        documents.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = documents.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(crate::Error::DuplicateId(w[0].id.clone()));
        }
        if let Some(d) = documents.iter().find(|d| d.label.is_empty()) {
            return Err(crate::Error::EmptyLabel(d.id.clone()));
        }
        Ok(Self { documents })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Distinct category names in lexicographic order.
    pub fn categories(&self) -> Vec<String> {
        self.documents
            .iter()
            .map(|d| d.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Keeps the first `n` documents in id order.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            documents: self.documents.iter().take(n).cloned().collect(),
        }
    }

    pub fn tokenize(&self, stopwords: &Stopwords) -> TokenizedCorpus {
        TokenizedCorpus {
            tokens: self
                .documents
                .iter()
                .map(|d| tokenize(&d.text, stopwords))
                .collect(),
            labels: self.documents.iter().map(|d| d.label.clone()).collect(),
        }
    }

    /// Serializes in the JSONL ingestion format, one document per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for d in &self.documents {
            let line = serde_json::json!({ "id": d.id, "text": d.text, "label": d.label });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

/// Token lists and labels of a corpus, index-aligned with its documents.
#[derive(Debug, Clone)]
pub struct TokenizedCorpus {
    pub tokens: Vec<Vec<String>>,
    pub labels: Vec<String>,
}

impl TokenizedCorpus {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn categories(&self) -> Vec<String> {
        self.labels
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, label: &str) -> Document {
        Document {
            id: id.into(),
            text: String::new(),
            label: label.into(),
        }
    }

    #[test]
    fn sorted_by_id() {
        let c = Corpus::new(vec![doc("b", "x"), doc("a", "y")]).unwrap();
        assert_eq!(c.documents()[0].id, "a");
        assert_eq!(c.categories(), vec!["x", "y"]);
    }

    #[test]
    fn duplicate_id_rejected() {
        let err = Corpus::new(vec![doc("a", "x"), doc("a", "y")]).unwrap_err();
        assert!(err.to_string().contains("duplicate id"));
    }

    #[test]
    fn empty_label_rejected() {
        assert!(matches!(
            Corpus::new(vec![doc("a", "")]),
            Err(crate::Error::EmptyLabel(_))
        ));
    }
}
