use std::collections::HashSet;
use std::sync::Arc;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::text::{vectorize, Vocabulary};
use super::TokenizedCorpus;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseVector;
use crate::svm::Label;

/// One-vs-rest binary task. Example `i` is document `i` of the corpus it was
/// built from; the vectors are shared between all tasks of that corpus.
#[derive(Debug, Clone)]
pub struct BinaryTask<T> {
    pub category: String,
    vectors: Arc<[SparseVector<T>]>,
    labels: Vec<Label>,
}

impl<T: Scalar> BinaryTask<T> {
    pub fn new(category: impl Into<String>, vectors: Arc<[SparseVector<T>]>, labels: Vec<Label>) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::LengthMismatch(vectors.len(), labels.len()));
        }
        Ok(Self {
            category: category.into(),
            vectors,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn vectors(&self) -> &[SparseVector<T>] {
        &self.vectors
    }

    pub fn vector(&self, id: usize) -> &SparseVector<T> {
        &self.vectors[id]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, id: usize) -> Label {
        self.labels[id]
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == Label::Positive).count()
    }
}

/// Builds one task per category (category = +1, everything else = -1),
/// ordered by category name. Categories with no positive or no negative
/// example are skipped with a warning.
pub fn make_tasks<T: Scalar>(corpus: &TokenizedCorpus, vocab: &Vocabulary) -> Result<Vec<BinaryTask<T>>> {
    let categories = corpus.categories();
    if categories.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "one-vs-rest tasks need at least 2 categories, found {}",
            categories.len()
        )));
    }
    let vectors: Arc<[SparseVector<T>]> = corpus.tokens.iter().map(|t| vectorize(t, vocab)).collect();
    let mut tasks = Vec::with_capacity(categories.len());
    for category in categories {
        let labels: Vec<Label> = corpus
            .labels
            .iter()
            .map(|l| if *l == category { Label::Positive } else { Label::Negative })
            .collect();
        let pos = labels.iter().filter(|&&l| l == Label::Positive).count();
        if pos == 0 || pos == labels.len() {
            warn!("category {category:?} has no {} examples; task skipped", if pos == 0 { "positive" } else { "negative" });
            continue;
        }
        tasks.push(BinaryTask::new(category, Arc::clone(&vectors), labels)?);
    }
    Ok(tasks)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitScheme {
    /// A single predefined train/test partition of example indices.
    Fixed { train: Vec<usize>, test: Vec<usize> },
    /// Seeded shuffle followed by `k` near-equal contiguous folds.
    KFold(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSplit {
    /// Ascending example indices.
    pub train: Vec<usize>,
    /// Ascending example indices.
    pub test: Vec<usize>,
    pub fold: usize,
}

pub fn split<T: Scalar>(task: &BinaryTask<T>, scheme: &SplitScheme, seed: u64) -> Result<Vec<TaskSplit>> {
    let splits = split_indices(task.len(), scheme, seed)?;
    for s in &splits {
        if !s.train.iter().any(|&i| task.label(i) == Label::Positive) {
            warn!(
                "task {:?} fold {}: training side has no positive examples",
                task.category, s.fold
            );
        }
    }
    Ok(splits)
}

/// Partitions `0..n` according to `scheme`; deterministic for a fixed seed.
pub fn split_indices(n: usize, scheme: &SplitScheme, seed: u64) -> Result<Vec<TaskSplit>> {
    match scheme {
        SplitScheme::Fixed { train, test } => {
            let train_set: HashSet<usize> = train.iter().copied().collect();
            let test_set: HashSet<usize> = test.iter().copied().collect();
            if train_set.len() != train.len() || test_set.len() != test.len() {
                return Err(Error::InvalidSplit("repeated index in fixed split".into()));
            }
            if let Some(i) = train_set.intersection(&test_set).next() {
                return Err(Error::InvalidSplit(format!("index {i} is in both train and test")));
            }
            if train.len() + test.len() != n || train.iter().chain(test).any(|&i| i >= n) {
                return Err(Error::InvalidSplit(format!(
                    "fixed split must cover exactly the {n} examples"
                )));
            }
            if train.is_empty() || test.is_empty() {
                return Err(Error::InvalidSplit("train and test must both be nonempty".into()));
            }
            let mut train = train.clone();
            let mut test = test.clone();
            train.sort_unstable();
            test.sort_unstable();
            Ok(vec![TaskSplit { train, test, fold: 0 }])
        }
        SplitScheme::KFold(k) => {
            let k = *k;
            if k < 2 || k > n {
                return Err(Error::InvalidSplit(format!(
                    "k-fold needs 2 <= k <= {n} examples, got k = {k}"
                )));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let base = n / k;
            let extra = n % k;
            let mut start = 0;
            let mut folds = Vec::with_capacity(k);
            for fold in 0..k {
                let size = base + usize::from(fold < extra);
                let mut test = order[start..start + size].to_vec();
                let mut train: Vec<usize> = order[..start]
                    .iter()
                    .chain(&order[start + size..])
                    .copied()
                    .collect();
                test.sort_unstable();
                train.sort_unstable();
                folds.push(TaskSplit { train, test, fold });
                start += size;
            }
            Ok(folds)
        }
    }
}
