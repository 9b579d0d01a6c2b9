use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Corpus, Document};
use crate::error::{Error, Result};

pub const SYNTH_CATEGORIES: [&str; 2] = ["alpha", "beta"];

const MIN_DOC_LEN: usize = 30;
const MAX_DOC_LEN: usize = 90;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub n_docs: usize,
    pub n_terms: usize,
    /// 0 = both categories share one term distribution, 1 = disjoint term sets.
    pub class_separation: f64,
    pub seed: u64,
}

impl SynthParams {
    pub fn generate(&self) -> Result<Corpus> {
        synth_generate(self.n_docs, self.n_terms, self.class_separation, self.seed)
    }
}

/// Two-category corpus over a Zipf-weighted vocabulary of `n_terms` terms.
///
/// Each category's term distribution mixes a shared background (weight
/// `1 - class_separation`) with a category-owned half of the vocabulary
/// (weight `class_separation`): even-ranked terms belong to `alpha`, odd-ranked
/// ones to `beta`. Document lengths are uniform in 30..=90 tokens.
pub fn synth_generate(n_docs: usize, n_terms: usize, class_separation: f64, seed: u64) -> Result<Corpus> {
    if n_docs < 2 {
        return Err(Error::InvalidParameter(format!("n_docs must be >= 2, got {n_docs}")));
    }
    if n_terms < 2 {
        return Err(Error::InvalidParameter(format!("n_terms must be >= 2, got {n_terms}")));
    }
    if !(0.0..=1.0).contains(&class_separation) {
        return Err(Error::InvalidParameter(format!(
            "class_separation must be in [0, 1], got {class_separation}"
        )));
    }

    let zipf: Vec<f64> = (0..n_terms).map(|r| 1.0 / (r as f64 + 1.0)).collect();
    let zipf_total: f64 = zipf.iter().sum();
    let owned_total = |parity: usize| -> f64 {
        zipf.iter().enumerate().filter(|(r, _)| r % 2 == parity).map(|(_, w)| w).sum()
    };
    let samplers: Vec<WeightedIndex<f64>> = (0..2)
        .map(|parity| {
            let owned = owned_total(parity);
            let weights = zipf.iter().enumerate().map(|(r, w)| {
                let background = (1.0 - class_separation) * w / zipf_total;
                let own = if r % 2 == parity { class_separation * w / owned } else { 0.0 };
                background + own
            });
            WeightedIndex::new(weights).expect("weights are positive")
        })
        .collect();

    let width = (n_docs - 1).to_string().len();
    let term_width = (n_terms - 1).to_string().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut documents = Vec::with_capacity(n_docs);
    for i in 0..n_docs {
        let class = match i {
            0 => 0,
            1 => 1,
            _ => usize::from(rng.gen_bool(0.5)),
        };
        let len = rng.gen_range(MIN_DOC_LEN..=MAX_DOC_LEN);
        let text = (0..len)
            .map(|_| format!("w{:0term_width$}", samplers[class].sample(&mut rng)))
            .collect::<Vec<_>>()
            .join(" ");
        documents.push(Document {
            id: format!("doc{i:0width$}"),
            text,
            label: SYNTH_CATEGORIES[class].to_string(),
        });
    }
    Corpus::new(documents)
}
