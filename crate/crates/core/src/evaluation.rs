//! Classification metrics and their macro aggregation.

use std::borrow::Borrow;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::svm::Label;

/// Confusion counts with `Positive` as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn precision<T: Scalar>(&self) -> Option<T> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall<T: Scalar>(&self) -> Option<T> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn specificity<T: Scalar>(&self) -> Option<T> {
        ratio(self.tn, self.tn + self.fp)
    }

    /// True when some metric had a zero denominator and was defined as 0.
    pub fn degenerate(&self) -> bool {
        self.tp + self.fp == 0 || self.tp + self.fn_ == 0 || self.tn + self.fp == 0
    }
}

fn ratio<T: Scalar>(num: usize, den: usize) -> Option<T> {
    (den > 0).then(|| T::of_usize(num) / T::of_usize(den))
}

pub fn confusion(preds: &[Label], gold: &[Label]) -> Result<ConfusionCounts> {
    if preds.len() != gold.len() {
        return Err(Error::LengthMismatch(preds.len(), gold.len()));
    }
    if preds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut c = ConfusionCounts::default();
    for (&p, &g) in preds.iter().zip(gold) {
        match (p, g) {
            (Label::Positive, Label::Positive) => c.tp += 1,
            (Label::Positive, Label::Negative) => c.fp += 1,
            (Label::Negative, Label::Negative) => c.tn += 1,
            (Label::Negative, Label::Positive) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// `(1 + b^2) P R / (b^2 P + R)`; 0 whenever a component is undefined.
pub fn f_beta<T: Scalar>(c: &ConfusionCounts, beta: T) -> T {
    let (Some(p), Some(r)) = (c.precision::<T>(), c.recall::<T>()) else {
        return T::zero();
    };
    let b2 = beta * beta;
    let den = b2 * p + r;
    if den.is_zero() {
        return T::zero();
    }
    (T::one() + b2) * p * r / den
}

pub fn accuracy<T: Scalar>(c: &ConfusionCounts) -> T {
    ratio(c.tp + c.tn, c.total()).unwrap_or_else(T::zero)
}

/// Mean of the two per-class recalls; a class absent from gold contributes 0.
pub fn balanced_accuracy<T: Scalar>(c: &ConfusionCounts) -> T {
    let pos = c.recall::<T>().unwrap_or_else(T::zero);
    let neg = c.specificity::<T>().unwrap_or_else(T::zero);
    (pos + neg) / T::of(2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport<T> {
    /// Annotations acquired. Real-valued so that averages stay exact.
    pub ann: T,
    /// `ann` over the size of the whole task (train + test).
    pub ann_p: T,
    pub f1: T,
    pub f2: T,
    pub acc: T,
    pub bac: T,
    pub degenerate: bool,
}

impl<T: Scalar> MetricsReport<T> {
    pub fn from_counts(c: &ConfusionCounts, ann: usize, dataset_size: usize) -> Self {
        Self {
            ann: T::of_usize(ann),
            ann_p: T::of_usize(ann) / T::of_usize(dataset_size),
            f1: f_beta(c, T::one()),
            f2: f_beta(c, T::of(2.0)),
            acc: accuracy(c),
            bac: balanced_accuracy(c),
            degenerate: c.degenerate(),
        }
    }

    pub fn evaluate(preds: &[Label], gold: &[Label], ann: usize, dataset_size: usize) -> Result<Self> {
        Ok(Self::from_counts(&confusion(preds, gold)?, ann, dataset_size))
    }

    /// `(ANN, ANN-P, F1, F2, ACC, BAC)` in table order.
    pub fn stats(&self) -> [T; 6] {
        [self.ann, self.ann_p, self.f1, self.f2, self.acc, self.bac]
    }
}

/// Unweighted mean of every field; `degenerate` if any input was.
pub fn aggregate_macro<T: Scalar, R: Borrow<MetricsReport<T>>>(reports: &[R]) -> Result<MetricsReport<T>> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = T::of_usize(reports.len());
    let mean = |f: fn(&MetricsReport<T>) -> T| reports.iter().map(|r| f(r.borrow())).sum::<T>() / n;
    Ok(MetricsReport {
        ann: mean(|r| r.ann),
        ann_p: mean(|r| r.ann_p),
        f1: mean(|r| r.f1),
        f2: mean(|r| r.f2),
        acc: mean(|r| r.acc),
        bac: mean(|r| r.bac),
        degenerate: reports.iter().any(|r| r.borrow().degenerate),
    })
}
