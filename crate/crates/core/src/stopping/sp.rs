use std::collections::VecDeque;

use super::kappa::kappa;
use super::Signal;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseVector;
use crate::svm::{Label, Model};

pub const DEFAULT_WINDOW: usize = 3;
pub const DEFAULT_THRESHOLD: f64 = 0.99;

/// Stabilizing-predictions state: a sliding window of the last `k` kappa
/// agreements between successive models.
#[derive(Debug, Clone, PartialEq)]
pub struct SpState<T> {
    k: usize,
    threshold: T,
    window: VecDeque<T>,
    agreements: usize,
    stopped_at: Option<usize>,
}

impl<T: Scalar> SpState<T> {
    pub fn new(k: usize, threshold: T) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("k", "window size must be >= 1"));
        }
        if !(threshold >= -T::one() && threshold <= T::one()) {
            return Err(Error::config("K", format!("threshold must lie in [-1, 1], got {threshold}")));
        }
        Ok(Self {
            k,
            threshold,
            window: VecDeque::with_capacity(k),
            agreements: 0,
            stopped_at: None,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn window(&self) -> impl Iterator<Item = T> + '_ {
        self.window.iter().copied()
    }

    /// Number of agreement values pushed so far.
    pub fn agreements(&self) -> usize {
        self.agreements
    }

    pub fn stopped_at(&self) -> Option<usize> {
        self.stopped_at
    }

    pub fn window_mean(&self) -> Option<T> {
        if self.window.is_empty() {
            return None;
        }
        Some(self.window.iter().copied().sum::<T>() / T::of_usize(self.window.len()))
    }

    /// Appends one agreement value and applies the window rule: stop once the
    /// window is full and its mean reaches the threshold. Sticky.
    pub fn push_agreement(&mut self, agreement: T, iteration: usize) -> Signal {
        if self.stopped_at.is_some() {
            return Signal::Stop;
        }
        if self.window.len() == self.k {
            self.window.pop_front();
        }
        self.window.push_back(agreement);
        self.agreements += 1;
        if self.window.len() == self.k && self.window_mean().is_some_and(|m| m >= self.threshold) {
            self.stopped_at = Some(iteration);
            return Signal::Stop;
        }
        Signal::Continue
    }
}

/// Compares the previous and current models on the current stop set and feeds
/// the resulting kappa into the window. Without a previous model, or with an
/// empty stop set, the state is left unchanged.
pub fn sp_update<T: Scalar>(
    state: &mut SpState<T>,
    prev_model: Option<&Model<T>>,
    curr_model: &Model<T>,
    stop_set: &[usize],
    vectors: &[SparseVector<T>],
    iteration: usize,
) -> Result<Signal> {
    if state.stopped_at.is_some() {
        return Ok(Signal::Stop);
    }
    let Some(prev) = prev_model else {
        return Ok(Signal::Continue);
    };
    if stop_set.is_empty() {
        return Ok(Signal::Continue);
    }
    let predict = |m: &Model<T>| -> Vec<Label> { stop_set.iter().map(|&i| m.predict(&vectors[i])).collect() };
    let agreement = kappa(&predict(prev), &predict(curr_model))?;
    Ok(state.push_agreement(agreement, iteration))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn feed(state: &mut SpState<f64>, values: &[f64]) -> Vec<Signal> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| state.push_agreement(v, i))
            .collect()
    }

    #[test]
    fn full_window_above_threshold_stops() {
        let mut s = SpState::new(3, 0.99).unwrap();
        let signals = feed(&mut s, &[0.992, 0.990, 0.991]);
        assert_eq!(signals, [Signal::Continue, Signal::Continue, Signal::Stop]);
        assert_eq!(s.stopped_at(), Some(2));
    }

    #[test]
    fn partial_window_never_stops() {
        let mut s = SpState::new(3, 0.99).unwrap();
        let signals = feed(&mut s, &[0.992, 0.990]);
        assert_eq!(signals, [Signal::Continue, Signal::Continue]);
    }

    #[test]
    fn mean_just_below_threshold_continues() {
        let mut s = SpState::new(3, 0.99).unwrap();
        let signals = feed(&mut s, &[0.99, 0.99, 0.9899]);
        assert_eq!(signals[2], Signal::Continue);
        assert!(s.window_mean().unwrap() < 0.99);
    }

    #[test]
    fn sticky_after_stop() {
        let mut s = SpState::new(1, 0.5).unwrap();
        assert_eq!(s.push_agreement(0.9, 4), Signal::Stop);
        assert_eq!(s.push_agreement(0.0, 5), Signal::Stop);
        assert_eq!(s.stopped_at(), Some(4));
    }

    #[test]
    fn invalid_parameters() {
        assert!(SpState::<f64>::new(0, 0.99).is_err());
        assert!(SpState::<f64>::new(3, 1.5).is_err());
    }

    #[test]
    fn update_compares_models_on_stop_set() {
        let vectors: Vec<SparseVector<f64>> = (0..4)
            .map(|i| SparseVector::from_dense(&[i as f64 - 1.5]))
            .collect();
        let a = Model::from_weights(vec![1.0], 0.0);
        let mut s = SpState::new(1, 0.99).unwrap();
        assert_eq!(sp_update(&mut s, None, &a, &[0, 1, 2, 3], &vectors, 0).unwrap(), Signal::Continue);
        assert_eq!(s.agreements(), 0);
        assert_eq!(sp_update(&mut s, Some(&a), &a, &[], &vectors, 1).unwrap(), Signal::Continue);
        assert_eq!(s.agreements(), 0);
        assert_eq!(sp_update(&mut s, Some(&a), &a, &[0, 1, 2, 3], &vectors, 2).unwrap(), Signal::Stop);
        assert_eq!(s.stopped_at(), Some(2));
    }

    fn first_stop(values: &[f64], k: usize, threshold: f64) -> Option<usize> {
        let mut s = SpState::new(k, threshold).unwrap();
        values.iter().enumerate().for_each(|(i, &v)| {
            s.push_agreement(v, i);
        });
        s.stopped_at()
    }

    #[test]
    fn wider_window_can_fire_where_narrower_never_does() {
        let values = [1.0, 0.85, 1.0];
        assert_eq!(first_stop(&values, 2, 0.95), None);
        assert_eq!(first_stop(&values, 3, 0.95), Some(2));
    }

    proptest! {
        #[test]
        fn raising_threshold_never_stops_earlier(
            values in proptest::collection::vec(0.9f64..=1.0, 1..40),
            k in 1usize..5,
            threshold in 0.9f64..1.0,
            dt in 0.0f64..0.05,
        ) {
            let base = first_stop(&values, k, threshold).unwrap_or(usize::MAX);
            let higher = first_stop(&values, k, (threshold + dt).min(1.0)).unwrap_or(usize::MAX);
            prop_assert!(higher >= base);
        }

        #[test]
        fn raising_window_never_stops_earlier_on_rising_agreement(
            mut values in proptest::collection::vec(0.9f64..=1.0, 1..40),
            k in 1usize..5,
            dk in 0usize..3,
            threshold in 0.9f64..1.0,
        ) {
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let base = first_stop(&values, k, threshold).unwrap_or(usize::MAX);
            let wider = first_stop(&values, k + dk, threshold).unwrap_or(usize::MAX);
            prop_assert!(wider >= base);
        }
    }
}
