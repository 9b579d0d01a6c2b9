use super::Signal;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseVector;
use crate::svm::{DistanceKind, Model};

pub const DEFAULT_EPSILON: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfMode {
    /// Declining confidence: `epsilon` consecutive strict decreases.
    Declining,
    /// Non-increasing confidence: `epsilon` consecutive non-increases.
    NonIncreasing,
}

/// Mean distance from the hyperplane over the stop set.
pub fn conf<T: Scalar>(
    model: &Model<T>,
    stop_set: &[usize],
    vectors: &[SparseVector<T>],
    kind: DistanceKind,
) -> Result<T> {
    if stop_set.is_empty() {
        return Err(Error::EmptyInput);
    }
    let total: T = stop_set.iter().map(|&i| model.distance(&vectors[i], kind)).sum();
    Ok(total / T::of_usize(stop_set.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfState<T> {
    mode: ConfMode,
    epsilon: usize,
    history: Vec<T>,
    stopped_at: Option<usize>,
}

impl<T: Scalar> ConfState<T> {
    pub fn new(mode: ConfMode, epsilon: usize) -> Result<Self> {
        if epsilon == 0 {
            return Err(Error::config("epsilon", "must be >= 1"));
        }
        Ok(Self {
            mode,
            epsilon,
            history: Vec::new(),
            stopped_at: None,
        })
    }

    pub fn mode(&self) -> ConfMode {
        self.mode
    }

    pub fn epsilon(&self) -> usize {
        self.epsilon
    }

    pub fn history(&self) -> &[T] {
        &self.history
    }

    pub fn stopped_at(&self) -> Option<usize> {
        self.stopped_at
    }

    /// Appends a value and stops once each of the last `epsilon` values moved
    /// in the required direction relative to its predecessor. Sticky.
    pub fn push(&mut self, value: T, iteration: usize) -> Signal {
        self.history.push(value);
        if self.stopped_at.is_some() {
            return Signal::Stop;
        }
        let n = self.history.len();
        if n <= self.epsilon {
            return Signal::Continue;
        }
        let tail = &self.history[n - self.epsilon - 1..];
        let streak = tail.windows(2).all(|w| match self.mode {
            ConfMode::Declining => w[1] < w[0],
            ConfMode::NonIncreasing => w[1] <= w[0],
        });
        if streak {
            self.stopped_at = Some(iteration);
            Signal::Stop
        } else {
            Signal::Continue
        }
    }
}

pub fn dc_update<T: Scalar>(state: &mut ConfState<T>, conf_value: T, iteration: usize) -> Signal {
    debug_assert_eq!(state.mode, ConfMode::Declining);
    state.push(conf_value, iteration)
}

pub fn nc_update<T: Scalar>(state: &mut ConfState<T>, conf_value: T, iteration: usize) -> Signal {
    debug_assert_eq!(state.mode, ConfMode::NonIncreasing);
    state.push(conf_value, iteration)
}
