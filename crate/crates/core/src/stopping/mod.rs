//! Stopping methods (stabilizing predictions, declining confidence,
//! non-increasing confidence) and the stop sets they measure on.

mod confidence;
mod kappa;
mod sp;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use confidence::{conf, dc_update, nc_update, ConfMode, ConfState, DEFAULT_EPSILON};
pub use kappa::{kappa, kappa_bootstrap_se};
pub use sp::{sp_update, SpState, DEFAULT_THRESHOLD, DEFAULT_WINDOW};

use crate::engine::PoolState;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseVector;
use crate::svm::{DistanceKind, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Stabilizing predictions.
    Sp,
    /// Declining confidence.
    Dc,
    /// Non-increasing confidence.
    Nc,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SP" => Ok(Self::Sp),
            "DC" => Ok(Self::Dc),
            "NC" => Ok(Self::Nc),
            _ => Err(format!("unknown stopping method {s:?} (expected SP, DC or NC)")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sp => "SP",
            Self::Dc => "DC",
            Self::Nc => "NC",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StopSetKind {
    /// Fixed random sample of the training pool, drawn once per run.
    S,
    /// The most recently annotated batch.
    B,
    /// The remaining unlabeled pool.
    U,
}

impl FromStr for StopSetKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "S" => Ok(Self::S),
            "B" => Ok(Self::B),
            "U" => Ok(Self::U),
            _ => Err(format!("unknown stop set {s:?} (expected S, B or U)")),
        }
    }
}

impl fmt::Display for StopSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::S => "S",
            Self::B => "B",
            Self::U => "U",
        })
    }
}

/// A stop set bound to one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopSetStrategy {
    /// Ascending ids sampled once at run start and never changed.
    Fixed(Arc<[usize]>),
    Batch,
    Unlabeled,
}

impl StopSetStrategy {
    pub fn kind(&self) -> StopSetKind {
        match self {
            Self::Fixed(_) => StopSetKind::S,
            Self::Batch => StopSetKind::B,
            Self::Unlabeled => StopSetKind::U,
        }
    }
}

/// Stabilizing predictions cannot use the batch set; every other pairing is valid.
pub fn validate_monitor(method: Method, stop_set: StopSetKind) -> Result<()> {
    if method == Method::Sp && stop_set == StopSetKind::B {
        return Err(Error::BatchStopSetWithSp);
    }
    Ok(())
}

/// Ascending ids of the stop set at the pool's current iteration.
pub fn resolve_stop_set(strategy: &StopSetStrategy, pool: &PoolState) -> Vec<usize> {
    match strategy {
        StopSetStrategy::Fixed(ids) => ids.to_vec(),
        StopSetStrategy::Batch => pool.batch().to_vec(),
        StopSetStrategy::Unlabeled => pool.unlabeled().to_vec(),
    }
}

/// Configuration of one monitor, before it is bound to a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorSpec {
    pub name: String,
    pub method: Method,
    pub stop_set: StopSetKind,
    pub k: usize,
    pub threshold: f64,
    pub epsilon: usize,
}

impl MonitorSpec {
    pub fn new(method: Method, stop_set: StopSetKind) -> Self {
        Self {
            name: format!("{method}_{stop_set}"),
            method,
            stop_set,
            k: DEFAULT_WINDOW,
            threshold: DEFAULT_THRESHOLD,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_monitor(self.method, self.stop_set)?;
        match self.method {
            Method::Sp => SpState::<f64>::new(self.k, self.threshold).map(drop),
            Method::Dc | Method::Nc => ConfState::<f64>::new(ConfMode::Declining, self.epsilon).map(drop),
        }
    }

    /// The eight combinations compared in the experiments: SP over S and U,
    /// DC and NC over S, B and U.
    pub fn standard_set() -> Vec<Self> {
        use Method::*;
        use StopSetKind::*;
        [(Sp, S), (Sp, U), (Dc, B), (Dc, U), (Dc, S), (Nc, B), (Nc, U), (Nc, S)]
            .into_iter()
            .map(|(m, s)| Self::new(m, s))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MonitorState<T> {
    Sp(SpState<T>),
    Conf(ConfState<T>),
}

/// What a monitor saw at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<T> {
    pub signal: Signal,
    /// Kappa window mean for SP, Conf for DC/NC; `None` when undefined.
    pub value: Option<T>,
    pub stop_set_size: usize,
}

/// A stopping method attached to one run as a passive observer.
#[derive(Debug, Clone, PartialEq)]
pub struct Monitor<T> {
    spec: MonitorSpec,
    strategy: StopSetStrategy,
    distance: DistanceKind,
    state: MonitorState<T>,
}

impl<T: Scalar> Monitor<T> {
    pub fn new(spec: MonitorSpec, strategy: StopSetStrategy, distance: DistanceKind) -> Result<Self> {
        if strategy.kind() != spec.stop_set {
            return Err(Error::InvalidParameter(format!(
                "monitor {} expects stop set {}, got {}",
                spec.name,
                spec.stop_set,
                strategy.kind()
            )));
        }
        validate_monitor(spec.method, spec.stop_set)?;
        let state = match spec.method {
            Method::Sp => MonitorState::Sp(SpState::new(spec.k, T::of(spec.threshold))?),
            Method::Dc => MonitorState::Conf(ConfState::new(ConfMode::Declining, spec.epsilon)?),
            Method::Nc => MonitorState::Conf(ConfState::new(ConfMode::NonIncreasing, spec.epsilon)?),
        };
        Ok(Self {
            spec,
            strategy,
            distance,
            state,
        })
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn spec(&self) -> &MonitorSpec {
        &self.spec
    }

    pub fn method(&self) -> Method {
        self.spec.method
    }

    pub fn strategy(&self) -> &StopSetStrategy {
        &self.strategy
    }

    pub fn state(&self) -> &MonitorState<T> {
        &self.state
    }

    pub fn stopped_at(&self) -> Option<usize> {
        match &self.state {
            MonitorState::Sp(s) => s.stopped_at(),
            MonitorState::Conf(s) => s.stopped_at(),
        }
    }

    /// Feeds one iteration. `prev_model` is the most recent earlier model that
    /// was not a constant fallback. Iterations whose current model is a
    /// constant fallback leave the state unchanged.
    pub fn observe(
        &mut self,
        iteration: usize,
        prev_model: Option<&Model<T>>,
        model: &Model<T>,
        pool: &PoolState,
        vectors: &[SparseVector<T>],
    ) -> Result<Observation<T>> {
        let stop_set = resolve_stop_set(&self.strategy, pool);
        let stop_set_size = stop_set.len();
        let current = |stopped: Option<usize>| {
            if stopped.is_some() {
                Signal::Stop
            } else {
                Signal::Continue
            }
        };
        if model.is_constant() || stop_set.is_empty() {
            return Ok(Observation {
                signal: current(self.stopped_at()),
                value: None,
                stop_set_size,
            });
        }
        match &mut self.state {
            MonitorState::Sp(state) => {
                let before = state.agreements();
                let signal = sp_update(state, prev_model, model, &stop_set, vectors, iteration)?;
                let value = if state.agreements() > before { state.window_mean() } else { None };
                Ok(Observation {
                    signal,
                    value,
                    stop_set_size,
                })
            }
            MonitorState::Conf(state) => {
                let value = conf(model, &stop_set, vectors, self.distance)?;
                let signal = match state.mode() {
                    ConfMode::Declining => dc_update(state, value, iteration),
                    ConfMode::NonIncreasing => nc_update(state, value, iteration),
                };
                Ok(Observation {
                    signal,
                    value: Some(value),
                    stop_set_size,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_only_sp_on_batch() {
        assert!(validate_monitor(Method::Sp, StopSetKind::S).is_ok());
        assert!(matches!(
            validate_monitor(Method::Sp, StopSetKind::B),
            Err(Error::BatchStopSetWithSp)
        ));
        assert!(validate_monitor(Method::Nc, StopSetKind::U).is_ok());
        for m in [Method::Dc, Method::Nc] {
            for s in [StopSetKind::S, StopSetKind::B, StopSetKind::U] {
                assert!(validate_monitor(m, s).is_ok());
            }
        }
    }

    #[test]
    fn standard_set_names() {
        let names: Vec<_> = MonitorSpec::standard_set().into_iter().map(|m| m.name).collect();
        assert_eq!(names, ["SP_S", "SP_U", "DC_B", "DC_U", "DC_S", "NC_B", "NC_U", "NC_S"]);
    }

    #[test]
    fn resolve_strategies() {
        let mut pool = PoolState::new(&(0..20).collect::<Vec<_>>());
        pool.annotate_batch(vec![3, 7, 1, 9, 12]).unwrap();
        let fixed = StopSetStrategy::Fixed(Arc::from(vec![2usize, 5, 8]));
        assert_eq!(resolve_stop_set(&fixed, &pool), vec![2, 5, 8]);
        assert_eq!(resolve_stop_set(&StopSetStrategy::Batch, &pool), vec![1, 3, 7, 9, 12]);
        let u1 = resolve_stop_set(&StopSetStrategy::Unlabeled, &pool);
        pool.annotate_batch(vec![0, 2, 4, 5, 6]).unwrap();
        let u2 = resolve_stop_set(&StopSetStrategy::Unlabeled, &pool);
        assert_eq!(u1.len() - 5, u2.len());
        assert!(u2.iter().all(|i| u1.contains(i)));
        assert_eq!(resolve_stop_set(&fixed, &pool), vec![2, 5, 8]);
        assert_eq!(resolve_stop_set(&StopSetStrategy::Batch, &pool), vec![0, 2, 4, 5, 6]);
    }

    #[test]
    fn monitor_kind_must_match_strategy() {
        let spec = MonitorSpec::new(Method::Dc, StopSetKind::U);
        assert!(Monitor::<f64>::new(spec, StopSetStrategy::Batch, DistanceKind::Geometric).is_err());
    }
}
