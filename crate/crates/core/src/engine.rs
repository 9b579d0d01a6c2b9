//! The pool-based active learning loop.
//!
//! An initial batch of `b` random examples is annotated, then each iteration
//! trains on everything labeled so far, evaluates on the test side, lets every
//! monitor observe the new model, and annotates the next batch. Monitors never
//! end the run: the loop always continues until the pool is exhausted, so a
//! single learning curve serves every stopping method.

use std::collections::HashSet;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{BinaryTask, TaskSplit};
use crate::error::{Error, Result};
use crate::evaluation::MetricsReport;
use crate::scalar::Scalar;
use crate::sparse::SparseVector;
use crate::stopping::{Monitor, MonitorSpec, Observation, StopSetKind, StopSetStrategy};
use crate::svm::{self, DistanceKind, Label, Model, TrainParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QueryStrategy {
    /// Closest-to-hyperplane selection.
    #[default]
    Uncertainty,
    /// Uniform random selection (passive learning).
    Random,
}

impl FromStr for QueryStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "uncertainty" => Ok(Self::Uncertainty),
            "random" => Ok(Self::Random),
            other => Err(format!("unknown query strategy {other:?}")),
        }
    }
}

impl std::fmt::Display for QueryStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Uncertainty => "uncertainty",
            Self::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub batch_fraction: f64,
    pub stop_set_fraction: f64,
    pub strategy: QueryStrategy,
    /// Solver settings; the seed is replaced per iteration.
    pub train: TrainParams<T>,
    pub distance: DistanceKind,
}

impl<T: Scalar> Default for RunConfig<T> {
    fn default() -> Self {
        Self {
            batch_fraction: 0.005,
            stop_set_fraction: 0.5,
            strategy: QueryStrategy::Uncertainty,
            train: TrainParams::default(),
            distance: DistanceKind::Geometric,
        }
    }
}

/// `max(1, round(fraction * pool))`, rounding halves up.
pub fn batch_size(batch_fraction: f64, pool: usize) -> usize {
    ((batch_fraction * pool as f64).round() as usize).max(1)
}

/// Labeled / unlabeled / latest-batch bookkeeping over the training pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    labeled: Vec<usize>,
    unlabeled: Vec<usize>,
    batch: Vec<usize>,
    iteration: usize,
    pool_size: usize,
}

impl PoolState {
    pub fn new(training_ids: &[usize]) -> Self {
        let mut unlabeled = training_ids.to_vec();
        unlabeled.sort_unstable();
        unlabeled.dedup();
        Self {
            labeled: Vec::new(),
            pool_size: unlabeled.len(),
            unlabeled,
            batch: Vec::new(),
            iteration: 0,
        }
    }

    /// Labeled ids in annotation order.
    pub fn labeled(&self) -> &[usize] {
        &self.labeled
    }

    /// Ascending unlabeled ids.
    pub fn unlabeled(&self) -> &[usize] {
        &self.unlabeled
    }

    /// Ascending ids of the most recent batch.
    pub fn batch(&self) -> &[usize] {
        &self.batch
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    /// Moves `ids` from U to L and makes them the current batch.
    pub fn annotate_batch(&mut self, mut ids: Vec<usize>) -> Result<()> {
        let set: HashSet<usize> = ids.iter().copied().collect();
        if set.len() != ids.len() {
            return Err(Error::InvalidParameter("batch contains a repeated id".into()));
        }
        if let Some(&missing) = ids.iter().find(|&&i| self.unlabeled.binary_search(&i).is_err()) {
            return Err(Error::InvalidParameter(format!("id {missing} is not in the unlabeled pool")));
        }
        if !self.batch.is_empty() || !self.labeled.is_empty() {
            self.iteration += 1;
        }
        self.unlabeled.retain(|i| !set.contains(i));
        self.labeled.extend_from_slice(&ids);
        ids.sort_unstable();
        self.batch = ids;
        Ok(())
    }
}

/// Simulated annotator backed by the task's gold labels. Each id may be
/// annotated once.
#[derive(Debug)]
pub struct Oracle<'a, T> {
    task: &'a BinaryTask<T>,
    seen: HashSet<usize>,
}

impl<'a, T: Scalar> Oracle<'a, T> {
    pub fn new(task: &'a BinaryTask<T>) -> Self {
        Self {
            task,
            seen: HashSet::new(),
        }
    }

    pub fn label(&mut self, id: usize) -> Result<Label> {
        if id >= self.task.len() {
            return Err(Error::InvalidParameter(format!("id {id} is not in the task")));
        }
        if !self.seen.insert(id) {
            return Err(Error::DoubleAnnotation(id));
        }
        Ok(self.task.label(id))
    }

    /// Number of annotations made so far.
    pub fn annotations(&self) -> usize {
        self.seen.len()
    }
}

/// The `min(b, |U|)` ids with the smallest `|w.x + b|`, ties by ascending id.
/// A constant model has no hyperplane, so selection falls back to random.
pub fn select_batch_uncertainty<T: Scalar, R: Rng>(
    model: &Model<T>,
    unlabeled: &[usize],
    vectors: &[SparseVector<T>],
    b: usize,
    rng: &mut R,
) -> Vec<usize> {
    if model.is_constant() {
        return select_batch_random(unlabeled, b, rng);
    }
    let mut scored: Vec<(T, usize)> = unlabeled
        .iter()
        .map(|&i| (model.decision_value(&vectors[i]).abs(), i))
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite decision values").then(a.1.cmp(&b.1)));
    scored.into_iter().take(b).map(|(_, i)| i).collect()
}

/// Uniform sample of `min(b, |U|)` ids without replacement.
pub fn select_batch_random<R: Rng>(unlabeled: &[usize], b: usize, rng: &mut R) -> Vec<usize> {
    let amount = b.min(unlabeled.len());
    sample(rng, unlabeled.len(), amount)
        .into_iter()
        .map(|j| unlabeled[j])
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry<T> {
    pub iteration: usize,
    /// |L| when this iteration's model was trained; equals the annotation count.
    pub labeled: usize,
    pub unlabeled: usize,
    pub metrics: MetricsReport<T>,
    /// One per monitor, in monitor order.
    pub observations: Vec<Observation<T>>,
    pub constant_model: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord<T> {
    pub monitors: Vec<MonitorSpec>,
    pub entries: Vec<RunEntry<T>>,
    /// Per monitor, the iteration at which it signaled stop.
    pub stops: Vec<Option<usize>>,
    /// The batch annotated before each iteration's training; `batches[0]` is
    /// the initial random batch.
    pub batches: Vec<Vec<usize>>,
    pub batch_size: usize,
    pub pool_size: usize,
    pub dataset_size: usize,
    /// The fixed stop set drawn at run start.
    pub fixed_stop_set: Vec<usize>,
    /// The first model was a constant fallback because the initial batch was
    /// single-class; selection stays random until both classes are labeled.
    pub single_class_start: bool,
    /// After a single-class start, the first iteration whose batch was chosen
    /// by the configured strategy.
    pub strategy_switch: Option<usize>,
}

impl<T: Scalar> RunRecord<T> {
    /// The entry at which monitor `m` stopped, or the last entry if it never did.
    pub fn stop_entry(&self, m: usize) -> &RunEntry<T> {
        let last = self.entries.last().expect("a run records at least one entry");
        self.stops[m].map_or(last, |i| &self.entries[i])
    }

    pub fn final_entry(&self) -> &RunEntry<T> {
        self.entries.last().expect("a run records at least one entry")
    }

    pub fn monitor_index(&self, name: &str) -> Option<usize> {
        self.monitors.iter().position(|m| m.name == name)
    }
}

enum Selection<'a> {
    Strategy(QueryStrategy),
    Scripted(&'a [Vec<usize>]),
}

/// Runs active learning on one task split until the pool is exhausted.
pub fn run<T: Scalar>(
    task: &BinaryTask<T>,
    split: &TaskSplit,
    config: &RunConfig<T>,
    monitors: &[MonitorSpec],
    seed: u64,
) -> Result<RunRecord<T>> {
    run_inner(task, split, config, monitors, seed, Selection::Strategy(config.strategy))
}

/// Re-runs a recorded batch sequence. With the same seed this reproduces the
/// original record exactly.
pub fn replay<T: Scalar>(
    task: &BinaryTask<T>,
    split: &TaskSplit,
    config: &RunConfig<T>,
    monitors: &[MonitorSpec],
    seed: u64,
    batches: &[Vec<usize>],
) -> Result<RunRecord<T>> {
    run_inner(task, split, config, monitors, seed, Selection::Scripted(batches))
}

fn run_inner<T: Scalar>(
    task: &BinaryTask<T>,
    split: &TaskSplit,
    config: &RunConfig<T>,
    monitor_specs: &[MonitorSpec],
    seed: u64,
    selection: Selection<'_>,
) -> Result<RunRecord<T>> {
    if split.train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    for (name, f) in [("batch_fraction", config.batch_fraction), ("stop_set_fraction", config.stop_set_fraction)] {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::config(name, format!("must be in (0, 1], got {f}")));
        }
    }
    let vectors = task.vectors();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = PoolState::new(&split.train);
    let pool_size = pool.pool_size();
    let b = batch_size(config.batch_fraction, pool_size);

    let s_size = ((config.stop_set_fraction * pool_size as f64).round() as usize).min(pool_size);
    let mut fixed: Vec<usize> = select_batch_random(pool.unlabeled(), s_size, &mut rng);
    fixed.sort_unstable();
    let fixed: Arc<[usize]> = Arc::from(fixed);

    let mut monitors = monitor_specs
        .iter()
        .map(|spec| {
            let strategy = match spec.stop_set {
                StopSetKind::S => StopSetStrategy::Fixed(Arc::clone(&fixed)),
                StopSetKind::B => StopSetStrategy::Batch,
                StopSetKind::U => StopSetStrategy::Unlabeled,
            };
            Monitor::new(spec.clone(), strategy, config.distance)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut oracle = Oracle::new(task);
    let mut labels: Vec<Label> = Vec::with_capacity(pool_size);
    let mut batches: Vec<Vec<usize>> = Vec::new();
    let gold_test: Vec<Label> = split.test.iter().map(|&i| task.label(i)).collect();

    let mut annotate = |pool: &mut PoolState, batch: Vec<usize>, labels: &mut Vec<Label>, batches: &mut Vec<Vec<usize>>| -> Result<()> {
        for &id in &batch {
            labels.push(oracle.label(id)?);
        }
        batches.push(batch.clone());
        pool.annotate_batch(batch)
    };

    let initial = match &selection {
        Selection::Scripted(script) => script.first().cloned().ok_or(Error::EmptyInput)?,
        Selection::Strategy(_) => select_batch_random(pool.unlabeled(), b, &mut rng),
    };
    annotate(&mut pool, initial, &mut labels, &mut batches)?;

    let mut entries = Vec::new();
    let mut prev_model: Option<Model<T>> = None;
    let mut single_class_start = false;
    let mut strategy_switch = None;
    loop {
        let iteration = entries.len();
        let train_x: Vec<&SparseVector<T>> = pool.labeled().iter().map(|&i| &vectors[i]).collect();
        let params = TrainParams {
            seed: mix_seed(seed, iteration as u64),
            ..config.train
        };
        let model = svm::train(&train_x, &labels, &params)?;

        let metrics = if split.test.is_empty() {
            MetricsReport {
                ann: T::of_usize(labels.len()),
                ann_p: T::of_usize(labels.len()) / T::of_usize(task.len()),
                f1: T::zero(),
                f2: T::zero(),
                acc: T::zero(),
                bac: T::zero(),
                degenerate: true,
            }
        } else {
            let preds: Vec<Label> = split.test.iter().map(|&i| model.predict(&vectors[i])).collect();
            MetricsReport::evaluate(&preds, &gold_test, labels.len(), task.len())?
        };

        let observations = monitors
            .iter_mut()
            .map(|m| m.observe(iteration, prev_model.as_ref(), &model, &pool, vectors))
            .collect::<Result<Vec<_>>>()?;

        entries.push(RunEntry {
            iteration,
            labeled: pool.labeled().len(),
            unlabeled: pool.unlabeled().len(),
            metrics,
            observations,
            constant_model: model.is_constant(),
        });

        if iteration == 0 && model.is_constant() {
            single_class_start = true;
        }

        if pool.unlabeled().is_empty() {
            break;
        }

        let next = match &selection {
            Selection::Scripted(script) => script
                .get(iteration + 1)
                .cloned()
                .ok_or_else(|| Error::InvalidParameter(format!("script ends before iteration {}", iteration + 1)))?,
            Selection::Strategy(QueryStrategy::Random) => select_batch_random(pool.unlabeled(), b, &mut rng),
            Selection::Strategy(QueryStrategy::Uncertainty) => {
                if model.is_constant() {
                    select_batch_random(pool.unlabeled(), b, &mut rng)
                } else {
                    if single_class_start && strategy_switch.is_none() {
                        strategy_switch = Some(iteration + 1);
                    }
                    select_batch_uncertainty(&model, pool.unlabeled(), vectors, b, &mut rng)
                }
            }
        };
        annotate(&mut pool, next, &mut labels, &mut batches)?;

        if !model.is_constant() {
            prev_model = Some(model);
        }
    }

    Ok(RunRecord {
        stops: monitors.iter().map(|m| m.stopped_at()).collect(),
        monitors: monitor_specs.to_vec(),
        entries,
        batches,
        batch_size: b,
        pool_size,
        dataset_size: task.len(),
        fixed_stop_set: fixed.to_vec(),
        single_class_start,
        strategy_switch,
    })
}

/// Trains once on the full training pool and evaluates on the test side.
pub fn final_baseline<T: Scalar>(
    task: &BinaryTask<T>,
    split: &TaskSplit,
    config: &RunConfig<T>,
    seed: u64,
) -> Result<MetricsReport<T>> {
    if split.train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let vectors = task.vectors();
    let xs: Vec<&SparseVector<T>> = split.train.iter().map(|&i| &vectors[i]).collect();
    let ys: Vec<Label> = split.train.iter().map(|&i| task.label(i)).collect();
    let params = TrainParams {
        seed: mix_seed(seed, u64::MAX),
        ..config.train
    };
    let model = svm::train(&xs, &ys, &params)?;
    let preds: Vec<Label> = split.test.iter().map(|&i| model.predict(&vectors[i])).collect();
    let gold: Vec<Label> = split.test.iter().map(|&i| task.label(i)).collect();
    MetricsReport::evaluate(&preds, &gold, split.train.len(), task.len())
}

/// SplitMix64 finalizer over `seed + stream`, so per-iteration solver seeds do
/// not depend on how much randomness selection consumed.
fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
