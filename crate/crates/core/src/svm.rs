//! L2-regularized hinge-loss linear SVM trained by dual coordinate descent.
//!
//! The bias is folded in as an extra constant feature of value 1, so it is
//! regularized together with the weights and the dual stays a plain box
//! constrained QP:
//!
//! ```text
//! max_a  sum_i a_i - 1/2 || sum_i a_i y_i z_i ||^2    s.t. 0 <= a_i <= C
//! ```
//!
//! where `z_i = (x_i, 1)`. Each coordinate step solves the one-variable
//! subproblem exactly and clips it to the box.

use std::borrow::Borrow;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Label::Positive => T::one(),
            Label::Negative => -T::one(),
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    /// Maps a decision value to a label; exactly zero goes to `Positive`.
    pub fn from_decision<T: Scalar>(value: T) -> Self {
        if value >= T::zero() {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

/// How far a point is from the separating hyperplane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceKind {
    /// `|w.x + b| / ||w||`
    #[default]
    Geometric,
    /// `|w.x + b|`
    Functional,
}

impl FromStr for DistanceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "geometric" => Ok(Self::Geometric),
            "functional" => Ok(Self::Functional),
            other => Err(format!("unknown distance variant {other:?}")),
        }
    }
}

impl std::fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Geometric => "geometric",
            Self::Functional => "functional",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams<T> {
    pub c: T,
    /// Stop once the largest projected-gradient violation of an epoch is below this.
    pub tol: T,
    /// Maximum number of epochs over the training set.
    pub max_iter: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for TrainParams<T> {
    fn default() -> Self {
        Self {
            c: T::one(),
            tol: T::of(1e-4),
            max_iter: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    weights: Vec<T>,
    bias: T,
    alphas: Vec<T>,
    c: T,
    constant_fallback: Option<Label>,
    epochs: usize,
    converged: bool,
}

impl<T: Scalar> Model<T> {
    /// A model with fixed weights and bias and no dual variables.
    pub fn from_weights(weights: Vec<T>, bias: T) -> Self {
        Self {
            weights,
            bias,
            alphas: Vec::new(),
            c: T::one(),
            constant_fallback: None,
            epochs: 0,
            converged: true,
        }
    }

    /// A model that predicts `label` everywhere and has zero weights.
    pub fn constant(label: Label, n_examples: usize, c: T) -> Self {
        Self {
            weights: Vec::new(),
            bias: T::zero(),
            alphas: vec![T::zero(); n_examples],
            c,
            constant_fallback: Some(label),
            epochs: 0,
            converged: true,
        }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> T {
        self.bias
    }

    pub fn alphas(&self) -> &[T] {
        &self.alphas
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn constant_fallback(&self) -> Option<Label> {
        self.constant_fallback
    }

    pub fn is_constant(&self) -> bool {
        self.constant_fallback.is_some()
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// `||w||`, excluding the bias.
    pub fn weight_norm(&self) -> T {
        self.weights.iter().map(|&w| w * w).sum::<T>().sqrt()
    }

    /// `w.x + b`; a constant model returns 0.
    pub fn decision_value(&self, x: &SparseVector<T>) -> T {
        if self.is_constant() {
            return T::zero();
        }
        x.dot_dense(&self.weights) + self.bias
    }

    pub fn predict(&self, x: &SparseVector<T>) -> Label {
        match self.constant_fallback {
            Some(label) => label,
            None => Label::from_decision(self.decision_value(x)),
        }
    }

    /// Geometric margin `|w.x + b| / ||w||`, or 0 when `w = 0`.
    pub fn hyperplane_distance(&self, x: &SparseVector<T>) -> T {
        let norm = self.weight_norm();
        if norm.is_zero() {
            return T::zero();
        }
        self.decision_value(x).abs() / norm
    }

    pub fn distance(&self, x: &SparseVector<T>, kind: DistanceKind) -> T {
        match kind {
            DistanceKind::Geometric => self.hyperplane_distance(x),
            DistanceKind::Functional => self.decision_value(x).abs(),
        }
    }
}

/// Trains a linear SVM. Single-class input yields a constant model.
pub fn train<T, V>(examples: &[V], labels: &[Label], params: &TrainParams<T>) -> Result<Model<T>>
where
    T: Scalar,
    V: Borrow<SparseVector<T>>,
{
    if examples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if examples.len() != labels.len() {
        return Err(Error::LengthMismatch(examples.len(), labels.len()));
    }
    if params.c.is_nan() || params.c <= T::zero() {
        return Err(Error::InvalidParameter(format!("C must be positive, got {}", params.c)));
    }
    let n = examples.len();
    if labels.iter().all(|&l| l == labels[0]) {
        return Ok(Model::constant(labels[0], n, params.c));
    }

    let dim = examples.iter().map(|x| x.borrow().dim()).max().unwrap_or(0);
    let c = params.c;
    let ys: Vec<T> = labels.iter().map(|l| l.sign()).collect();
    // Diagonal of the Gram matrix including the bias feature, so always >= 1.
    let diag: Vec<T> = examples
        .iter()
        .map(|x| x.borrow().squared_norm() + T::one())
        .collect();

    let mut alphas = vec![T::zero(); n];
    let mut weights = vec![T::zero(); dim];
    let mut bias = T::zero();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut epochs = 0;
    let mut converged = false;

    while epochs < params.max_iter {
        epochs += 1;
        order.shuffle(&mut rng);
        let mut max_violation = T::zero();
        for &i in &order {
            let x = examples[i].borrow();
            let y = ys[i];
            let grad = y * (x.dot_dense(&weights) + bias) - T::one();
            let projected = if alphas[i].is_zero() {
                grad.min(T::zero())
            } else if alphas[i] >= c {
                grad.max(T::zero())
            } else {
                grad
            };
            max_violation = max_violation.max(projected.abs());
            if projected.is_zero() {
                continue;
            }
            let old = alphas[i];
            let new = (old - grad / diag[i]).max(T::zero()).min(c);
            alphas[i] = new;
            let step = (new - old) * y;
            if step.is_zero() {
                continue;
            }
            for (j, v) in x.iter() {
                weights[j] = weights[j] + step * v;
            }
            bias = bias + step;
        }
        if max_violation < params.tol {
            converged = true;
            break;
        }
    }

    Ok(Model {
        weights,
        bias,
        alphas,
        c,
        constant_fallback: None,
        epochs,
        converged,
    })
}

/// Dual objective `sum a - 1/2 ||sum a y z||^2` with `z = (x, 1)`.
pub fn dual_objective<T, V>(examples: &[V], labels: &[Label], alphas: &[T]) -> T
where
    T: Scalar,
    V: Borrow<SparseVector<T>>,
{
    let dim = examples.iter().map(|x| x.borrow().dim()).max().unwrap_or(0);
    let mut w = vec![T::zero(); dim];
    let mut b = T::zero();
    for ((x, l), &a) in examples.iter().zip(labels).zip(alphas) {
        let s = a * l.sign::<T>();
        for (j, v) in x.borrow().iter() {
            w[j] = w[j] + s * v;
        }
        b = b + s;
    }
    let sq = w.iter().map(|&v| v * v).sum::<T>() + b * b;
    alphas.iter().copied().sum::<T>() - sq / T::of(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(dense: &[f64]) -> SparseVector<f64> {
        SparseVector::from_dense(dense)
    }

    #[test]
    fn two_point_analytic_case() {
        let xs = vec![sv(&[1.0, 0.0]), sv(&[-1.0, 0.0])];
        let ys = vec![Label::Positive, Label::Negative];
        let params = TrainParams {
            tol: 1e-10,
            ..Default::default()
        };
        let m = train(&xs, &ys, &params).unwrap();
        assert!((m.weights()[0] - 1.0).abs() < 1e-6);
        assert!(m.weights().get(1).map_or(0.0, |w| *w).abs() < 1e-6);
        assert!(m.bias().abs() < 1e-6);
        for a in m.alphas() {
            assert!((a - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn single_class_is_constant() {
        let xs = vec![sv(&[1.0]), sv(&[0.5, 2.0])];
        let ys = vec![Label::Positive; 2];
        let m = train(&xs, &ys, &TrainParams::<f64>::default()).unwrap();
        assert_eq!(m.constant_fallback(), Some(Label::Positive));
        assert!(m.weights().iter().all(|w| *w == 0.0));
        assert_eq!(m.decision_value(&xs[0]), 0.0);
        assert_eq!(m.predict(&xs[1]), Label::Positive);
        assert_eq!(m.hyperplane_distance(&xs[1]), 0.0);
    }

    #[test]
    fn empty_training_set() {
        let xs: Vec<SparseVector<f64>> = vec![];
        assert!(matches!(
            train(&xs, &[], &TrainParams::default()),
            Err(Error::EmptyTrainingSet)
        ));
    }

    #[test]
    fn decision_value_arithmetic() {
        let zero = Model::from_weights(vec![0.0, 0.0], 0.0);
        assert_eq!(zero.decision_value(&sv(&[0.3, 7.0])), 0.0);
        let m = Model::from_weights(vec![3.0, 4.0], 1.0);
        let x = SparseVector::from_sorted(vec![(0, 1.0)]).unwrap();
        assert_eq!(m.decision_value(&x), 4.0);
    }

    #[test]
    fn predict_tie_is_positive() {
        let m = Model::from_weights(vec![1.0], 0.0);
        assert_eq!(m.predict(&sv(&[2.5])), Label::Positive);
        assert_eq!(m.predict(&sv(&[-0.1])), Label::Negative);
        assert_eq!(m.predict(&sv(&[0.0])), Label::Positive);
    }

    #[test]
    fn geometric_distance() {
        let m = Model::<f64>::from_weights(vec![3.0, 4.0], 0.0);
        let x = SparseVector::from_sorted(vec![(0, 1.0)]).unwrap();
        assert!((m.hyperplane_distance(&x) - 0.6).abs() < 1e-15);
        assert_eq!(m.distance(&x, DistanceKind::Functional), 3.0);
        let on_plane = sv(&[4.0, -3.0]);
        assert_eq!(m.hyperplane_distance(&on_plane), 0.0);
    }

    #[test]
    fn f32_training_works() {
        let xs = vec![
            SparseVector::<f32>::from_dense(&[1.0, 0.0]),
            SparseVector::from_dense(&[-1.0, 0.0]),
        ];
        let m = train(&xs, &[Label::Positive, Label::Negative], &TrainParams::default()).unwrap();
        assert_eq!(m.predict(&xs[0]), Label::Positive);
        assert_eq!(m.predict(&xs[1]), Label::Negative);
    }

    fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>)> {
        (2usize..=8).prop_flat_map(|n| {
            (
                proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, 3), n),
                proptest::collection::vec(any::<bool>(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn box_and_primal_dual_consistency((pts, ys) in instance(), seed in any::<u64>()) {
            let xs: Vec<_> = pts.iter().map(|p| sv(p)).collect();
            let labels: Vec<_> = ys.iter().map(|&b| if b { Label::Positive } else { Label::Negative }).collect();
            let m = train(&xs, &labels, &TrainParams { seed, ..Default::default() }).unwrap();
            if m.is_constant() {
                prop_assert!(m.weights().iter().all(|w| *w == 0.0));
                return Ok(());
            }
            for &a in m.alphas() {
                prop_assert!((0.0..=1.0).contains(&a));
            }
            let mut w = [0.0; 3];
            let mut b = 0.0;
            for ((x, l), a) in xs.iter().zip(&labels).zip(m.alphas()) {
                for (j, v) in x.iter() { w[j] += a * l.sign::<f64>() * v; }
                b += a * l.sign::<f64>();
            }
            for (j, wj) in m.weights().iter().enumerate() {
                prop_assert!((w[j] - wj).abs() < 1e-8);
            }
            prop_assert!((b - m.bias()).abs() < 1e-8);
        }

        #[test]
        fn distance_ranking_matches_decision_ranking((pts, ys) in instance()) {
            let xs: Vec<_> = pts.iter().map(|p| sv(p)).collect();
            let labels: Vec<_> = ys.iter().map(|&b| if b { Label::Positive } else { Label::Negative }).collect();
            let m = train(&xs, &labels, &TrainParams::default()).unwrap();
            let mut by_dist: Vec<usize> = (0..xs.len()).collect();
            let mut by_f = by_dist.clone();
            by_dist.sort_by(|&a, &b| m.hyperplane_distance(&xs[a]).partial_cmp(&m.hyperplane_distance(&xs[b])).unwrap().then(a.cmp(&b)));
            by_f.sort_by(|&a, &b| m.decision_value(&xs[a]).abs().partial_cmp(&m.decision_value(&xs[b]).abs()).unwrap().then(a.cmp(&b)));
            prop_assert_eq!(by_dist, by_f);
        }

        #[test]
        fn deterministic_per_seed((pts, ys) in instance(), seed in any::<u64>()) {
            let xs: Vec<_> = pts.iter().map(|p| sv(p)).collect();
            let labels: Vec<_> = ys.iter().map(|&b| if b { Label::Positive } else { Label::Negative }).collect();
            let p = TrainParams { seed, ..Default::default() };
            let a = train(&xs, &labels, &p).unwrap();
            let b = train(&xs, &labels, &p).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
