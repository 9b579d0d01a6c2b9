//! Reference implementations shared by the integration and acceptance tests.
//! None of these call into the library code they check.

#![allow(dead_code, clippy::needless_range_loop)]

use alstop::Label;
use rand::Rng;

/// Cohen's kappa from an explicit 2x2 contingency table.
pub fn kappa_table(a: &[Label], b: &[Label]) -> f64 {
    let mut table = [[0usize; 2]; 2];
    for (x, y) in a.iter().zip(b) {
        let i = usize::from(*x == Label::Positive);
        let j = usize::from(*y == Label::Positive);
        table[i][j] += 1;
    }
    let n = a.len() as f64;
    let observed = (table[0][0] + table[1][1]) as f64 / n;
    let row = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let col = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let expected = (row[0] * col[0] + row[1] * col[1]) as f64 / (n * n);
    if expected == 1.0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    (observed - expected) / (1.0 - expected)
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, p_pos: f64) -> Vec<Label> {
    (0..n)
        .map(|_| if rng.gen_bool(p_pos) { Label::Positive } else { Label::Negative })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveMetrics {
    pub f1: f64,
    pub f2: f64,
    pub acc: f64,
    pub bac: f64,
}

/// Counts each confusion cell with its own pass over the pairs.
pub fn naive_metrics(preds: &[Label], gold: &[Label]) -> NaiveMetrics {
    use Label::{Negative as N, Positive as P};
    let count = |p: Label, g: Label| preds.iter().zip(gold).filter(|&(&x, &y)| x == p && y == g).count();
    let (tp, fp, tn, fn_) = (count(P, P), count(P, N), count(N, N), count(N, P));
    let div = |a: usize, b: usize| if b == 0 { None } else { Some(a as f64 / b as f64) };
    let f = |beta: f64| match (div(tp, tp + fp), div(tp, tp + fn_)) {
        (Some(p), Some(r)) if beta * beta * p + r != 0.0 => (1.0 + beta * beta) * p * r / (beta * beta * p + r),
        _ => 0.0,
    };
    NaiveMetrics {
        f1: f(1.0),
        f2: f(2.0),
        acc: (tp + tn) as f64 / preds.len() as f64,
        bac: (div(tp, tp + fn_).unwrap_or(0.0) + div(tn, tn + fp).unwrap_or(0.0)) / 2.0,
    }
}

/// Dense training instance for the SVM oracle; the bias column is implicit.
#[derive(Debug, Clone)]
pub struct Instance {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
}

impl Instance {
    /// Two-class instance with `n` points in `d` dimensions, entries in [-1, 1].
    pub fn random<R: Rng>(rng: &mut R, n: usize, d: usize) -> Self {
        loop {
            let xs: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect())
                .collect();
            let ys: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
            if ys.iter().any(|&y| y > 0.0) && ys.iter().any(|&y| y < 0.0) {
                return Self { xs, ys };
            }
        }
    }

    /// `Q_ij = y_i y_j (x_i . x_j + 1)`.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let n = self.xs.len();
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = self.xs[i].iter().zip(&self.xs[j]).map(|(a, b)| a * b).sum();
                q[i][j] = self.ys[i] * self.ys[j] * (dot + 1.0);
            }
        }
        q
    }

    pub fn dual(&self, alpha: &[f64]) -> f64 {
        let q = self.gram();
        let mut quad = 0.0;
        for i in 0..alpha.len() {
            for j in 0..alpha.len() {
                quad += alpha[i] * alpha[j] * q[i][j];
            }
        }
        alpha.iter().sum::<f64>() - 0.5 * quad
    }

    /// Exhaustive grid over `[0, c]^n` at the given step. Only feasible for
    /// very small `n`.
    pub fn grid_optimum(&self, c: f64, step: f64) -> f64 {
        let n = self.xs.len();
        let steps = (c / step).round() as usize;
        let mut idx = vec![0usize; n];
        let mut best = f64::NEG_INFINITY;
        loop {
            let alpha: Vec<f64> = idx.iter().map(|&k| k as f64 * step).collect();
            best = best.max(self.dual(&alpha));
            let mut pos = 0;
            loop {
                if pos == n {
                    return best;
                }
                idx[pos] += 1;
                if idx[pos] <= steps {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Exact dual optimum by enumerating every face of the box. Each
    /// coordinate is at 0, at `c`, or free; on each face the free coordinates
    /// solve the stationarity system, and box-feasible solutions are scored.
    pub fn exact_optimum(&self, c: f64) -> f64 {
        let n = self.xs.len();
        let q = self.gram();
        let mut best = f64::NEG_INFINITY;
        let faces = 3usize.pow(n as u32);
        for code in 0..faces {
            let mut state = vec![0u8; n];
            let mut rest = code;
            for s in state.iter_mut() {
                *s = (rest % 3) as u8;
                rest /= 3;
            }
            let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
            let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
            if !free.is_empty() {
                let m = free.len();
                let mut a = vec![vec![0.0; m + 1]; m];
                for (r, &i) in free.iter().enumerate() {
                    for (k, &j) in free.iter().enumerate() {
                        a[r][k] = q[i][j];
                    }
                    let fixed: f64 = (0..n).filter(|&j| state[j] == 1).map(|j| q[i][j] * c).sum();
                    a[r][m] = 1.0 - fixed;
                }
                let Some(sol) = solve(a) else { continue };
                if sol.iter().any(|&v| v < -1e-9 || v > c + 1e-9) {
                    continue;
                }
                for (r, &i) in free.iter().enumerate() {
                    alpha[i] = sol[r].clamp(0.0, c);
                }
            }
            best = best.max(self.dual(&alpha));
        }
        best
    }
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let pivot = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, pivot);
        for r in 0..m {
            if r != col {
                let factor = a[r][col] / a[col][col];
                for k in col..=m {
                    a[r][k] -= factor * a[col][k];
                }
            }
        }
    }
    Some((0..m).map(|r| a[r][m] / a[r][r]).collect())
}

/// Stop iteration of a confidence rule by rescanning the whole history after
/// every value: stop once the last `eps` consecutive steps all satisfy `cmp`.
pub fn reference_conf_stop(values: &[f64], eps: usize, strict: bool) -> Option<usize> {
    (0..values.len()).find(|&t| {
        t >= eps
            && (t - eps..t).all(|i| {
                if strict {
                    values[i + 1] < values[i]
                } else {
                    values[i + 1] <= values[i]
                }
            })
    })
}
