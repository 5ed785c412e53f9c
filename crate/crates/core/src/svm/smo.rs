//! Soft-margin binary SVM training by sequential minimal optimization.
//!
//! Solves the dual problem
//!   max Σλ_i − ½ ΣΣ λ_i λ_j y_i y_j k(x_i, x_j)
//!   s.t. 0 ≤ λ_i ≤ C, Σ λ_i y_i = 0
//! by repeatedly optimizing the maximal-violating pair analytically until
//! the duality gap of the pair selection drops below the tolerance. The
//! kernel matrix is precomputed densely for small problems and served from
//! a bounded row cache for large ones.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::kernel::{kernel_eval_unchecked, KernelSpec};
use crate::{Error, Result};

/// Soft-margin training settings. `c` is the box constraint, `tol` the
/// stopping tolerance on the maximal KKT violation, `max_iter` the pair
/// update budget after which training reports non-convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c: 10.0,
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::Validation(format!("C = {} must be > 0", self.c)));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::Validation(format!(
                "tolerance {} must be > 0",
                self.tol
            )));
        }
        Ok(())
    }
}

/// A trained binary classifier: only the pairs with λ_i > 0 are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// λ_i y_i per support vector.
    pub alpha_y: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
}

impl BinarySvmModel {
    /// The raw decision value Σ λ_i y_i k(x, sv_i) + b.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if let Some(sv) = self.support_vectors.first() {
            if sv.len() != x.len() {
                return Err(Error::Incompatible(format!(
                    "input has {} features, model expects {}",
                    x.len(),
                    sv.len()
                )));
            }
        }
        let mut sum = self.bias;
        for (sv, ay) in self.support_vectors.iter().zip(&self.alpha_y) {
            sum += ay * kernel_eval_unchecked(&self.kernel, x, sv);
        }
        Ok(sum)
    }

    /// The predicted label in {−1, +1}; a decision value of exactly 0 maps
    /// to +1.
    pub fn decision(&self, x: &[f64]) -> Result<i32> {
        Ok(if self.decision_value(x)? >= 0.0 { 1 } else { -1 })
    }
}

/// Everything the trainer knows at termination, for audits and reports.
#[derive(Debug, Clone)]
pub struct SmoOutcome {
    pub model: BinarySvmModel,
    /// Final multipliers for *all* training points, zeros included.
    pub alphas: Vec<f64>,
    /// Pair updates performed.
    pub iterations: usize,
    /// Final maximal KKT violation gap m(λ) − M(λ).
    pub final_gap: f64,
    /// Σ λ_i y_i, identically preserved by the updates (≈ 0).
    pub sum_alpha_y: f64,
    /// Dual objective Σλ − ½ λᵀQλ at termination.
    pub dual_objective: f64,
    /// Worst single-point KKT violation under the final bias.
    pub max_kkt_violation: f64,
}

const DENSE_GRAM_LIMIT: usize = 4096;
/// Lazy row cache budget in matrix entries (64 MB of f64).
const LAZY_CACHE_ENTRIES: usize = 8 * 1024 * 1024;

enum GramStore {
    Dense(Vec<f64>),
    Lazy {
        rows: HashMap<usize, Vec<f64>>,
        fifo: VecDeque<usize>,
        cap: usize,
    },
}

struct Gram<'a> {
    x: &'a [Vec<f64>],
    kernel: KernelSpec,
    store: GramStore,
    n: usize,
}

impl<'a> Gram<'a> {
    fn new(x: &'a [Vec<f64>], kernel: KernelSpec) -> Self {
        let n = x.len();
        let store = if n <= DENSE_GRAM_LIMIT {
            let mut k = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let v = kernel_eval_unchecked(&kernel, &x[i], &x[j]);
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            GramStore::Dense(k)
        } else {
            GramStore::Lazy {
                rows: HashMap::new(),
                fifo: VecDeque::new(),
                cap: (LAZY_CACHE_ENTRIES / n).max(64),
            }
        };
        Self { x, kernel, store, n }
    }

    /// Makes row `i` resident; never evicts a row in `pinned`.
    fn ensure(&mut self, i: usize, pinned: &[usize]) {
        if let GramStore::Lazy { rows, fifo, cap } = &mut self.store {
            if rows.contains_key(&i) {
                return;
            }
            let row = (0..self.n)
                .map(|j| kernel_eval_unchecked(&self.kernel, &self.x[i], &self.x[j]))
                .collect();
            while rows.len() >= *cap {
                let Some(pos) = fifo.iter().position(|k| !pinned.contains(k)) else {
                    break;
                };
                let evict = fifo.remove(pos).unwrap();
                rows.remove(&evict);
            }
            rows.insert(i, row);
            fifo.push_back(i);
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        match &self.store {
            GramStore::Dense(k) => &k[i * self.n..(i + 1) * self.n],
            GramStore::Lazy { rows, .. } => rows
                .get(&i)
                .expect("gram row must be ensured before use"),
        }
    }
}

/// Trains a binary soft-margin SVM. `labels` must contain only −1 and +1,
/// with both classes present.
pub fn smo_train(
    features: &[Vec<f64>],
    labels: &[i32],
    kernel: &KernelSpec,
    cfg: &TrainConfig,
) -> Result<SmoOutcome> {
    kernel.validate()?;
    cfg.validate()?;
    let n = features.len();
    if n != labels.len() {
        return Err(Error::Incompatible(format!(
            "{n} feature rows but {} labels",
            labels.len()
        )));
    }
    if n < 2 {
        return Err(Error::Validation("need at least 2 training points".into()));
    }
    let dim = features[0].len();
    if features.iter().any(|f| f.len() != dim) {
        return Err(Error::Validation(
            "training rows have inconsistent dimensions".into(),
        ));
    }
    if labels.iter().any(|&l| l != 1 && l != -1) {
        return Err(Error::Validation(
            "binary training labels must be -1 or +1".into(),
        ));
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::Validation(
            "both classes must be present in binary training data".into(),
        ));
    }

    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let c = cfg.c;
    let mut alpha = vec![0.0f64; n];
    // G_i = (Qλ)_i − 1; starts at −1 with λ = 0.
    let mut g = vec![-1.0f64; n];
    let mut gram = Gram::new(features, *kernel);

    let in_up = |y_i: f64, a_i: f64| (y_i > 0.0 && a_i < c) || (y_i < 0.0 && a_i > 0.0);
    let in_low = |y_i: f64, a_i: f64| (y_i > 0.0 && a_i > 0.0) || (y_i < 0.0 && a_i < c);

    let mut iterations = 0usize;
    let (final_m, final_mm) = loop {
        // Maximal-violating pair: i maximizes −y_i G_i over I_up,
        // j minimizes −y_j G_j over I_low.
        let mut i_sel = None;
        let mut m = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut mm = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * g[t];
            if in_up(y[t], alpha[t]) && v > m {
                m = v;
                i_sel = Some(t);
            }
            if in_low(y[t], alpha[t]) && v < mm {
                mm = v;
                j_sel = Some(t);
            }
        }
        let (m, mm) = (
            if i_sel.is_some() { m } else { mm },
            if j_sel.is_some() { mm } else { m },
        );
        if m - mm <= cfg.tol {
            break (m, mm);
        }
        if iterations >= cfg.max_iter {
            return Err(Error::SvmNoConvergence(format!(
                "maximal KKT violation {} still above tolerance {} after {} pair updates",
                m - mm,
                cfg.tol,
                iterations
            )));
        }
        let (i, j) = (i_sel.unwrap(), j_sel.unwrap());

        gram.ensure(i, &[j]);
        gram.ensure(j, &[i]);
        let eta = {
            let k_i = gram.row(i);
            let k_j = gram.row(j);
            (k_i[i] + k_j[j] - 2.0 * k_i[j]).max(1e-12)
        };

        // Analytic two-variable step (indices (1,2) = (i,j)), clipped to the
        // feasible segment.
        let (lo, hi) = if labels[i] != labels[j] {
            ((alpha[j] - alpha[i]).max(0.0), (c + alpha[j] - alpha[i]).min(c))
        } else {
            ((alpha[i] + alpha[j] - c).max(0.0), (alpha[i] + alpha[j]).min(c))
        };
        let mut aj_new = alpha[j] + y[j] * (y[i] * g[i] - y[j] * g[j]) / eta;
        aj_new = aj_new.clamp(lo, hi);
        if (aj_new - 0.0).abs() < 1e-12 * c {
            aj_new = 0.0;
        } else if (aj_new - c).abs() < 1e-12 * c {
            aj_new = c;
        }
        let delta_j = aj_new - alpha[j];
        let delta_i = -y[i] * y[j] * delta_j;
        let mut ai_new = alpha[i] + delta_i;
        if (ai_new - 0.0).abs() < 1e-12 * c {
            ai_new = 0.0;
        } else if (ai_new - c).abs() < 1e-12 * c {
            ai_new = c;
        }
        let delta_i = ai_new - alpha[i];
        alpha[i] = ai_new;
        alpha[j] = aj_new;

        let k_i = gram.row(i);
        let k_j = gram.row(j);
        for t in 0..n {
            g[t] += y[t] * (y[i] * k_i[t] * delta_i + y[j] * k_j[t] * delta_j);
        }
        iterations += 1;
    };

    let bias = (final_m + final_mm) / 2.0;
    let sum_alpha_y: f64 = alpha.iter().zip(&y).map(|(a, yy)| a * yy).sum();
    let dual_objective: f64 = 0.5
        * alpha
            .iter()
            .zip(&g)
            .map(|(a, gg)| a * (1.0 - gg))
            .sum::<f64>();

    // Single-point KKT audit under the final bias: for the margin residual
    // g_i = y_i (f_i + b) − 1 = G_i + y_i b, interior points need |g| ≤ tol
    // and bound points the matching one-sided inequality.
    let mut max_kkt_violation = 0.0f64;
    for t in 0..n {
        let margin = g[t] + y[t] * bias;
        let viol = if alpha[t] <= 0.0 {
            (-margin).max(0.0)
        } else if alpha[t] >= c {
            margin.max(0.0)
        } else {
            margin.abs()
        };
        max_kkt_violation = max_kkt_violation.max(viol);
    }

    let mut support_vectors = Vec::new();
    let mut alpha_y = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_vectors.push(features[t].clone());
            alpha_y.push(alpha[t] * y[t]);
        }
    }

    Ok(SmoOutcome {
        model: BinarySvmModel {
            support_vectors,
            alpha_y,
            bias,
            kernel: *kernel,
        },
        alphas: alpha,
        iterations,
        final_gap: final_m - final_mm,
        sum_alpha_y,
        dual_objective,
        max_kkt_violation,
    })
}
