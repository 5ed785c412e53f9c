//! Reference solvers for validating the SMO trainer from an independent
//! direction: a brute-force projected-gradient ascent on the dual problem,
//! a from-scratch dual objective evaluation, and a from-scratch KKT audit.
//!
//! Nothing here shares iteration logic with the production trainer; this
//! module exists so tests can cross-check the two routes against each other.

use super::kernel::{kernel_eval, KernelSpec};
use crate::{Error, Result};

/// Result of the projected-gradient reference solver.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub alphas: Vec<f64>,
    pub dual_objective: f64,
}

/// Dual objective Σλ − ½ ΣΣ λ_i λ_j y_i y_j k(x_i, x_j), evaluated directly
/// from the multipliers with no cached state.
pub fn dual_objective(
    features: &[Vec<f64>],
    labels: &[i32],
    alphas: &[f64],
    kernel: &KernelSpec,
) -> Result<f64> {
    let n = features.len();
    if labels.len() != n || alphas.len() != n {
        return Err(Error::Incompatible(
            "features, labels and alphas must have equal lengths".into(),
        ));
    }
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alphas[i]
                * alphas[j]
                * (labels[i] * labels[j]) as f64
                * kernel_eval(kernel, &features[i], &features[j])?;
        }
    }
    Ok(alphas.iter().sum::<f64>() - 0.5 * quad)
}

/// Projects `z` onto {0 ≤ α ≤ C} ∩ {yᵀα = 0} by bisecting the Lagrange
/// multiplier of the equality constraint.
fn project(z: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let eval = |nu: f64| -> (Vec<f64>, f64) {
        let alpha: Vec<f64> = z
            .iter()
            .zip(y)
            .map(|(&zi, &yi)| (zi - nu * yi).clamp(0.0, c))
            .collect();
        let h = alpha.iter().zip(y).map(|(a, yy)| a * yy).sum::<f64>();
        (alpha, h)
    };
    let scale = z.iter().fold(c, |m, v| m.max(v.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-scale, scale);
    // h is nonincreasing in nu; widen until it brackets zero.
    while eval(lo).1 < 0.0 {
        lo *= 2.0;
    }
    while eval(hi).1 > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid).1 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    eval(0.5 * (lo + hi)).0
}

/// Maximizes the soft-margin dual by projected-gradient ascent with a
/// Lipschitz step. Intended for small problems (≲ tens of points) where
/// brute force is affordable; serves as the ground truth for SMO.
pub fn qp_dual_oracle(
    features: &[Vec<f64>],
    labels: &[i32],
    kernel: &KernelSpec,
    c: f64,
    iterations: usize,
) -> Result<OracleSolution> {
    let n = features.len();
    if n < 2 || labels.len() != n {
        return Err(Error::Validation(
            "oracle needs >= 2 labeled points".into(),
        ));
    }
    if labels.iter().any(|&l| l != 1 && l != -1) {
        return Err(Error::Validation("labels must be -1 or +1".into()));
    }
    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();

    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            q[i * n + j] =
                y[i] * y[j] * kernel_eval(kernel, &features[i], &features[j])?;
        }
    }
    // Safe Lipschitz bound: infinity norm of Q.
    let lipschitz = (0..n)
        .map(|i| (0..n).map(|j| q[i * n + j].abs()).sum::<f64>())
        .fold(1e-12, f64::max);
    let step = 1.0 / lipschitz;

    let mut alpha = vec![0.0; n];
    for _ in 0..iterations {
        // gradient of the dual: 1 − Qα
        let z: Vec<f64> = (0..n)
            .map(|i| {
                let qa: f64 = (0..n).map(|j| q[i * n + j] * alpha[j]).sum();
                alpha[i] + step * (1.0 - qa)
            })
            .collect();
        let next = project(&z, &y, c);
        let moved = alpha
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        alpha = next;
        if moved < 1e-14 {
            break;
        }
    }

    let dual = dual_objective(features, labels, &alpha, kernel)?;
    Ok(OracleSolution {
        alphas: alpha,
        dual_objective: dual,
    })
}

/// Worst-case KKT violation of a candidate solution, recomputed from the
/// raw training data: margins are built by direct kernel sums, independent
/// of any trainer state.
pub fn kkt_max_violation(
    features: &[Vec<f64>],
    labels: &[i32],
    alphas: &[f64],
    bias: f64,
    c: f64,
    kernel: &KernelSpec,
) -> Result<f64> {
    let n = features.len();
    if labels.len() != n || alphas.len() != n {
        return Err(Error::Incompatible(
            "features, labels and alphas must have equal lengths".into(),
        ));
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut f = bias;
        for j in 0..n {
            f += alphas[j] * labels[j] as f64 * kernel_eval(kernel, &features[i], &features[j])?;
        }
        let margin = labels[i] as f64 * f - 1.0;
        let viol = if alphas[i] <= 0.0 {
            (-margin).max(0.0)
        } else if alphas[i] >= c {
            margin.max(0.0)
        } else {
            margin.abs()
        };
        worst = worst.max(viol);
    }
    Ok(worst)
}
