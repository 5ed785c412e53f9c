//! The three SVM kernels: polynomial (x·x')^d, radial basis
//! exp(−‖x−x'‖/σ), and sigmoid tanh(β x·x').
//!
//! The radial kernel uses the *unsquared* Euclidean distance by default (a
//! Laplacian-type kernel); the conventional Gaussian exp(−‖x−x'‖²/(2σ²)) is
//! available through the `rbf_squared` switch.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Polynomial,
    Rbf,
    Sigmoid,
}

/// Kernel family plus its single controlling factor: the degree d for
/// polynomial (positive integer), the width σ > 0 for rbf, the slope β
/// for sigmoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub controlling_factor: f64,
    /// Use exp(−‖x−x'‖²/(2σ²)) instead of exp(−‖x−x'‖/σ). Only affects rbf.
    #[serde(default)]
    pub rbf_squared: bool,
}

impl KernelSpec {
    pub fn polynomial(degree: u32) -> Self {
        Self {
            kind: KernelKind::Polynomial,
            controlling_factor: degree as f64,
            rbf_squared: false,
        }
    }

    pub fn rbf(sigma: f64) -> Self {
        Self {
            kind: KernelKind::Rbf,
            controlling_factor: sigma,
            rbf_squared: false,
        }
    }

    pub fn sigmoid(beta: f64) -> Self {
        Self {
            kind: KernelKind::Sigmoid,
            controlling_factor: beta,
            rbf_squared: false,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            KernelKind::Polynomial => "polynomial",
            KernelKind::Rbf => "rbf",
            KernelKind::Sigmoid => "sigmoid",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.controlling_factor;
        if !f.is_finite() {
            return Err(Error::Validation(format!(
                "kernel controlling factor {f} must be finite"
            )));
        }
        match self.kind {
            KernelKind::Polynomial => {
                if f < 1.0 || f.fract() != 0.0 {
                    return Err(Error::Validation(format!(
                        "polynomial degree {f} must be a positive integer"
                    )));
                }
            }
            KernelKind::Rbf => {
                if !(f > 0.0) {
                    return Err(Error::Validation(format!("rbf width {f} must be > 0")));
                }
            }
            KernelKind::Sigmoid => {}
        }
        Ok(())
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Evaluates the kernel on two equal-length vectors.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Incompatible(format!(
            "kernel arguments have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    spec.validate()?;
    Ok(kernel_eval_unchecked(spec, x, y))
}

/// [`kernel_eval`] without the per-call validation; used on hot paths where
/// the spec and dimensions were checked once up front.
pub(crate) fn kernel_eval_unchecked(spec: &KernelSpec, x: &[f64], y: &[f64]) -> f64 {
    match spec.kind {
        KernelKind::Polynomial => dot(x, y).powi(spec.controlling_factor as i32),
        KernelKind::Rbf => {
            let d2: f64 = x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .max(0.0);
            let sigma = spec.controlling_factor;
            if spec.rbf_squared {
                (-d2 / (2.0 * sigma * sigma)).exp()
            } else {
                (-d2.sqrt() / sigma).exp()
            }
        }
        KernelKind::Sigmoid => (spec.controlling_factor * dot(x, y)).tanh(),
    }
}
