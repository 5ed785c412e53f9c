//! Box-constrained Levenberg–Marquardt least-squares fitting.
//!
//! The core solver works on any residual closure over a flat parameter
//! vector; [`lm_fit`] binds it to the forward model, fitting named profile
//! parameters of a structure against a target Mueller signature.
//!
//! Normal equations use Marquardt scaling, (JᵀJ + μ diag(JᵀJ)) δ = −Jᵀr:
//! accepted steps shrink μ, rejected trials grow it and reuse the Jacobian.
//! Accepted iterates are projected onto the bounds, which act as hard
//! limits exactly like the rough ranges they come from.

use std::collections::BTreeMap;
use std::time::Instant;

use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::forward::mueller::Signature;
use crate::forward::structure::{IncidenceConfig, StructureModel};
use crate::forward::{simulate_signature, ELEMENT_ORDER};
use crate::materials::MaterialLibrary;
use crate::{Error, Result};

/// Iteration hyper-parameters; the defaults are conventional LM settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Convergence when the cost (squared residual norm) drops below this.
    pub cost_tolerance: f64,
    /// Convergence when the relative step size drops below this.
    pub step_tolerance: f64,
    /// Initial damping μ.
    pub initial_damping: f64,
    /// Factor applied to μ on a rejected step (> 1).
    pub damping_up: f64,
    /// Factor applied to μ on an accepted step (in (0, 1)).
    pub damping_down: f64,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            cost_tolerance: 1e-10,
            step_tolerance: 1e-8,
            initial_damping: 1e-3,
            damping_up: 10.0,
            damping_down: 0.1,
            fd_step: 1e-6,
        }
    }
}

impl LmConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("cost_tolerance", self.cost_tolerance),
            ("step_tolerance", self.step_tolerance),
            ("initial_damping", self.initial_damping),
            ("fd_step", self.fd_step),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} = {v} must be > 0")));
            }
        }
        if !(self.damping_up > 1.0) {
            return Err(Error::Validation(format!(
                "damping_up = {} must be > 1",
                self.damping_up
            )));
        }
        if !(self.damping_down > 0.0 && self.damping_down < 1.0) {
            return Err(Error::Validation(format!(
                "damping_down = {} must lie in (0, 1)",
                self.damping_down
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Validation("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// One accepted iterate: cost (squared residual norm) and the damping in
/// effect after the acceptance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub cost: f64,
    pub damping: f64,
}

/// Outcome of the flat-vector core solver.
#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Final squared residual norm.
    pub cost: f64,
    /// Accepted iterations performed.
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TracePoint>,
}

/// Named-parameter fit result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub params: BTreeMap<String, f64>,
    /// Euclidean norm of the final residual vector.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_s: f64,
    pub trace: Vec<TracePoint>,
}

fn check_bounds(init: &[f64], bounds: &[(f64, f64)]) -> Result<()> {
    if init.len() != bounds.len() {
        return Err(Error::Incompatible(format!(
            "{} parameters but {} bounds",
            init.len(),
            bounds.len()
        )));
    }
    for (i, (&p, &(lo, hi))) in init.iter().zip(bounds).enumerate() {
        if !(lo < hi) {
            return Err(Error::Validation(format!(
                "bounds[{i}] = ({lo}, {hi}) must satisfy low < high"
            )));
        }
        if !(lo..=hi).contains(&p) {
            return Err(Error::Validation(format!(
                "initial parameter {i} = {p} lies outside [{lo}, {hi}]"
            )));
        }
    }
    Ok(())
}

/// Forward-difference Jacobian of `residual_fn` at `params`.
///
/// The step for parameter i is `fd_step · max(|p_i|, width_i)` with
/// `width_i` the bound interval width; the difference direction flips to
/// backward when a forward step would leave the bounds. Columns are
/// independent residual evaluations and run in parallel.
pub fn finite_diff_jacobian<F>(
    residual_fn: &F,
    params: &[f64],
    fd_step: f64,
    bounds: &[(f64, f64)],
) -> Result<Array2<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let r0 = residual_fn(params)?;
    jacobian_with_base(residual_fn, params, &r0, fd_step, bounds)
}

fn jacobian_with_base<F>(
    residual_fn: &F,
    params: &[f64],
    r0: &[f64],
    fd_step: f64,
    bounds: &[(f64, f64)],
) -> Result<Array2<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    check_bounds(params, bounds)?;
    if !(fd_step > 0.0) {
        return Err(Error::Validation(format!("fd_step = {fd_step} must be > 0")));
    }
    let n_par = params.len();
    let n_res = r0.len();
    let columns: Vec<Vec<f64>> = (0..n_par)
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = bounds[i];
            let mut h = fd_step * params[i].abs().max(hi - lo);
            if params[i] + h > hi {
                h = -h;
            }
            let mut shifted = params.to_vec();
            shifted[i] += h;
            let r1 = residual_fn(&shifted)?;
            if r1.len() != n_res {
                return Err(Error::Numerical(format!(
                    "residual length changed from {n_res} to {} during differentiation",
                    r1.len()
                )));
            }
            let col: Vec<f64> = r1.iter().zip(r0).map(|(a, b)| (a - b) / h).collect();
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!(
                    "non-finite Jacobian entries for parameter {i}"
                )));
            }
            Ok(col)
        })
        .collect::<Result<_>>()?;
    let mut jac = Array2::zeros((n_res, n_par));
    for (i, col) in columns.iter().enumerate() {
        for (k, &v) in col.iter().enumerate() {
            jac[[k, i]] = v;
        }
    }
    Ok(jac)
}

fn cost_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Damping beyond which a step that still fails to decrease the cost
/// terminates the search as non-converged.
const DAMPING_CEILING: f64 = 1e12;

/// Core Levenberg–Marquardt loop over a flat parameter vector.
pub fn lm_minimize<F>(
    residual_fn: &F,
    init: &[f64],
    bounds: &[(f64, f64)],
    cfg: &LmConfig,
) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    cfg.validate()?;
    check_bounds(init, bounds)?;
    if init.is_empty() {
        return Err(Error::Validation("no parameters to fit".into()));
    }

    let mut p = init.to_vec();
    let mut r = residual_fn(&p)?;
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite initial residuals".into()));
    }
    let mut cost = cost_of(&r);
    let mut mu = cfg.initial_damping;
    let mut trace = vec![TracePoint { cost, damping: mu }];
    let mut iterations = 0usize;
    let mut converged = cost <= cfg.cost_tolerance;

    'outer: while !converged && iterations < cfg.max_iterations {
        let jac = jacobian_with_base(residual_fn, &p, &r, cfg.fd_step, bounds)?;
        let jtj = jac.t().dot(&jac);
        let jtr = jac.t().dot(&Array1::from_vec(r.clone()));

        loop {
            // (JᵀJ + μ diag(JᵀJ)) δ = −Jᵀr
            let mut lhs = jtj.clone();
            for i in 0..p.len() {
                lhs[[i, i]] += mu * jtj[[i, i]];
            }
            let delta = match lhs.solve(&(-&jtr)) {
                Ok(d) if d.iter().all(|v| v.is_finite()) => d,
                _ => {
                    mu *= cfg.damping_up;
                    if mu > DAMPING_CEILING {
                        break 'outer; // singular even at extreme damping
                    }
                    continue;
                }
            };
            let rel_step = p
                .iter()
                .zip(delta.iter())
                .map(|(pi, di)| di.abs() / pi.abs().max(1.0))
                .fold(0.0, f64::max);
            if rel_step <= cfg.step_tolerance {
                converged = true;
                break 'outer;
            }
            let p_new: Vec<f64> = p
                .iter()
                .zip(delta.iter())
                .zip(bounds)
                .map(|((pi, di), &(lo, hi))| (pi + di).clamp(lo, hi))
                .collect();
            let r_new = residual_fn(&p_new)?;
            let cost_new = cost_of(&r_new);
            if cost_new.is_finite() && cost_new < cost {
                p = p_new;
                r = r_new;
                cost = cost_new;
                mu *= cfg.damping_down;
                iterations += 1;
                trace.push(TracePoint { cost, damping: mu });
                if cost <= cfg.cost_tolerance {
                    converged = true;
                }
                break;
            }
            mu *= cfg.damping_up;
            if mu > DAMPING_CEILING {
                break 'outer; // no acceptable step at extreme damping
            }
        }
    }

    Ok(LmOutcome {
        params: p,
        cost,
        iterations,
        converged,
        trace,
    })
}

/// Residuals (simulated − target) over all 15 stored Mueller elements and
/// all fit wavelengths, wavelength-major with elements in [`ELEMENT_ORDER`].
pub fn residuals(
    lib: &MaterialLibrary,
    target: &Signature,
    model: &StructureModel,
    params: &BTreeMap<String, f64>,
    incidence: &IncidenceConfig,
) -> Result<Vec<f64>> {
    if target.wavelength_grid != incidence.wavelength_grid {
        return Err(Error::Incompatible(
            "target signature and fit configuration use different wavelength grids".into(),
        ));
    }
    let sim = simulate_signature(lib, model, params, incidence)?;
    let mut out = Vec::with_capacity(15 * sim.len());
    for idx in 0..sim.len() {
        let s = &sim.mueller[idx];
        let t = &target.mueller[idx];
        for &(i, j) in &ELEMENT_ORDER {
            out.push(s[i][j] - t[i][j]);
        }
    }
    Ok(out)
}

/// Fits the bound parameters of `model` to `target` by box-constrained LM,
/// starting from `init`, with `bounds` as hard limits. Parameter order is
/// the model's binding order; `init` and `bounds` must cover exactly the
/// bound parameter names.
pub fn lm_fit(
    lib: &MaterialLibrary,
    target: &Signature,
    model: &StructureModel,
    init: &BTreeMap<String, f64>,
    bounds: &BTreeMap<String, (f64, f64)>,
    incidence: &IncidenceConfig,
    cfg: &LmConfig,
) -> Result<FitResult> {
    let names = model.bound_parameters();
    if names.is_empty() {
        return Err(Error::Validation("model has no bound parameters".into()));
    }
    let mut init_vec = Vec::with_capacity(names.len());
    let mut bounds_vec = Vec::with_capacity(names.len());
    for name in &names {
        init_vec.push(*init.get(name).ok_or_else(|| {
            Error::Validation(format!("missing initial value for parameter '{name}'"))
        })?);
        bounds_vec.push(*bounds.get(name).ok_or_else(|| {
            Error::Validation(format!("missing bounds for parameter '{name}'"))
        })?);
    }
    for extra in init.keys().filter(|k| !names.contains(k)) {
        return Err(Error::Validation(format!(
            "initial value given for unknown parameter '{extra}'"
        )));
    }

    let residual_fn = |p: &[f64]| -> Result<Vec<f64>> {
        let map: BTreeMap<String, f64> = names
            .iter()
            .cloned()
            .zip(p.iter().copied())
            .collect();
        residuals(lib, target, model, &map, incidence)
    };

    let start = Instant::now();
    let outcome = lm_minimize(&residual_fn, &init_vec, &bounds_vec, cfg)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    Ok(FitResult {
        params: names.into_iter().zip(outcome.params).collect(),
        residual_norm: outcome.cost.sqrt(),
        iterations: outcome.iterations,
        converged: outcome.converged,
        wall_time_s,
        trace: outcome.trace,
    })
}

impl FitResult {
    /// Text report consumed by the bench harness.
    pub fn to_report(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("fit-report version 1\n");
        for (name, value) in &self.params {
            let _ = writeln!(out, "param {name} {value}");
        }
        let _ = writeln!(out, "residual-norm {}", self.residual_norm);
        let _ = writeln!(out, "iterations {}", self.iterations);
        let _ = writeln!(out, "converged {}", self.converged);
        let _ = writeln!(out, "wall-time-s {}", self.wall_time_s);
        for (i, t) in self.trace.iter().enumerate() {
            let _ = writeln!(out, "trace {i} {} {}", t.cost, t.damping);
        }
        out
    }
}
