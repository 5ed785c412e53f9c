//! End-to-end orchestration: slice rough parameter ranges into sub-ranges,
//! synthesize labeled training signatures through the forward model, train
//! one multiclass classifier per parameter, map measured signatures to
//! sub-ranges, and seed the least-squares fit with the sub-range medians.

pub mod bench;
pub mod bundle_io;
pub mod sweep;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::forward::mueller::Signature;
use crate::forward::structure::{IncidenceConfig, StructureModel};
use crate::forward::simulate_signature;
use crate::lm::{lm_fit, FitResult, LmConfig};
use crate::materials::MaterialLibrary;
use crate::signature::{subsample, subsample_indices};
use crate::svm::kernel::KernelSpec;
use crate::svm::multiclass::{ovo_classify, ovo_train, MulticlassSvmModel, TrainingSet};
use crate::svm::smo::TrainConfig;
use crate::{Error, Result};

pub use bench::{run_benchmark, BenchCase, BenchReport, Method};
pub use bundle_io::{load_bundle, save_bundle};
pub use sweep::{kernel_sweep, sweep_table, SweepCellResult, SweepCellSpec};

/// One fitted parameter: its prior interval and the sampling counts used
/// when synthesizing training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    /// Prior (low, high) in nm; also the hard fit bounds.
    pub rough_range: (f64, f64),
    /// Number of equal-width sub-ranges (classes).
    pub n_subranges: usize,
    /// Samples of THIS parameter drawn inside each sub-range when it is the
    /// classified parameter.
    pub samples_per_subrange: usize,
    /// Samples of this parameter drawn across its full rough range when
    /// some OTHER parameter is the classified one.
    pub samples_full_range: usize,
}

/// Ordered fit parameters with their slicing scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    pub params: Vec<ParamSpec>,
}

impl ParameterSpace {
    pub fn new(params: Vec<ParamSpec>) -> Result<Self> {
        let space = Self { params };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.is_empty() {
            return Err(Error::Validation("parameter space is empty".into()));
        }
        for p in &self.params {
            let (lo, hi) = p.rough_range;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Validation(format!(
                    "parameter '{}' range ({lo}, {hi}) must satisfy low < high",
                    p.name
                )));
            }
            if p.n_subranges < 2 {
                return Err(Error::Validation(format!(
                    "parameter '{}' needs at least 2 sub-ranges, got {}",
                    p.name, p.n_subranges
                )));
            }
            if p.samples_per_subrange == 0 || p.samples_full_range == 0 {
                return Err(Error::Validation(format!(
                    "parameter '{}' sample counts must be >= 1",
                    p.name
                )));
            }
        }
        for (i, p) in self.params.iter().enumerate() {
            if self.params[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::Validation(format!(
                    "duplicate parameter name '{}'",
                    p.name
                )));
            }
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    /// Equal-width partition of parameter `i`'s rough range. The first
    /// sub-range starts exactly at `low`, the last ends exactly at `high`.
    pub fn subranges(&self, i: usize) -> Vec<(f64, f64)> {
        let p = &self.params[i];
        let (lo, hi) = p.rough_range;
        let n = p.n_subranges;
        let width = (hi - lo) / n as f64;
        (0..n)
            .map(|j| {
                let a = if j == 0 { lo } else { lo + width * j as f64 };
                let b = if j == n - 1 { hi } else { lo + width * (j + 1) as f64 };
                (a, b)
            })
            .collect()
    }

    /// Index of the sub-range containing `value` (upper boundaries belong
    /// to the next sub-range, except the top of the rough range).
    pub fn subrange_index(&self, i: usize, value: f64) -> Result<usize> {
        let p = &self.params[i];
        let (lo, hi) = p.rough_range;
        if !(lo..=hi).contains(&value) {
            return Err(Error::Validation(format!(
                "value {value} outside rough range ({lo}, {hi}) of '{}'",
                p.name
            )));
        }
        let width = (hi - lo) / p.n_subranges as f64;
        Ok((((value - lo) / width) as usize).min(p.n_subranges - 1))
    }

    /// Fit bounds: name → rough range.
    pub fn bounds(&self) -> BTreeMap<String, (f64, f64)> {
        self.params
            .iter()
            .map(|p| (p.name.clone(), p.rough_range))
            .collect()
    }

    /// Rough-range medians, the initialization a fit uses without any
    /// classifier guidance.
    pub fn rough_medians(&self) -> BTreeMap<String, f64> {
        self.params
            .iter()
            .map(|p| (p.name.clone(), subrange_median(p.rough_range)))
            .collect()
    }

    /// Training pairs per class when parameter `i` is classified.
    pub fn pairs_per_class(&self, i: usize) -> usize {
        self.params
            .iter()
            .enumerate()
            .map(|(l, p)| {
                if l == i {
                    p.samples_per_subrange
                } else {
                    p.samples_full_range
                }
            })
            .product()
    }
}

/// Midpoint of a sub-range, used as the fit initialization.
pub fn subrange_median((a, b): (f64, f64)) -> f64 {
    (a + b) / 2.0
}

/// The space and the structure must expose the same parameter NAMES; the
/// space's declaration order is its own (reporting) concern.
pub(crate) fn check_same_parameters(
    space: &ParameterSpace,
    model: &StructureModel,
) -> Result<()> {
    let mut ours = space.names();
    let mut theirs = model.bound_parameters();
    ours.sort();
    theirs.sort();
    if ours != theirs {
        return Err(Error::Incompatible(format!(
            "parameter space {ours:?} does not match structure parameters {theirs:?}"
        )));
    }
    Ok(())
}

/// Deterministic per-stream child seed (splitmix64 finalizer over the
/// parent seed and a stream index), so parallel jobs draw independent but
/// reproducible randomness.
pub fn child_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ (stream.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `k` wavelengths a classifier trained on `grid` observes.
pub fn classifier_wavelengths(grid: &[f64], k: usize) -> Result<Vec<f64>> {
    Ok(subsample_indices(grid.len(), k)?
        .into_iter()
        .map(|i| grid[i])
        .collect())
}

/// Simulates a signature directly at the given wavelength points (same
/// incidence geometry otherwise). Because every wavelength is an
/// independent computation, this is bit-identical to simulating a full
/// grid and subsampling — and much cheaper for training-set synthesis.
pub fn simulate_at_points(
    lib: &MaterialLibrary,
    model: &StructureModel,
    params: &BTreeMap<String, f64>,
    incidence: &IncidenceConfig,
    wavelengths: &[f64],
) -> Result<Signature> {
    let inc = IncidenceConfig::new(
        incidence.angle_deg,
        incidence.azimuth_deg,
        wavelengths.to_vec(),
        incidence.truncation_order,
    )?;
    simulate_signature(lib, model, params, &inc)
}

/// Synthesizes the labeled training set for parameter `i`.
///
/// For each sub-range j: `samples_per_subrange` values of parameter i are
/// drawn uniformly inside sub-range j and `samples_full_range` values of
/// every other parameter across its full rough range; all cross-product
/// combinations are simulated at the classifier's `k_points` wavelengths
/// and labeled j. Each count draws from its own child stream of `seed`,
/// so raising any sample count keeps all smaller sets as exact
/// sample-prefixes (training-size studies compare nested sets rather
/// than re-rolled ones).
pub fn generate_training_sets(
    lib: &MaterialLibrary,
    space: &ParameterSpace,
    i: usize,
    model: &StructureModel,
    incidence: &IncidenceConfig,
    k_points: usize,
    seed: u64,
) -> Result<TrainingSet> {
    space.validate()?;
    if i >= space.params.len() {
        return Err(Error::Validation(format!(
            "parameter index {i} out of range ({} parameters)",
            space.params.len()
        )));
    }
    check_same_parameters(space, model)?;
    let wavelengths = classifier_wavelengths(&incidence.wavelength_grid, k_points)?;
    let subranges = space.subranges(i);
    let n_params = space.params.len() as u64;

    // Parameter-value combinations and labels, in deterministic order.
    // The non-classified parameters draw ONE shared lattice reused by every
    // sub-range class (stream `l`), so classes differ only in the
    // classified parameter's values: a paired design that keeps the class
    // boundary unconfounded by nuisance re-draws. The classified
    // parameter draws per sub-range from stream `n_params + j`.
    let mut combos: Vec<(BTreeMap<String, f64>, i32)> = Vec::new();
    for (j, &(lo, hi)) in subranges.iter().enumerate() {
        let mut samples: Vec<Vec<f64>> = Vec::with_capacity(space.params.len());
        for (l, p) in space.params.iter().enumerate() {
            let (stream, (dlo, dhi), count) = if l == i {
                (n_params + j as u64, (lo, hi), p.samples_per_subrange)
            } else {
                (l as u64, p.rough_range, p.samples_full_range)
            };
            let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, stream));
            samples.push((0..count).map(|_| rng.gen_range(dlo..dhi)).collect());
        }
        // Mixed-radix cross product, first parameter outermost.
        let sizes: Vec<usize> = samples.iter().map(Vec::len).collect();
        let total: usize = sizes.iter().product();
        for flat in 0..total {
            let mut rem = flat;
            let mut idx = vec![0usize; sizes.len()];
            for pos in (0..sizes.len()).rev() {
                idx[pos] = rem % sizes[pos];
                rem /= sizes[pos];
            }
            let map: BTreeMap<String, f64> = space
                .params
                .iter()
                .enumerate()
                .map(|(l, p)| (p.name.clone(), samples[l][idx[l]]))
                .collect();
            combos.push((map, j as i32));
        }
    }

    let features: Vec<Vec<f64>> = combos
        .par_iter()
        .map(|(params, _)| {
            let sig = simulate_at_points(lib, model, params, incidence, &wavelengths)
                .map_err(|e| {
                    Error::Numerical(format!("training simulation at {params:?} failed: {e}"))
                })?;
            Ok(subsample(&sig, k_points)?.values)
        })
        .collect::<Result<_>>()?;
    let labels: Vec<i32> = combos.iter().map(|(_, j)| *j).collect();
    TrainingSet::new(features, labels)
}

/// One classifier per parameter plus the metadata needed to apply them.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierBundle {
    /// Wavelength points (nm) the classifiers observe.
    pub wavelengths: Vec<f64>,
    pub kernel: KernelSpec,
    /// Content hash of the structure the training data came from.
    pub structure_hash: String,
    /// Incidence geometry used for training simulations (full grid).
    pub incidence: IncidenceConfig,
    /// (parameter name, classifier), in parameter-space order.
    pub models: Vec<(String, MulticlassSvmModel)>,
}

impl ClassifierBundle {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Validation("bundle has no classifiers".into()));
        }
        if self.wavelengths.is_empty()
            || self.wavelengths.windows(2).any(|w| w[0] >= w[1])
            || self.wavelengths.iter().any(|w| !w.is_finite() || *w <= 0.0)
        {
            return Err(Error::Validation(
                "bundle wavelengths must be positive and strictly increasing".into(),
            ));
        }
        self.kernel.validate()?;
        self.incidence.validate()?;
        for (name, model) in &self.models {
            model
                .validate()
                .map_err(|e| Error::Validation(format!("classifier '{name}': {e}")))?;
        }
        Ok(())
    }

    pub fn k_points(&self) -> usize {
        self.wavelengths.len()
    }
}

/// Trains one multiclass classifier per parameter. Each parameter's
/// training set uses its own deterministic child seed of `seed`.
pub fn train_classifiers(
    lib: &MaterialLibrary,
    space: &ParameterSpace,
    model: &StructureModel,
    incidence: &IncidenceConfig,
    kernel: &KernelSpec,
    k_points: usize,
    svm_cfg: &TrainConfig,
    seed: u64,
) -> Result<ClassifierBundle> {
    space.validate()?;
    kernel.validate()?;
    svm_cfg.validate()?;
    incidence.validate()?;
    let mut models = Vec::with_capacity(space.params.len());
    for i in 0..space.params.len() {
        let ts = generate_training_sets(
            lib,
            space,
            i,
            model,
            incidence,
            k_points,
            child_seed(seed, i as u64),
        )?;
        let class_to_subrange: BTreeMap<i32, (f64, f64)> = space
            .subranges(i)
            .into_iter()
            .enumerate()
            .map(|(j, r)| (j as i32, r))
            .collect();
        let m = ovo_train(&ts, kernel, svm_cfg, &class_to_subrange)?;
        models.push((space.params[i].name.clone(), m));
    }
    let bundle = ClassifierBundle {
        wavelengths: classifier_wavelengths(&incidence.wavelength_grid, k_points)?,
        kernel: kernel.clone(),
        structure_hash: model.content_hash(),
        incidence: incidence.clone(),
        models,
    };
    bundle.validate()?;
    Ok(bundle)
}

/// Where one parameter landed: its class, sub-range, and the sub-range
/// median used to initialize the fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubrangeMapping {
    pub parameter: String,
    pub class_label: i32,
    pub subrange: (f64, f64),
    pub median_nm: f64,
}

/// Extracts the classifier's feature vector from a measured signature: the
/// bundle's wavelength points must all appear exactly in the measured grid.
pub fn bundle_features(bundle: &ClassifierBundle, measured: &Signature) -> Result<Vec<f64>> {
    measured.validate_structure()?;
    let mut values = Vec::with_capacity(15 * bundle.wavelengths.len());
    for &w in &bundle.wavelengths {
        let idx = measured
            .wavelength_grid
            .iter()
            .position(|&g| g == w)
            .ok_or_else(|| {
                Error::Incompatible(format!(
                    "measured grid is missing classifier wavelength {w} nm"
                ))
            })?;
        values.extend_from_slice(&measured.elements_at(idx));
    }
    Ok(values)
}

/// Classifies a measured signature with every parameter's model and
/// returns the mapped sub-range and its median per parameter.
pub fn map_to_subranges(
    bundle: &ClassifierBundle,
    measured: &Signature,
) -> Result<Vec<SubrangeMapping>> {
    bundle.validate()?;
    let x = bundle_features(bundle, measured)?;
    bundle
        .models
        .iter()
        .map(|(name, model)| {
            let (label, subrange) = ovo_classify(model, &x)?;
            Ok(SubrangeMapping {
                parameter: name.clone(),
                class_label: label,
                subrange,
                median_nm: subrange_median(subrange),
            })
        })
        .collect()
}

/// Full guided extraction: map to sub-ranges, then fit from the medians
/// with the rough ranges as hard bounds.
pub fn reconstruct(
    lib: &MaterialLibrary,
    measured: &Signature,
    model: &StructureModel,
    space: &ParameterSpace,
    bundle: &ClassifierBundle,
    fit_incidence: &IncidenceConfig,
    lm_cfg: &LmConfig,
) -> Result<(Vec<SubrangeMapping>, FitResult)> {
    if bundle.structure_hash != model.content_hash() {
        return Err(Error::Incompatible(
            "classifier bundle was trained for a different structure".into(),
        ));
    }
    check_same_parameters(space, model)?;
    let mappings = map_to_subranges(bundle, measured)?;
    let init: BTreeMap<String, f64> = mappings
        .iter()
        .map(|m| (m.parameter.clone(), m.median_nm))
        .collect();
    let fit = lm_fit(
        lib,
        measured,
        model,
        &init,
        &space.bounds(),
        fit_incidence,
        lm_cfg,
    )?;
    Ok((mappings, fit))
}
