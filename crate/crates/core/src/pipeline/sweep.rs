//! Classification-accuracy sweeps for one parameter's classifier over
//! kernel choice, controlling factor, wavelength-point count, training-set
//! size, and injected test noise.
//!
//! All cells share one training-draw stream and one held-out test-truth
//! stream derived from the sweep seed: cells that differ only in training
//! size therefore train on nested sets, and every cell is scored on the
//! same 100 (or `n_test`) freshly drawn profiles — never on training data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::{child_seed, classifier_wavelengths, generate_training_sets, simulate_at_points, ParameterSpace};
use crate::forward::mueller::Signature;
use crate::forward::structure::{IncidenceConfig, StructureModel};
use crate::materials::MaterialLibrary;
use crate::signature::{inject_errors, subsample, ErrorSpec};
use crate::svm::kernel::KernelSpec;
use crate::svm::multiclass::{classification_accuracy, ovo_train, TrainingSet};
use crate::svm::smo::TrainConfig;
use crate::{Error, Result};

/// One sweep cell: a classifier configuration plus the noise injected into
/// its test signatures. `samples_per_subrange` overrides the swept
/// parameter's per-sub-range training count (training-size axis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCellSpec {
    pub label: String,
    pub kernel: KernelSpec,
    pub k_points: usize,
    pub samples_per_subrange: usize,
    pub error: ErrorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCellResult {
    pub spec: SweepCellSpec,
    /// Training pairs per class this cell actually used.
    pub pairs_per_class: usize,
    /// Held-out classification accuracy in [0, 1].
    pub accuracy: f64,
}

/// Columnar plot data: label, kernel, factor, k, pairs/class, noise
/// magnitudes, accuracy.
pub fn sweep_table(results: &[SweepCellResult]) -> String {
    let mut out = String::from(
        "label\tkernel\tcontrolling_factor\tk_points\tpairs_per_class\trandom_magnitude\toffset_magnitude\taccuracy\n",
    );
    for r in results {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.spec.label,
            r.spec.kernel.kind_name(),
            r.spec.kernel.controlling_factor,
            r.spec.k_points,
            r.pairs_per_class,
            r.spec.error.random_magnitude,
            r.spec.error.offset_magnitude,
            r.accuracy
        ));
    }
    out
}

/// Trains the classifier for parameter `param_index` once per cell and
/// scores it on `n_test` held-out noisy signatures. Test-truth draws are
/// shared across cells; clean test signatures are cached per wavelength
/// count; noise is injected per cell.
#[allow(clippy::too_many_arguments)]
pub fn kernel_sweep(
    lib: &MaterialLibrary,
    space: &ParameterSpace,
    model: &StructureModel,
    incidence: &IncidenceConfig,
    param_index: usize,
    cells: &[SweepCellSpec],
    n_test: usize,
    svm_cfg: &TrainConfig,
    seed: u64,
) -> Result<Vec<SweepCellResult>> {
    space.validate()?;
    incidence.validate()?;
    if param_index >= space.params.len() {
        return Err(Error::Validation(format!(
            "parameter index {param_index} out of range"
        )));
    }
    if cells.is_empty() {
        return Err(Error::Validation("empty sweep grid".into()));
    }
    if n_test == 0 {
        return Err(Error::Validation("n_test must be >= 1".into()));
    }
    for cell in cells {
        cell.kernel.validate()?;
        cell.error.validate()?;
    }

    // Held-out test truths, shared by every cell.
    let mut test_rng = ChaCha8Rng::seed_from_u64(child_seed(seed, 1));
    let mut test_truths: Vec<BTreeMap<String, f64>> = Vec::with_capacity(n_test);
    let mut test_labels: Vec<i32> = Vec::with_capacity(n_test);
    for _ in 0..n_test {
        let mut map = BTreeMap::new();
        let mut label = 0i32;
        for (l, p) in space.params.iter().enumerate() {
            let (lo, hi) = p.rough_range;
            let v = test_rng.gen_range(lo..hi);
            if l == param_index {
                label = space.subrange_index(l, v)? as i32;
            }
            map.insert(p.name.clone(), v);
        }
        test_truths.push(map);
        test_labels.push(label);
    }

    let train_seed = child_seed(seed, 0);
    let mut clean_cache: BTreeMap<usize, Vec<Signature>> = BTreeMap::new();
    let mut results = Vec::with_capacity(cells.len());

    for cell in cells {
        let mut cell_space = space.clone();
        cell_space.params[param_index].samples_per_subrange = cell.samples_per_subrange;

        let ts = generate_training_sets(
            lib,
            &cell_space,
            param_index,
            model,
            incidence,
            cell.k_points,
            train_seed,
        )?;
        let class_to_subrange: BTreeMap<i32, (f64, f64)> = cell_space
            .subranges(param_index)
            .into_iter()
            .enumerate()
            .map(|(j, r)| (j as i32, r))
            .collect();
        let classifier = ovo_train(&ts, &cell.kernel, svm_cfg, &class_to_subrange)?;

        if !clean_cache.contains_key(&cell.k_points) {
            let wavelengths = classifier_wavelengths(&incidence.wavelength_grid, cell.k_points)?;
            let sigs: Vec<Signature> = test_truths
                .par_iter()
                .map(|truth| simulate_at_points(lib, model, truth, incidence, &wavelengths))
                .collect::<Result<_>>()?;
            clean_cache.insert(cell.k_points, sigs);
        }
        let clean = &clean_cache[&cell.k_points];

        let features: Vec<Vec<f64>> = clean
            .iter()
            .enumerate()
            .map(|(t, sig)| {
                let spec = ErrorSpec {
                    seed: child_seed(cell.error.seed, t as u64),
                    ..cell.error
                };
                let noisy = inject_errors(sig, &spec)?;
                Ok(subsample(&noisy, cell.k_points)?.values)
            })
            .collect::<Result<_>>()?;
        let test_set = TrainingSet::new(features, test_labels.clone())?;
        let accuracy = classification_accuracy(&classifier, &test_set)?;

        results.push(SweepCellResult {
            spec: cell.clone(),
            pairs_per_class: cell_space.pairs_per_class(param_index),
            accuracy,
        });
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::test_fixtures::*;

    fn cells() -> Vec<SweepCellSpec> {
        vec![
            SweepCellSpec {
                label: "rbf_k3".into(),
                kernel: KernelSpec::rbf(1.0),
                k_points: 3,
                samples_per_subrange: 2,
                error: ErrorSpec {
                    random_magnitude: 0.0,
                    offset_magnitude: 0.0,
                    seed: 5,
                },
            },
            SweepCellSpec {
                label: "rbf_k5_noisy".into(),
                kernel: KernelSpec::rbf(1.0),
                k_points: 5,
                samples_per_subrange: 2,
                error: ErrorSpec {
                    random_magnitude: 0.05,
                    offset_magnitude: 0.05,
                    seed: 5,
                },
            },
        ]
    }

    #[test]
    fn tiny_sweep_is_deterministic_and_bounded() {
        let (lib, model) = tiny_setup();
        let run = || {
            kernel_sweep(
                &lib,
                &tiny_space(),
                &model,
                &tiny_incidence(),
                0,
                &cells(),
                6,
                &TrainConfig::default(),
                11,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.accuracy.to_bits(), y.accuracy.to_bits());
            assert!((0.0..=1.0).contains(&x.accuracy));
            assert_eq!(x.pairs_per_class, 18);
        }

        let table = sweep_table(&a);
        assert_eq!(table.lines().count(), 1 + a.len());
        assert!(table.starts_with("label\tkernel"));
    }

    #[test]
    fn sweep_rejects_empty_grids_and_bad_indices() {
        let (lib, model) = tiny_setup();
        assert!(kernel_sweep(
            &lib,
            &tiny_space(),
            &model,
            &tiny_incidence(),
            9,
            &cells(),
            6,
            &TrainConfig::default(),
            11,
        )
        .is_err());
        assert!(kernel_sweep(
            &lib,
            &tiny_space(),
            &model,
            &tiny_incidence(),
            0,
            &[],
            6,
            &TrainConfig::default(),
            11,
        )
        .is_err());
    }
}
