//! The four subcommands: classifier training, signature fitting, forward
//! simulation, and batch studies. Each writes its artifacts plus a
//! reproducibility manifest into the configured output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use scatfit_core::forward::mueller::Signature;
use scatfit_core::forward::simulate_signature;
use scatfit_core::lm::lm_fit;
use scatfit_core::pipeline::{
    generate_training_sets, kernel_sweep, load_bundle, reconstruct, run_benchmark, save_bundle,
    subrange_median, sweep_table, train_classifiers, ClassifierBundle, Method, SweepCellSpec,
};
use scatfit_core::signature::{inject_errors, ErrorSpec};
use scatfit_core::{Error, Result};

use crate::config::{parse_kernel_name, Loaded};
use crate::manifest::Manifest;

fn ensure_out_dir(loaded: &Loaded) -> Result<()> {
    std::fs::create_dir_all(&loaded.out_dir)
        .map_err(|e| Error::Validation(format!("{}: {e}", loaded.out_dir.display())))
}

fn write_text(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

/// Trains the per-parameter classifiers and persists the bundle.
pub fn cmd_train(loaded: &Loaded, write_training_sets: bool) -> Result<()> {
    ensure_out_dir(loaded)?;
    let mut manifest = Manifest::new("train", &loaded.config_path, &loaded.config_bytes);
    manifest.note("seed-train", loaded.seeds.train);
    manifest.note("k-points", loaded.k_points);

    let bundle = train_classifiers(
        &loaded.library,
        &loaded.space,
        &loaded.structure,
        &loaded.incidence,
        &loaded.kernel,
        loaded.k_points,
        &loaded.svm_cfg,
        loaded.seeds.train,
    )?;
    let files = save_bundle(&bundle, loaded.out_dir.join("bundle"))?;
    manifest.artifacts_mut(files);

    if write_training_sets {
        for (i, p) in loaded.space.params.iter().enumerate() {
            let ts = generate_training_sets(
                &loaded.library,
                &loaded.space,
                i,
                &loaded.structure,
                &loaded.incidence,
                loaded.k_points,
                loaded.seeds.train,
            )?;
            let mut text = String::from("# training-set version 1\n");
            for (x, y) in ts.features.iter().zip(&ts.labels) {
                let _ = write!(text, "{y}");
                for v in x {
                    let _ = write!(text, "\t{v}");
                }
                text.push('\n');
            }
            let path = loaded.out_dir.join(format!("training-set-{}.tsv", p.name));
            write_text(&path, &text)?;
            manifest.artifact(path);
        }
    }

    let path = manifest.write(&loaded.out_dir)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn load_compatible_bundle(loaded: &Loaded, dir: &PathBuf) -> Result<ClassifierBundle> {
    let bundle = load_bundle(dir)?;
    if bundle.structure_hash != loaded.structure.content_hash() {
        return Err(Error::Incompatible(
            "classifier bundle was trained for a different structure".into(),
        ));
    }
    Ok(bundle)
}

/// Fits a measured signature, either classifier-guided or from an
/// explicit/default initialization.
pub fn cmd_fit(
    loaded: &Loaded,
    signature_path: &PathBuf,
    bundle_dir: Option<&PathBuf>,
    method: Method,
    init: &[(String, f64)],
) -> Result<()> {
    ensure_out_dir(loaded)?;
    let measured = Signature::load(signature_path)?;
    let fit_inc = loaded.fit_incidence()?;
    let measured_fit = measured.restricted_to(&fit_inc.wavelength_grid)?;

    let mut report = String::new();
    let mut manifest = Manifest::new("fit", &loaded.config_path, &loaded.config_bytes);
    manifest.note("signature", signature_path.display());
    manifest.note("method", method.as_str());

    match method {
        Method::SvmLm => {
            if !init.is_empty() {
                return Err(Error::Validation(
                    "--init applies only to --method lm_only".into(),
                ));
            }
            let dir = bundle_dir
                .cloned()
                .unwrap_or_else(|| loaded.out_dir.join("bundle"));
            manifest.note("bundle", dir.display());
            let bundle = load_compatible_bundle(loaded, &dir)?;
            let (mappings, fit) = reconstruct(
                &loaded.library,
                &measured_fit,
                &loaded.structure,
                &loaded.space,
                &bundle,
                &fit_inc,
                &loaded.lm_cfg,
            )?;
            report.push_str(&fit.to_report());
            let _ = writeln!(report, "method {}", method.as_str());
            for m in &mappings {
                let _ = writeln!(
                    report,
                    "subrange {} {} {} {}",
                    m.parameter, m.subrange.0, m.subrange.1, m.median_nm
                );
            }
        }
        Method::LmOnly => {
            let init_map: BTreeMap<String, f64> = if init.is_empty() {
                loaded
                    .space
                    .params
                    .iter()
                    .map(|p| (p.name.clone(), subrange_median(p.rough_range)))
                    .collect()
            } else {
                init.iter().cloned().collect()
            };
            let fit = lm_fit(
                &loaded.library,
                &measured_fit,
                &loaded.structure,
                &init_map,
                &loaded.bounds(),
                &fit_inc,
                &loaded.lm_cfg,
            )?;
            report.push_str(&fit.to_report());
            let _ = writeln!(report, "method {}", method.as_str());
            for (name, v) in &init_map {
                let _ = writeln!(report, "init {name} {v}");
            }
        }
    }

    let path = loaded.out_dir.join("fit-report.txt");
    write_text(&path, &report)?;
    manifest.artifact(path.clone());
    manifest.write(&loaded.out_dir)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Simulates a signature at explicit parameter values, optionally noisy.
pub fn cmd_simulate(
    loaded: &Loaded,
    params: &[(String, f64)],
    noisy: bool,
    out: Option<&PathBuf>,
) -> Result<()> {
    ensure_out_dir(loaded)?;
    let names = loaded.structure.bound_parameters();
    let given: BTreeMap<String, f64> = params.iter().cloned().collect();
    for n in &names {
        if !given.contains_key(n) {
            return Err(Error::Validation(format!(
                "missing parameter '{n}' (structure binds: {})",
                names.join(", ")
            )));
        }
    }
    for k in given.keys() {
        if !names.iter().any(|n| n == k) {
            return Err(Error::Validation(format!(
                "unknown parameter '{k}' (structure binds: {})",
                names.join(", ")
            )));
        }
    }

    let clean = simulate_signature(&loaded.library, &loaded.structure, &given, &loaded.incidence)?;
    let sig = if noisy {
        inject_errors(&clean, &loaded.errors)?
    } else {
        clean
    };

    let path = out
        .cloned()
        .unwrap_or_else(|| loaded.out_dir.join("signature.txt"));
    sig.save(&path)?;

    let mut manifest = Manifest::new("simulate", &loaded.config_path, &loaded.config_bytes);
    for (k, v) in &given {
        manifest.note("param", format!("{k} {v}"));
    }
    manifest.note("noisy", noisy);
    if noisy {
        manifest.note("error-seed", loaded.errors.seed);
    }
    manifest.artifact(path.clone());
    manifest.write(&loaded.out_dir)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    SvmVsLm,
    KernelSweep,
    NoiseSweep,
    TrainingSize,
}

impl Study {
    pub fn as_str(&self) -> &'static str {
        match self {
            Study::SvmVsLm => "svm_vs_lm",
            Study::KernelSweep => "kernel_sweep",
            Study::NoiseSweep => "noise_sweep",
            Study::TrainingSize => "training_size",
        }
    }
}

/// Runs a named study and writes its plot data.
pub fn cmd_bench(loaded: &Loaded, study: Study) -> Result<()> {
    ensure_out_dir(loaded)?;
    let mut manifest = Manifest::new("bench", &loaded.config_path, &loaded.config_bytes);
    manifest.note("study", study.as_str());

    match study {
        Study::SvmVsLm => {
            let bundle_dir = loaded.out_dir.join("bundle");
            let bundle = match load_compatible_bundle(loaded, &bundle_dir) {
                Ok(b) => b,
                Err(Error::Incompatible(m)) => return Err(Error::Incompatible(m)),
                Err(_) => {
                    let b = train_classifiers(
                        &loaded.library,
                        &loaded.space,
                        &loaded.structure,
                        &loaded.incidence,
                        &loaded.kernel,
                        loaded.k_points,
                        &loaded.svm_cfg,
                        loaded.seeds.train,
                    )?;
                    let files = save_bundle(&b, &bundle_dir)?;
                    manifest.artifacts_mut(files);
                    b
                }
            };
            manifest.note("seed-bench", loaded.seeds.bench);
            manifest.note("n-cases", loaded.bench.n_cases);
            let report = run_benchmark(
                &loaded.library,
                &loaded.space,
                &loaded.structure,
                &loaded.fit_incidence()?,
                Some(&bundle),
                loaded.bench.n_cases,
                &loaded.errors,
                &[Method::SvmLm, Method::LmOnly],
                &loaded.lm_cfg,
                loaded.seeds.bench,
            )?;
            let cases = loaded.out_dir.join("svm_vs_lm-cases.tsv");
            write_text(&cases, &report.to_tsv())?;
            let summary = loaded.out_dir.join("svm_vs_lm-summary.txt");
            write_text(&summary, &report.summary_text())?;
            manifest.artifact(cases);
            manifest.artifact(summary);
        }
        Study::KernelSweep | Study::NoiseSweep | Study::TrainingSize => {
            let cells = study_cells(loaded, study)?;
            manifest.note("seed-sweep", loaded.seeds.sweep);
            manifest.note("n-test", loaded.sweep.n_test);
            let results = kernel_sweep(
                &loaded.library,
                &loaded.space,
                &loaded.structure,
                &loaded.incidence,
                0,
                &cells,
                loaded.sweep.n_test,
                &loaded.svm_cfg,
                loaded.seeds.sweep,
            )?;
            let path = loaded.out_dir.join(format!("{}.tsv", study.as_str()));
            write_text(&path, &sweep_table(&results))?;
            manifest.artifact(path);
        }
    }

    let path = manifest.write(&loaded.out_dir)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// The study-specific sweep grids, built from the config's sweep section.
fn study_cells(loaded: &Loaded, study: Study) -> Result<Vec<SweepCellSpec>> {
    let s = &loaded.sweep;
    let base_samples = loaded.space.params[0].samples_per_subrange;
    let clean = ErrorSpec {
        random_magnitude: 0.0,
        offset_magnitude: 0.0,
        seed: loaded.errors.seed,
    };
    let mut cells = Vec::new();
    match study {
        Study::KernelSweep => {
            let mut push = |label: String, kind: &str, factor: f64| -> Result<()> {
                cells.push(SweepCellSpec {
                    label,
                    kernel: parse_kernel_name(kind, factor)?,
                    k_points: loaded.k_points,
                    samples_per_subrange: base_samples,
                    error: clean.clone(),
                });
                Ok(())
            };
            for &d in &s.polynomial_degrees {
                push(format!("poly-d{d}"), "polynomial", d as f64)?;
            }
            for &sg in &s.rbf_sigmas {
                push(format!("rbf-s{sg}"), "rbf", sg)?;
            }
            for &b in &s.sigmoid_betas {
                push(format!("sigmoid-b{b}"), "sigmoid", b)?;
            }
        }
        Study::TrainingSize => {
            for &n in &s.size_steps {
                cells.push(SweepCellSpec {
                    label: format!("samples-{n}"),
                    kernel: loaded.kernel,
                    k_points: loaded.k_points,
                    samples_per_subrange: n,
                    error: clean.clone(),
                });
            }
        }
        Study::NoiseSweep => {
            for &o in &s.offset_magnitudes {
                cells.push(SweepCellSpec {
                    label: format!("offset-{o}"),
                    kernel: loaded.kernel,
                    k_points: loaded.k_points,
                    samples_per_subrange: base_samples,
                    error: ErrorSpec {
                        random_magnitude: loaded.errors.random_magnitude,
                        offset_magnitude: o,
                        seed: loaded.errors.seed,
                    },
                });
            }
        }
        Study::SvmVsLm => unreachable!("handled by the caller"),
    }
    Ok(cells)
}
